//! Leading-order matched-asymptotic solutions for small `eps`.
//!
//! Four regions in dimensionless time:
//!
//! * I   initial adjustment, `tau = O(1)`
//! * II  induction, `tau = O(1/eps)` before the switchover
//! * III corner around `tau_sw = (rho^-2 - phi/rho)/eps`, width `O(eps^-1/2)`
//! * IV  approach to the equilibrium `(1/2, 0)`, `tau = O(1/eps)` after it
//!
//! All evaluators assume `rho * phi < 1`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::kinetics::{require, DimensionlessGroups, DomainError, InitialConcentrations, RateConstants};
use crate::special::gauss_over_erf_plus_one;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    I,
    II,
    III,
    IV,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::I, Region::II, Region::III, Region::IV];

    pub fn as_str(&self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::IV => "IV",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Region::I),
            "II" | "2" => Ok(Region::II),
            "III" | "3" => Ok(Region::III),
            "IV" | "4" => Ok(Region::IV),
            other => Err(format!("unknown region '{other}' (expected I, II, III or IV)")),
        }
    }
}

/// Integration constants fixed by matching neighbouring regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchingConstants {
    /// Region II `gamma` intercept, `1 - rho phi`.
    pub c1: f64,
    /// Region IV offset, `1 + 2 phi - 2/rho`.
    pub c2: f64,
    /// Corner shift, zero.
    pub c3: f64,
    /// Corner erf offset, one.
    pub c4: f64,
}

impl MatchingConstants {
    pub fn new(groups: &DimensionlessGroups) -> Self {
        let (rho, phi) = (groups.rho(), groups.phi());
        Self {
            c1: 1.0 - rho * phi,
            c2: 1.0 + 2.0 * phi - 2.0 / rho,
            c3: 0.0,
            c4: 1.0,
        }
    }
}

/// Region boundaries used by [`classify_region`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    /// End of region I; `None` means `10 / (1 - rho phi)`.
    pub initial_end: Option<f64>,
    /// Half-width of region III in units of `eps^-1/2 / rho`.
    pub corner_width: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            initial_end: None,
            corner_width: 3.0,
        }
    }
}

/// Evaluated point of the piecewise solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPoint {
    pub tau: f64,
    pub region: Region,
    pub beta: f64,
    pub gamma: f64,
}

/// Bundle of groups, matching constants and classifier settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticSolution {
    groups: DimensionlessGroups,
    constants: MatchingConstants,
    classifier: ClassifierConfig,
}

impl AsymptoticSolution {
    pub fn new(groups: DimensionlessGroups) -> Result<Self, DomainError> {
        Self::with_classifier(groups, ClassifierConfig::default())
    }

    pub fn with_classifier(
        groups: DimensionlessGroups,
        classifier: ClassifierConfig,
    ) -> Result<Self, DomainError> {
        require_induction(&groups)?;
        require(
            classifier.corner_width > 0.0,
            "corner_width",
            classifier.corner_width,
            "must be positive",
        )?;
        if let Some(t) = classifier.initial_end {
            require(t >= 0.0, "initial_end", t, "must be non-negative")?;
        }
        Ok(Self {
            groups,
            constants: MatchingConstants::new(&groups),
            classifier,
        })
    }

    pub fn groups(&self) -> &DimensionlessGroups {
        &self.groups
    }

    pub fn constants(&self) -> &MatchingConstants {
        &self.constants
    }

    pub fn classifier(&self) -> &ClassifierConfig {
        &self.classifier
    }

    pub fn switchover_tau(&self) -> f64 {
        corner_center(&self.groups)
    }

    pub fn classify(&self, tau: f64) -> Region {
        classify_region(tau, &self.groups, &self.classifier)
    }

    /// `(beta, gamma)` from one region's formula regardless of where `tau` lies.
    pub fn eval_region(&self, region: Region, tau: f64) -> Result<(f64, f64), DomainError> {
        match region {
            Region::I => region1(tau, &self.groups),
            Region::II => region2(tau, &self.groups),
            Region::III => region3(tau, &self.groups),
            Region::IV => region4(tau, &self.groups),
        }
    }

    /// Piecewise composite: the classified region's formula.
    pub fn eval(&self, tau: f64) -> Result<AsymptoticPoint, DomainError> {
        require(tau >= 0.0, "tau", tau, "must be non-negative")?;
        let region = self.classify(tau);
        let (beta, gamma) = self.eval_region(region, tau)?;
        Ok(AsymptoticPoint {
            tau,
            region,
            beta,
            gamma,
        })
    }
}

fn require_induction(groups: &DimensionlessGroups) -> Result<(), DomainError> {
    let rp = groups.rho() * groups.phi();
    require(rp < 1.0, "rho*phi", rp, "must be below 1 for an induction period")
}

/// `(rho^-2 - phi/rho) / eps`, the centre of the corner region.
fn corner_center(groups: &DimensionlessGroups) -> f64 {
    let (eps, rho, phi) = (groups.eps(), groups.rho(), groups.phi());
    (1.0 / (rho * rho) - phi / rho) / eps
}

/// Initial adjustment. `gamma` follows from the conserved `rho beta - gamma`.
pub fn region1(tau: f64, groups: &DimensionlessGroups) -> Result<(f64, f64), DomainError> {
    require_induction(groups)?;
    let (rho, phi) = (groups.rho(), groups.phi());
    let rp = rho * phi;
    let decay = ((rp - 1.0) * tau).exp();
    let beta = phi * (1.0 - rp) * decay / (1.0 - rp * decay);
    Ok((beta, rho * beta + 1.0 - rp))
}

/// Induction: `gamma` falls linearly with slope `-eps rho^2`, `beta` tracks
/// the quasi-steady level `eps rho / gamma`.
pub fn region2(tau: f64, groups: &DimensionlessGroups) -> Result<(f64, f64), DomainError> {
    require_induction(groups)?;
    let (eps, rho, phi) = (groups.eps(), groups.rho(), groups.phi());
    let gamma = 1.0 - rho * phi - rho * rho * eps * tau;
    if !(gamma > 0.0) {
        return Err(DomainError::OutsideDomain(format!(
            "region II solution is singular at or beyond tau = {} (got tau = {tau})",
            (1.0 - rho * phi) / (rho * rho * eps)
        )));
    }
    Ok((eps * rho / gamma, gamma))
}

/// Corner solution with `c3 = 0`, `c4 = 1`.
///
/// With `z = rho eps tau - (1/rho - phi)` and `x = z / sqrt(2 eps)`:
/// `beta = sqrt(eps) G(x) + z`, `gamma = rho sqrt(eps) G(x)`, where
/// `G(x) = exp(-x^2) / (sqrt(pi/2) (1 + erf x))`.
pub fn region3(tau: f64, groups: &DimensionlessGroups) -> Result<(f64, f64), DomainError> {
    require_induction(groups)?;
    let (eps, rho) = (groups.eps(), groups.rho());
    let (z, g) = corner_kernel(tau, groups);
    Ok((eps.sqrt() * g + z, rho * eps.sqrt() * g))
}

/// Region III `gamma` with the exponent `-z^2/eps` (no factor one half), kept
/// only so the two forms can be compared against numerics.
pub fn region3_gamma_without_half(tau: f64, groups: &DimensionlessGroups) -> Result<f64, DomainError> {
    require_induction(groups)?;
    let (eps, rho) = (groups.eps(), groups.rho());
    let (z, g) = corner_kernel(tau, groups);
    let x2 = z * z / (2.0 * eps);
    Ok(rho * eps.sqrt() * g * (-x2).exp())
}

fn corner_kernel(tau: f64, groups: &DimensionlessGroups) -> (f64, f64) {
    let (eps, rho, phi) = (groups.eps(), groups.rho(), groups.phi());
    let z = rho * eps * tau - (1.0 / rho - phi);
    let x = z / (2.0 * eps).sqrt();
    (z, gauss_over_erf_plus_one(x) / (PI / 2.0).sqrt())
}

/// Post-switchover relaxation towards `beta = 1/2`; `gamma` vanishes to all
/// orders in `eps`.
pub fn region4(tau: f64, groups: &DimensionlessGroups) -> Result<(f64, f64), DomainError> {
    let (eps, rho, phi) = (groups.eps(), groups.rho(), groups.phi());
    let denom = 1.0 + 2.0 * (phi - 1.0 / rho + rho * eps * tau);
    if !(denom > 0.0) {
        return Err(DomainError::OutsideDomain(format!(
            "region IV solution needs 1 + 2(phi - 1/rho + rho eps tau) > 0, got {denom} at tau = {tau}"
        )));
    }
    Ok((0.5 - 0.5 / denom, 0.0))
}

/// Deterministic partition of `tau >= 0` into the four regions.
pub fn classify_region(tau: f64, groups: &DimensionlessGroups, config: &ClassifierConfig) -> Region {
    let (eps, rho, phi) = (groups.eps(), groups.rho(), groups.phi());
    let initial_end = config
        .initial_end
        .unwrap_or_else(|| 10.0 / (1.0 - rho * phi));
    let center = corner_center(groups);
    let half_width = config.corner_width / (eps.sqrt() * rho);
    if tau <= initial_end {
        Region::I
    } else if (tau - center).abs() <= half_width {
        Region::III
    } else if tau < center {
        Region::II
    } else {
        Region::IV
    }
}

/// Composite evaluation with the default classifier.
pub fn composite_eval(tau: f64, groups: &DimensionlessGroups) -> Result<AsymptoticPoint, DomainError> {
    AsymptoticSolution::new(*groups)?.eval(tau)
}

/// Switchover time in seconds, `(c0 - phi m0) / (m0^2 k0)`.
///
/// `phi m0` is just `b0`, so the numerator is `c0 - b0`. Zero exactly at
/// `c0 = b0`; an error below that, where the inhibitor is gone before any
/// induction period.
pub fn switchover_time(rates: &RateConstants, init: &InitialConcentrations) -> Result<f64, DomainError> {
    let m0 = init.m0();
    let excess = init.c0() - init.b0();
    require(
        excess >= 0.0,
        "c0 - phi*m0",
        excess,
        "must be non-negative for an induction period",
    )?;
    Ok(excess / (m0 * m0 * rates.k0()))
}

/// Dimensionless switchover time `(rho^-2 - phi/rho) / eps`.
pub fn dimensionless_switchover_time(groups: &DimensionlessGroups) -> Result<f64, DomainError> {
    let rp = groups.rho() * groups.phi();
    require(rp <= 1.0, "rho*phi", rp, "must not exceed 1")?;
    Ok(corner_center(groups))
}

//! Domain types and right-hand sides for the two-reaction iodine clock.
//!
//! Species: `A` iodide, `B` iodine (the clock chemical), `C` ascorbic acid.
//! Reactions are `2A -> B` at rate `k0 a^2` (peroxide folded into `k0`) and
//! `B + C -> 2A` at rate `k1 b c`.

use thiserror::Error;

/// Parameter or argument outside the domain of a formula.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("{0}")]
    OutsideDomain(String),
}

pub(crate) fn require(
    ok: bool,
    name: &'static str,
    value: f64,
    reason: &'static str,
) -> Result<(), DomainError> {
    if ok {
        Ok(())
    } else {
        Err(DomainError::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}

/// Rate coefficients in l/(mol s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    k0: f64,
    k1: f64,
}

impl RateConstants {
    pub fn new(k0: f64, k1: f64) -> Result<Self, DomainError> {
        require(k0.is_finite() && k0 > 0.0, "k0", k0, "must be positive and finite")?;
        require(k1.is_finite() && k1 > 0.0, "k1", k1, "must be positive and finite")?;
        require((k0 / k1).is_finite(), "k0/k1", k0 / k1, "ratio must be finite")?;
        Ok(Self { k0, k1 })
    }

    /// Slow reaction `2A -> B`.
    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// Fast reaction `B + C -> 2A`.
    pub fn k1(&self) -> f64 {
        self.k1
    }
}

/// Initial concentrations in mol/l.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConcentrations {
    a0: f64,
    b0: f64,
    c0: f64,
}

impl InitialConcentrations {
    pub fn new(a0: f64, b0: f64, c0: f64) -> Result<Self, DomainError> {
        require(a0.is_finite() && a0 >= 0.0, "a0", a0, "must be non-negative")?;
        require(b0.is_finite() && b0 >= 0.0, "b0", b0, "must be non-negative")?;
        require(c0.is_finite() && c0 > 0.0, "c0", c0, "must be positive")?;
        let m0 = a0 + 2.0 * b0;
        require(m0 > 0.0, "m0", m0, "a0 + 2 b0 must be positive")?;
        Ok(Self { a0, b0, c0 })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// Total iodine atoms, `a0 + 2 b0`.
    pub fn m0(&self) -> f64 {
        self.a0 + 2.0 * self.b0
    }
}

/// `eps = k0/k1`, `rho = m0/c0`, `phi = b0/m0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessGroups {
    eps: f64,
    rho: f64,
    phi: f64,
}

impl DimensionlessGroups {
    pub fn new(eps: f64, rho: f64, phi: f64) -> Result<Self, DomainError> {
        require(eps.is_finite() && eps > 0.0, "eps", eps, "must be positive and finite")?;
        require(rho.is_finite() && rho > 0.0, "rho", rho, "must be positive and finite")?;
        require(
            (0.0..=0.5).contains(&phi),
            "phi",
            phi,
            "must lie in [0, 1/2]",
        )?;
        Ok(Self { eps, rho, phi })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// The inhibitor survives the initial transient only when `rho * phi < 1`.
    pub fn has_induction_period(&self) -> bool {
        self.rho * self.phi < 1.0
    }

    pub fn with_eps(self, eps: f64) -> Result<Self, DomainError> {
        Self::new(eps, self.rho, self.phi)
    }
}

/// Reference scales linking the dimensional and dimensionless systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    /// Seconds per unit of dimensionless time, `1/(k1 c0)`.
    pub time: f64,
    /// Iodine concentration scale `m0`.
    pub m0: f64,
    /// Ascorbic-acid concentration scale `c0`.
    pub c0: f64,
}

impl Scales {
    pub fn to_dimensionless(&self, state: &DimensionalState) -> DimlessState {
        DimlessState {
            tau: state.t / self.time,
            beta: state.b / self.m0,
            gamma: state.c / self.c0,
        }
    }

    /// Iodide is recovered from the conservation law `a = m0 (1 - 2 beta)`.
    pub fn to_dimensional(&self, state: &DimlessState) -> DimensionalState {
        DimensionalState {
            t: state.tau * self.time,
            a: self.m0 * state.alpha(),
            b: self.m0 * state.beta,
            c: self.c0 * state.gamma,
        }
    }
}

/// Output of [`derive_groups`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nondimensionalisation {
    pub groups: DimensionlessGroups,
    pub scales: Scales,
}

pub fn derive_groups(
    rates: &RateConstants,
    init: &InitialConcentrations,
) -> Result<Nondimensionalisation, DomainError> {
    let m0 = init.m0();
    let c0 = init.c0();
    require(c0 > 0.0, "c0", c0, "must be positive")?;
    require(m0 > 0.0, "m0", m0, "must be positive")?;
    let groups = DimensionlessGroups::new(rates.k0 / rates.k1, m0 / c0, init.b0 / m0)?;
    Ok(Nondimensionalisation {
        groups,
        scales: Scales {
            time: 1.0 / (rates.k1 * c0),
            m0,
            c0,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimlessState {
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl DimlessState {
    pub fn new(tau: f64, beta: f64, gamma: f64) -> Self {
        Self { tau, beta, gamma }
    }

    /// Dimensionless iodide, `a / m0 = 1 - 2 beta`.
    pub fn alpha(&self) -> f64 {
        1.0 - 2.0 * self.beta
    }

    /// Copy with negative round-off clamped to zero, for reporting only.
    pub fn clamped(&self) -> Self {
        Self {
            tau: self.tau,
            beta: self.beta.max(0.0),
            gamma: self.gamma.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalState {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl DimensionalState {
    pub fn new(t: f64, a: f64, b: f64, c: f64) -> Self {
        Self { t, a, b, c }
    }

    pub fn iodine_atoms(&self) -> f64 {
        self.a + 2.0 * self.b
    }

    pub fn clamped(&self) -> Self {
        Self {
            t: self.t,
            a: self.a.max(0.0),
            b: self.b.max(0.0),
            c: self.c.max(0.0),
        }
    }
}

/// Mass-action rates `(da/dt, db/dt, dc/dt)`.
pub fn rhs_full(state: &DimensionalState, rates: &RateConstants) -> [f64; 3] {
    let fast = rates.k1 * state.b * state.c;
    let slow = rates.k0 * state.a * state.a;
    [2.0 * fast - 2.0 * slow, slow - fast, -fast]
}

pub fn jacobian_full(state: &DimensionalState, rates: &RateConstants) -> [[f64; 3]; 3] {
    let (k0, k1) = (rates.k0, rates.k1);
    let (a, b, c) = (state.a, state.b, state.c);
    [
        [-4.0 * k0 * a, 2.0 * k1 * c, 2.0 * k1 * b],
        [2.0 * k0 * a, -k1 * c, -k1 * b],
        [0.0, -k1 * c, -k1 * b],
    ]
}

/// `(db/dt, dc/dt)` with iodide eliminated through `a = m0 - 2b`.
pub fn rhs_reduced(b: f64, c: f64, m0: f64, rates: &RateConstants) -> [f64; 2] {
    let a = m0 - 2.0 * b;
    let fast = rates.k1 * b * c;
    [rates.k0 * a * a - fast, -fast]
}

/// `(dbeta/dtau, dgamma/dtau)`.
pub fn rhs_dimensionless(state: &DimlessState, groups: &DimensionlessGroups) -> [f64; 2] {
    let DimlessState { beta, gamma, .. } = *state;
    let alpha = 1.0 - 2.0 * beta;
    [
        -beta * gamma + groups.eps * groups.rho * alpha * alpha,
        -groups.rho * beta * gamma,
    ]
}

/// Analytic Jacobian of [`rhs_dimensionless`] with respect to `(beta, gamma)`.
pub fn jacobian_dimensionless(
    beta: f64,
    gamma: f64,
    groups: &DimensionlessGroups,
) -> [[f64; 2]; 2] {
    let er = groups.eps * groups.rho;
    [
        [-gamma - 4.0 * er * (1.0 - 2.0 * beta), -beta],
        [-groups.rho * gamma, -groups.rho * beta],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    /// Normalised so the first non-zero component equals one.
    pub vector: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumAnalysis {
    /// `(beta, gamma) = (1/2, 0)`.
    pub point: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
    /// Sorted by decreasing eigenvalue.
    pub modes: [Eigenpair; 2],
}

/// Linearisation at the unique equilibrium `(1/2, 0)`.
pub fn equilibrium_analysis(groups: &DimensionlessGroups) -> EquilibriumAnalysis {
    let point = [0.5, 0.0];
    let jacobian = jacobian_dimensionless(point[0], point[1], groups);
    let modes = eigen_2x2(&jacobian);
    EquilibriumAnalysis {
        point,
        jacobian,
        modes,
    }
}

/// Eigen-decomposition of a real 2x2 matrix with real spectrum.
pub(crate) fn eigen_2x2(m: &[[f64; 2]; 2]) -> [Eigenpair; 2] {
    let [[a, b], [c, d]] = *m;
    let half_trace = 0.5 * (a + d);
    let det = a * d - b * c;
    let disc = (half_trace * half_trace - det).max(0.0).sqrt();
    // avoid cancellation in the smaller-magnitude root
    let big = if half_trace >= 0.0 {
        half_trace + disc
    } else {
        half_trace - disc
    };
    let small = if big != 0.0 { det / big } else { 0.0 };
    let (hi, lo) = if big >= small { (big, small) } else { (small, big) };
    let vector = |lambda: f64| -> [f64; 2] {
        // null vector of (m - lambda I), taken from its better-conditioned row
        let r0 = [a - lambda, b];
        let r1 = [c, d - lambda];
        let row = if r0[0].abs() + r0[1].abs() >= r1[0].abs() + r1[1].abs() {
            r0
        } else {
            r1
        };
        let v = if row[0] == 0.0 && row[1] == 0.0 {
            [1.0, 0.0]
        } else {
            [-row[1], row[0]]
        };
        if v[0] != 0.0 {
            [1.0, v[1] / v[0]]
        } else {
            [0.0, 1.0]
        }
    };
    [
        Eigenpair {
            value: hi,
            vector: vector(hi),
        },
        Eigenpair {
            value: lo,
            vector: vector(lo),
        },
    ]
}

/// Quasi-steady iodine level `beta` solving `beta gamma = eps rho (1 - 2 beta)^2`.
///
/// Returns the smaller root of `4 er beta^2 - (gamma + 4 er) beta + er = 0`
/// (`er = eps rho`); the other root exceeds one half.
pub fn quasi_steady_beta(gamma: f64, groups: &DimensionlessGroups) -> Result<f64, DomainError> {
    require(gamma >= 0.0, "gamma", gamma, "must be non-negative")?;
    let er = groups.eps * groups.rho;
    if gamma.is_infinite() {
        return Ok(0.0);
    }
    let s = gamma + 4.0 * er;
    // s^2 - 16 er^2 factorised to keep precision when gamma is small
    let disc = (gamma * (gamma + 8.0 * er)).sqrt();
    Ok(2.0 * er / (s + disc))
}

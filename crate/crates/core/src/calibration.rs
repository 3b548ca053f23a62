//! Least-squares calibration of the switchover-time formula
//! `t_sw = (c0 - phi m0) / (m0^2 k0)` against measured switchover times.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Read;

use thiserror::Error;

use crate::format::full;

/// Measurement table as shipped with the crate: two series (a: varying
/// ascorbic acid at fixed iodine, b: varying iodine at roughly fixed ascorbic
/// acid), five conditions each, two replicates per condition.
pub const TABLE1_CSV: &str = include_str!("../data/table1.csv");

pub const CSV_HEADER: [&str; 4] = ["series_id", "c0_mol_l", "m0_mol_l", "t_sw_s"];

/// One replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub series_id: String,
    /// Initial ascorbic acid, mol/l.
    pub c0: f64,
    /// Initial iodine atoms `a0 + 2 b0`, mol/l.
    pub m0: f64,
    /// Observed switchover time, s.
    pub t_sw_observed: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("line {line}: expected header `{expected}`, found `{found}`")]
    Header {
        line: u64,
        expected: String,
        found: String,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: cannot parse {field} value `{value}`")]
    Parse {
        line: u64,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: {field} must be positive and finite, got {value}")]
    NonPositive {
        line: u64,
        field: &'static str,
        value: f64,
    },
    #[error("{0}")]
    Io(String),
}

impl DataError {
    pub fn line(&self) -> Option<u64> {
        match self {
            DataError::Header { line, .. }
            | DataError::Malformed { line, .. }
            | DataError::Parse { line, .. }
            | DataError::NonPositive { line, .. } => Some(*line),
            DataError::Io(_) => None,
        }
    }
}

/// The bundled measurement table.
pub fn table1() -> Vec<Measurement> {
    parse_measurements(TABLE1_CSV).expect("bundled table parses")
}

pub fn parse_measurements(text: &str) -> Result<Vec<Measurement>, DataError> {
    load_measurements(text.as_bytes())
}

/// Read `series_id,c0_mol_l,m0_mol_l,t_sw_s` rows. A `t_sw_s` cell holding a
/// parenthesised replicate list such as `"(48.12, 43.56)"` expands into one
/// measurement per value. Empty input yields an empty list.
pub fn load_measurements<R: Read>(reader: R) -> Result<Vec<Measurement>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    let mut header_seen = false;
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            DataError::Malformed {
                line,
                message: e.to_string(),
            }
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if !header_seen {
            let found: Vec<&str> = record.iter().collect();
            if found != CSV_HEADER {
                return Err(DataError::Header {
                    line,
                    expected: CSV_HEADER.join(","),
                    found: found.join(","),
                });
            }
            header_seen = true;
            continue;
        }
        if record.len() != CSV_HEADER.len() {
            return Err(DataError::Malformed {
                line,
                message: format!("expected {} fields, found {}", CSV_HEADER.len(), record.len()),
            });
        }
        let series_id = record[0].to_string();
        if series_id.is_empty() {
            return Err(DataError::Malformed {
                line,
                message: "empty series_id".into(),
            });
        }
        let c0 = positive(line, "c0_mol_l", &record[1])?;
        let m0 = positive(line, "m0_mol_l", &record[2])?;
        for t in replicates(line, &record[3])? {
            out.push(Measurement {
                series_id: series_id.clone(),
                c0,
                m0,
                t_sw_observed: t,
            });
        }
    }
    Ok(out)
}

fn positive(line: u64, field: &'static str, raw: &str) -> Result<f64, DataError> {
    let value: f64 = raw.parse().map_err(|_| DataError::Parse {
        line,
        field,
        value: raw.to_string(),
    })?;
    if !(value > 0.0 && value.is_finite()) {
        return Err(DataError::NonPositive { line, field, value });
    }
    Ok(value)
}

fn replicates(line: u64, raw: &str) -> Result<Vec<f64>, DataError> {
    match raw.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        Some(inner) => inner
            .split(',')
            .map(|v| positive(line, "t_sw_s", v.trim()))
            .collect(),
        None => Ok(vec![positive(line, "t_sw_s", raw)?]),
    }
}

/// Switchover time for one row. Not clamped: negative values are allowed so
/// that an optimiser sees a smooth objective.
pub fn predict(m: &Measurement, k0: f64, phi: f64) -> f64 {
    predict_raw(m.c0, m.m0, k0, phi)
}

pub fn predict_raw(c0: f64, m0: f64, k0: f64, phi: f64) -> f64 {
    (c0 - phi * m0) / (m0 * m0 * k0)
}

/// Sum of squared residuals, accumulated in row order.
pub fn sse(data: &[Measurement], k0: f64, phi: f64) -> f64 {
    data.iter()
        .map(|m| {
            let r = m.t_sw_observed - predict(m, k0, phi);
            r * r
        })
        .sum()
}

/// Normalisation for gradient-based stopping: `sum t_obs^2`.
pub fn sse_scale(data: &[Measurement]) -> f64 {
    data.iter().map(|m| m.t_sw_observed * m.t_sw_observed).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub k0_init: f64,
    pub phi_init: f64,
    pub max_iterations: usize,
    /// Relative parameter-step tolerance.
    pub step_tol: f64,
    /// Tolerance on `|grad SSE| / sse_scale`.
    pub gradient_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            k0_init: 1.0,
            phi_init: 0.1,
            max_iterations: 500,
            step_tol: 1e-10,
            gradient_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub k0_hat: f64,
    /// Unconstrained; may fall outside `[0, 1/2]`.
    pub phi_hat: f64,
    pub sse: f64,
    /// `observed - predicted`, in input order.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `|grad SSE|` in `(ln k0, phi)` coordinates divided by `sse_scale`.
    pub gradient_norm: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least 2 measurements, got {0}")]
    TooFewMeasurements(usize),
    #[error("all measurements share the same (c0, m0); k0 and phi are not separately identifiable")]
    Degenerate,
    #[error("invalid fit option {name} = {value}")]
    InvalidOption { name: &'static str, value: f64 },
}

/// Levenberg-Marquardt on `(ln k0, phi)` with the analytic Jacobian.
/// Deterministic for a given input order and options.
pub fn fit(data: &[Measurement], options: &FitOptions) -> Result<FitResult, FitError> {
    if data.len() < 2 {
        return Err(FitError::TooFewMeasurements(data.len()));
    }
    let first = (data[0].c0, data[0].m0);
    if data.iter().all(|m| (m.c0, m.m0) == first) {
        return Err(FitError::Degenerate);
    }
    if !(options.k0_init > 0.0 && options.k0_init.is_finite()) {
        return Err(FitError::InvalidOption {
            name: "k0_init",
            value: options.k0_init,
        });
    }
    if !options.phi_init.is_finite() {
        return Err(FitError::InvalidOption {
            name: "phi_init",
            value: options.phi_init,
        });
    }

    let scale = sse_scale(data).max(f64::MIN_POSITIVE);
    let objective = |p: [f64; 2]| sse(data, p[0].exp(), p[1]);

    let mut p = [options.k0_init.ln(), options.phi_init];
    let mut cost = objective(p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let mut last_step_small = false;
    let mut grad_norm;

    loop {
        let (jtj, jtr) = normal_equations(data, p);
        // d SSE / dp = -2 J^T r with J = d pred / dp
        grad_norm = 2.0 * (jtr[0].hypot(jtr[1])) / scale;
        if grad_norm <= options.gradient_tol && last_step_small {
            converged = true;
            break;
        }
        if iterations >= options.max_iterations {
            break;
        }
        iterations += 1;

        let mut accepted = None;
        while lambda < 1e30 {
            let a = [
                [jtj[0][0] * (1.0 + lambda), jtj[0][1]],
                [jtj[1][0], jtj[1][1] * (1.0 + lambda)],
            ];
            if let Some(step) = solve_2x2(a, jtr) {
                let trial = [p[0] + step[0], p[1] + step[1]];
                let trial_cost = objective(trial);
                if trial_cost.is_finite() && trial_cost <= cost {
                    accepted = Some((step, trial, trial_cost));
                    lambda = (lambda * 0.1).max(1e-15);
                    break;
                }
            }
            lambda *= 10.0;
        }
        match accepted {
            Some((step, trial, trial_cost)) => {
                last_step_small = (0..2)
                    .all(|i| step[i].abs() <= options.step_tol * p[i].abs().max(1.0));
                p = trial;
                cost = trial_cost;
            }
            None => {
                // no descent possible at machine precision
                let (_, jtr) = normal_equations(data, p);
                grad_norm = 2.0 * jtr[0].hypot(jtr[1]) / scale;
                converged = grad_norm <= options.gradient_tol;
                break;
            }
        }
    }

    let k0_hat = p[0].exp();
    let phi_hat = p[1];
    let residuals = data
        .iter()
        .map(|m| m.t_sw_observed - predict(m, k0_hat, phi_hat))
        .collect();
    let mut warnings = Vec::new();
    if phi_hat < 0.0 {
        warnings.push(format!(
            "fitted phi = {phi_hat:e} is negative; physically phi = b0/m0 >= 0, so this indicates phi at its lower boundary"
        ));
    } else if phi_hat > 0.5 {
        warnings.push(format!(
            "fitted phi = {phi_hat:e} exceeds 1/2, the largest value allowed by m0 = a0 + 2 b0"
        ));
    }
    if !converged {
        warnings.push(format!(
            "fit did not converge after {iterations} iterations (scaled gradient {grad_norm:e})"
        ));
    }
    Ok(FitResult {
        k0_hat,
        phi_hat,
        sse: cost,
        residuals,
        iterations,
        converged,
        gradient_norm: grad_norm,
        warnings,
    })
}

/// `J^T J` and `J^T r` for residuals `r = obs - pred`, `J = d pred / d(ln k0, phi)`
/// with the sign folded so the GN step is `(J^T J) dp = J^T r`.
fn normal_equations(data: &[Measurement], p: [f64; 2]) -> ([[f64; 2]; 2], [f64; 2]) {
    let k0 = p[0].exp();
    let mut jtj = [[0.0; 2]; 2];
    let mut jtr = [0.0; 2];
    for m in data {
        let pred = predict(m, k0, p[1]);
        let r = m.t_sw_observed - pred;
        let j = [-pred, -1.0 / (m.m0 * k0)];
        for a in 0..2 {
            jtr[a] += j[a] * r;
            for b in 0..2 {
                jtj[a][b] += j[a] * j[b];
            }
        }
    }
    (jtj, jtr)
}

fn solve_2x2(a: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        (b[0] * a[1][1] - a[0][1] * b[1]) / det,
        (a[0][0] * b[1] - a[1][0] * b[0]) / det,
    ])
}

/// Which concentration varies within a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndependentVariable {
    C0,
    M0,
}

impl IndependentVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            IndependentVariable::C0 => "c0",
            IndependentVariable::M0 => "m0",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub x: f64,
    pub c0: f64,
    pub m0: f64,
    pub observed: f64,
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    pub series_id: String,
    pub independent: IndependentVariable,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub k0: f64,
    pub phi: f64,
    pub sse: f64,
    pub rmse: f64,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
    pub series: Vec<SeriesReport>,
}

/// Per-series observed-vs-fitted tables. The independent variable of a series
/// is whichever of `c0`, `m0` has the larger max/min ratio within it.
pub fn fit_report(result: &FitResult, data: &[Measurement]) -> FitReport {
    let mut order: Vec<&str> = Vec::new();
    for m in data {
        if !order.contains(&m.series_id.as_str()) {
            order.push(&m.series_id);
        }
    }
    let series = order
        .into_iter()
        .map(|id| {
            let members: Vec<&Measurement> = data.iter().filter(|m| m.series_id == id).collect();
            let spread = |f: fn(&Measurement) -> f64| {
                let (lo, hi) = members
                    .iter()
                    .map(|m| f(m))
                    .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
                hi / lo
            };
            let independent = if spread(|m| m.c0) >= spread(|m| m.m0) {
                IndependentVariable::C0
            } else {
                IndependentVariable::M0
            };
            let rows = members
                .iter()
                .map(|m| {
                    let predicted = predict(m, result.k0_hat, result.phi_hat);
                    ReportRow {
                        x: match independent {
                            IndependentVariable::C0 => m.c0,
                            IndependentVariable::M0 => m.m0,
                        },
                        c0: m.c0,
                        m0: m.m0,
                        observed: m.t_sw_observed,
                        predicted,
                        residual: m.t_sw_observed - predicted,
                    }
                })
                .collect();
            SeriesReport {
                series_id: id.to_string(),
                independent,
                rows,
            }
        })
        .collect();
    let n = data.len();
    FitReport {
        k0: result.k0_hat,
        phi: result.phi_hat,
        sse: result.sse,
        rmse: if n > 0 { (result.sse / n as f64).sqrt() } else { 0.0 },
        converged: result.converged,
        iterations: result.iterations,
        warnings: result.warnings.clone(),
        series,
    }
}

impl FitReport {
    pub const CSV_HEADER: &'static str =
        "series_id,independent,x,c0_mol_l,m0_mol_l,t_sw_observed_s,t_sw_predicted_s,residual_s";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.series {
            for r in &s.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    s.series_id,
                    s.independent.as_str(),
                    full(r.x),
                    full(r.c0),
                    full(r.m0),
                    full(r.observed),
                    full(r.predicted),
                    full(r.residual)
                );
            }
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "fit of t_sw = (c0 - phi m0) / (m0^2 k0)");
        let _ = writeln!(out, "  k0        = {:.6} l/(mol s)", self.k0);
        let _ = writeln!(out, "  phi       = {:.3e}", self.phi);
        let _ = writeln!(out, "  sse       = {:.6} s^2", self.sse);
        let _ = writeln!(out, "  rmse      = {:.4} s", self.rmse);
        let _ = writeln!(out, "  converged = {} ({} iterations)", self.converged, self.iterations);
        for s in &self.series {
            let distinct: BTreeSet<u64> = s.rows.iter().map(|r| r.x.to_bits()).collect();
            let _ = writeln!(
                out,
                "  series {}: {} rows over {} values of {}",
                s.series_id,
                s.rows.len(),
                distinct.len(),
                s.independent.as_str()
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
        out
    }
}

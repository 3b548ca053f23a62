//! Adaptive implicit integration of the clock system with dense output and
//! switchover event detection.
//!
//! Steps are three-stage Radau IIA (order 5, L-stable). Local error is
//! estimated by step doubling, so every accepted step costs three stage
//! solves; with two or three unknowns that is cheap, and it keeps the error
//! estimate honest on the stiff relaxation of `beta`. The half-step state
//! doubles as dense output: each accepted step is interpolated by the quintic
//! Hermite polynomial through its start, midpoint and end, with the exact
//! right-hand side at all three.

mod radau;
mod trajectory;

pub use trajectory::{
    DimensionalTrajectory, DimensionlessTrajectory, Model, Sample, SolverStats, Trajectory,
};

use crate::kinetics::{
    jacobian_dimensionless, jacobian_full, rhs_dimensionless, rhs_full, DimensionalState,
    DimensionlessGroups, DimlessState, InitialConcentrations, RateConstants,
};
use radau::{scaled_norm, StepFailure, Work};
use trajectory::Midpoint;
use thiserror::Error;

/// Autonomous-or-not system `y' = f(t, y)` with an analytic Jacobian.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
    fn jacobian(&self, t: f64, y: &[f64; N]) -> [[f64; N]; N];
}

/// `(beta, gamma)` system in dimensionless time.
#[derive(Debug, Clone, Copy)]
pub struct DimensionlessSystem {
    pub groups: DimensionlessGroups,
}

impl OdeSystem<2> for DimensionlessSystem {
    fn rhs(&self, t: f64, y: &[f64; 2]) -> [f64; 2] {
        rhs_dimensionless(&DimlessState::new(t, y[0], y[1]), &self.groups)
    }

    fn jacobian(&self, _t: f64, y: &[f64; 2]) -> [[f64; 2]; 2] {
        jacobian_dimensionless(y[0], y[1], &self.groups)
    }
}

/// `(a, b, c)` mass-action system in seconds.
#[derive(Debug, Clone, Copy)]
pub struct DimensionalSystem {
    pub rates: RateConstants,
}

impl OdeSystem<3> for DimensionalSystem {
    fn rhs(&self, t: f64, y: &[f64; 3]) -> [f64; 3] {
        rhs_full(&DimensionalState::new(t, y[0], y[1], y[2]), &self.rates)
    }

    fn jacobian(&self, t: f64, y: &[f64; 3]) -> [[f64; 3]; 3] {
        jacobian_full(&DimensionalState::new(t, y[0], y[1], y[2]), &self.rates)
    }
}

/// Where samples are recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputGrid {
    /// Every accepted step.
    #[default]
    Steps,
    /// `n + 1` equally spaced times from 0 to `t_end` inclusive, filled from
    /// the dense output.
    Uniform(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Budget of attempted steps, accepted plus rejected.
    pub max_steps: usize,
    pub t_end: f64,
    /// Defaults to 1e-3 of the system's own time unit.
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
    pub output: OutputGrid,
}

impl SolverConfig {
    pub const DEFAULT_REL_TOL: f64 = 1e-8;
    pub const DEFAULT_ABS_TOL: f64 = 1e-12;
    pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

    pub fn new(t_end: f64) -> Self {
        Self {
            rel_tol: Self::DEFAULT_REL_TOL,
            abs_tol: Self::DEFAULT_ABS_TOL,
            max_steps: Self::DEFAULT_MAX_STEPS,
            t_end,
            initial_step: None,
            max_step: None,
            output: OutputGrid::Steps,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_output(mut self, output: OutputGrid) -> Self {
        self.output = output;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(ConfigError::RelTol(self.rel_tol));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(ConfigError::AbsTol(self.abs_tol));
        }
        if self.max_steps == 0 {
            return Err(ConfigError::MaxSteps);
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(ConfigError::TEnd(self.t_end));
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(ConfigError::Step(h));
            }
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(ConfigError::Step(h));
            }
        }
        if self.output == OutputGrid::Uniform(0) {
            return Err(ConfigError::Output);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("rel_tol must lie in (0, 1), got {0}")]
    RelTol(f64),
    #[error("abs_tol must be positive, got {0}")]
    AbsTol(f64),
    #[error("max_steps must be positive")]
    MaxSteps,
    #[error("t_end must be positive and finite, got {0}")]
    TEnd(f64),
    #[error("step sizes must be positive, got {0}")]
    Step(f64),
    #[error("uniform output needs at least one interval")]
    Output,
}

/// Integration failure. Solver failures carry the trajectory computed up to
/// the point of failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError<const N: usize> {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("step budget of {budget} exhausted at t = {t}")]
    StepBudgetExhausted {
        budget: usize,
        t: f64,
        partial: Box<Trajectory<N>>,
    },
    #[error("step size underflow at t = {t} (h = {h}); tolerances cannot be met")]
    ToleranceFailure {
        t: f64,
        h: f64,
        partial: Box<Trajectory<N>>,
    },
}

impl<const N: usize> SolveError<N> {
    pub fn partial(&self) -> Option<&Trajectory<N>> {
        match self {
            SolveError::Config(_) => None,
            SolveError::StepBudgetExhausted { partial, .. }
            | SolveError::ToleranceFailure { partial, .. } => Some(partial),
        }
    }
}

/// Integrate from `tau = 0` with `beta(0) = phi`, `gamma(0) = 1`.
pub fn integrate(
    groups: &DimensionlessGroups,
    config: &SolverConfig,
) -> Result<DimensionlessTrajectory, SolveError<2>> {
    integrate_from(groups, groups.phi(), 1.0, config)
}

/// Integrate the dimensionless system from an arbitrary initial point.
pub fn integrate_from(
    groups: &DimensionlessGroups,
    beta0: f64,
    gamma0: f64,
    config: &SolverConfig,
) -> Result<DimensionlessTrajectory, SolveError<2>> {
    let mut warnings = Vec::new();
    if !groups.has_induction_period() {
        warnings.push(format!(
            "rho*phi = {} >= 1: the inhibitor does not survive the initial transient",
            groups.rho() * groups.phi()
        ));
    }
    let system = DimensionlessSystem { groups: *groups };
    solve(
        &system,
        [beta0, gamma0],
        1.0,
        Model::Dimensionless(*groups),
        warnings,
        config,
    )
}

/// Integrate the three-species mass-action system in seconds.
pub fn integrate_dimensional(
    rates: &RateConstants,
    init: &InitialConcentrations,
    config: &SolverConfig,
) -> Result<DimensionalTrajectory, SolveError<3>> {
    let mut warnings = Vec::new();
    if init.b0() >= init.c0() {
        warnings.push(format!(
            "b0 = {} >= c0 = {}: the inhibitor does not survive the initial transient",
            init.b0(),
            init.c0()
        ));
    }
    let system = DimensionalSystem { rates: *rates };
    solve(
        &system,
        [init.a0(), init.b0(), init.c0()],
        1.0 / (rates.k1() * init.c0()),
        Model::Dimensional {
            rates: *rates,
            init: *init,
        },
        warnings,
        config,
    )
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
/// 2^5 - 1: Richardson denominator for an order-5 method.
const RICHARDSON: f64 = 31.0;

/// Core adaptive driver shared by both formulations.
pub fn solve<S: OdeSystem<N>, const N: usize>(
    system: &S,
    y0: [f64; N],
    time_unit: f64,
    model: Model,
    warnings: Vec<String>,
    config: &SolverConfig,
) -> Result<Trajectory<N>, SolveError<N>> {
    config.validate()?;
    let (rtol, atol) = (config.rel_tol, config.abs_tol);
    let t_end = config.t_end;
    let max_step = config.max_step.unwrap_or(f64::INFINITY);

    let mut work = Work::default();
    let mut t = 0.0;
    let mut y = y0;
    let mut f = system.rhs(t, &y);
    work.rhs_evals += 1;

    let mut traj = Trajectory::new(
        Sample { t, y, dydt: f },
        model,
        SolverStats {
            rel_tol: rtol,
            abs_tol: atol,
            ..SolverStats::default()
        },
        warnings,
    );
    let grid = |k: usize, n: usize| {
        if k == n {
            t_end
        } else {
            t_end * k as f64 / n as f64
        }
    };
    let mut next_grid = 1usize;

    let mut h = config.initial_step.unwrap_or(1e-3 * time_unit).min(max_step);
    let mut attempts = 0usize;
    let mut last_rejected = false;

    while t < t_end {
        if attempts >= config.max_steps {
            finish_stats(&mut traj, &work);
            return Err(SolveError::StepBudgetExhausted {
                budget: config.max_steps,
                t,
                partial: Box::new(traj),
            });
        }
        attempts += 1;

        let mut last = false;
        if t + 1.01 * h >= t_end {
            h = t_end - t;
            last = true;
        }
        if h <= 1e-14 * t.abs().max(time_unit) {
            finish_stats(&mut traj, &work);
            return Err(SolveError::ToleranceFailure {
                t,
                h,
                partial: Box::new(traj),
            });
        }

        let attempt = double_step(system, t, &y, h, rtol, atol, &mut work);
        let (y_new, y_mid, err) = match attempt {
            Ok(v) => v,
            Err(_) => {
                traj.stats.rejected_steps += 1;
                h *= 0.25;
                last_rejected = true;
                continue;
            }
        };

        if err <= 1.0 {
            let t_new = if last { t_end } else { t + h };
            let f_new = system.rhs(t_new, &y_new);
            work.rhs_evals += 1;
            let t_mid = t + 0.5 * (t_new - t);
            let mid = Midpoint {
                y: y_mid,
                dydt: system.rhs(t_mid, &y_mid),
            };
            work.rhs_evals += 1;
            let from = Sample { t, y, dydt: f };
            let to = Sample {
                t: t_new,
                y: y_new,
                dydt: f_new,
            };
            traj.push_step(to, mid);
            match config.output {
                OutputGrid::Steps => traj.push_sample(to),
                OutputGrid::Uniform(n) => {
                    while next_grid <= n && grid(next_grid, n) <= t_new {
                        let tg = grid(next_grid, n);
                        let sample = if tg == t_new {
                            to
                        } else {
                            let yg = trajectory::quintic(&from, &mid, &to, tg);
                            work.rhs_evals += 1;
                            Sample {
                                t: tg,
                                y: yg,
                                dydt: system.rhs(tg, &yg),
                            }
                        };
                        traj.push_sample(sample);
                        next_grid += 1;
                    }
                }
            }
            traj.stats.accepted_steps += 1;
            t = t_new;
            y = y_new;
            f = f_new;
            let mut factor = SAFETY * err.max(1e-10).powf(-1.0 / 6.0);
            factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
            if last_rejected {
                factor = factor.min(1.0);
            }
            h = (h * factor).min(max_step);
            last_rejected = false;
        } else {
            traj.stats.rejected_steps += 1;
            let factor = (SAFETY * err.powf(-1.0 / 6.0)).clamp(MIN_FACTOR, 1.0);
            h *= factor;
            last_rejected = true;
        }
    }
    finish_stats(&mut traj, &work);
    Ok(traj)
}

fn finish_stats<const N: usize>(traj: &mut Trajectory<N>, work: &Work) {
    traj.stats.rhs_evals = work.rhs_evals;
    traj.stats.jacobian_evals = work.jacobian_evals;
    traj.stats.factorizations = work.factorizations;
}

/// One full step and two half steps; returns the half-step result, the
/// midpoint state and the scaled Richardson error estimate.
fn double_step<S: OdeSystem<N>, const N: usize>(
    system: &S,
    t: f64,
    y: &[f64; N],
    h: f64,
    rtol: f64,
    atol: f64,
    work: &mut Work,
) -> Result<([f64; N], [f64; N], f64), StepFailure> {
    let big = radau::step(system, t, y, h, rtol, atol, work)?;
    let mid = radau::step(system, t, y, 0.5 * h, rtol, atol, work)?;
    let small = radau::step(system, t + 0.5 * h, &mid, 0.5 * h, rtol, atol, work)?;
    let mut diff = [0.0; N];
    let mut scale = [0.0; N];
    for k in 0..N {
        diff[k] = (small[k] - big[k]) / RICHARDSON;
        scale[k] = y[k].abs().max(small[k].abs());
    }
    Ok((small, mid, scaled_norm(&diff, &scale, rtol, atol)))
}

/// Upward crossing of `beta` through a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchoverEvent {
    /// Event time in the trajectory's own time unit (dimensionless `tau`, or
    /// seconds for a dimensional trajectory).
    pub time: f64,
    /// Threshold on dimensionless iodine `beta = b/m0`.
    pub threshold: f64,
}

impl SwitchoverEvent {
    /// Midpoint between the induction plateau (`beta ~ 0`) and equilibrium.
    pub const DEFAULT_THRESHOLD: f64 = 0.25;
}

/// First upward crossing of `beta = threshold`, or `None` if the trajectory
/// never rises through it.
///
/// The crossing is bracketed by two accepted steps and then located by
/// bisection on the length of a fresh step from the left bracket, so its
/// accuracy is that of the integrator rather than of the dense output.
pub fn detect_switchover(traj: &DimensionlessTrajectory, threshold: f64) -> Option<SwitchoverEvent> {
    let time = match traj.model() {
        Model::Dimensionless(groups) => {
            restep_crossing(&DimensionlessSystem { groups: *groups }, traj, 0, threshold)
        }
        Model::Dimensional { .. } => traj.first_upward_crossing(0, threshold),
    }?;
    Some(SwitchoverEvent { time, threshold })
}

/// Same event on a dimensional run: `b` crossing `threshold * m0`, reported
/// in seconds.
pub fn detect_switchover_dimensional(
    traj: &DimensionalTrajectory,
    threshold: f64,
) -> Option<SwitchoverEvent> {
    let (rates, m0) = match traj.model() {
        Model::Dimensional { rates, init } => (*rates, init.m0()),
        Model::Dimensionless(_) => {
            return traj
                .first_upward_crossing(1, threshold)
                .map(|time| SwitchoverEvent { time, threshold })
        }
    };
    let time = restep_crossing(&DimensionalSystem { rates }, traj, 1, threshold * m0)?;
    Some(SwitchoverEvent { time, threshold })
}

fn restep_crossing<S: OdeSystem<N>, const N: usize>(
    system: &S,
    traj: &Trajectory<N>,
    component: usize,
    level: f64,
) -> Option<f64> {
    let i = traj.crossing_step(component, level)?;
    let start = traj.nodes[i];
    let end_t = traj.nodes[i + 1].t;
    let (rtol, atol) = (traj.stats.rel_tol, traj.stats.abs_tol);
    let mut work = Work::default();
    Some(trajectory::bisect(start.t, end_t, |t| {
        match double_step(system, start.t, &start.y, t - start.t, rtol, atol, &mut work) {
            Ok((y, _, _)) => y[component] - level,
            // cannot happen for a sub-step of an accepted step in practice
            Err(_) => traj.step_eval(i, t)[component] - level,
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay;

    impl OdeSystem<1> for Decay {
        fn rhs(&self, _t: f64, y: &[f64; 1]) -> [f64; 1] {
            [-y[0]]
        }
        fn jacobian(&self, _t: f64, _y: &[f64; 1]) -> [[f64; 1]; 1] {
            [[-1.0]]
        }
    }

    /// y' = -1000 (y - cos t): stiff, smooth slow solution.
    struct StiffForced;

    impl OdeSystem<1> for StiffForced {
        fn rhs(&self, t: f64, y: &[f64; 1]) -> [f64; 1] {
            [-1000.0 * (y[0] - t.cos())]
        }
        fn jacobian(&self, _t: f64, _y: &[f64; 1]) -> [[f64; 1]; 1] {
            [[-1000.0]]
        }
    }

    fn dummy_model() -> Model {
        Model::Dimensionless(DimensionlessGroups::new(0.1, 1.0, 0.0).unwrap())
    }

    #[test]
    fn exponential_decay_accuracy() {
        let cfg = SolverConfig::new(5.0);
        let tr = solve(&Decay, [1.0], 1.0, dummy_model(), vec![], &cfg).unwrap();
        let end = tr.samples().last().unwrap();
        assert_eq!(end.t, 5.0);
        assert!((end.y[0] - (-5.0f64).exp()).abs() < 1e-9);
        // dense output between nodes
        let y = tr.interpolate(2.345).unwrap()[0];
        assert!((y - (-2.345f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn stiff_problem_takes_few_steps() {
        let cfg = SolverConfig::new(10.0);
        let tr = solve(&StiffForced, [0.0], 1.0, dummy_model(), vec![], &cfg).unwrap();
        // explicit methods would need ~ 10 * 1000 / 2 steps for stability alone
        assert!(tr.stats().accepted_steps < 600, "{:?}", tr.stats());
        let end = tr.samples().last().unwrap();
        // slow manifold y = cos t + 1000 sin t / (1000^2 + 1) + ...
        let exact = (1e6 * 10f64.cos() + 1e3 * 10f64.sin()) / (1e6 + 1.0);
        assert!((end.y[0] - exact).abs() < 1e-7);
    }

    #[test]
    fn uniform_grid_hits_every_point() {
        let cfg = SolverConfig::new(2.0).with_output(OutputGrid::Uniform(8));
        let tr = solve(&Decay, [1.0], 1.0, dummy_model(), vec![], &cfg).unwrap();
        let times: Vec<f64> = tr.times().collect();
        assert_eq!(times.len(), 9);
        for (k, t) in times.iter().enumerate() {
            assert!((t - 0.25 * k as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn budget_exhaustion_returns_partial() {
        let mut cfg = SolverConfig::new(100.0);
        cfg.max_steps = 5;
        let err = solve(&Decay, [1.0], 1.0, dummy_model(), vec![], &cfg).unwrap_err();
        match &err {
            SolveError::StepBudgetExhausted { budget, partial, .. } => {
                assert_eq!(*budget, 5);
                assert!(partial.len() > 1);
                assert!(partial.end_time() < 100.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.partial().is_some());
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = SolverConfig::new(1.0);
        cfg.rel_tol = 0.0;
        assert!(matches!(cfg.validate(), Err(ConfigError::RelTol(_))));
        let cfg = SolverConfig::new(-1.0);
        assert!(matches!(cfg.validate(), Err(ConfigError::TEnd(_))));
        let mut cfg = SolverConfig::new(1.0);
        cfg.max_steps = 0;
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig::new(1.0).with_output(OutputGrid::Uniform(0));
        assert!(cfg.validate().is_err());
    }
}

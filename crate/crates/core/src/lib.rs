//! Vitamin C / iodine clock reaction.
//!
//! Three mass-action species — iodide `a`, iodine `b`, ascorbic acid `c` —
//! with `I2 + C6H8O6 -> 2I- + C6H6O6` (rate `k1`) and the slow regeneration
//! `2I- -> I2` (rate `k0`). The crate provides:
//!
//! * [`kinetics`]: parameters, nondimensionalisation, right-hand sides,
//!   equilibrium and quasi-steady analysis;
//! * [`ode`]: an adaptive L-stable integrator with dense output and
//!   switchover detection;
//! * [`asymptotics`]: the four-region closed-form approximation;
//! * [`calibration`]: switchover-time prediction and least-squares fitting
//!   of `k0` and `phi` to measured switchover times;
//! * [`cli`]: the `clockwork` command-line front end.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod calibration;
pub mod cli;
pub mod format;
pub mod kinetics;
pub mod ode;
pub mod special;

pub use asymptotics::{
    composite_eval, dimensionless_switchover_time, switchover_time, AsymptoticPoint,
    AsymptoticSolution, ClassifierConfig, MatchingConstants, Region,
};
pub use calibration::{fit, predict, FitOptions, FitResult, Measurement};
pub use kinetics::{
    derive_groups, DimensionalState, DimensionlessGroups, DimlessState, DomainError,
    InitialConcentrations, RateConstants,
};
pub use ode::{
    detect_switchover, detect_switchover_dimensional, integrate, integrate_dimensional,
    SolveError, SolverConfig, SwitchoverEvent,
};

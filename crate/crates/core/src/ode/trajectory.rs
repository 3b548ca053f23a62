use crate::kinetics::{
    DimensionalState, DimensionlessGroups, DimlessState, InitialConcentrations, RateConstants,
};

/// One stored point: time, state and the state derivative at that point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dydt: [f64; N],
}

/// Which system produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Dimensionless(DimensionlessGroups),
    Dimensional {
        rates: RateConstants,
        init: InitialConcentrations,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverStats {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evals: usize,
    pub jacobian_evals: usize,
    pub factorizations: usize,
}

/// State and derivative at the middle of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) struct Midpoint<const N: usize> {
    pub y: [f64; N],
    pub dydt: [f64; N],
}

/// Output samples with strictly increasing times, plus the solver's own
/// accepted steps. Never empty: the initial condition is always the first
/// sample.
///
/// Interpolation and event location always work on the accepted steps, each
/// represented by the quintic Hermite polynomial through its start, midpoint
/// and end, so they do not depend on the output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub(super) samples: Vec<Sample<N>>,
    pub(super) nodes: Vec<Sample<N>>,
    /// `midpoints[i]` belongs to the step from `nodes[i]` to `nodes[i + 1]`.
    pub(super) midpoints: Vec<Midpoint<N>>,
    pub(super) model: Model,
    pub(super) stats: SolverStats,
    pub(super) warnings: Vec<String>,
}

/// `(tau, beta, gamma)` samples.
pub type DimensionlessTrajectory = Trajectory<2>;
/// `(t, a, b, c)` samples.
pub type DimensionalTrajectory = Trajectory<3>;

impl<const N: usize> Trajectory<N> {
    pub fn samples(&self) -> &[Sample<N>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn start_time(&self) -> f64 {
        self.nodes[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].t
    }

    /// Accepted solver steps, independent of the output grid.
    pub fn steps(&self) -> &[Sample<N>] {
        &self.nodes
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    /// Dense-output value; `None` outside the covered interval.
    pub fn interpolate(&self, t: f64) -> Option<[f64; N]> {
        if !(self.start_time()..=self.end_time()).contains(&t) {
            return None;
        }
        let i = self.nodes.partition_point(|s| s.t <= t).saturating_sub(1);
        if i + 1 == self.nodes.len() {
            return Some(self.nodes[i].y);
        }
        Some(self.step_eval(i, t))
    }

    pub(super) fn step_eval(&self, i: usize, t: f64) -> [f64; N] {
        quintic(&self.nodes[i], &self.midpoints[i], &self.nodes[i + 1], t)
    }

    /// Index of the first step over which `component` rises through `level`.
    pub(super) fn crossing_step(&self, component: usize, level: f64) -> Option<usize> {
        assert!(component < N, "component {component} out of range");
        self.nodes
            .windows(2)
            .position(|w| w[0].y[component] < level && w[1].y[component] >= level)
    }

    /// First time at which `component` rises through `level` between two
    /// accepted steps, located on the dense output by bisection. A step ending
    /// exactly at `level` counts only if the previous one was strictly below.
    pub fn first_upward_crossing(&self, component: usize, level: f64) -> Option<f64> {
        let i = self.crossing_step(component, level)?;
        let (t0, t1) = (self.nodes[i].t, self.nodes[i + 1].t);
        Some(bisect(t0, t1, |t| self.step_eval(i, t)[component] - level))
    }

    pub(super) fn new(first: Sample<N>, model: Model, stats: SolverStats, warnings: Vec<String>) -> Self {
        Self {
            samples: vec![first],
            nodes: vec![first],
            midpoints: Vec::new(),
            model,
            stats,
            warnings,
        }
    }

    pub(super) fn push_step(&mut self, node: Sample<N>, mid: Midpoint<N>) {
        debug_assert!(self.nodes.last().is_none_or(|s| s.t < node.t));
        self.nodes.push(node);
        self.midpoints.push(mid);
    }

    pub(super) fn push_sample(&mut self, sample: Sample<N>) {
        debug_assert!(self.samples.last().is_none_or(|s| s.t < sample.t));
        self.samples.push(sample);
    }
}

impl Trajectory<2> {
    pub fn states(&self) -> impl Iterator<Item = DimlessState> + '_ {
        self.samples
            .iter()
            .map(|s| DimlessState::new(s.t, s.y[0], s.y[1]))
    }

    pub fn state_at(&self, tau: f64) -> Option<DimlessState> {
        self.interpolate(tau).map(|y| DimlessState::new(tau, y[0], y[1]))
    }
}

impl Trajectory<3> {
    pub fn states(&self) -> impl Iterator<Item = DimensionalState> + '_ {
        self.samples
            .iter()
            .map(|s| DimensionalState::new(s.t, s.y[0], s.y[1], s.y[2]))
    }

    pub fn state_at(&self, t: f64) -> Option<DimensionalState> {
        self.interpolate(t)
            .map(|y| DimensionalState::new(t, y[0], y[1], y[2]))
    }
}

/// Hermite interpolation of values and slopes at `s = 0, 1/2, 1`, in Newton
/// form with doubled nodes.
pub(super) fn quintic<const N: usize>(s0: &Sample<N>, m: &Midpoint<N>, s1: &Sample<N>, t: f64) -> [f64; N] {
    const Z: [f64; 6] = [0.0, 0.0, 0.5, 0.5, 1.0, 1.0];
    let h = s1.t - s0.t;
    let s = (t - s0.t) / h;
    let mut out = [0.0; N];
    for (k, o) in out.iter_mut().enumerate() {
        let vals = [s0.y[k], s0.y[k], m.y[k], m.y[k], s1.y[k], s1.y[k]];
        let slopes = [h * s0.dydt[k], h * m.dydt[k], h * s1.dydt[k]];
        // divided-difference table, diagonal kept in q
        let mut q = vals;
        for j in 1..6 {
            for i in (j..6).rev() {
                q[i] = if j == 1 && Z[i] == Z[i - 1] {
                    slopes[i / 2]
                } else {
                    (q[i] - q[i - 1]) / (Z[i] - Z[i - j])
                };
            }
        }
        let mut acc = q[5];
        for j in (0..5).rev() {
            acc = acc * (s - Z[j]) + q[j];
        }
        *o = acc;
    }
    out
}

/// Root of `g` on `[lo, hi]` given `g(lo) < 0 <= g(hi)`, to `1e-13`
/// relative in time.
pub(super) fn bisect(mut lo: f64, mut hi: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    let tol = 1e-13 * hi.abs().max(lo.abs()).max(1e-300);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

//! Synthetic measurement sets and a brute-force fitting oracle shared by the
//! integration tests.
#![allow(dead_code)]

use clockwork::calibration::{predict_raw, sse, Measurement};

/// `k1` used to turn a sampled `eps` into `k0 = eps k1`.
pub const K1: f64 = 1000.0;

/// Noise-free switchover times for five conditions around `rho = m0/c0`.
/// The ratio varies between rows so that `k0` and `phi` are separately
/// identifiable.
pub fn synthetic(eps: f64, rho: f64, phi: f64) -> (f64, Vec<Measurement>) {
    let k0 = eps * K1;
    let rows = [(0.002, 0.6), (0.003, 0.7), (0.004, 0.8), (0.005, 0.9), (0.006, 1.0)]
        .iter()
        .map(|&(c0, f)| {
            let m0 = f * rho * c0;
            Measurement {
                series_id: "s".into(),
                c0,
                m0,
                t_sw_observed: predict_raw(c0, m0, k0, phi),
            }
        })
        .collect();
    (k0, rows)
}

/// `phi` grid for the profile search, spacing 1e-4.
pub const PHI_LO: f64 = -0.1;
pub const PHI_HI: f64 = 0.5;
pub const PHI_POINTS: usize = 6001;

pub fn phi_cell() -> f64 {
    (PHI_HI - PHI_LO) / (PHI_POINTS - 1) as f64
}

/// Best `k0` for a fixed `phi`: the model is linear in `1/k0`.
pub fn profile_k0(data: &[Measurement], phi: f64) -> f64 {
    let (mut tx, mut xx) = (0.0, 0.0);
    for m in data {
        let x = (m.c0 - phi * m.m0) / (m.m0 * m.m0);
        tx += m.t_sw_observed * x;
        xx += x * x;
    }
    xx / tx
}

/// Exhaustive search over the `phi` grid with `k0` profiled out exactly:
/// returns the grid node `(k0, phi)` with the smallest SSE.
pub fn grid_argmin(data: &[Measurement]) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for j in 0..PHI_POINTS {
        let phi = PHI_LO + phi_cell() * j as f64;
        let k0 = profile_k0(data, phi);
        if k0.is_nan() || k0 <= 0.0 {
            continue;
        }
        let s = sse(data, k0, phi);
        if s < best.0 {
            best = (s, k0, phi);
        }
    }
    (best.1, best.2)
}

/// Closed-form least squares in the linear parameters `u = 1/k0`,
/// `v = phi/k0` of `t = u c0/m0^2 - v/m0`: returns `(k0, phi)`.
pub fn linear_oracle(data: &[Measurement]) -> (f64, f64) {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for m in data {
        let x1 = m.c0 / (m.m0 * m.m0);
        let x2 = -1.0 / m.m0;
        a11 += x1 * x1;
        a12 += x1 * x2;
        a22 += x2 * x2;
        b1 += x1 * m.t_sw_observed;
        b2 += x2 * m.t_sw_observed;
    }
    let det = a11 * a22 - a12 * a12;
    let u = (b1 * a22 - a12 * b2) / det;
    let v = (a11 * b2 - a12 * b1) / det;
    (1.0 / u, v / u)
}

//! Three-stage Radau IIA stepping (order 5, L-stable, stiffly accurate).

use super::OdeSystem;

const SQ6: f64 = 2.449_489_742_783_178;

/// Collocation nodes.
pub(super) const C: [f64; 3] = [(4.0 - SQ6) / 10.0, (4.0 + SQ6) / 10.0, 1.0];

/// Butcher matrix.
pub(super) const A: [[f64; 3]; 3] = [
    [
        (88.0 - 7.0 * SQ6) / 360.0,
        (296.0 - 169.0 * SQ6) / 1800.0,
        (-2.0 + 3.0 * SQ6) / 225.0,
    ],
    [
        (296.0 + 169.0 * SQ6) / 1800.0,
        (88.0 + 7.0 * SQ6) / 360.0,
        (-2.0 - 3.0 * SQ6) / 225.0,
    ],
    [(16.0 - SQ6) / 36.0, (16.0 + SQ6) / 36.0, 1.0 / 9.0],
];

const MAX_NEWTON: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum StepFailure {
    SingularMatrix,
    NewtonDiverged,
}

#[derive(Debug, Default, Clone, Copy)]
pub(super) struct Work {
    pub rhs_evals: usize,
    pub jacobian_evals: usize,
    pub factorizations: usize,
}

/// Weighted RMS norm with weights `atol + rtol |y|`.
pub(super) fn scaled_norm<const N: usize>(
    v: &[f64],
    y: &[f64; N],
    rtol: f64,
    atol: f64,
) -> f64 {
    let mut acc = 0.0;
    for (i, vi) in v.iter().enumerate() {
        let w = atol + rtol * y[i % N].abs();
        acc += (vi / w) * (vi / w);
    }
    (acc / v.len() as f64).sqrt()
}

/// Solve the collocation system for one step of size `h` from `(t, y)`.
pub(super) fn step<S: OdeSystem<N>, const N: usize>(
    system: &S,
    t: f64,
    y: &[f64; N],
    h: f64,
    rtol: f64,
    atol: f64,
    work: &mut Work,
) -> Result<[f64; N], StepFailure> {
    let n = 3 * N;
    let jac = system.jacobian(t, y);
    work.jacobian_evals += 1;

    // M = I - h (A kron J)
    let mut m = vec![0.0; n * n];
    for i in 0..3 {
        for j in 0..3 {
            for r in 0..N {
                for c in 0..N {
                    let v = -h * A[i][j] * jac[r][c];
                    m[(i * N + r) * n + j * N + c] = v;
                }
            }
        }
    }
    for k in 0..n {
        m[k * n + k] += 1.0;
    }
    let lu = Lu::factor(m, n).ok_or(StepFailure::SingularMatrix)?;
    work.factorizations += 1;

    let newton_tol = (10.0 * f64::EPSILON / rtol).max(rtol.sqrt().min(0.03));
    let mut z = vec![0.0; n];
    let mut prev_norm = f64::INFINITY;
    for iter in 0..MAX_NEWTON {
        let mut f = [[0.0; N]; 3];
        for (i, fi) in f.iter_mut().enumerate() {
            let mut yi = *y;
            for r in 0..N {
                yi[r] += z[i * N + r];
            }
            *fi = system.rhs(t + C[i] * h, &yi);
        }
        work.rhs_evals += 3;
        let mut rhs = vec![0.0; n];
        for i in 0..3 {
            for r in 0..N {
                let mut acc = 0.0;
                for (j, fj) in f.iter().enumerate() {
                    acc += A[i][j] * fj[r];
                }
                rhs[i * N + r] = h * acc - z[i * N + r];
            }
        }
        lu.solve(&mut rhs);
        for (zi, dz) in z.iter_mut().zip(&rhs) {
            *zi += dz;
        }
        let norm = scaled_norm(&rhs, y, rtol, atol);
        if !norm.is_finite() {
            return Err(StepFailure::NewtonDiverged);
        }
        // eta estimates the remaining iteration error from the contraction rate
        let eta = if iter == 0 {
            1.0
        } else {
            let theta = norm / prev_norm;
            if theta >= 0.99 {
                return Err(StepFailure::NewtonDiverged);
            }
            theta / (1.0 - theta)
        };
        if eta * norm <= newton_tol {
            let mut out = *y;
            for r in 0..N {
                out[r] += z[2 * N + r];
            }
            return Ok(out);
        }
        prev_norm = norm;
    }
    Err(StepFailure::NewtonDiverged)
}

/// Dense LU factorisation with partial pivoting.
struct Lu {
    n: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Vec<f64>, n: usize) -> Option<Self> {
        let mut piv = vec![0; n];
        for k in 0..n {
            let (p, max) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if max == 0.0 || !max.is_finite() {
                return None;
            }
            piv[k] = p;
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
            }
            let d = a[k * n + k];
            for r in k + 1..n {
                let l = a[r * n + k] / d;
                a[r * n + k] = l;
                if l != 0.0 {
                    for c in k + 1..n {
                        a[r * n + c] -= l * a[k * n + c];
                    }
                }
            }
        }
        Some(Self { n, a, piv })
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for r in 1..n {
            let row = &self.a[r * n..r * n + r];
            b[r] -= row.iter().zip(&b[..r]).map(|(l, x)| l * x).sum::<f64>();
        }
        for r in (0..n).rev() {
            let row = &self.a[r * n + r + 1..(r + 1) * n];
            let acc = b[r] - row.iter().zip(&b[r + 1..]).map(|(u, x)| u * x).sum::<f64>();
            b[r] = acc / self.a[r * n + r];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_row_sums_are_nodes() {
        for i in 0..3 {
            let s: f64 = A[i].iter().sum();
            assert!((s - C[i]).abs() < 1e-15);
        }
        // last row holds the quadrature weights, which integrate t^k exactly for k < 5
        for k in 0..5 {
            let q: f64 = (0..3).map(|j| A[2][j] * C[j].powi(k)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-15, "k = {k}");
        }
    }

    #[test]
    fn lu_solves_permuted_system() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let lu = Lu::factor(a, 3).unwrap();
        let mut b = vec![5.0, 3.0, 6.0];
        lu.solve(&mut b);
        let x = b;
        assert!((2.0 * x[1] + x[2] - 5.0).abs() < 1e-14);
        assert!((x[0] + x[1] - 3.0).abs() < 1e-14);
        assert!((3.0 * x[0] + x[2] - 6.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_detected() {
        assert!(Lu::factor(vec![1.0, 2.0, 2.0, 4.0], 2).is_none());
    }
}

//! Error-function family.
//!
//! `erf` and `erfc` come from `libm` (the FreeBSD msun port, < 1 ulp).
//! `erfcx(x) = exp(x^2) erfc(x)` is needed by the corner solution, where
//! `exp(-x^2) / erfc(-x)` would otherwise underflow to `0/0`.

use std::f64::consts::PI;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Past this point the continued fraction converges in a handful of terms
/// and `exp(x^2)` would start to lose relative accuracy.
const CF_CUTOFF: f64 = 12.0;

/// Scaled complementary error function `exp(x^2) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        // erfc(x) = 2 - erfc(-x); exp(x^2) overflows past x ~ -26.6
        let e = (x * x).exp();
        return 2.0 * e - erfcx(-x);
    }
    if x < CF_CUTOFF {
        return exp_x2(x) * erfc(x);
    }
    if x.is_infinite() {
        return 0.0;
    }
    // Laplace continued fraction, evaluated bottom-up:
    // erfc(x) exp(x^2) = (1/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut tail = x;
    for k in (1..=40).rev() {
        tail = x + (k as f64 * 0.5) / tail;
    }
    1.0 / (PI.sqrt() * tail)
}

/// `exp(x^2)` with the square split into an exact high part so the
/// rounding of `x * x` does not get amplified by the exponential.
fn exp_x2(x: f64) -> f64 {
    let hi = (x * 4096.0).trunc() / 4096.0;
    let lo = x - hi;
    // x^2 = hi^2 + lo (2 hi + lo); hi^2 is exact for |x| < 2^20
    (hi * hi).exp() * (lo * (2.0 * hi + lo)).exp()
}

/// `exp(-x^2) / (1 + erf(x))`, evaluated without cancellation for `x << 0`.
pub(crate) fn gauss_over_erf_plus_one(x: f64) -> f64 {
    if x >= 0.0 {
        (-x * x).exp() / (1.0 + erf(x))
    } else {
        // 1 + erf(x) = erfc(-x) = exp(-x^2) erfcx(-x)
        1.0 / erfcx(-x)
    }
}

//! Dawson integral and related error-function variants for real arguments.

use std::f64::consts::PI;

/// Below this argument the Dawson integral is summed from the positive
/// Maclaurin series of `int_0^x exp(s^2) ds`; above it the asymptotic series
/// in `1/x` is truncated at its smallest term (relative error < 1e-16 there).
const DAWSON_CROSSOVER: f64 = 6.5;

/// Dawson integral `daw(x) = exp(-x^2) int_0^x exp(s^2) ds`.
pub fn dawson(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < 0.0 {
        return -dawson(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x < DAWSON_CROSSOVER {
        dawson_series(x)
    } else {
        dawson_asymptotic(x)
    }
}

fn dawson_series(x: f64) -> f64 {
    // int_0^x e^{s^2} ds = sum_n x^{2n+1} / (n! (2n+1)), all terms positive
    let x2 = x * x;
    let mut power = x; // x^{2n+1} / n!
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        power *= x2 / n;
        let term = power / (2.0 * n + 1.0);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum * (-x2).exp()
}

fn dawson_asymptotic(x: f64) -> f64 {
    // daw(x) ~ 1/(2x) sum_k (2k-1)!! / (2x^2)^k
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let next = term * (2 * k - 1) as f64 * inv;
        if next >= term || next < 1e-18 {
            break;
        }
        term = next;
        sum += term;
    }
    sum / (2.0 * x)
}

/// `Im erf(i x) = erfi(x) = (2/sqrt(pi)) exp(x^2) daw(x)`.
pub fn erfi(x: f64) -> f64 {
    2.0 / PI.sqrt() * (x * x).exp() * dawson(x)
}

/// Scaled complementary error function `erfcx(x) = exp(x^2) erfc(x)` for `x >= 0`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < 4.0 {
        return (x * x).exp() * libm::erfc(x);
    }
    // Continued fraction erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
    // evaluated bottom-up; 60 levels is far beyond convergence for x >= 4.
    let mut tail = 0.0;
    for k in (1..=60).rev() {
        tail = (k as f64 / 2.0) / (x + tail);
    }
    1.0 / (PI.sqrt() * (x + tail))
}

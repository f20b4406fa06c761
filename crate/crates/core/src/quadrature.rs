//! Adaptive Gauss-Legendre quadrature for complex-valued integrands.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const RULE_POINTS: usize = 16;
const MAX_DEPTH: u32 = 40;

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(RULE_POINTS))
}

/// Fixed-order Gauss-Legendre estimate on [a, b].
pub fn fixed<F>(f: &F, a: f64, b: f64) -> Complex64
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        acc += f(mid + half * x) * *w;
    }
    acc * half
}

/// Result of an adaptive integration: value and an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
}

/// Adaptive bisection with a 16-point Gauss-Legendre panel rule.
///
/// A panel is accepted when the two-halves estimate agrees with the whole-panel
/// estimate to `abs_tol + rel_tol * |value|` (the tolerance is split between halves).
pub fn adaptive<F>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    if a == b {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
        });
    }
    let whole = fixed(f, a, b);
    let tol = abs_tol.max(rel_tol * whole.norm());
    let mut state = State {
        error: 0.0,
        panels: 0,
    };
    let value = recurse(f, a, b, whole, tol, 0, &mut state);
    let error = state.error;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Quadrature {
            estimate: f64::INFINITY,
        });
    }
    if error > 1e3 * tol.max(f64::MIN_POSITIVE) {
        return Err(Error::Quadrature { estimate: error });
    }
    Ok(Integral { value, error })
}

/// Upper bound on panel bisections per call.
const MAX_PANELS: usize = 1 << 15;

struct State {
    error: f64,
    panels: usize,
}

fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    whole: Complex64,
    tol: f64,
    depth: u32,
    state: &mut State,
) -> Complex64
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    state.panels += 1;
    let mid = 0.5 * (a + b);
    let left = fixed(f, a, mid);
    let right = fixed(f, mid, b);
    let refined = left + right;
    let diff = (refined - whole).norm();
    // differences at rounding level cannot be reduced by further bisection
    let noise = 64.0 * f64::EPSILON * (left.norm() + right.norm());
    if diff <= tol.max(noise)
        || depth >= MAX_DEPTH
        || state.panels >= MAX_PANELS
        || mid <= a
        || mid >= b
    {
        state.error += diff;
        return refined;
    }
    recurse(f, a, mid, left, 0.5 * tol, depth + 1, state)
        + recurse(f, mid, b, right, 0.5 * tol, depth + 1, state)
}

/// Integrate over [a, b] after splitting at the given interior breakpoints.
pub fn adaptive_pieces<F>(f: &F, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    let mut total = Integral {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
    };
    for w in breaks.windows(2) {
        let part = adaptive(f, w[0], w[1], abs_tol / pieces, rel_tol)?;
        total.value += part.value;
        total.error += part.error;
    }
    Ok(total)
}

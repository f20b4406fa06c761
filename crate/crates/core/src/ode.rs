//! Embedded Dormand-Prince 5(4) integrator for complex-valued systems.
//!
//! Steps are clipped so that every requested output time is hit exactly; no
//! interpolation happens between accepted steps.

use num_complex::Complex64;

/// Tolerances and step limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 1e-12,
        }
    }
}

/// The integrator gave up because the step size underflowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepUnderflow {
    pub t: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights are the last row of A; error = b5 - b4
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `times[0]` and record the state at every
/// entry of `times` (strictly increasing). `h0` is the first trial step.
pub fn integrate<F>(
    f: F,
    y0: Vec<Complex64>,
    times: &[f64],
    h0: f64,
    tol: Tolerances,
) -> Result<Vec<Vec<Complex64>>, StepUnderflow>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    let n = y0.len();
    let mut out = Vec::with_capacity(times.len());
    let mut t = times[0];
    let mut y = y0;
    out.push(y.clone());

    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut stage = vec![Complex64::new(0.0, 0.0); n];
    let mut y_new = vec![Complex64::new(0.0, 0.0); n];
    f(t, &y, &mut k[0]);
    let mut h = h0;

    for &target in &times[1..] {
        while t < target {
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step <= 1e-15 * t.abs().max(1.0) {
                return Err(StepUnderflow { t });
            }

            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for j in 0..s {
                        acc += k[j][i] * (step * A[s][j]);
                    }
                    stage[i] = acc;
                }
                f(t + C[s] * step, &stage, &mut k[s]);
            }
            // stage now holds the 5th-order solution (row 6 of A)
            let mut err = 0.0f64;
            for i in 0..n {
                y_new[i] = stage[i];
                let mut e = Complex64::new(0.0, 0.0);
                for j in 0..7 {
                    e += k[j][i] * E[j];
                }
                let e = (e * step).norm();
                let scale = tol.abs + tol.rel * y[i].norm().max(y_new[i].norm());
                err = err.max(e / scale);
            }

            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // a step shortened to land on the grid says little about the natural step
            if !(last && err <= 1.0) || factor < 1.0 {
                h = step * factor;
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn damped_oscillator_matches_exponential() {
        let rate = Complex64::new(-0.5, 3.0);
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let out = integrate(
            |_, y, dy| dy[0] = rate * y[0],
            vec![Complex64::new(1.0, 0.0)],
            &times,
            0.01,
            Tolerances::default(),
        )
        .unwrap();
        for (t, y) in times.iter().zip(&out) {
            let exact = (rate * *t).exp();
            assert!((y[0] - exact).norm() < 1e-9, "t={t}");
        }
    }
}

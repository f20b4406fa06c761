//! Mixed Lorentz / sub-ohmic kernel with a divergent first moment, its
//! half-order expansion `x_0 + lambda x_{1/2}`, and the exact solution by
//! numerical Laplace inversion.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dynamics::Amplitude;
use crate::error::{Error, Result};
use crate::kernels::{check_lambda, check_time, CorrelationFunction, FiniteMoments, MomentTable};
use crate::special::{dawson, erfcx};
use crate::volterra::{Provenance, TimeGrid, Trajectory};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Spectral density `chi g^2 2 gamma/(gamma^2 + w^2) + (1 - chi) g^2 |w|^(1/2) sqrt(2 gamma)/(gamma^2 + w^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixGKernel {
    chi: f64,
    g: f64,
    gamma: f64,
}

impl AppendixGKernel {
    pub fn new(chi: f64, g: f64, gamma: f64) -> Result<Self> {
        if !(chi > 0.0 && chi < 1.0) {
            return Err(Error::param("chi", chi, "mixing weight must lie in (0, 1)"));
        }
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::param("g", g, "coupling must be positive"));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::param("gamma", gamma, "width must be positive"));
        }
        Ok(Self { chi, g, gamma })
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The only finite moment, `G~_0 = chi g^2 / gamma`.
    pub fn g0(&self) -> f64 {
        self.chi * self.g * self.g / self.gamma
    }

    pub fn spectral_density(&self, omega: f64) -> f64 {
        let (g2, gm) = (self.g * self.g, self.gamma);
        let denom = gm * gm + omega * omega;
        self.chi * g2 * 2.0 * gm / denom
            + (1.0 - self.chi) * g2 * omega.abs().sqrt() * (2.0 * gm).sqrt() / denom
    }

    /// `x_0(t) = exp(-G~_0 t)`.
    pub fn x0(&self, t: f64) -> f64 {
        (-self.g0() * t).exp()
    }

    /// Half-order coefficient `x_{1/2}(t)`.
    pub fn x_half(&self, t: f64) -> f64 {
        let a = self.g0();
        let y = (a * t).sqrt();
        -(1.0 - self.chi) / (PI * self.chi).sqrt() * self.g / self.gamma
            * (y + (1.0 - 2.0 * a * t) * dawson(y))
    }

    /// `x_0(t) + lambda x_{1/2}(t)`.
    pub fn half_order_x(&self, lambda: f64, t: f64) -> f64 {
        self.x0(t) + lambda * self.x_half(t)
    }

    /// `x~(p; lambda) = 1 / (p + G~(lambda^2 p))`.
    pub fn x_laplace(&self, lambda: f64, p: Complex64) -> Complex64 {
        1.0 / (p + self.laplace_unchecked(p * lambda * lambda))
    }

    fn laplace_unchecked(&self, p: Complex64) -> Complex64 {
        let g2 = self.g * self.g;
        let sp = p.sqrt();
        let denom = p + self.gamma;
        g2 * (self.chi / denom + (1.0 - self.chi) * sp / ((sp + self.gamma.sqrt()) * denom))
    }

    /// Exact `x(t; lambda)` by fixed-Talbot inversion of `x~(p; lambda)`.
    pub fn exact_x(&self, lambda: f64, t: f64) -> Result<f64> {
        check_lambda(lambda)?;
        check_time(t)?;
        if t == 0.0 {
            return Ok(1.0);
        }
        Ok(talbot(|p| self.x_laplace(lambda, p), t, TALBOT_NODES))
    }

    /// `x'(t; lambda)`, the inverse transform of `p x~(p) - 1`.
    pub fn exact_xdot(&self, lambda: f64, t: f64) -> Result<f64> {
        check_lambda(lambda)?;
        check_time(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(talbot(
            |p| p * self.x_laplace(lambda, p) - 1.0,
            t,
            TALBOT_NODES,
        ))
    }

    pub fn exact_trajectory(&self, lambda: f64, grid: &TimeGrid) -> Result<Trajectory> {
        let mut values = Vec::with_capacity(grid.len());
        let mut derivatives = Vec::with_capacity(grid.len());
        for &t in grid.times() {
            values.push(Complex64::new(self.exact_x(lambda, t)?, 0.0));
            derivatives.push(Complex64::new(self.exact_xdot(lambda, t)?, 0.0));
        }
        let mut traj = Trajectory::new(grid, values, derivatives, lambda, Provenance::ExactGeneric);
        traj.metadata
            .insert("solver".into(), format!("fixed-talbot M={TALBOT_NODES}"));
        Ok(traj)
    }
}

impl CorrelationFunction for AppendixGKernel {
    fn eval_unchecked(&self, t: f64) -> Complex64 {
        let gt = self.gamma * t;
        let y = gt.sqrt();
        let e = (-gt).exp();
        let mixed = e - FRAC_2_SQRT_PI * dawson(y) + erfcx(y);
        Complex64::new(
            self.g * self.g * (self.chi * e + 0.5 * (1.0 - self.chi) * mixed),
            0.0,
        )
    }

    fn laplace(&self, p: Complex64) -> Result<Complex64> {
        if p.re < 0.0 {
            return Err(Error::OutsideConvergence { p, abscissa: 0.0 });
        }
        let pole = Complex64::new(-self.gamma, 0.0);
        if (p - pole).norm() <= 1e-12 * self.gamma {
            return Err(Error::Singularity { p, pole });
        }
        Ok(self.laplace_unchecked(p))
    }

    fn finite_moments(&self) -> FiniteMoments {
        FiniteMoments::UpTo(0)
    }

    fn moments(&self, n: usize) -> Result<MomentTable> {
        if n > 0 {
            return Err(Error::DivergentMoment {
                requested: 1,
                finite: 0,
            });
        }
        MomentTable::from_real(&[self.g0()])
    }

    fn time_scale(&self) -> f64 {
        1.0 / self.gamma
    }

    /// `int_0^T G = g^2 (chi (1 - e^{-gamma T}) + (1 - chi)/2 (2 daw(y)/sqrt(pi) + erfcx(y) - e^{-gamma T})) / gamma`,
    /// `y = sqrt(gamma T)`.
    fn cumulative(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        let gt = self.gamma * t;
        let y = gt.sqrt();
        let mixed = FRAC_2_SQRT_PI * dawson(y) + erfcx(y) - (-gt).exp();
        let value = self.g * self.g / self.gamma
            * (self.chi * -(-gt).exp_m1() + 0.5 * (1.0 - self.chi) * mixed);
        Ok(Complex64::new(value, 0.0))
    }

    fn cumulative_grid(&self, step: f64, n: usize) -> Result<Vec<Complex64>> {
        (0..n).map(|i| self.cumulative(step * i as f64)).collect()
    }
}

pub fn appg_g(kernel: &AppendixGKernel, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(kernel.eval_unchecked(t).re)
}

pub fn appg_laplace(kernel: &AppendixGKernel, p: Complex64) -> Result<Complex64> {
    kernel.laplace(p)
}

pub fn appg_x_half(kernel: &AppendixGKernel, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(kernel.x_half(t))
}

/// Amplitude view of the exact solution at one coupling.
#[derive(Debug, Clone, Copy)]
pub struct AppendixGExact {
    pub kernel: AppendixGKernel,
    pub lambda: f64,
}

impl Amplitude for AppendixGExact {
    fn amplitude(&self, t: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.kernel.exact_x(self.lambda, t)?, 0.0))
    }

    fn amplitude_derivative(&self, t: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.kernel.exact_xdot(self.lambda, t)?, 0.0))
    }
}

/// Nodes of the fixed-Talbot rule; about 0.6 M significant digits before
/// double-precision rounding takes over.
pub const TALBOT_NODES: usize = 24;

/// Fixed-Talbot inversion of a transform of a real function (Abate and
/// Valko): contour `s(theta) = r theta (cot theta + i)`, `r = 2M/(5t)`.
/// All singularities of `f` must lie in `Re p < r` away from the contour.
pub fn talbot<F>(f: F, t: f64, m: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let r = 2.0 * m as f64 / (5.0 * t);
    let mut sum = 0.5 * (f(Complex64::new(r, 0.0)) * (r * t).exp()).re;
    for k in 1..m {
        let theta = k as f64 * PI / m as f64;
        let cot = 1.0 / theta.tan();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        sum += ((s * t).exp() * f(s) * Complex64::new(1.0, sigma)).re;
    }
    r / m as f64 * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;
    use crate::volterra::{self, SinglePeak};

    fn kernel() -> AppendixGKernel {
        AppendixGKernel::new(0.5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(AppendixGKernel::new(0.0, 1.0, 1.0).is_err());
        assert!(AppendixGKernel::new(1.0, 1.0, 1.0).is_err());
        assert!(AppendixGKernel::new(0.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn kernel_values() {
        let k = kernel();
        assert!((appg_g(&k, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(appg_g(&k, -1.0).is_err());
        // large-t: the mixed part decays like t^(-3/2)
        let t: f64 = 400.0;
        let tail = appg_g(&k, t).unwrap() / (0.25 * (-1.0 / PI.sqrt()) * t.powf(-1.5));
        assert!((tail - 1.0).abs() < 0.02, "{tail}");
        // chi -> 1 limit
        let near = AppendixGKernel::new(1.0 - 1e-12, 0.7, 2.0).unwrap();
        assert!((appg_g(&near, 0.8).unwrap() - 0.49 * (-1.6f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn zeroth_moment_and_cumulative() {
        let k = kernel();
        for t in [0.3, 2.0, 15.0] {
            let q = quadrature::adaptive(&|s| k.eval_unchecked(s), 0.0, t, 1e-14, 1e-13)
                .unwrap()
                .value;
            assert!((q - k.cumulative(t).unwrap()).norm() < 1e-11, "t={t}");
        }
        // the tail integral vanishes like T^(-1/2)
        let far = k.cumulative(1e6).unwrap().re;
        assert!((far - 0.5).abs() < 2e-3);
        assert_eq!(k.moments(0).unwrap().get(0).re, 0.5);
        assert!(matches!(k.moments(1), Err(Error::DivergentMoment { .. })));
    }

    #[test]
    fn laplace_transform() {
        let k = kernel();
        assert!((appg_laplace(&k, Complex64::new(0.0, 0.0)).unwrap().re - 0.5).abs() < 1e-15);
        for p in [0.1, 1.0, 10.0] {
            let f = |t: f64| k.eval_unchecked(t) * (-p * t).exp();
            let breaks: Vec<f64> = std::iter::once(0.0)
                .chain((0..60).map(|i| 2f64.powi(i - 10)))
                .collect();
            let q = quadrature::adaptive_pieces(&f, &breaks, 1e-15, 1e-13)
                .unwrap()
                .value;
            let exact = appg_laplace(&k, Complex64::new(p, 0.0)).unwrap();
            assert!((q - exact).norm() < 1e-8, "p={p}");
        }
        // small-p expansion
        let p: f64 = 1e-6;
        let approx = 0.5 + 0.5 * p.sqrt();
        assert!((appg_laplace(&k, Complex64::new(p, 0.0)).unwrap().re - approx).abs() < 5e-6);
        assert!(appg_laplace(&k, Complex64::new(-0.5, 0.0)).is_err());
    }

    #[test]
    fn spectral_density_normalization() {
        let k = kernel();
        // (1/2 pi) int J = G(0) = g^2; w = s^2 removes the cusp, the s^-2
        // tail beyond the last break is added analytically
        let f = |s: f64| Complex64::new(k.spectral_density(s * s) * 2.0 * s, 0.0);
        let breaks: Vec<f64> = std::iter::once(0.0)
            .chain((0..40).map(|i| 2f64.powi(i - 5)))
            .collect();
        let end = *breaks.last().unwrap();
        let body = quadrature::adaptive_pieces(&f, &breaks, 1e-13, 1e-12)
            .unwrap()
            .value
            .re;
        let tail = 2.0 * 0.5 * 2f64.sqrt() / end;
        assert!(((body + tail) / PI - 1.0).abs() < 1e-9);
        for w in [-50.0, -1.0, 0.0, 0.3, 7.0] {
            assert!(k.spectral_density(w) >= 0.0);
        }
    }

    #[test]
    fn x_half_values() {
        let k = kernel();
        assert_eq!(appg_x_half(&k, 0.0).unwrap(), 0.0);
        // decays like t^(-3/2): the O(t^-1/2) pieces cancel
        let t: f64 = 400.0;
        let scaled = k.x_half(t) * t.powf(1.5);
        assert!((scaled - 0.5641).abs() < 0.01, "{scaled}");
        assert!((k.x_half(1e4) * 1e4f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn talbot_reproduces_lorentz_peak() {
        let peak = SinglePeak::new(0.4, 1.0).unwrap();
        let l2 = 0.25;
        let f = |p: Complex64| 1.0 / (p + 0.16 / (l2 * p + 1.0));
        for t in [0.5, 3.0, 20.0] {
            let x = talbot(f, t, TALBOT_NODES);
            assert!((x - peak.exact_x(0.5, t).re).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn exact_agrees_with_trapezoid_solver() {
        let k = kernel();
        let grid = TimeGrid::uniform(3.0, 1201).unwrap();
        let traj = volterra::solve_generic(&k, 0.3, &grid).unwrap();
        for i in (0..grid.len()).step_by(200) {
            let t = grid.times()[i];
            let exact = k.exact_x(0.3, t).unwrap();
            assert!((traj.values[i].re - exact).abs() < 2e-4, "t={t}");
        }
    }

    #[test]
    fn half_order_error_is_second_order() {
        let k = kernel();
        let err = |l: f64| {
            (1..=40)
                .map(|i| {
                    let t = 0.25 * i as f64;
                    (k.exact_x(l, t).unwrap() - k.half_order_x(l, t)).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
    }

    #[test]
    fn exact_derivative_consistent() {
        let k = kernel();
        let h = 1e-4;
        let t = 2.0;
        let fd = (k.exact_x(0.3, t + h).unwrap() - k.exact_x(0.3, t - h).unwrap()) / (2.0 * h);
        assert!((k.exact_xdot(0.3, t).unwrap() - fd).abs() < 1e-6);
    }
}

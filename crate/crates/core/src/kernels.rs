//! Bath correlation functions `G(t)` and their spectral data.
//!
//! Kernels are one-sided (`t >= 0`). The Lorentz-peak family is represented
//! exactly as a finite sum of complex exponentials
//! `G(t) = sum_l g_l^2 exp(-(gamma_l + i dw_l) t)` whose moments and Laplace
//! transform are available in closed form. Other kernels are evaluated
//! numerically behind the same [`CorrelationFunction`] trait.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nonuniversal::AppendixGKernel;
use crate::quadrature;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One Lorentz peak of the spectral density, with detuning measured from the
/// system frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzMode {
    g: f64,
    gamma: f64,
    dw: f64,
}

impl LorentzMode {
    pub fn new(g: f64, gamma: f64, dw: f64) -> Result<Self> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::param("g", g, "coupling must be positive"));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::param("gamma", gamma, "width must be positive"));
        }
        if !dw.is_finite() {
            return Err(Error::param("dw", dw, "detuning must be finite"));
        }
        Ok(Self { g, gamma, dw })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dw(&self) -> f64 {
        self.dw
    }

    /// `g^2`, the weight of the exponential.
    pub fn weight(&self) -> f64 {
        self.g * self.g
    }

    /// Complex decay rate `gamma + i dw`.
    pub fn rate(&self) -> Complex64 {
        Complex64::new(self.gamma, self.dw)
    }

    /// `J_l(omega) = 2 gamma g^2 / (gamma^2 + (omega - dw)^2)` with `omega`
    /// measured relative to the system frequency.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        let d = omega - self.dw;
        2.0 * self.gamma * self.weight() / (self.gamma * self.gamma + d * d)
    }
}

/// Finite sum of Lorentz peaks.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumKernel {
    modes: Vec<LorentzMode>,
}

impl ExpSumKernel {
    pub fn new(modes: Vec<LorentzMode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Config(
                "an exponential-sum kernel needs at least one mode".into(),
            ));
        }
        Ok(Self { modes })
    }

    pub fn single(g: f64, gamma: f64, dw: f64) -> Result<Self> {
        Self::new(vec![LorentzMode::new(g, gamma, dw)?])
    }

    pub fn modes(&self) -> &[LorentzMode] {
        &self.modes
    }

    pub fn min_gamma(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.gamma)
            .fold(f64::INFINITY, f64::min)
    }

    /// Returns `(g, gamma)` when the kernel is one resonant peak.
    pub fn single_resonant(&self) -> Option<(f64, f64)> {
        match self.modes.as_slice() {
            [m] if m.dw == 0.0 => Some((m.g, m.gamma)),
            _ => None,
        }
    }

    /// Total spectral density `J(omega)`, `omega` relative to the system frequency.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        self.modes.iter().map(|m| m.spectral_density(omega)).sum()
    }

    /// Per-mode spectral densities `J_l(omega)`.
    pub fn mode_densities(&self, omega: f64) -> Vec<f64> {
        self.modes
            .iter()
            .map(|m| m.spectral_density(omega))
            .collect()
    }
}

/// The moments `G~_0 .. G~_n`, i.e. the Taylor coefficients of the Laplace
/// transform at `p = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    moments: Vec<Complex64>,
}

impl MomentTable {
    pub fn new(moments: Vec<Complex64>) -> Result<Self> {
        if moments.is_empty() {
            return Err(Error::Config("a moment table needs at least G~_0".into()));
        }
        Ok(Self { moments })
    }

    pub fn from_real(moments: &[f64]) -> Result<Self> {
        Self::new(moments.iter().map(|&m| Complex64::new(m, 0.0)).collect())
    }

    pub fn order(&self) -> usize {
        self.moments.len() - 1
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.moments
    }

    /// `G~_k`; panics when `k` exceeds the table order.
    pub fn get(&self, k: usize) -> Complex64 {
        self.moments[k]
    }

    pub fn require(&self, needed: usize) -> Result<()> {
        if needed > self.order() {
            Err(Error::InsufficientMoments {
                needed,
                available: self.order(),
            })
        } else {
            Ok(())
        }
    }

    /// Truncated Taylor series `sum_k G~_k p^k`.
    pub fn taylor(&self, p: Complex64) -> Complex64 {
        self.moments.iter().rev().fold(ZERO, |acc, g| acc * p + g)
    }
}

/// Which moments of a kernel are finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiniteMoments {
    All,
    /// Moments `0..=k` are finite.
    UpTo(usize),
}

impl FiniteMoments {
    pub fn allows(&self, k: usize) -> bool {
        match self {
            FiniteMoments::All => true,
            FiniteMoments::UpTo(max) => k <= *max,
        }
    }
}

/// Common interface of bath correlation functions.
pub trait CorrelationFunction: Send + Sync {
    /// `G(t)` without validating `t`.
    fn eval_unchecked(&self, t: f64) -> Complex64;

    /// Laplace transform `G~(p)`.
    fn laplace(&self, p: Complex64) -> Result<Complex64>;

    fn finite_moments(&self) -> FiniteMoments;

    /// Moments `G~_0 .. G~_n`.
    fn moments(&self, n: usize) -> Result<MomentTable>;

    /// Characteristic decay time of `|G(t)|`.
    fn time_scale(&self) -> f64;

    fn eval(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        Ok(self.eval_unchecked(t))
    }

    /// `lambda^-2 G(t / lambda^2)`.
    fn eval_scaled(&self, t: f64, lambda: f64) -> Result<Complex64> {
        check_time(t)?;
        check_lambda(lambda)?;
        let l2 = lambda * lambda;
        Ok(self.eval_unchecked(t / l2) / l2)
    }

    /// `int_0^t G(s) ds`.
    fn cumulative(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        let scale = self.time_scale();
        let mut breaks = vec![0.0];
        let mut b = scale;
        while b < t {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(t);
        let f = |s: f64| self.eval_unchecked(s);
        Ok(quadrature::adaptive_pieces(&f, &breaks, 1e-14, 1e-13)?.value)
    }

    /// `[int_0^{j step} G(s) ds for j in 0..n]`, accumulated panel by panel.
    fn cumulative_grid(&self, step: f64, n: usize) -> Result<Vec<Complex64>> {
        let f = |s: f64| self.eval_unchecked(s);
        let mut out = Vec::with_capacity(n);
        let mut acc = ZERO;
        for j in 0..n {
            if j > 0 {
                let a = (j - 1) as f64 * step;
                acc += quadrature::adaptive(&f, a, a + step, 1e-16, 1e-13)?.value;
            }
            out.push(acc);
        }
        Ok(out)
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::param(
            "lambda",
            lambda,
            "coupling scale must be positive",
        ))
    }
}

impl CorrelationFunction for ExpSumKernel {
    fn eval_unchecked(&self, t: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|m| m.weight() * (-m.rate() * t).exp())
            .sum()
    }

    fn laplace(&self, p: Complex64) -> Result<Complex64> {
        let mut acc = ZERO;
        for m in &self.modes {
            let denom = p + m.rate();
            if denom.norm() <= 1e-12 * m.rate().norm() {
                return Err(Error::Singularity { p, pole: -m.rate() });
            }
            acc += m.weight() / denom;
        }
        let abscissa = -self.min_gamma();
        if p.re <= abscissa {
            return Err(Error::OutsideConvergence { p, abscissa });
        }
        Ok(acc)
    }

    fn finite_moments(&self) -> FiniteMoments {
        FiniteMoments::All
    }

    fn moments(&self, n: usize) -> Result<MomentTable> {
        let moments = (0..=n)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                self.modes
                    .iter()
                    .map(|m| sign * m.weight() * m.rate().powi(-(k as i32 + 1)))
                    .sum()
            })
            .collect();
        MomentTable::new(moments)
    }

    fn time_scale(&self) -> f64 {
        1.0 / self.min_gamma()
    }

    fn cumulative(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        Ok(self
            .modes
            .iter()
            .map(|m| {
                let nu = m.rate();
                // (1 - e^{-nu t}) / nu, with the small-argument branch to avoid cancellation
                let z = nu * t;
                let f = if z.norm() < 1e-5 {
                    t * (1.0 - z / 2.0 + z * z / 6.0)
                } else {
                    (1.0 - (-z).exp()) / nu
                };
                m.weight() * f
            })
            .sum())
    }

    fn cumulative_grid(&self, step: f64, n: usize) -> Result<Vec<Complex64>> {
        (0..n).map(|j| self.cumulative(j as f64 * step)).collect()
    }
}

/// Exponential envelope `|G(t)| <= amplitude * exp(-rate t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub amplitude: f64,
    pub rate: f64,
}

type KernelFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
type LaplaceFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A kernel given by an evaluable function, with an optional closed-form
/// Laplace transform. Moments come from adaptive quadrature cut off where the
/// declared envelope falls below `1e-14`.
#[derive(Clone)]
pub struct GenericKernel {
    func: KernelFn,
    laplace: Option<LaplaceFn>,
    finite: FiniteMoments,
    envelope: Envelope,
}

impl fmt::Debug for GenericKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericKernel")
            .field("has_laplace", &self.laplace.is_some())
            .field("finite", &self.finite)
            .field("envelope", &self.envelope)
            .finish()
    }
}

impl GenericKernel {
    pub fn new<F>(func: F, envelope: Envelope) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        if !(envelope.rate > 0.0) || !(envelope.amplitude >= 0.0) {
            return Err(Error::param(
                "envelope.rate",
                envelope.rate,
                "envelope must decay",
            ));
        }
        Ok(Self {
            func: Arc::new(func),
            laplace: None,
            finite: FiniteMoments::All,
            envelope,
        })
    }

    pub fn with_laplace<F>(mut self, laplace: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        self.laplace = Some(Arc::new(laplace));
        self
    }

    pub fn with_finite_moments(mut self, finite: FiniteMoments) -> Self {
        self.finite = finite;
        self
    }

    pub fn zero() -> Self {
        Self::new(
            |_| ZERO,
            Envelope {
                amplitude: 0.0,
                rate: 1.0,
            },
        )
        .expect("valid envelope")
        .with_laplace(|_| ZERO)
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    /// Upper integration limit for `int t^k G(t) dt` so that the envelope tail
    /// stays below `1e-14`.
    fn cutoff(&self, k: usize) -> f64 {
        let Envelope { amplitude, rate } = self.envelope;
        if amplitude == 0.0 {
            return 1.0 / rate;
        }
        let mut t = 1.0 / rate;
        for _ in 0..50 {
            let next = ((amplitude / 1e-14).ln() + k as f64 * t.max(1.0).ln() - rate.ln()) / rate;
            if (next - t).abs() < 1e-9 * t {
                break;
            }
            t = next.max(1.0 / rate);
        }
        t
    }

    /// Numerical Laplace transform by quadrature on `[0, t_max]`.
    pub fn numerical_laplace(&self, p: Complex64, t_max: f64) -> Result<Complex64> {
        let f = |t: f64| (self.func)(t) * (-p * t).exp();
        let breaks = doubling_breaks(1.0 / self.envelope.rate, t_max);
        Ok(quadrature::adaptive_pieces(&f, &breaks, 1e-15, 1e-13)?.value)
    }

    /// Largest deviation between the supplied Laplace transform and numerical
    /// quadrature at the given points.
    pub fn laplace_discrepancy(&self, points: &[Complex64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &p in points {
            let closed = self.laplace(p)?;
            let rate = self.envelope.rate + p.re;
            let t_max = ((self.envelope.amplitude.max(1.0) / 1e-16).ln() / rate).max(1.0);
            let numeric = self.numerical_laplace(p, t_max)?;
            worst = worst.max((closed - numeric).norm());
        }
        Ok(worst)
    }
}

fn doubling_breaks(scale: f64, end: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut b = scale;
    while b < end {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(end);
    breaks
}

impl CorrelationFunction for GenericKernel {
    fn eval_unchecked(&self, t: f64) -> Complex64 {
        (self.func)(t)
    }

    fn laplace(&self, p: Complex64) -> Result<Complex64> {
        match &self.laplace {
            Some(l) => Ok(l(p)),
            None => {
                let rate = self.envelope.rate + p.re;
                if rate <= 0.0 {
                    return Err(Error::OutsideConvergence {
                        p,
                        abscissa: -self.envelope.rate,
                    });
                }
                let t_max = ((self.envelope.amplitude.max(1.0) / 1e-16).ln() / rate).max(1.0);
                self.numerical_laplace(p, t_max)
            }
        }
    }

    fn finite_moments(&self) -> FiniteMoments {
        self.finite
    }

    fn moments(&self, n: usize) -> Result<MomentTable> {
        if let FiniteMoments::UpTo(max) = self.finite {
            if n > max {
                return Err(Error::DivergentMoment {
                    requested: n,
                    finite: max,
                });
            }
        }
        let mut out = Vec::with_capacity(n + 1);
        let mut factorial = 1.0;
        for k in 0..=n {
            if k > 0 {
                factorial *= k as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let f = |t: f64| (self.func)(t) * t.powi(k as i32);
            let breaks = doubling_breaks(1.0 / self.envelope.rate, self.cutoff(k));
            let integral = quadrature::adaptive_pieces(&f, &breaks, 1e-15, 1e-12)?;
            out.push(integral.value * (sign / factorial));
        }
        MomentTable::new(out)
    }

    fn time_scale(&self) -> f64 {
        1.0 / self.envelope.rate
    }
}

/// Any kernel the solvers and the scenario runner understand.
#[derive(Debug, Clone)]
pub enum Kernel {
    ExpSum(ExpSumKernel),
    AppendixG(AppendixGKernel),
    Generic(GenericKernel),
}

impl Kernel {
    pub fn as_expsum(&self) -> Option<&ExpSumKernel> {
        match self {
            Kernel::ExpSum(k) => Some(k),
            _ => None,
        }
    }

    fn inner(&self) -> &dyn CorrelationFunction {
        match self {
            Kernel::ExpSum(k) => k,
            Kernel::AppendixG(k) => k,
            Kernel::Generic(k) => k,
        }
    }
}

impl From<ExpSumKernel> for Kernel {
    fn from(k: ExpSumKernel) -> Self {
        Kernel::ExpSum(k)
    }
}

impl From<AppendixGKernel> for Kernel {
    fn from(k: AppendixGKernel) -> Self {
        Kernel::AppendixG(k)
    }
}

impl From<GenericKernel> for Kernel {
    fn from(k: GenericKernel) -> Self {
        Kernel::Generic(k)
    }
}

impl CorrelationFunction for Kernel {
    fn eval_unchecked(&self, t: f64) -> Complex64 {
        self.inner().eval_unchecked(t)
    }

    fn laplace(&self, p: Complex64) -> Result<Complex64> {
        self.inner().laplace(p)
    }

    fn finite_moments(&self) -> FiniteMoments {
        self.inner().finite_moments()
    }

    fn moments(&self, n: usize) -> Result<MomentTable> {
        self.inner().moments(n)
    }

    fn time_scale(&self) -> f64 {
        self.inner().time_scale()
    }

    fn cumulative(&self, t: f64) -> Result<Complex64> {
        self.inner().cumulative(t)
    }

    fn cumulative_grid(&self, step: f64, n: usize) -> Result<Vec<Complex64>> {
        self.inner().cumulative_grid(step, n)
    }
}

/// `G(t)`; rejects negative times.
pub fn eval_kernel(kernel: &dyn CorrelationFunction, t: f64) -> Result<Complex64> {
    kernel.eval(t)
}

/// `lambda^-2 G(t / lambda^2)`.
pub fn eval_scaled_kernel(
    kernel: &dyn CorrelationFunction,
    t: f64,
    lambda: f64,
) -> Result<Complex64> {
    kernel.eval_scaled(t, lambda)
}

pub fn laplace_g(kernel: &dyn CorrelationFunction, p: Complex64) -> Result<Complex64> {
    kernel.laplace(p)
}

pub fn moments(kernel: &dyn CorrelationFunction, n: usize) -> Result<MomentTable> {
    kernel.moments(n)
}

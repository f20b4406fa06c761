//! Exact solutions `x(t; lambda)` of the scaled Volterra equation
//! `x'(t) = -int_0^t lambda^-2 G((t - s)/lambda^2) x(s) ds`, `x(0) = 1`,
//! and the closed-form single-peak comparators (exact, Born, TCL2/TCL4).

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::dynamics::Amplitude;
use crate::error::{Error, Result};
use crate::kernels::{check_lambda, check_time, CorrelationFunction, ExpSumKernel};
use crate::ode::{self, Tolerances};
use crate::perturbation::ExponentialForm;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Strictly increasing time grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.first() != Some(&0.0) {
            return Err(Error::InvalidGrid("grid must start at t = 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(
                "grid must be strictly increasing".into(),
            ));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("grid contains non-finite times".into()));
        }
        Ok(Self { times })
    }

    /// `n_points` equally spaced points on `[0, t_max]`.
    pub fn uniform(t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::param("t_max", t_max, "must be positive"));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid("need at least two grid points".into()));
        }
        let h = t_max / (n_points - 1) as f64;
        let mut times: Vec<f64> = (0..n_points).map(|i| i as f64 * h).collect();
        times[n_points - 1] = t_max;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().expect("grid is non-empty")
    }

    /// Step size when the grid is uniform to 1e-9 relative accuracy.
    pub fn uniform_step(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let h = self.t_max() / (self.times.len() - 1) as f64;
        let uniform = self
            .times
            .iter()
            .enumerate()
            .all(|(i, t)| (t - i as f64 * h).abs() <= 1e-9 * h.max(self.t_max() * 1e-3));
        uniform.then_some(h)
    }
}

/// Which computation produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    ExactOde,
    ExactClosedForm,
    ExactGeneric,
    Born,
    Tcl2,
    Tcl4,
    Perturbative,
    Uniform,
    ShortTime,
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::ExactOde => "exact-ode",
            Provenance::ExactClosedForm => "exact-closed-form",
            Provenance::ExactGeneric => "exact-generic",
            Provenance::Born => "born",
            Provenance::Tcl2 => "tcl2",
            Provenance::Tcl4 => "tcl4",
            Provenance::Perturbative => "perturbative",
            Provenance::Uniform => "uniform",
            Provenance::ShortTime => "short-time",
        }
    }

    /// Whether the trajectory solves the full equation (and so obeys `|x| <= 1`).
    pub fn is_exact(&self) -> bool {
        matches!(
            self,
            Provenance::ExactOde | Provenance::ExactClosedForm | Provenance::ExactGeneric
        )
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `x(t; lambda)` sampled on a grid together with `x'(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub derivatives: Vec<Complex64>,
    pub lambda: f64,
    pub provenance: Provenance,
    /// Free-form annotations copied into run manifests.
    pub metadata: BTreeMap<String, String>,
}

impl Trajectory {
    pub fn new(
        grid: &TimeGrid,
        values: Vec<Complex64>,
        derivatives: Vec<Complex64>,
        lambda: f64,
        provenance: Provenance,
    ) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        debug_assert_eq!(derivatives.len(), grid.len());
        Self {
            times: grid.times().to_vec(),
            values,
            derivatives,
            lambda,
            provenance,
            metadata: BTreeMap::new(),
        }
    }

    /// Evaluate any amplitude on a grid.
    pub fn sample(
        source: &dyn Amplitude,
        grid: &TimeGrid,
        lambda: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        let mut derivatives = Vec::with_capacity(grid.len());
        for &t in grid.times() {
            values.push(source.amplitude(t)?);
            derivatives.push(source.amplitude_derivative(t)?);
        }
        Ok(Self::new(grid, values, derivatives, lambda, provenance))
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().expect("trajectory is non-empty")
    }

    fn locate(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) || t > self.t_max() * (1.0 + 1e-12) {
            return Err(Error::Extrapolation {
                t,
                t_max: self.t_max(),
            });
        }
        let i = self.times.partition_point(|&s| s <= t);
        Ok(i.clamp(1, self.times.len() - 1) - 1)
    }

    /// Cubic Hermite interpolation of `x` (and `x'`) from the stored samples.
    pub fn interpolate(&self, t: f64) -> Result<(Complex64, Complex64)> {
        let i = self.locate(t)?;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = ((t - t0) / h).clamp(0.0, 1.0);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivatives[i] * h, self.derivatives[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let value = y0 * h00 + d0 * h10 + y1 * h01 + d1 * h11;
        let dh00 = 6.0 * s2 - 6.0 * s;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = -6.0 * s2 + 6.0 * s;
        let dh11 = 3.0 * s2 - 2.0 * s;
        let deriv = (y0 * dh00 + d0 * dh10 + y1 * dh01 + d1 * dh11) / h;
        Ok((value, deriv))
    }
}

impl Amplitude for Trajectory {
    fn amplitude(&self, t: f64) -> Result<Complex64> {
        Ok(self.interpolate(t)?.0)
    }

    fn amplitude_derivative(&self, t: f64) -> Result<Complex64> {
        Ok(self.interpolate(t)?.1)
    }
}

/// Exact `x(t; lambda)` for an exponential-sum kernel.
///
/// The convolution with `sum_l g_l^2 exp(-nu_l t)` is replaced by auxiliary
/// amplitudes `y_l`: `x' = -sum_l y_l`, `y_l' = (g_l^2 x - nu_l y_l) / lambda^2`,
/// `y_l(0) = 0`, integrated with an adaptive Dormand-Prince 5(4) scheme.
pub fn solve_expsum(kernel: &ExpSumKernel, lambda: f64, grid: &TimeGrid) -> Result<Trajectory> {
    solve_expsum_with(kernel, lambda, grid, Tolerances::default())
}

pub fn solve_expsum_with(
    kernel: &ExpSumKernel,
    lambda: f64,
    grid: &TimeGrid,
    tol: Tolerances,
) -> Result<Trajectory> {
    check_lambda(lambda)?;
    let l2 = lambda * lambda;
    let weights: Vec<f64> = kernel.modes().iter().map(|m| m.weight() / l2).collect();
    let rates: Vec<Complex64> = kernel.modes().iter().map(|m| m.rate() / l2).collect();
    let fastest = rates.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let coupling = weights.iter().sum::<f64>().sqrt();
    let h0 = 0.01 / (fastest + coupling);

    let n = kernel.modes().len();
    let mut y0 = vec![ZERO; n + 1];
    y0[0] = ONE;
    let rhs = |_: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let mut sum = ZERO;
        for l in 0..n {
            sum += y[l + 1];
            dy[l + 1] = weights[l] * y[0] - rates[l] * y[l + 1];
        }
        dy[0] = -sum;
    };
    let states =
        ode::integrate(rhs, y0, grid.times(), h0, tol).map_err(|e| Error::StepUnderflow {
            t: e.t,
            lambda,
            rates: kernel.modes().iter().map(|m| m.rate()).collect(),
        })?;
    let values = states.iter().map(|s| s[0]).collect();
    let derivatives = states
        .iter()
        .map(|s| -s[1..].iter().sum::<Complex64>())
        .collect();
    let mut traj = Trajectory::new(grid, values, derivatives, lambda, Provenance::ExactOde);
    traj.metadata
        .insert("solver.rtol".into(), format!("{:e}", tol.rel));
    traj.metadata
        .insert("solver.atol".into(), format!("{:e}", tol.abs));
    Ok(traj)
}

/// Trapezoidal quadrature of the integral form
/// `x(t) = 1 - int_0^t A(t - s) x(s) ds`, `A(u) = int_0^u lambda^-2 G(v/lambda^2) dv`.
///
/// Second-order accurate in the grid step. The grid must be uniform; `x'` is
/// obtained by second-order finite differences on the same grid.
pub fn solve_generic(
    kernel: &dyn CorrelationFunction,
    lambda: f64,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    check_lambda(lambda)?;
    let h = grid.uniform_step().ok_or(Error::NonUniformGrid)?;
    let n = grid.len();
    let l2 = lambda * lambda;
    let a = kernel.cumulative_grid(h / l2, n)?;

    let mut x = vec![ZERO; n];
    x[0] = ONE;
    for i in 1..n {
        let mut acc = a[i] * 0.5 * x[0];
        for j in 1..i {
            acc += a[i - j] * x[j];
        }
        x[i] = ONE - acc * h;
    }
    let derivatives = finite_difference(&x, h);
    let mut traj = Trajectory::new(grid, x, derivatives, lambda, Provenance::ExactGeneric);
    traj.metadata.insert("solver".into(), "trapezoid".into());
    traj.metadata
        .insert("derivative.fd_step".into(), format!("{h:e}"));
    Ok(traj)
}

fn finite_difference(x: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = x.len();
    let mut d = vec![ZERO; n];
    if n < 3 {
        if n == 2 {
            d[1] = (x[1] - x[0]) / h;
        }
        return d;
    }
    // x'(0) = 0 exactly
    for i in 1..n - 1 {
        d[i] = (x[i + 1] - x[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (x[n - 1] * 3.0 - x[n - 2] * 4.0 + x[n - 3]) / (2.0 * h);
    d
}

/// One resonant Lorentz peak, `G(t) = g^2 exp(-gamma t)`, for which the exact,
/// Born and TCL dynamics are available in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePeak {
    pub g: f64,
    pub gamma: f64,
}

/// Relative size of `Delta` below which the confluent limit is used.
const CRITICAL_TOL: f64 = 1e-6;

impl SinglePeak {
    pub fn new(g: f64, gamma: f64) -> Result<Self> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::param("g", g, "coupling must be positive"));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::param("gamma", gamma, "width must be positive"));
        }
        Ok(Self { g, gamma })
    }

    pub fn from_kernel(kernel: &ExpSumKernel) -> Result<Self> {
        let (g, gamma) = kernel
            .single_resonant()
            .ok_or(Error::NotSingleResonantPeak)?;
        Self::new(g, gamma)
    }

    /// `Delta = sqrt((gamma/2)^2 - lambda^2 g^2)`, principal branch
    /// (`+i sqrt(...)` in the oscillatory regime).
    pub fn delta(&self, lambda: f64) -> Complex64 {
        delta_for(self.gamma, lambda * lambda * self.g * self.g)
    }

    /// Whether `Delta` is imaginary at this coupling.
    pub fn is_oscillatory(&self, lambda: f64) -> bool {
        (self.gamma / 2.0).powi(2) < (lambda * self.g).powi(2)
    }

    pub fn exact_x(&self, lambda: f64, t: f64) -> Complex64 {
        two_exponential(self.gamma, lambda, lambda * lambda * self.g * self.g, t).0
    }

    pub fn exact_xdot(&self, lambda: f64, t: f64) -> Complex64 {
        two_exponential(self.gamma, lambda, lambda * lambda * self.g * self.g, t).1
    }

    /// Residue `r(lambda) = (gamma/2 + Delta) / (2 Delta)` of the slow pole.
    pub fn residue(&self, lambda: f64) -> Complex64 {
        let d = self.delta(lambda);
        (self.gamma / 2.0 + d) / (2.0 * d)
    }

    /// Slow pole `p~(lambda) = -(gamma/2 - Delta) / lambda^2`.
    pub fn slow_pole(&self, lambda: f64) -> Complex64 {
        let d = self.delta(lambda);
        -(self.gamma / 2.0 - d) / (lambda * lambda)
    }

    pub fn exponential_form(&self, lambda: f64) -> ExponentialForm {
        ExponentialForm {
            r: self.residue(lambda),
            pole: self.slow_pole(lambda),
        }
    }

    /// Population factor `x'(t)` of the Born integro-differential equation:
    /// the exact form with `Delta' = sqrt((gamma/2)^2 - 2 lambda^2 g^2)`.
    pub fn born_x_prime(&self, lambda: f64, t: f64) -> f64 {
        two_exponential(
            self.gamma,
            lambda,
            2.0 * lambda * lambda * self.g * self.g,
            t,
        )
        .0
        .re
    }

    pub fn born_x_prime_derivative(&self, lambda: f64, t: f64) -> f64 {
        two_exponential(
            self.gamma,
            lambda,
            2.0 * lambda * lambda * self.g * self.g,
            t,
        )
        .1
        .re
    }

    pub fn tcl_gamma(&self, order: TclOrder, lambda: f64, t: f64) -> f64 {
        let a = self.gamma / (lambda * lambda);
        let g2 = self.g * self.g;
        let e = (-a * t).exp();
        let second = 2.0 * g2 / self.gamma * (1.0 - e);
        match order {
            TclOrder::Second => second,
            TclOrder::Fourth => {
                // e^{-at}(sinh(at) - at) = (1 - e^{-2at})/2 - at e^{-at}
                let bracket = 0.5 * (1.0 - e * e) - a * t * e;
                second + lambda * lambda * 4.0 * g2 * g2 / self.gamma.powi(3) * bracket
            }
        }
    }

    /// `int_0^t Gamma_TCL(s) ds` in closed form.
    pub fn tcl_gamma_integral(&self, order: TclOrder, lambda: f64, t: f64) -> f64 {
        let a = self.gamma / (lambda * lambda);
        let g2 = self.g * self.g;
        let e = (-a * t).exp();
        let one_minus_e = -(-a * t).exp_m1();
        let second = 2.0 * g2 / self.gamma * (t - one_minus_e / a);
        match order {
            TclOrder::Second => second,
            TclOrder::Fourth => {
                let one_minus_e2 = -(-2.0 * a * t).exp_m1();
                let inner = 0.5 * t - one_minus_e2 / (4.0 * a) - (one_minus_e - a * t * e) / a;
                second + lambda * lambda * 4.0 * g2 * g2 / self.gamma.powi(3) * inner
            }
        }
    }

    pub fn tcl_x(&self, order: TclOrder, lambda: f64, t: f64) -> f64 {
        (-0.5 * self.tcl_gamma_integral(order, lambda, t)).exp()
    }
}

fn delta_for(gamma: f64, coupling2: f64) -> Complex64 {
    Complex64::new((gamma / 2.0).powi(2) - coupling2, 0.0).sqrt()
}

/// `x` and `x'` of the two-exponential solution with `Delta^2 = (gamma/2)^2 - coupling2`.
fn two_exponential(gamma: f64, lambda: f64, coupling2: f64, t: f64) -> (Complex64, Complex64) {
    let l2 = lambda * lambda;
    let s = t / l2;
    let half = gamma / 2.0;
    let d = delta_for(gamma, coupling2);
    if d.norm() <= CRITICAL_TOL * half {
        let e = (-half * s).exp();
        let x = (1.0 + half * s) * e;
        let xdot = -half * half * s * e / l2;
        return (Complex64::new(x, 0.0), Complex64::new(xdot, 0.0));
    }
    let slow = (-(half - d) * s).exp();
    let fast = (-(half + d) * s).exp();
    let x = ((half + d) * slow - (half - d) * fast) / (2.0 * d);
    // (gamma/2)^2 - Delta^2 = coupling2
    let xdot = coupling2 / l2 * (fast - slow) / (2.0 * d);
    (x, xdot)
}

/// Closed-form `x(t; lambda)` for one resonant peak.
pub fn closed_form_single_peak(g: f64, gamma: f64, lambda: f64, t: f64) -> Result<Complex64> {
    check_lambda(lambda)?;
    check_time(t)?;
    Ok(SinglePeak::new(g, gamma)?.exact_x(lambda, t))
}

/// Closed-form trajectory; flagged in metadata when `Delta` is imaginary.
pub fn closed_form_trajectory(
    peak: &SinglePeak,
    lambda: f64,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    check_lambda(lambda)?;
    let values = grid
        .times()
        .iter()
        .map(|&t| peak.exact_x(lambda, t))
        .collect();
    let derivatives = grid
        .times()
        .iter()
        .map(|&t| peak.exact_xdot(lambda, t))
        .collect();
    let mut traj = Trajectory::new(
        grid,
        values,
        derivatives,
        lambda,
        Provenance::ExactClosedForm,
    );
    if peak.is_oscillatory(lambda) {
        traj.metadata
            .insert("branch".into(), "oscillatory (imaginary Delta)".into());
    }
    Ok(traj)
}

pub fn born_x_prime(g: f64, gamma: f64, lambda: f64, t: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_time(t)?;
    Ok(SinglePeak::new(g, gamma)?.born_x_prime(lambda, t))
}

/// Order of the time-convolutionless master equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TclOrder {
    Second,
    Fourth,
}

impl TryFrom<u32> for TclOrder {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            2 => Ok(TclOrder::Second),
            4 => Ok(TclOrder::Fourth),
            other => Err(Error::UnsupportedTclOrder(other)),
        }
    }
}

pub fn tcl_gamma(order: u32, g: f64, gamma: f64, lambda: f64, t: f64) -> Result<f64> {
    let order = TclOrder::try_from(order)?;
    check_lambda(lambda)?;
    check_time(t)?;
    Ok(SinglePeak::new(g, gamma)?.tcl_gamma(order, lambda, t))
}

/// `x_TCL(t) = exp(-1/2 int_0^t Gamma_TCL)` on a grid.
pub fn tcl_x(order: u32, g: f64, gamma: f64, lambda: f64, grid: &TimeGrid) -> Result<Trajectory> {
    let order = TclOrder::try_from(order)?;
    check_lambda(lambda)?;
    let peak = SinglePeak::new(g, gamma)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut derivatives = Vec::with_capacity(grid.len());
    for &t in grid.times() {
        let x = peak.tcl_x(order, lambda, t);
        values.push(Complex64::new(x, 0.0));
        derivatives.push(Complex64::new(
            -0.5 * peak.tcl_gamma(order, lambda, t) * x,
            0.0,
        ));
    }
    let provenance = match order {
        TclOrder::Second => Provenance::Tcl2,
        TclOrder::Fourth => Provenance::Tcl4,
    };
    Ok(Trajectory::new(
        grid,
        values,
        derivatives,
        lambda,
        provenance,
    ))
}

/// Born trajectory of the population factor `x'(t)`.
pub fn born_trajectory(peak: &SinglePeak, lambda: f64, grid: &TimeGrid) -> Result<Trajectory> {
    check_lambda(lambda)?;
    let values = grid
        .times()
        .iter()
        .map(|&t| Complex64::new(peak.born_x_prime(lambda, t), 0.0))
        .collect();
    let derivatives = grid
        .times()
        .iter()
        .map(|&t| Complex64::new(peak.born_x_prime_derivative(lambda, t), 0.0))
        .collect();
    Ok(Trajectory::new(
        grid,
        values,
        derivatives,
        lambda,
        Provenance::Born,
    ))
}

//! Short-time (Dyson) expansion, the overlap series and the uniform
//! matched expansion `x|uniform = x|corr + x|pert - x|overlap`.

use num_complex::Complex64;

use crate::dynamics::Amplitude;
use crate::error::{Error, Result};
use crate::kernels::{
    check_lambda, check_time, CorrelationFunction, ExpSumKernel, Kernel, MomentTable,
};
use crate::perturbation::{self, PoleExpansion, PolyExp};
use crate::poly::Poly;
use crate::volterra::TimeGrid;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficients `G~_{k,m}` of `(sum_m G~_m p^m)^k`, for `k <= n`, `m <= k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTable {
    rows: Vec<Vec<Complex64>>,
}

impl PowerTable {
    pub fn order(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, k: usize, m: usize) -> Complex64 {
        self.rows[k][m]
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        &self.rows[k]
    }

    /// `sum_{k<=n} sum_{m<=k} (-1)^k G~_{k,m} t^{k-m}/(k-m)! lambda^{2m}`.
    pub fn overlap(&self, lambda: f64, t: f64, n: usize) -> Result<Complex64> {
        self.overlap_impl(lambda, t, n, false)
    }

    pub fn overlap_derivative(&self, lambda: f64, t: f64, n: usize) -> Result<Complex64> {
        self.overlap_impl(lambda, t, n, true)
    }

    fn overlap_impl(&self, lambda: f64, t: f64, n: usize, derivative: bool) -> Result<Complex64> {
        if n > self.order() {
            return Err(Error::OrderMismatch(format!(
                "overlap order {n} exceeds power table order {}",
                self.order()
            )));
        }
        let l2 = lambda * lambda;
        let mut total = ZERO;
        for k in 0..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for m in 0..=k {
                let power = k - m;
                let time = if derivative {
                    if power == 0 {
                        continue;
                    }
                    t.powi(power as i32 - 1) / factorial(power - 1)
                } else {
                    t.powi(power as i32) / factorial(power)
                };
                total += self.rows[k][m] * (sign * time * l2.powi(m as i32));
            }
        }
        Ok(total)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Fill `G~_{k,m}` with `G~_{k,0} = G~_0^k` and
/// `G~_{k,m} = (1/(m G~_0)) sum_{j=1}^m (jk - m + j) G~_j G~_{k,m-j}`.
pub fn power_table(moments: &MomentTable, n: usize) -> Result<PowerTable> {
    moments.require(n)?;
    let g0 = moments.get(0);
    if g0 == ZERO {
        return Err(Error::DegeneratePole);
    }
    let mut rows = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut row = vec![g0.powu(k as u32)];
        for m in 1..=k {
            let mut acc = ZERO;
            for j in 1..=m {
                let w = (j * k + j) as f64 - m as f64;
                acc += moments.get(j) * row[m - j] * w;
            }
            row.push(acc / (g0 * m as f64));
        }
        rows.push(row);
    }
    Ok(PowerTable { rows })
}

pub fn overlap_x(moments: &MomentTable, lambda: f64, t: f64, n: usize) -> Result<Complex64> {
    power_table(moments, n)?.overlap(lambda, t, n)
}

/// `sum_i P_i(t) exp(c_i t)`: closed under integration from 0 and under
/// multiplication by exponentials, so each Dyson iterate of an
/// exponential-sum kernel stays in this class.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPolySum {
    terms: Vec<(Poly, Complex64)>,
    /// Rates closer than this are merged; rates below it count as zero.
    merge_tol: f64,
}

impl ExpPolySum {
    pub fn constant(c: Complex64, merge_tol: f64) -> Self {
        Self {
            terms: vec![(Poly::constant(c), ZERO)],
            merge_tol,
        }
    }

    pub fn terms(&self) -> &[(Poly, Complex64)] {
        &self.terms
    }

    fn push(&mut self, poly: Poly, rate: Complex64) {
        if poly.is_zero() {
            return;
        }
        let rate = if rate.norm() <= self.merge_tol {
            ZERO
        } else {
            rate
        };
        match self
            .terms
            .iter_mut()
            .find(|(_, r)| (*r - rate).norm() <= self.merge_tol)
        {
            Some((p, _)) => *p = &*p + &poly,
            None => self.terms.push((poly, rate)),
        }
    }

    fn add_scaled(&mut self, other: &ExpPolySum, s: Complex64) {
        for (p, r) in &other.terms {
            self.push(p.scale(s), *r);
        }
    }

    /// Multiply by `exp(c t)`.
    fn shift(&self, c: Complex64) -> Self {
        let mut out = Self {
            terms: Vec::new(),
            merge_tol: self.merge_tol,
        };
        for (p, r) in &self.terms {
            out.push(p.clone(), r + c);
        }
        out
    }

    /// `int_0^t` of the sum.
    fn integrate(&self) -> Self {
        let mut out = Self {
            terms: Vec::new(),
            merge_tol: self.merge_tol,
        };
        for (p, a) in &self.terms {
            if *a == ZERO {
                let mut coeffs = vec![ZERO];
                coeffs.extend(
                    p.coeffs()
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c / (j + 1) as f64),
                );
                out.push(Poly::new(coeffs), ZERO);
            } else {
                // primitive exp(a t) Q(t) with Q = sum_j (-1)^j P^(j) / a^(j+1)
                let mut q = Poly::zero();
                let mut deriv = p.clone();
                let mut factor = ONE / a;
                while !deriv.is_zero() {
                    q = &q + &deriv.scale(factor);
                    deriv = deriv.derivative();
                    factor = -factor / a;
                }
                let q0 = q.coeff(0);
                out.push(q, *a);
                out.push(Poly::constant(-q0), ZERO);
            }
        }
        out
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(p, r)| p.eval_real(t) * (r * t).exp())
            .sum()
    }

    pub fn derivative(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(p, r)| (p.derivative().eval_real(t) + p.eval_real(t) * r) * (r * t).exp())
            .sum()
    }
}

/// Closed-form Dyson partial sum `sum_{k<=n} (-1)^k (K^k 1)(t)` of the
/// integral equation for an exponential-sum kernel, where
/// `K f(t) = int_0^t ds int_0^s lambda^-2 G((s - u)/lambda^2) f(u) du`.
#[derive(Debug, Clone, PartialEq)]
pub struct DysonSeries {
    lambda: f64,
    order: usize,
    sum: ExpPolySum,
}

impl DysonSeries {
    pub fn new(kernel: &ExpSumKernel, lambda: f64, n: usize) -> Result<Self> {
        check_lambda(lambda)?;
        let l2 = lambda * lambda;
        let modes: Vec<(Complex64, Complex64)> = kernel
            .modes()
            .iter()
            .map(|m| (Complex64::new(m.weight() / l2, 0.0), m.rate() / l2))
            .collect();
        let scale = modes.iter().map(|(_, mu)| mu.norm()).fold(0.0, f64::max);
        let tol = 1e-9 * scale;
        let mut iterate = ExpPolySum::constant(ONE, tol);
        let mut sum = iterate.clone();
        for k in 1..=n {
            let mut inner = ExpPolySum {
                terms: Vec::new(),
                merge_tol: tol,
            };
            for (w, mu) in &modes {
                let conv = iterate.shift(*mu).integrate().shift(-mu);
                inner.add_scaled(&conv, *w);
            }
            iterate = inner.integrate();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum.add_scaled(&iterate, Complex64::new(sign, 0.0));
        }
        Ok(Self {
            lambda,
            order: n,
            sum,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn expression(&self) -> &ExpPolySum {
        &self.sum
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.sum.eval(t)
    }
}

impl Amplitude for DysonSeries {
    fn amplitude(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        Ok(self.sum.eval(t))
    }

    fn amplitude_derivative(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        Ok(self.sum.derivative(t))
    }
}

/// Dyson partial sums on a uniform grid by iterated trapezoidal quadrature of
/// `K f(t) = int_0^t A(t - s) f(s) ds`, `A` the cumulative scaled kernel.
pub fn short_time_grid(
    kernel: &dyn CorrelationFunction,
    lambda: f64,
    grid: &TimeGrid,
    n: usize,
) -> Result<Vec<Complex64>> {
    check_lambda(lambda)?;
    let h = grid.uniform_step().ok_or(Error::NonUniformGrid)?;
    let len = grid.len();
    let a = kernel.cumulative_grid(h / (lambda * lambda), len)?;
    let mut iterate = vec![ONE; len];
    let mut sum = iterate.clone();
    for k in 1..=n {
        let mut next = vec![ZERO; len];
        for i in 1..len {
            let mut acc = a[i] * 0.5 * iterate[0];
            for j in 1..i {
                acc += a[i - j] * iterate[j];
            }
            next[i] = acc * h;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for (s, v) in sum.iter_mut().zip(&next) {
            *s += v * sign;
        }
        iterate = next;
    }
    Ok(sum)
}

/// Points used by [`short_time_x`] for kernels without a closed form.
const GENERIC_SHORT_TIME_POINTS: usize = 801;

/// `n`-th Dyson partial sum at `t`: closed form for exponential sums,
/// trapezoidal quadrature otherwise.
pub fn short_time_x(kernel: &Kernel, lambda: f64, t: f64, n: usize) -> Result<Complex64> {
    check_time(t)?;
    match kernel {
        Kernel::ExpSum(k) => Ok(DysonSeries::new(k, lambda, n)?.eval(t)),
        other => {
            if t == 0.0 {
                return Ok(ONE);
            }
            let grid = TimeGrid::uniform(t, GENERIC_SHORT_TIME_POINTS)?;
            let values = short_time_grid(other, lambda, &grid, n)?;
            Ok(*values.last().expect("non-empty grid"))
        }
    }
}

/// Which form of the perturbative part enters the uniform expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PerturbativePart {
    /// `sum_{k<=n} x_k(t) lambda^{2k}`.
    #[default]
    Series,
    /// `r(lambda) exp(p~(lambda) t)` with truncated series for `r`, `p~`.
    Exponential,
}

/// Uniform expansion of order `n` for an exponential-sum kernel, with all
/// three pieces precomputed for one `lambda`.
#[derive(Debug, Clone)]
pub struct UniformExpansion {
    lambda: f64,
    order: usize,
    part: PerturbativePart,
    dyson: DysonSeries,
    table: PowerTable,
    terms: Vec<PolyExp>,
    expansion: PoleExpansion,
}

impl UniformExpansion {
    pub fn new(
        kernel: &ExpSumKernel,
        expansion: &PoleExpansion,
        lambda: f64,
        n: usize,
        part: PerturbativePart,
    ) -> Result<Self> {
        if expansion.order() != n || expansion.r_terms.len() != n + 1 {
            return Err(Error::OrderMismatch(format!(
                "uniform order {n} with a pole expansion of order {}",
                expansion.order()
            )));
        }
        let moments = kernel.moments(n)?;
        let terms = (0..=n)
            .map(|k| perturbation::perturbative_term(&moments, k))
            .collect::<Result<_>>()?;
        Ok(Self {
            lambda,
            order: n,
            part,
            dyson: DysonSeries::new(kernel, lambda, n)?,
            table: power_table(&moments, n)?,
            terms,
            expansion: expansion.clone(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn short_time(&self, t: f64) -> Complex64 {
        self.dyson.eval(t)
    }

    pub fn perturbative(&self, t: f64) -> Complex64 {
        match self.part {
            PerturbativePart::Series => perturbation::eval_terms(&self.terms, self.lambda, t),
            PerturbativePart::Exponential => perturbation::x_pert(&self.expansion, self.lambda, t),
        }
    }

    fn perturbative_derivative(&self, t: f64) -> Complex64 {
        match self.part {
            PerturbativePart::Series => {
                perturbation::eval_terms_derivative(&self.terms, self.lambda, t)
            }
            PerturbativePart::Exponential => {
                perturbation::x_pert_derivative(&self.expansion, self.lambda, t)
            }
        }
    }

    pub fn overlap(&self, t: f64) -> Complex64 {
        self.table
            .overlap(self.lambda, t, self.order)
            .expect("table built at this order")
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.short_time(t) + self.perturbative(t) - self.overlap(t)
    }
}

impl Amplitude for UniformExpansion {
    fn amplitude(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        Ok(self.eval(t))
    }

    fn amplitude_derivative(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        let overlap = self.table.overlap_derivative(self.lambda, t, self.order)?;
        Ok(self.dyson.sum.derivative(t) + self.perturbative_derivative(t) - overlap)
    }
}

/// Uniform expansion `x|corr + x|pert - x|overlap` at order `n`, using the
/// series form of the perturbative part.
pub fn uniform_x(
    kernel: &Kernel,
    expansion: &PoleExpansion,
    lambda: f64,
    t: f64,
    n: usize,
) -> Result<Complex64> {
    check_time(t)?;
    if expansion.order() != n {
        return Err(Error::OrderMismatch(format!(
            "uniform order {n} with a pole expansion of order {}",
            expansion.order()
        )));
    }
    match kernel {
        Kernel::ExpSum(k) => {
            Ok(UniformExpansion::new(k, expansion, lambda, n, PerturbativePart::Series)?.eval(t))
        }
        other => {
            let moments = other.moments(n)?;
            let short = short_time_x(other, lambda, t, n)?;
            let pert = perturbation::series_x(&moments, n, lambda, t)?;
            let overlap = overlap_x(&moments, lambda, t, n)?;
            Ok(short + pert - overlap)
        }
    }
}

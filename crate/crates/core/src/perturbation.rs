//! Asymptotic engine for the perturbative part of `x(t; lambda)`: the terms
//! `x_k(t)`, the pole and residue series of `r(lambda) exp(p~(lambda) t)`,
//! the asymptotic generator parameters and the initial-layer size.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::dynamics::{Amplitude, QubitDensity};
use crate::error::{Error, Result};
use crate::kernels::{check_time, ExpSumKernel, MomentTable};
use crate::poly::Poly;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest order for which compositions are enumerated.
pub const MAX_ORDER: usize = 16;

/// `P(t) exp(-decay * t)` with a complex polynomial `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyExp {
    pub poly: Poly,
    pub decay: Complex64,
}

impl PolyExp {
    pub fn new(poly: Poly, decay: Complex64) -> Self {
        Self { poly, decay }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.poly.eval_real(t) * (-self.decay * t).exp()
    }

    /// `d/dt` stays in the class: `(P' - decay P) exp(-decay t)`.
    pub fn derivative(&self) -> Self {
        Self::new(
            &self.poly.derivative() - &self.poly.scale(self.decay),
            self.decay,
        )
    }

    /// Apply the differential operator `op(d/dt)`.
    pub fn apply(&self, op: &Poly) -> Self {
        let mut power = self.clone();
        let mut out = Poly::zero();
        for (j, c) in op.coeffs().iter().enumerate() {
            if j > 0 {
                power = power.derivative();
            }
            out = &out + &power.poly.scale(*c);
        }
        Self::new(out, self.decay)
    }

    pub fn degree(&self) -> Option<usize> {
        self.poly.degree()
    }
}

/// `D_k(p)`, the banded `k x k` determinant with `G~_1` on the diagonal,
/// `G~_0 + p` on the subdiagonal and `G~_j` on the `(j-1)`-th superdiagonal.
///
/// Expanding along the first column gives
/// `D_m = sum_{j<m} (-(G~_0 + p))^j G~_{j+1} D_{m-1-j}` with `D_0 = 1`.
pub fn wronski_d(moments: &MomentTable, k: usize) -> Result<Poly> {
    moments.require(k)?;
    let s = Poly::linear(moments.get(0), ONE);
    let minus_s = -&s;
    let mut powers = vec![Poly::constant(ONE)];
    for j in 1..k {
        powers.push(&powers[j - 1] * &minus_s);
    }
    let mut d = vec![Poly::constant(ONE)];
    for m in 1..=k {
        let mut acc = Poly::zero();
        for j in 0..m {
            acc = &acc + &(&powers[j] * &d[m - 1 - j]).scale(moments.get(j + 1));
        }
        d.push(acc);
    }
    Ok(d.pop().expect("non-empty"))
}

/// `x_k(t) = ((-1)^k / k!) D_k(d/dt) (d/dt)^k (t^k exp(-G~_0 t))`.
pub fn perturbative_term(moments: &MomentTable, k: usize) -> Result<PolyExp> {
    let dk = wronski_d(moments, k)?;
    let mut base = PolyExp::new(Poly::monomial(k), moments.get(0));
    for _ in 0..k {
        base = base.derivative();
    }
    let term = base.apply(&dk);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    Ok(PolyExp::new(
        term.poly.scale(Complex64::new(sign / factorial, 0.0)),
        term.decay,
    ))
}

/// `sum_{k<=n} x_k(t) lambda^{2k}`.
pub fn series_x(moments: &MomentTable, n: usize, lambda: f64, t: f64) -> Result<Complex64> {
    let terms: Vec<PolyExp> = (0..=n)
        .map(|k| perturbative_term(moments, k))
        .collect::<Result<_>>()?;
    Ok(eval_terms(&terms, lambda, t))
}

/// Evaluate precomputed terms `x_0..x_n` at `(lambda, t)`.
pub fn eval_terms(terms: &[PolyExp], lambda: f64, t: f64) -> Complex64 {
    let l2 = lambda * lambda;
    terms
        .iter()
        .rev()
        .fold(ZERO, |acc, term| acc * l2 + term.eval(t))
}

/// Time derivative of `sum_k x_k(t) lambda^{2k}`.
pub fn eval_terms_derivative(terms: &[PolyExp], lambda: f64, t: f64) -> Complex64 {
    let l2 = lambda * lambda;
    terms
        .iter()
        .rev()
        .fold(ZERO, |acc, term| acc * l2 + term.derivative().eval(t))
}

fn compositions(n: usize) -> &'static [Vec<u8>] {
    static TABLE: OnceLock<Vec<Vec<Vec<u8>>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut table: Vec<Vec<Vec<u8>>> = vec![vec![Vec::new()]];
        for m in 1..=MAX_ORDER {
            let mut list = Vec::with_capacity(1 << (m - 1));
            for first in 1..=m {
                for rest in &table[m - first] {
                    let mut c = Vec::with_capacity(rest.len() + 1);
                    c.push(first as u8);
                    c.extend_from_slice(rest);
                    list.push(c);
                }
            }
            table.push(list);
        }
        table
    });
    &table[n]
}

/// Coefficients of `p~(lambda) = sum p~_n lambda^{2n}` and
/// `r(lambda) = sum r_n lambda^{2n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleExpansion {
    pub p_terms: Vec<Complex64>,
    /// Empty until filled by [`residue_series`].
    pub r_terms: Vec<Complex64>,
}

impl PoleExpansion {
    /// Both series to order `n`.
    pub fn compute(moments: &MomentTable, n: usize) -> Result<Self> {
        let pole = pole_series(moments, n)?;
        residue_series(&pole, n)
    }

    pub fn order(&self) -> usize {
        self.p_terms.len() - 1
    }

    fn sum(terms: &[Complex64], lambda: f64) -> Complex64 {
        let l2 = lambda * lambda;
        terms.iter().rev().fold(ZERO, |acc, c| acc * l2 + c)
    }

    /// Partial sum of `p~(lambda)`.
    pub fn pole(&self, lambda: f64) -> Complex64 {
        Self::sum(&self.p_terms, lambda)
    }

    /// Partial sum of `r(lambda)`; `1` when the residue series is absent.
    pub fn residue(&self, lambda: f64) -> Complex64 {
        if self.r_terms.is_empty() {
            ONE
        } else {
            Self::sum(&self.r_terms, lambda)
        }
    }

    /// Truncated copy at a lower order.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            p_terms: self.p_terms[..=n.min(self.order())].to_vec(),
            r_terms: self.r_terms.iter().take(n + 1).copied().collect(),
        }
    }
}

/// `p~_n = -sum over compositions (i_1..i_k) of n of G~_k p~_{i_1-1} ... p~_{i_k-1}`,
/// starting from `p~_0 = -G~_0`.
pub fn pole_series(moments: &MomentTable, n: usize) -> Result<PoleExpansion> {
    if n > MAX_ORDER {
        return Err(Error::OrderTooLarge {
            requested: n,
            max: MAX_ORDER,
        });
    }
    moments.require(n)?;
    let mut p = vec![-moments.get(0)];
    for m in 1..=n {
        let mut acc = ZERO;
        for comp in compositions(m) {
            let prod = comp
                .iter()
                .fold(moments.get(comp.len()), |acc, &i| acc * p[i as usize - 1]);
            acc += prod;
        }
        p.push(-acc);
    }
    Ok(PoleExpansion {
        p_terms: p,
        r_terms: Vec::new(),
    })
}

/// Residue coefficients from `r = 1 + lambda^2 p~^{-1} dp~/dlambda^2`:
/// `r_n = (n p~_n - sum_{k=1}^{n-1} p~_k r_{n-k}) / p~_0`.
pub fn residue_series(pole: &PoleExpansion, n: usize) -> Result<PoleExpansion> {
    if n > pole.order() {
        return Err(Error::OrderMismatch(format!(
            "residue order {n} exceeds pole order {}",
            pole.order()
        )));
    }
    let p = &pole.p_terms;
    if p[0] == ZERO {
        return Err(Error::DegeneratePole);
    }
    let mut r = vec![ONE];
    for m in 1..=n {
        let mut acc = p[m] * m as f64;
        for k in 1..m {
            acc -= p[k] * r[m - k];
        }
        r.push(acc / p[0]);
    }
    Ok(PoleExpansion {
        p_terms: p[..=n].to_vec(),
        r_terms: r,
    })
}

/// `x|pert = r(lambda) exp(p~(lambda) t)`.
pub fn x_pert(expansion: &PoleExpansion, lambda: f64, t: f64) -> Complex64 {
    expansion.residue(lambda) * (expansion.pole(lambda) * t).exp()
}

pub fn x_pert_derivative(expansion: &PoleExpansion, lambda: f64, t: f64) -> Complex64 {
    expansion.pole(lambda) * x_pert(expansion, lambda, t)
}

/// `r exp(p~ t)` for given constants, either summed series or closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialForm {
    pub r: Complex64,
    pub pole: Complex64,
}

impl ExponentialForm {
    pub fn from_series(expansion: &PoleExpansion, lambda: f64) -> Self {
        Self {
            r: expansion.residue(lambda),
            pole: expansion.pole(lambda),
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.r * (self.pole * t).exp()
    }

    pub fn derivative(&self, t: f64) -> Complex64 {
        self.pole * self.eval(t)
    }

    /// `-ln|r| / Re p~`, or `None` when `|r| <= 1`.
    pub fn tstar(&self) -> Result<Option<f64>> {
        self.crossing(1.0)
    }

    /// Time from which the state evolved from `rho0` is physical:
    /// `|r| e^{Re p~ t} <= sqrt(rho_11 - |rho_10|^2) / rho_11`.
    pub fn tstar_for(&self, rho0: &QubitDensity) -> Result<Option<f64>> {
        if rho0.p11 == 0.0 {
            return Ok(None);
        }
        self.crossing((rho0.p11 - rho0.c10.norm_sqr()).max(0.0).sqrt() / rho0.p11)
    }

    fn crossing(&self, level: f64) -> Result<Option<f64>> {
        let start = self.r.norm();
        if start <= level {
            return Ok(None);
        }
        if !(self.pole.re < 0.0) || level <= 0.0 {
            return Err(Error::NoFiniteTstar);
        }
        Ok(Some((start / level).ln() / -self.pole.re))
    }
}

impl Amplitude for ExponentialForm {
    fn amplitude(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        Ok(self.eval(t))
    }

    fn amplitude_derivative(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        Ok(self.derivative(t))
    }
}

/// Time-independent generator of the perturbative part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticGKSL {
    /// `Gamma = -2 Re p~(lambda)`.
    pub gamma_rate: f64,
    /// `Delta Omega = -Im p~(lambda)`.
    pub lamb_shift: f64,
    pub r: Complex64,
}

pub fn asymptotic_gksl(expansion: &PoleExpansion, lambda: f64) -> AsymptoticGKSL {
    let p = expansion.pole(lambda);
    AsymptoticGKSL {
        gamma_rate: -2.0 * p.re,
        lamb_shift: -p.im,
        r: expansion.residue(lambda),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TstarMode {
    /// Leading-order estimate `-lambda^2 Re G~_1 / Re G~_0`.
    Asymptotic,
    /// `-ln|r| / Re p~` from the summed series.
    Exact,
}

/// Time after which the perturbative density matrix is a valid state, or
/// `None` when `|r(lambda)| <= 1` and it is valid from `t = +0`.
pub fn initial_layer_tstar(
    expansion: &PoleExpansion,
    lambda: f64,
    mode: TstarMode,
) -> Result<Option<f64>> {
    let r = expansion.residue(lambda);
    if r.norm() <= 1.0 {
        return Ok(None);
    }
    match mode {
        TstarMode::Exact => ExponentialForm::from_series(expansion, lambda).tstar(),
        TstarMode::Asymptotic => {
            if expansion.r_terms.len() < 2 {
                return Err(Error::InsufficientMoments {
                    needed: 1,
                    available: 0,
                });
            }
            // r_1 = -G~_1 and p~_0 = -G~_0
            let re_g0 = -expansion.p_terms[0].re;
            let re_g1 = -expansion.r_terms[1].re;
            if re_g0 == 0.0 {
                return Err(Error::NoFiniteTstar);
            }
            Ok(Some(-lambda * lambda * re_g1 / re_g0))
        }
    }
}

/// Lorentz-peak estimate
/// `t* = lambda^2 sum_l (J_l(0)/J(0)) (1/gamma_l) (gamma_l^2 - dw_l^2)/(gamma_l^2 + dw_l^2)`.
pub fn lorentz_tstar(kernel: &ExpSumKernel, lambda: f64) -> f64 {
    let parts = kernel.mode_densities(0.0);
    let total: f64 = parts.iter().sum();
    kernel
        .modes()
        .iter()
        .zip(&parts)
        .map(|(m, j)| {
            let (g, d) = (m.gamma(), m.dw());
            j / total / g * (g * g - d * d) / (g * g + d * d)
        })
        .sum::<f64>()
        * lambda
        * lambda
}

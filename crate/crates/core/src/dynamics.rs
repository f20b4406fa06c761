//! From the scalar amplitude `x(t)` to density matrices, generator rates,
//! propagators, two-time correlation functions and physicality checks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::check_time;
use crate::perturbation::ExponentialForm;

/// Below this modulus `x` is treated as a node of the amplitude.
pub const NODE_TOLERANCE: f64 = 1e-13;

/// Anything that provides `x(t)` and `x'(t)` at arbitrary `t >= 0`.
pub trait Amplitude: Send + Sync {
    fn amplitude(&self, t: f64) -> Result<Complex64>;
    fn amplitude_derivative(&self, t: f64) -> Result<Complex64>;
}

/// Qubit state in the `(rho_11, rho_10)` parameterization; trace and
/// hermiticity hold by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensity {
    pub p11: f64,
    pub c10: Complex64,
}

impl QubitDensity {
    pub fn new(p11: f64, c10: Complex64) -> Self {
        Self { p11, c10 }
    }

    pub fn excited() -> Self {
        Self::new(1.0, Complex64::new(0.0, 0.0))
    }

    pub fn ground() -> Self {
        Self::new(0.0, Complex64::new(0.0, 0.0))
    }

    pub fn p00(&self) -> f64 {
        1.0 - self.p11
    }

    pub fn c01(&self) -> Complex64 {
        self.c10.conj()
    }

    pub fn determinant(&self) -> f64 {
        self.p11 * (1.0 - self.p11) - self.c10.norm_sqr()
    }

    /// Positive semidefinite up to `tol`.
    pub fn is_physical_with(&self, tol: f64) -> bool {
        self.p11 >= -tol && self.p11 <= 1.0 + tol && self.determinant() >= -tol
    }

    pub fn is_physical(&self) -> bool {
        self.is_physical_with(1e-12)
    }
}

/// `rho_11 = |x|^2 rho_11(0)`, `rho_10 = x rho_10(0)`.
pub fn density_from_x(x: Complex64, rho0: &QubitDensity) -> QubitDensity {
    QubitDensity::new(x.norm_sqr() * rho0.p11, x * rho0.c10)
}

/// Rates of the time-local generator at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorRates {
    pub gamma_t: f64,
    pub delta_omega_t: f64,
}

/// `Gamma = -2 Re(x'/x)`, `Delta Omega = -Im(x'/x)`.
pub fn generator_rates(x: Complex64, xdot: Complex64) -> Result<GeneratorRates> {
    if x.norm() < NODE_TOLERANCE {
        return Err(Error::NodeSingularity {
            t: f64::NAN,
            abs_x: x.norm(),
        });
    }
    let q = xdot / x;
    Ok(GeneratorRates {
        gamma_t: -2.0 * q.re,
        delta_omega_t: -q.im,
    })
}

/// Generator rates of an amplitude at each time.
pub fn rates_along(amplitude: &dyn Amplitude, times: &[f64]) -> Result<Vec<GeneratorRates>> {
    times
        .iter()
        .map(|&t| {
            let x = amplitude.amplitude(t)?;
            let xdot = amplitude.amplitude_derivative(t)?;
            generator_rates(x, xdot).map_err(|e| match e {
                Error::NodeSingularity { abs_x, .. } => Error::NodeSingularity { t, abs_x },
                other => other,
            })
        })
        .collect()
}

/// The map `Phi_{t1}^{t2}` built from `q = x(t2)/x(t1)`.
pub fn propagator(x_t1: Complex64, x_t2: Complex64, rho: &QubitDensity) -> Result<QubitDensity> {
    if x_t1.norm() < NODE_TOLERANCE {
        return Err(Error::SingularPropagator);
    }
    let q = x_t2 / x_t1;
    Ok(QubitDensity::new(q.norm_sqr() * rho.p11, q * rho.c10))
}

fn ordered(t1: f64, t2: f64) -> Result<()> {
    check_time(t1)?;
    if t2 < t1 {
        return Err(Error::NegativeTime(t2 - t1));
    }
    Ok(())
}

/// `<sigma_-(t2) sigma_+(t1)> = x(t2 - t1)`.
pub fn corr_exact(amplitude: &dyn Amplitude, t1: f64, t2: f64) -> Result<Complex64> {
    ordered(t1, t2)?;
    amplitude.amplitude(t2 - t1)
}

/// Regression-formula value `x(t2) / x(t1)`.
pub fn corr_markov(amplitude: &dyn Amplitude, t1: f64, t2: f64) -> Result<Complex64> {
    ordered(t1, t2)?;
    let x1 = amplitude.amplitude(t1)?;
    if x1.norm() < NODE_TOLERANCE {
        return Err(Error::NodeSingularity {
            t: t1,
            abs_x: x1.norm(),
        });
    }
    Ok(amplitude.amplitude(t2)? / x1)
}

/// Exact correlation divided by `r(lambda)`.
///
/// On the perturbative part `x(t2 - t1) = r e^{p~(t2 - t1)}` while
/// `x(t2)/x(t1) = e^{p~(t2 - t1)}`, so removing the factor `r` is what makes
/// the two agree.
pub fn corr_renormalized(
    amplitude: &dyn Amplitude,
    r: Complex64,
    t1: f64,
    t2: f64,
) -> Result<Complex64> {
    Ok(corr_exact(amplitude, t1, t2)? / r)
}

/// Outcome of checking the positivity inequality along a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalityReport {
    pub times: Vec<f64>,
    pub physical: Vec<bool>,
    /// Earliest time after which every later point is physical; `None` if
    /// the last grid point is still non-physical.
    pub first_physical_time: Option<f64>,
    /// `t*` of the exponential form, when the report was made for one.
    pub tstar_crosscheck: Option<f64>,
}

/// Bisection tolerance for locating the first physical time.
const BISECTION_TOL: f64 = 1e-12;

/// Check `|x(t)|^2 rho_11(0) <= 1 - |rho_10(0)|^2 / rho_11(0)` on a grid; the
/// crossing after the last non-physical grid point is refined by bisection.
pub fn physicality_report(
    amplitude: &dyn Amplitude,
    rho0: &QubitDensity,
    times: &[f64],
) -> Result<PhysicalityReport> {
    if rho0.p11 == 0.0 {
        return Ok(PhysicalityReport {
            times: times.to_vec(),
            physical: vec![true; times.len()],
            first_physical_time: times.first().copied(),
            tstar_crosscheck: None,
        });
    }
    let bound = 1.0 - rho0.c10.norm_sqr() / rho0.p11;
    let excess =
        |t: f64| -> Result<f64> { Ok(amplitude.amplitude(t)?.norm_sqr() * rho0.p11 - bound) };
    let mut physical = Vec::with_capacity(times.len());
    for &t in times {
        physical.push(excess(t)? <= 1e-12);
    }
    let first_physical_time = match physical.iter().rposition(|ok| !ok) {
        None => times.first().copied(),
        Some(i) if i + 1 == times.len() => None,
        Some(i) => {
            let (mut lo, mut hi) = (times[i], times[i + 1]);
            while hi - lo > BISECTION_TOL * hi.max(1.0) {
                let mid = 0.5 * (lo + hi);
                if excess(mid)? <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(hi)
        }
    };
    Ok(PhysicalityReport {
        times: times.to_vec(),
        physical,
        first_physical_time,
        tstar_crosscheck: None,
    })
}

/// Report for an exponential form, with its analytic `t*` attached.
pub fn physicality_report_exponential(
    form: &ExponentialForm,
    rho0: &QubitDensity,
    times: &[f64],
) -> Result<PhysicalityReport> {
    let mut report = physicality_report(form, rho0, times)?;
    if rho0.p11 != 0.0 {
        report.tstar_crosscheck = form.tstar_for(rho0)?;
    }
    Ok(report)
}

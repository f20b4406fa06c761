//! Exact and asymptotic reduced dynamics of a two-level system coupled to a
//! zero-temperature bosonic bath in the rotating-wave approximation.
//!
//! The scalar amplitude `x(t; lambda)` determines the whole reduced density
//! matrix. [`volterra`] computes it exactly, [`perturbation`] and
//! [`matching`] build its weak-coupling expansions, [`nonuniversal`] covers a
//! kernel whose first moment diverges, and [`dynamics`] turns amplitudes into
//! states, rates and correlation functions. [`scenario`] drives everything
//! from a TOML description.

pub mod dynamics;
pub mod error;
pub mod kernels;
pub mod matching;
pub mod nonuniversal;
pub mod ode;
pub mod perturbation;
pub mod poly;
pub mod quadrature;
pub mod scenario;
pub mod special;
pub mod volterra;

pub use dynamics::{
    corr_exact, corr_markov, corr_renormalized, density_from_x, generator_rates,
    physicality_report, physicality_report_exponential, propagator, rates_along, Amplitude,
    GeneratorRates, PhysicalityReport, QubitDensity,
};
pub use error::{Error, Result};
pub use kernels::{
    CorrelationFunction, Envelope, ExpSumKernel, FiniteMoments, GenericKernel, Kernel, LorentzMode,
    MomentTable,
};
pub use matching::{
    overlap_x, power_table, short_time_x, uniform_x, DysonSeries, PerturbativePart, PowerTable,
    UniformExpansion,
};
pub use nonuniversal::AppendixGKernel;
pub use perturbation::{
    asymptotic_gksl, initial_layer_tstar, lorentz_tstar, perturbative_term, pole_series,
    residue_series, series_x, wronski_d, x_pert, AsymptoticGKSL, ExponentialForm, PoleExpansion,
    PolyExp, TstarMode,
};
pub use poly::Poly;
pub use volterra::{
    closed_form_single_peak, solve_expsum, solve_generic, tcl_gamma, tcl_x, Provenance, SinglePeak,
    TclOrder, TimeGrid, Trajectory,
};

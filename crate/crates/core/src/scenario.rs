//! Declarative scenarios: a TOML description of kernel, coupling, time grid
//! and requested curves, evaluated into CSV tables plus a flat `key=value`
//! manifest.
//!
//! ```toml
//! name = "example"
//! lambda = [0.5, 1.0]
//! orders = [1, 2]
//! outputs = ["exact", "pert", "uniform"]
//!
//! [kernel]
//! type = "lorentz"
//! modes = [{ g = 0.4, gamma = 1.0, dw = 0.0 }]
//!
//! [grid]
//! t_max = 8.0
//! n_points = 161
//! ```
//!
//! For a single Lorentz mode the time axis (grid and CSV column) is `gamma t`;
//! otherwise it is the scaled time `t` itself.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;

use crate::dynamics::{self, QubitDensity};
use crate::error::{Error, Result};
use crate::kernels::{CorrelationFunction, ExpSumKernel, Kernel, LorentzMode, MomentTable};
use crate::matching::{power_table, DysonSeries, PerturbativePart, UniformExpansion};
use crate::nonuniversal::AppendixGKernel;
use crate::perturbation::{self, ExponentialForm, PoleExpansion, TstarMode, MAX_ORDER};
use crate::volterra::{self, SinglePeak, TimeGrid, Trajectory};

const FIGURE1: &str = include_str!("../presets/figure1.toml");
const FIGURE2: &str = include_str!("../presets/figure2.toml");

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 2] = ["figure1", "figure2"];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub kernel: KernelSpec,
    pub lambda: LambdaSpec,
    pub grid: GridSpec,
    #[serde(default = "default_orders")]
    pub orders: Vec<usize>,
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub pert_form: PertForm,
    #[serde(default)]
    pub rho0: Rho0Spec,
    /// First time of the two-time correlation tables, in axis units;
    /// defaults to half the grid length.
    #[serde(default)]
    pub correlation_t1: Option<f64>,
}

fn default_name() -> String {
    "scenario".into()
}

fn default_orders() -> Vec<usize> {
    vec![1]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum KernelSpec {
    #[serde(rename = "lorentz")]
    Lorentz { modes: Vec<ModeSpec> },
    #[serde(rename = "appendixG")]
    AppendixG { chi: f64, g: f64, gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub g: f64,
    pub gamma: f64,
    #[serde(default)]
    pub dw: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Single(f64),
    Sweep(Vec<f64>),
}

impl LambdaSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            LambdaSpec::Single(l) => vec![*l],
            LambdaSpec::Sweep(ls) => ls.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Output {
    Exact,
    Pert,
    PertUncorrected,
    Wclt,
    Uniform,
    ShortTime,
    Overlap,
    Born,
    Tcl2,
    Tcl4,
    GammaRate,
    Tstar,
    Correlations,
}

impl Output {
    pub fn name(&self) -> &'static str {
        match self {
            Output::Exact => "exact",
            Output::Pert => "pert",
            Output::PertUncorrected => "pert-uncorrected",
            Output::Wclt => "wclt",
            Output::Uniform => "uniform",
            Output::ShortTime => "short-time",
            Output::Overlap => "overlap",
            Output::Born => "born",
            Output::Tcl2 => "tcl2",
            Output::Tcl4 => "tcl4",
            Output::GammaRate => "gamma-rate",
            Output::Tstar => "tstar",
            Output::Correlations => "correlations",
        }
    }
}

/// How the perturbative part is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PertForm {
    /// `sum_{k<=n} x_k(t) lambda^{2k}`.
    #[default]
    Series,
    /// `r e^{p~ t}` with both series truncated at order `n`.
    Exponential,
    /// Exact `r`, `p~` of a single resonant peak.
    ClosedForm,
}

impl PertForm {
    fn name(&self) -> &'static str {
        match self {
            PertForm::Series => "series",
            PertForm::Exponential => "exponential",
            PertForm::ClosedForm => "closed_form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rho0Spec {
    #[serde(default = "one")]
    pub p11: f64,
    /// `[re, im]` of `rho_10(0)`.
    #[serde(default)]
    pub c10: [f64; 2],
}

fn one() -> f64 {
    1.0
}

impl Default for Rho0Spec {
    fn default() -> Self {
        Self {
            p11: 1.0,
            c10: [0.0, 0.0],
        }
    }
}

impl Rho0Spec {
    pub fn density(&self) -> QubitDensity {
        QubitDensity::new(self.p11, Complex64::new(self.c10[0], self.c10[1]))
    }
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Scenario {
    /// Parse and validate a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| config(e.to_string()))?;
        scenario.build_kernel()?;
        Ok(scenario)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.lambda.values()
    }

    fn wants(&self, output: Output) -> bool {
        self.outputs.contains(&output)
    }

    fn max_order(&self) -> usize {
        self.orders.iter().copied().max().unwrap_or(0)
    }

    /// Check every field and build the kernel it describes.
    pub fn build_kernel(&self) -> Result<Kernel> {
        if self.outputs.is_empty() {
            return Err(config("outputs: at least one curve must be requested"));
        }
        if !(self.grid.t_max > 0.0 && self.grid.t_max.is_finite()) {
            return Err(config(format!(
                "grid.t_max: must be positive, got {}",
                self.grid.t_max
            )));
        }
        if self.grid.n_points < 2 {
            return Err(config(format!(
                "grid.n_points: need at least 2 points, got {}",
                self.grid.n_points
            )));
        }
        let lambdas = self.lambdas();
        if lambdas.is_empty() {
            return Err(config("lambda: sweep list is empty"));
        }
        for (i, l) in lambdas.iter().enumerate() {
            if !(*l > 0.0 && l.is_finite()) {
                return Err(config(format!("lambda[{i}]: must be positive, got {l}")));
            }
        }
        if let Some(&n) = self.orders.iter().find(|&&n| n > MAX_ORDER) {
            return Err(config(format!(
                "orders: {n} exceeds the maximum {MAX_ORDER}"
            )));
        }
        let rho0 = self.rho0.density();
        if !rho0.is_physical() {
            return Err(config("rho0: not a valid density matrix"));
        }
        if let Some(t1) = self.correlation_t1 {
            if !(t1 >= 0.0 && t1 < self.grid.t_max) {
                return Err(config(format!(
                    "correlation_t1: must lie in [0, grid.t_max), got {t1}"
                )));
            }
        }
        let kernel = match &self.kernel {
            KernelSpec::Lorentz { modes } => {
                if modes.is_empty() {
                    return Err(config("kernel.modes: at least one mode is required"));
                }
                let modes = modes
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        LorentzMode::new(m.g, m.gamma, m.dw)
                            .map_err(|e| config(format!("kernel.modes[{i}]: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Kernel::ExpSum(
                    ExpSumKernel::new(modes).map_err(|e| config(format!("kernel: {e}")))?,
                )
            }
            KernelSpec::AppendixG { chi, g, gamma } => Kernel::AppendixG(
                AppendixGKernel::new(*chi, *g, *gamma)
                    .map_err(|e| config(format!("kernel: {e}")))?,
            ),
        };
        let needs_orders = [
            Output::Pert,
            Output::PertUncorrected,
            Output::Uniform,
            Output::ShortTime,
            Output::Overlap,
            Output::Tstar,
        ];
        if self.orders.is_empty() && needs_orders.iter().any(|o| self.wants(*o)) {
            return Err(config("orders: at least one expansion order is required"));
        }
        match &kernel {
            Kernel::ExpSum(k) => {
                let single = k.single_resonant().is_some();
                for o in [Output::Born, Output::Tcl2, Output::Tcl4] {
                    if self.wants(o) && !single {
                        return Err(config(format!(
                            "outputs: `{}` requires a single resonant Lorentz mode",
                            o.name()
                        )));
                    }
                }
                if self.pert_form == PertForm::ClosedForm && !single {
                    return Err(config(
                        "pert_form: `closed_form` requires a single resonant Lorentz mode",
                    ));
                }
            }
            Kernel::AppendixG(_) => {
                let allowed = [Output::Exact, Output::Pert, Output::Wclt, Output::GammaRate];
                if let Some(o) = self.outputs.iter().find(|o| !allowed.contains(o)) {
                    return Err(config(format!(
                        "outputs: `{}` needs finite moments beyond the zeroth, which the appendixG kernel lacks",
                        o.name()
                    )));
                }
            }
            Kernel::Generic(_) => {
                unreachable!("scenario files only describe Lorentz or appendixG kernels")
            }
        }
        Ok(kernel)
    }

    /// Conversion from scaled time to the emitted axis.
    fn time_unit(&self) -> (f64, &'static str) {
        match &self.kernel {
            KernelSpec::Lorentz { modes } if modes.len() == 1 => (modes[0].gamma, "gamma_t"),
            _ => (1.0, "t"),
        }
    }
}

/// A bundled scenario by name.
pub fn preset(name: &str) -> Result<Scenario> {
    match name {
        "figure1" => Scenario::from_toml_str(FIGURE1),
        "figure2" => Scenario::from_toml_str(FIGURE2),
        other => Err(config(format!(
            "unknown preset `{other}` (available: {})",
            PRESETS.join(", ")
        ))),
    }
}

/// Ordered `key=value` record of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn push_f64(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, fmt_f64(value));
    }

    pub fn push_complex(&mut self, key: &str, value: Complex64) {
        self.push_f64(format!("{key}.re"), value.re);
        self.push_f64(format!("{key}.im"), value.im);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// 17 significant digits, fixed layout.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Columns holding 0/1 flags or integers.
    pub integer_columns: Vec<usize>,
}

impl Table {
    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    if self.integer_columns.contains(&j) {
                        format!("{}", *v as i64)
                    } else {
                        fmt_f64(*v)
                    }
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Everything computed for one coupling.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub lambda: f64,
    pub tables: Vec<Table>,
    pub manifest: Manifest,
}

impl RunOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Per-`lambda` context shared by the curve builders.
struct Ctx<'a> {
    scenario: &'a Scenario,
    kernel: &'a Kernel,
    lambda: f64,
    grid: TimeGrid,
    unit: f64,
    axis: &'static str,
    rho0: QubitDensity,
}

impl Ctx<'_> {
    fn curve(&self, name: String, values: &[Complex64]) -> Table {
        let rows = self
            .grid
            .times()
            .iter()
            .zip(values)
            .map(|(&t, &x)| {
                let rho = dynamics::density_from_x(x, &self.rho0);
                vec![
                    t * self.unit,
                    x.re,
                    x.im,
                    rho.p11,
                    rho.c10.re,
                    rho.c10.im,
                    if rho.is_physical() { 1.0 } else { 0.0 },
                ]
            })
            .collect();
        Table {
            name,
            header: [
                self.axis, "value_re", "value_im", "rho11", "rho10_re", "rho10_im", "physical",
            ]
            .map(String::from)
            .to_vec(),
            rows,
            integer_columns: vec![6],
        }
    }

    fn sample(&self, name: String, f: impl Fn(f64) -> Complex64) -> Table {
        let values: Vec<Complex64> = self.grid.times().iter().map(|&t| f(t)).collect();
        self.curve(name, &values)
    }

    fn expsum(&self) -> &ExpSumKernel {
        self.kernel
            .as_expsum()
            .expect("validated as a Lorentz kernel")
    }

    fn peak(&self) -> Result<SinglePeak> {
        SinglePeak::from_kernel(self.expsum())
    }
}

/// Derived constants at one coupling: moments, pole and residue series,
/// GKSL parameters and initial-layer sizes.
fn constants(scenario: &Scenario, kernel: &Kernel, lambda: f64) -> Result<Manifest> {
    let mut m = Manifest::default();
    m.push("scenario", scenario.name.clone());
    match &scenario.kernel {
        KernelSpec::Lorentz { modes } => {
            m.push("kernel.type", "lorentz");
            m.push("kernel.modes", modes.len().to_string());
            for (i, mode) in modes.iter().enumerate() {
                m.push_f64(format!("kernel.mode{i}.g"), mode.g);
                m.push_f64(format!("kernel.mode{i}.gamma"), mode.gamma);
                m.push_f64(format!("kernel.mode{i}.dw"), mode.dw);
            }
        }
        KernelSpec::AppendixG { chi, g, gamma } => {
            m.push("kernel.type", "appendixG");
            m.push_f64("kernel.chi", *chi);
            m.push_f64("kernel.g", *g);
            m.push_f64("kernel.gamma", *gamma);
        }
    }
    m.push_f64("lambda", lambda);
    let (unit, axis) = scenario.time_unit();
    m.push("time_axis", axis);
    m.push_f64("time_unit", unit);
    m.push_f64("rho0.p11", scenario.rho0.p11);
    m.push_f64("rho0.c10.re", scenario.rho0.c10[0]);
    m.push_f64("rho0.c10.im", scenario.rho0.c10[1]);
    m.push(
        "orders",
        scenario
            .orders
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    m.push("pert_form", scenario.pert_form.name());

    if let Kernel::AppendixG(k) = kernel {
        m.push_f64("moments.G0.re", k.g0());
        m.push_f64("moments.G0.im", 0.0);
        m.push("moments.G1", "divergent");
        return Ok(m);
    }

    let n = scenario.max_order();
    m.push("constants.order", n.to_string());
    let moments = kernel.moments(n)?;
    for (k, g) in moments.as_slice().iter().enumerate() {
        m.push_complex(&format!("moments.G{k}"), *g);
    }
    let expansion = PoleExpansion::compute(&moments, n)?;
    for (k, p) in expansion.p_terms.iter().enumerate() {
        m.push_complex(&format!("pole.p{k}"), *p);
    }
    for (k, r) in expansion.r_terms.iter().enumerate() {
        m.push_complex(&format!("residue.r{k}"), *r);
    }
    let gksl = perturbation::asymptotic_gksl(&expansion, lambda);
    m.push_f64("gksl.gamma_rate", gksl.gamma_rate);
    m.push_f64("gksl.lamb_shift", gksl.lamb_shift);
    m.push_complex("gksl.r", gksl.r);
    m.push_f64(
        "tstar.asymptotic",
        asymptotic_tstar(&moments, lambda) * unit,
    );
    match tstar_value(&expansion, lambda) {
        Ok(t) => m.push_f64("tstar.exact", t * unit),
        Err(Error::NoFiniteTstar) => m.push("tstar.exact", "never"),
        Err(e) => return Err(e),
    }
    if let Some(k) = kernel.as_expsum() {
        if k.single_resonant().is_some() {
            let form = SinglePeak::from_kernel(k)?.exponential_form(lambda);
            m.push_complex("closed_form.r", form.r);
            m.push_complex("closed_form.p", form.pole);
            m.push_f64("tstar.closed_form", form.tstar()?.unwrap_or(0.0) * unit);
        }
    }
    Ok(m)
}

/// `-lambda^2 Re G~_1 / Re G~_0`, or NaN without a first moment.
fn asymptotic_tstar(moments: &MomentTable, lambda: f64) -> f64 {
    if moments.order() < 1 {
        return f64::NAN;
    }
    -lambda * lambda * moments.get(1).re / moments.get(0).re
}

/// `t*` of the summed exponential form; zero when it is physical from the start.
fn tstar_value(expansion: &PoleExpansion, lambda: f64) -> Result<f64> {
    Ok(perturbation::initial_layer_tstar(expansion, lambda, TstarMode::Exact)?.unwrap_or(0.0))
}

/// Derived constants for every coupling of a scenario, without trajectories.
pub fn report_constants(scenario: &Scenario) -> Result<Vec<Manifest>> {
    let kernel = scenario.build_kernel()?;
    scenario
        .lambdas()
        .iter()
        .map(|&l| constants(scenario, &kernel, l))
        .collect()
}

fn compute_one(scenario: &Scenario, kernel: &Kernel, lambda: f64) -> Result<RunOutput> {
    let (unit, axis) = scenario.time_unit();
    let grid = TimeGrid::uniform(scenario.grid.t_max / unit, scenario.grid.n_points)?;
    let ctx = Ctx {
        scenario,
        kernel,
        lambda,
        grid,
        unit,
        axis,
        rho0: scenario.rho0.density(),
    };
    let mut manifest = constants(scenario, kernel, lambda)?;
    manifest.push_f64("grid.t_max", scenario.grid.t_max);
    manifest.push("grid.n_points", scenario.grid.n_points.to_string());
    let mut tables = Vec::new();

    let need_exact = scenario.wants(Output::Exact)
        || scenario.wants(Output::GammaRate)
        || scenario.wants(Output::Correlations);
    let exact = if need_exact {
        let traj = match kernel {
            Kernel::ExpSum(k) => volterra::solve_expsum(k, lambda, &ctx.grid)?,
            Kernel::AppendixG(k) => k.exact_trajectory(lambda, &ctx.grid)?,
            Kernel::Generic(k) => volterra::solve_generic(k, lambda, &ctx.grid)?,
        };
        manifest.push("exact.provenance", traj.provenance.name());
        for (k, v) in &traj.metadata {
            manifest.push(format!("exact.{k}"), v.clone());
        }
        Some(traj)
    } else {
        None
    };

    let mut outputs = scenario.outputs.clone();
    outputs.sort();
    outputs.dedup();
    for output in outputs {
        match (output, kernel) {
            (Output::Exact, _) => {
                let traj = exact.as_ref().expect("computed above");
                tables.push(ctx.curve("exact".into(), &traj.values));
            }
            (Output::Pert, Kernel::AppendixG(k)) => {
                tables.push(ctx.sample("half-order".into(), |t| {
                    Complex64::new(k.half_order_x(lambda, t), 0.0)
                }));
            }
            (Output::Wclt, Kernel::AppendixG(k)) => {
                tables.push(ctx.sample("wclt".into(), |t| Complex64::new(k.x0(t), 0.0)));
            }
            (Output::GammaRate, _) => {
                tables.push(gamma_rate_table(
                    &ctx,
                    exact.as_ref().expect("computed above"),
                ));
            }
            (_, Kernel::ExpSum(_)) => tables.extend(expsum_tables(&ctx, output, exact.as_ref())?),
            (o, _) => unreachable!("`{}` rejected during validation", o.name()),
        }
    }
    manifest.push(
        "files",
        tables
            .iter()
            .map(|t| t.file_name())
            .collect::<Vec<_>>()
            .join(","),
    );
    Ok(RunOutput {
        lambda,
        tables,
        manifest,
    })
}

fn expsum_tables(ctx: &Ctx<'_>, output: Output, exact: Option<&Trajectory>) -> Result<Vec<Table>> {
    let lambda = ctx.lambda;
    let form = ctx.scenario.pert_form;
    let mut tables = Vec::new();
    let per_order = |n: usize| -> Result<(MomentTable, PoleExpansion)> {
        let moments = ctx.kernel.moments(n)?;
        let expansion = PoleExpansion::compute(&moments, n)?;
        Ok((moments, expansion))
    };
    match output {
        Output::Pert | Output::PertUncorrected if form == PertForm::ClosedForm => {
            let exp = ctx.peak()?.exponential_form(lambda);
            let (name, exp) = if output == Output::Pert {
                ("pert", exp)
            } else {
                ("pert-uncorrected", uncorrected(exp))
            };
            tables.push(ctx.sample(name.into(), |t| exp.eval(t)));
        }
        Output::Pert => {
            for &n in &ctx.scenario.orders {
                let (moments, expansion) = per_order(n)?;
                let name = format!("pert_n{n}");
                if form == PertForm::Series {
                    let terms = (0..=n)
                        .map(|k| perturbation::perturbative_term(&moments, k))
                        .collect::<Result<Vec<_>>>()?;
                    tables.push(ctx.sample(name, |t| perturbation::eval_terms(&terms, lambda, t)));
                } else {
                    let exp = ExponentialForm::from_series(&expansion, lambda);
                    tables.push(ctx.sample(name, |t| exp.eval(t)));
                }
            }
        }
        Output::PertUncorrected => {
            for &n in &ctx.scenario.orders {
                let (_, expansion) = per_order(n)?;
                let exp = uncorrected(ExponentialForm::from_series(&expansion, lambda));
                tables.push(ctx.sample(format!("pert-uncorrected_n{n}"), |t| exp.eval(t)));
            }
        }
        Output::Wclt => {
            let (_, expansion) = per_order(0)?;
            let exp = ExponentialForm::from_series(&expansion, lambda);
            tables.push(ctx.sample("wclt".into(), |t| exp.eval(t)));
        }
        Output::Uniform => {
            let part = match form {
                PertForm::Exponential => PerturbativePart::Exponential,
                _ => PerturbativePart::Series,
            };
            for &n in &ctx.scenario.orders {
                let (_, expansion) = per_order(n)?;
                let u = UniformExpansion::new(ctx.expsum(), &expansion, lambda, n, part)?;
                tables.push(ctx.sample(format!("uniform_n{n}"), |t| u.eval(t)));
            }
        }
        Output::ShortTime => {
            for &n in &ctx.scenario.orders {
                let dyson = DysonSeries::new(ctx.expsum(), lambda, n)?;
                tables.push(ctx.sample(format!("short-time_n{n}"), |t| dyson.eval(t)));
            }
        }
        Output::Overlap => {
            for &n in &ctx.scenario.orders {
                let (moments, _) = per_order(n)?;
                let table = power_table(&moments, n)?;
                let values = ctx
                    .grid
                    .times()
                    .iter()
                    .map(|&t| table.overlap(lambda, t, n))
                    .collect::<Result<Vec<_>>>()?;
                tables.push(ctx.curve(format!("overlap_n{n}"), &values));
            }
        }
        Output::Born => {
            let traj = volterra::born_trajectory(&ctx.peak()?, lambda, &ctx.grid)?;
            tables.push(ctx.curve("born".into(), &traj.values));
        }
        Output::Tcl2 | Output::Tcl4 => {
            let peak = ctx.peak()?;
            let order = if output == Output::Tcl2 { 2 } else { 4 };
            let traj = volterra::tcl_x(order, peak.g, peak.gamma, lambda, &ctx.grid)?;
            tables.push(ctx.curve(output.name().into(), &traj.values));
        }
        Output::Tstar => tables.push(tstar_table(ctx)?),
        Output::Correlations => tables.push(correlation_table(
            ctx,
            exact.expect("computed for correlations"),
        )?),
        Output::Exact | Output::GammaRate => unreachable!("handled by the caller"),
    }
    Ok(tables)
}

/// Same exponent, initial value 1.
fn uncorrected(form: ExponentialForm) -> ExponentialForm {
    ExponentialForm {
        r: Complex64::new(1.0, 0.0),
        pole: form.pole,
    }
}

fn gamma_rate_table(ctx: &Ctx<'_>, exact: &Trajectory) -> Table {
    let rows = exact
        .times
        .iter()
        .zip(exact.values.iter().zip(&exact.derivatives))
        .map(
            |(&t, (&x, &xdot))| match dynamics::generator_rates(x, xdot) {
                Ok(r) => vec![
                    t * ctx.unit,
                    r.gamma_t,
                    r.delta_omega_t,
                    if r.gamma_t >= 0.0 { 1.0 } else { 0.0 },
                ],
                Err(_) => vec![t * ctx.unit, f64::NAN, f64::NAN, 0.0],
            },
        )
        .collect();
    Table {
        name: "gamma-rate".into(),
        header: [ctx.axis, "gamma_rate", "lamb_shift", "cp_divisible"]
            .map(String::from)
            .to_vec(),
        rows,
        integer_columns: vec![3],
    }
}

/// Initial-layer sizes in axis units: one row per order, or a single row
/// for the closed form.
fn tstar_table(ctx: &Ctx<'_>) -> Result<Table> {
    let lambda = ctx.lambda;
    if ctx.scenario.pert_form == PertForm::ClosedForm {
        let form = ctx.peak()?.exponential_form(lambda);
        let report = dynamics::physicality_report_exponential(&form, &ctx.rho0, ctx.grid.times())?;
        let row = vec![
            asymptotic_tstar(&ctx.kernel.moments(1)?, lambda) * ctx.unit,
            form.tstar()?.unwrap_or(0.0) * ctx.unit,
            report
                .first_physical_time
                .map_or(f64::NAN, |t| t * ctx.unit),
        ];
        return Ok(Table {
            name: "tstar".into(),
            header: ["tstar_asymptotic", "tstar_exact", "first_physical_time"]
                .map(String::from)
                .to_vec(),
            rows: vec![row],
            integer_columns: vec![],
        });
    }
    let mut rows = Vec::new();
    for &n in &ctx.scenario.orders {
        let moments = ctx.kernel.moments(n)?;
        let expansion = PoleExpansion::compute(&moments, n)?;
        let form = ExponentialForm::from_series(&expansion, lambda);
        let report = dynamics::physicality_report_exponential(&form, &ctx.rho0, ctx.grid.times())?;
        rows.push(vec![
            n as f64,
            asymptotic_tstar(&moments, lambda) * ctx.unit,
            tstar_value(&expansion, lambda)? * ctx.unit,
            report
                .first_physical_time
                .map_or(f64::NAN, |t| t * ctx.unit),
        ]);
    }
    Ok(Table {
        name: "tstar".into(),
        header: [
            "order",
            "tstar_asymptotic",
            "tstar_exact",
            "first_physical_time",
        ]
        .map(String::from)
        .to_vec(),
        rows,
        integer_columns: vec![0],
    })
}

/// Exact, regression-formula and renormalized correlations at a fixed
/// `t1`, against the lag `t2 - t1`.
fn correlation_table(ctx: &Ctx<'_>, exact: &Trajectory) -> Result<Table> {
    let lambda = ctx.lambda;
    let t1 = ctx
        .scenario
        .correlation_t1
        .unwrap_or(0.5 * ctx.scenario.grid.t_max)
        / ctx.unit;
    let r = if ctx.scenario.pert_form == PertForm::ClosedForm {
        ctx.peak()?.residue(lambda)
    } else {
        let n = ctx.scenario.max_order();
        PoleExpansion::compute(&ctx.kernel.moments(n)?, n)?.residue(lambda)
    };
    let t_max = exact.t_max();
    let mut rows = Vec::new();
    for &tau in ctx
        .grid
        .times()
        .iter()
        .take_while(|&&tau| t1 + tau <= t_max)
    {
        let t2 = t1 + tau;
        let e = dynamics::corr_exact(exact, t1, t2)?;
        let m = dynamics::corr_markov(exact, t1, t2)?;
        let n = dynamics::corr_renormalized(exact, r, t1, t2)?;
        rows.push(vec![tau * ctx.unit, e.re, e.im, m.re, m.im, n.re, n.im]);
    }
    Ok(Table {
        name: "correlations".into(),
        header: [
            "tau",
            "exact_re",
            "exact_im",
            "markov_re",
            "markov_im",
            "renormalized_re",
            "renormalized_im",
        ]
        .map(String::from)
        .to_vec(),
        rows,
        integer_columns: vec![],
    })
}

/// Evaluate every coupling of the scenario in parallel.
pub fn compute(scenario: &Scenario) -> Result<Vec<RunOutput>> {
    let kernel = scenario.build_kernel()?;
    scenario
        .lambdas()
        .par_iter()
        .map(|&l| compute_one(scenario, &kernel, l))
        .collect()
}

/// Output directory of one coupling: `out` itself for a single value,
/// `out/lambda_<value>` for a sweep.
pub fn lambda_dir(scenario: &Scenario, out: &Path, lambda: f64) -> PathBuf {
    match scenario.lambda {
        LambdaSpec::Single(_) => out.to_path_buf(),
        LambdaSpec::Sweep(_) => out.join(format!("lambda_{lambda}")),
    }
}

fn write_output(dir: &Path, output: &RunOutput) -> Result<Vec<PathBuf>> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let mut written = Vec::new();
    for table in &output.tables {
        let path = dir.join(table.file_name());
        fs::write(&path, table.to_csv()).map_err(io)?;
        written.push(path);
    }
    let path = dir.join("manifest.txt");
    fs::write(&path, output.manifest.to_string()).map_err(io)?;
    written.push(path);
    Ok(written)
}

/// Compute and write every coupling; each lands in its own directory.
pub fn run(scenario: &Scenario, out: &Path) -> Result<Vec<PathBuf>> {
    let kernel = scenario.build_kernel()?;
    let per_lambda = scenario
        .lambdas()
        .par_iter()
        .map(|&l| {
            let output = compute_one(scenario, &kernel, l)?;
            write_output(&lambda_dir(scenario, out, l), &output)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_lambda.into_iter().flatten().collect())
}

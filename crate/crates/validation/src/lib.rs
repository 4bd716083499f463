//! Acceptance criteria, runnable from the library, the `validate`
//! subcommand and the acceptance test target.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use aircomp_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use aircomp_core::analytical::{
    eta_upper_bound, mse_analytic, mse_analytic_both, optimize_eta, AnalyticBreakdown, FrozenRealization, MseVariant,
};
use aircomp_core::experiment::{
    optimal_radius, run_sweep, EtaPolicy, McSettings, NetworkConfig, RadiusSearch, RunConfig, VariantSelection,
};
use aircomp_core::model::{InnerRegion, NetworkParams};
use aircomp_core::montecarlo::{MonteCarlo, MseEstimate};
use aircomp_core::numerics::{try_integrate, QuadratureSpec};
use aircomp_core::specfun::{bessel_i0_scaled, marcum_q1, poisson_inverse_moment, rician_pdf, RicianParams};

/// Agreement threshold in standard errors between analytic and Monte Carlo.
pub const AGREEMENT_Z: f64 = 3.0;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {}: {} ({:.1} s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed_s,
            self.detail
        )
    }
}

fn timed(
    id: u8,
    title: &'static str,
    budget: Option<Duration>,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionOutcome {
    let start = Instant::now();
    let (mut passed, mut detail) = match body() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = start.elapsed();
    if let Some(b) = budget {
        if elapsed > b {
            passed = false;
            detail += &format!("; exceeded runtime budget of {} s", b.as_secs());
        }
    }
    CriterionOutcome {
        id,
        title,
        passed,
        detail,
        elapsed_s: elapsed.as_secs_f64(),
    }
}

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub mc_iters: usize,
    pub seed: u64,
    /// Second seed for the one permitted Campbell rerun.
    pub retry_seed: u64,
    pub mode: InnerRegion,
    /// Worker count compared against a single worker in the determinism check.
    pub threads: usize,
    /// Directory for the determinism sweep outputs.
    pub scratch_dir: PathBuf,
    /// `aircomp` executable; when set, the determinism check also runs its
    /// `sweep` subcommand with 1 and `threads` workers.
    pub sweep_binary: Option<PathBuf>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            mc_iters: 10_000,
            seed: 20_240_101,
            retry_seed: 7_777_777,
            mode: InnerRegion::Clamp,
            threads: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(2)
                .max(2),
            scratch_dir: std::env::temp_dir().join("aircomp-validate"),
            sweep_binary: None,
        }
    }
}

/// Baseline scenario at a given density, radius and Rician factor.
pub fn scenario_params(lambda: f64, radius: f64, rician_b: f64) -> NetworkParams<f64> {
    NetworkParams {
        lambda,
        radius,
        rician_b,
        ..NetworkParams::reference()
    }
}

// ---------------------------------------------------------------- 1

fn poisson_inverse_moment_oracle(x: f64) -> f64 {
    // direct sum of P(K = m) / m with the PMF built by recurrence
    let mut p = (-x).exp();
    let mut sum = 0.0;
    let mut m = 1usize;
    loop {
        p *= x / m as f64;
        sum += p / m as f64;
        if m as f64 > x + 40.0 * (x.sqrt() + 1.0) {
            return sum;
        }
        m += 1;
    }
}

pub fn special_functions() -> CriterionOutcome {
    timed(1, "special functions", Some(Duration::from_secs(10)), || {
        let mut failures = Vec::new();
        let mut worst = [0.0f64; 5];

        for &a in &[0.0, 0.5, 1.0, 2.5, 6.4] {
            if marcum_q1(a, 0.0)? != 1.0 {
                failures.push(format!("Q1({a}, 0) != 1"));
            }
        }
        for &b in &[0.1, 0.5, 1.0, 2.0, 3.0, 5.0] {
            let err = (marcum_q1(0.0, b)? - (-b * b / 2.0f64).exp()).abs();
            worst[0] = worst[0].max(err);
            if err > 1e-12 {
                failures.push(format!("Q1(0, {b}) off by {err:e}"));
            }
        }
        for &a in &[0.5, 1.0, 2.0, 3.0] {
            let expected: f64 = 0.5 * (1.0 + bessel_i0_scaled(a * a)?);
            let err = (marcum_q1(a, a)? - expected).abs();
            worst[1] = worst[1].max(err);
            if err > 1e-10 {
                failures.push(format!("Q1({a}, {a}) off by {err:e}"));
            }
        }
        let spec = QuadratureSpec::default().with_rel_tol(1e-12);
        for &b in &[0.0, 1.0, 10.0, 15.0, 20.0] {
            let rp = RicianParams::new(b)?;
            let upper = rp.los_amplitude + 40.0 * rp.sigma;
            let mass: f64 = try_integrate(|v| rician_pdf(v, &rp), 0.0, upper, &spec)?.value;
            let power: f64 = try_integrate(|v| Ok(v * v * rician_pdf(v, &rp)?), 0.0, upper, &spec)?.value;
            worst[2] = worst[2].max((mass - 1.0).abs());
            worst[3] = worst[3].max((power - 1.0).abs());
            if (mass - 1.0).abs() > 1e-8 || (power - 1.0).abs() > 1e-8 {
                failures.push(format!("B = {b}: mass {mass}, second moment {power}"));
            }
        }
        for &x in &[0.1, 1.0, 10.0, 100.0] {
            let err = (poisson_inverse_moment(x)? - poisson_inverse_moment_oracle(x)).abs();
            worst[4] = worst[4].max(err);
            if err > 1e-10 {
                failures.push(format!("K({x}) off by {err:e}"));
            }
        }
        let detail = format!(
            "max errors: Q1(0,b) {:.1e}, Q1(a,a) {:.1e}, pdf mass {:.1e}, second moment {:.1e}, K {:.1e}{}",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            worst[4],
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {}", failures.join(", "))
            }
        );
        Ok((failures.is_empty(), detail))
    })
}

// ---------------------------------------------------------------- 2

pub fn campbell(opts: &ValidationOptions) -> CriterionOutcome {
    timed(2, "Campbell oracle", Some(Duration::from_secs(60)), || {
        let np = scenario_params(0.05, 15.0, 15.0);
        let describe = |seed: u64| -> Result<(bool, String)> {
            let rep = MonteCarlo::new(opts.mc_iters, seed, InnerRegion::Clamp).campbell_check(&np)?;
            let zs: Vec<String> = rep
                .entries
                .iter()
                .map(|e| format!("{} z={:+.2}", e.functional, e.z))
                .collect();
            Ok((
                rep.max_abs_z() <= AGREEMENT_Z,
                format!("seed {seed}: {}", zs.join(", ")),
            ))
        };
        let (ok, first) = describe(opts.seed)?;
        if ok {
            return Ok((true, first));
        }
        let (ok2, second) = describe(opts.retry_seed)?;
        Ok((ok2, format!("{first}; rerun {second}")))
    })
}

// ---------------------------------------------------------------- 3, 4

/// One point of the density grid with both analytic values and Monte Carlo.
#[derive(Debug, Clone, Serialize)]
pub struct DensityPoint {
    pub radius: f64,
    pub lambda: f64,
    pub eta: f64,
    pub printed: AnalyticBreakdown<f64>,
    pub rederived: AnalyticBreakdown<f64>,
    pub mc: MseEstimate<f64>,
}

impl DensityPoint {
    pub fn z(&self, variant: MseVariant) -> f64 {
        let a = match variant {
            MseVariant::AsPrinted => self.printed.total,
            MseVariant::Rederived => self.rederived.total,
        };
        self.mc.z_score(a)
    }

    /// Expected per-layout MSE conditioned on `K >= 1` with the count kept
    /// inside the expectation: `m / (λπR²) + K(R) (ω²/η) / P(K >= 1)`,
    /// where `m` is the rederived Campbell bracket. Used only to diagnose
    /// disagreement between the analytic MSE and Monte Carlo.
    pub fn conditional_count_mse(&self) -> f64 {
        let b = &self.rederived;
        let x = self.lambda * std::f64::consts::PI * self.radius * self.radius;
        let bracket = 2.0 * std::f64::consts::PI * self.lambda * (b.capped_term + b.geometry_term + b.marcumq_term);
        bracket / x + b.k_factor * b.noise_term / (-(-x).exp_m1())
    }
}

pub const DENSITY_RADII: [f64; 2] = [10.0, 40.0];

pub fn density_lambdas() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 100.0).collect()
}

/// Density grid with per-point optimized η (rederived MSE) and Monte Carlo.
pub fn density_grid(opts: &ValidationOptions) -> Result<Vec<DensityPoint>> {
    let mc = MonteCarlo::new(opts.mc_iters, opts.seed, opts.mode);
    let mut out = Vec::new();
    for &radius in &DENSITY_RADII {
        for lambda in density_lambdas() {
            let np = scenario_params(lambda, radius, 15.0);
            let eta = optimize_eta(&np, MseVariant::Rederived)?.eta;
            let [printed, rederived] = mse_analytic_both(&np, eta)?;
            out.push(DensityPoint {
                radius,
                lambda,
                eta,
                printed,
                rederived,
                mc: mc.estimate_mse(&np, eta)?,
            });
        }
    }
    Ok(out)
}

/// Variant agreeing with Monte Carlo at the most grid points; ties go to
/// the rederived form.
pub fn matching_variant(grid: &[DensityPoint]) -> (MseVariant, [usize; 2]) {
    let count = |v| grid.iter().filter(|p| p.z(v).abs() <= AGREEMENT_Z).count();
    let counts = [count(MseVariant::AsPrinted), count(MseVariant::Rederived)];
    let v = if counts[0] > counts[1] {
        MseVariant::AsPrinted
    } else {
        MseVariant::Rederived
    };
    (v, counts)
}

pub fn analytic_agreement(
    grid: &Result<Vec<DensityPoint>, String>,
    elapsed: Duration,
) -> (CriterionOutcome, MseVariant) {
    let mut selected = MseVariant::Rederived;
    let outcome = timed(3, "analytic MSE vs Monte Carlo", None, || {
        let grid = grid.as_ref().map_err(|e| Error::InvalidArgument(e.clone()))?;
        let (v, counts) = matching_variant(grid);
        selected = v;
        let n = grid.len();
        let unmatched: Vec<&DensityPoint> = grid
            .iter()
            .filter(|p| MseVariant::ALL.iter().all(|&v| p.z(v).abs() > AGREEMENT_Z))
            .collect();
        let same = grid.iter().filter(|p| p.z(v).abs() <= AGREEMENT_Z).count();
        let passed = unmatched.is_empty() && same as f64 >= 0.9 * n as f64;
        let mut detail = format!(
            "matching variant: {v}; agreement within {AGREEMENT_Z} stderr: printed {}/{n}, rederived {}/{n}",
            counts[0], counts[1]
        );
        if !unmatched.is_empty() {
            let pts: Vec<String> = unmatched
                .iter()
                .map(|p| {
                    format!(
                        "R={} λ={:.2}: z_rederived={:+.2} (rel {:+.2}%), z_conditional={:+.2}",
                        p.radius,
                        p.lambda,
                        p.z(MseVariant::Rederived),
                        100.0 * (p.rederived.total / p.mc.mean - 1.0),
                        p.mc.z_score(p.conditional_count_mse())
                    )
                })
                .collect();
            detail += &format!("; no variant agrees at {} points [{}]", unmatched.len(), pts.join("; "));
        }
        Ok((passed, detail))
    });
    let mut outcome = outcome;
    outcome.elapsed_s += elapsed.as_secs_f64();
    if elapsed > Duration::from_secs(600) {
        outcome.passed = false;
        outcome.detail += "; exceeded runtime budget of 600 s";
    }
    (outcome, selected)
}

/// Non-increasing weighted isotonic fit by pool-adjacent-violators.
pub fn isotonic_decreasing(y: &[f64], w: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for (&yi, &wi) in y.iter().zip(w) {
        blocks.push((yi, wi, 1));
        while blocks.len() > 1 {
            let (v2, w2, n2) = blocks[blocks.len() - 1];
            let (v1, w1, n1) = blocks[blocks.len() - 2];
            if v1 >= v2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push(((v1 * w1 + v2 * w2) / (w1 + w2), w1 + w2, n1 + n2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, _, n)| std::iter::repeat_n(v, n))
        .collect()
}

pub fn density_trend(grid: &Result<Vec<DensityPoint>, String>) -> CriterionOutcome {
    timed(4, "Monte Carlo MSE decreasing in density", None, || {
        let grid = grid.as_ref().map_err(|e| Error::InvalidArgument(e.clone()))?;
        let mut passed = true;
        let mut parts = Vec::new();
        for &radius in &DENSITY_RADII {
            let pts: Vec<&DensityPoint> = grid.iter().filter(|p| p.radius == radius).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.mc.mean).collect();
            let se: Vec<f64> = pts.iter().map(|p| p.mc.std_error).collect();
            let w: Vec<f64> = se.iter().map(|s| 1.0 / (s * s)).collect();
            let fit = isotonic_decreasing(&y, &w);
            let dev = y
                .iter()
                .zip(&fit)
                .zip(&se)
                .map(|((a, b), s)| (a - b).abs() / s)
                .fold(0.0, f64::max);
            let strict = y.windows(2).all(|p| p[1] < p[0]);
            passed &= dev < 1.0;
            parts.push(format!(
                "R={radius}: MSE {:.5}→{:.5}, strictly decreasing {strict}, max isotonic deviation {dev:.2} stderr",
                y[0],
                y[y.len() - 1]
            ));
        }
        Ok((passed, parts.join("; ")))
    })
}

// ---------------------------------------------------------------- 5

pub const RADIUS_FACTORS: [f64; 3] = [10.0, 15.0, 20.0];

pub fn radius_reproduction(variant: MseVariant) -> CriterionOutcome {
    timed(5, "optimal access radius", Some(Duration::from_secs(600)), || {
        let search = RadiusSearch::default();
        let mut passed = true;
        let mut parts = Vec::new();
        for &b in &RADIUS_FACTORS {
            let cfg = RunConfig {
                network: NetworkConfig {
                    lambda: 0.05,
                    rician_b: b,
                    ..NetworkConfig::baseline()
                },
                eta_policy: EtaPolicy::Optimize,
                variant: match variant {
                    MseVariant::AsPrinted => VariantSelection::Printed,
                    MseVariant::Rederived => VariantSelection::Rederived,
                },
                ..RunConfig::default()
            };
            let rep = optimal_radius(&cfg, &search)?;
            let o = rep
                .optimum(variant)
                .ok_or_else(|| Error::InvalidArgument("missing variant in radius report".into()))?;
            passed &= !o.boundary;
            let mut part = format!(
                "B={b}: R_opt={:.2} m, MSE {:.6} vs {:.6} at R=5 m, reduction {:.1}%{}",
                o.r_opt,
                o.mse_opt,
                o.mse_ref,
                100.0 * o.reduction,
                if o.boundary { " (boundary optimum)" } else { "" }
            );
            if b == 15.0 {
                let in_band = (10.0..=20.0).contains(&o.r_opt) && (0.05..=0.20).contains(&o.reduction);
                if !in_band {
                    passed = false;
                    let np = cfg.network.resolve()?;
                    let at_opt = NetworkParams { radius: o.r_opt, ..np };
                    let [p, r] = mse_analytic_both(&at_opt, o.eta_opt)?;
                    let bound = eta_upper_bound(&at_opt)?;
                    part += &format!(
                        " [outside R in [10, 20] m / reduction in [5%, 20%]; discrepancy ledger: \
                         variant gap at R_opt printed {:.6} vs rederived {:.6}; bound moment readings \
                         {:.4e} (printed) vs {:.4e} (derived), ratio term {:.4e}]",
                        p.total, r.total, bound.moment_printed, bound.moment_derived, bound.ratio_term
                    );
                }
            }
            parts.push(part);
        }
        Ok((passed, format!("variant {variant}: {}", parts.join("; "))))
    })
}

// ---------------------------------------------------------------- 6

const DENSE_POINTS: usize = 1000;

fn dense_log_grid(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..DENSE_POINTS)
        .map(|i| (a + (b - a) * i as f64 / (DENSE_POINTS - 1) as f64).exp())
        .collect()
}

fn dense_argmin(np: &NetworkParams<f64>, variant: MseVariant, grid: &[f64]) -> Result<(usize, f64)> {
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&eta| mse_analytic(np, eta, variant).map(|b| b.total))
        .collect::<Result<_>>()?;
    Ok(values.iter().enumerate().fold(
        (0, f64::INFINITY),
        |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
    ))
}

pub fn eta_optimization() -> CriterionOutcome {
    timed(6, "denoising-factor optimization", None, || {
        let np = scenario_params(0.05, 15.0, 15.0);
        let mut passed = true;
        let mut parts = Vec::new();
        for variant in MseVariant::ALL {
            let opt = optimize_eta(&np, variant)?;
            // wide grid past the search bound, then a second grid over the
            // four cells around its minimum
            let wide = dense_log_grid(opt.search_lower, 10.0 * opt.search_upper);
            let (wi, wide_mse) = dense_argmin(&np, variant, &wide)?;
            let contained = wide[wi] <= opt.search_upper;
            let fine = dense_log_grid(wide[wi.saturating_sub(2)], wide[(wi + 2).min(DENSE_POINTS - 1)]);
            let (fi, fine_mse) = dense_argmin(&np, variant, &fine)?;
            let grid_eta = fine[fi];
            let grid_mse = wide_mse.min(fine_mse);
            let eta_rel = (opt.eta - grid_eta).abs() / grid_eta;
            let mse_rel = (opt.mse - grid_mse) / grid_mse;
            let ok = contained && eta_rel <= 0.01 && mse_rel <= 1e-3;
            passed &= ok;
            parts.push(format!(
                "{variant}: eta_opt {:.6} vs grid {:.6} (rel {:.1e}), MSE excess {:.1e}, bound {:.4e}{} contains grid optimum: {contained}",
                opt.eta,
                grid_eta,
                eta_rel,
                mse_rel,
                opt.search_upper,
                if opt.inflations > 0 { format!(" (inflated x10^{})", opt.inflations) } else { String::new() },
            ));
        }
        Ok((passed, parts.join("; ")))
    })
}

// ---------------------------------------------------------------- 7

pub fn eta_star_property(seed: u64) -> CriterionOutcome {
    timed(7, "per-layout stationary point", None, || {
        let radius = 15.0;
        let np = scenario_params(5.0 / (std::f64::consts::PI * radius * radius), radius, 15.0);
        let eta_ref = optimize_eta(&scenario_params(0.05, radius, 15.0), MseVariant::Rederived)?.eta;
        let mc = MonteCarlo::new(1, seed, InnerRegion::Clamp);
        let mut checked = 0;
        let mut violations = Vec::new();
        let mut index = 0u64;
        while checked < 20 {
            let re = mc.realization(&np, index)?;
            index += 1;
            if !(1..=10).contains(&re.len()) {
                continue;
            }
            let frozen = FrozenRealization::new(&re, eta_ref, &np)?;
            let star = frozen.extreme_point()?;
            let g = frozen.objective(star);
            let (up, down) = (frozen.objective(star * 1.1), frozen.objective(star / 1.1));
            if !(g <= up && g <= down) {
                violations.push(format!(
                    "layout {} (K={}): G*={g}, G(1.1)={up}, G(1/1.1)={down}",
                    index - 1,
                    re.len()
                ));
            }
            checked += 1;
        }
        Ok((
            violations.is_empty(),
            format!(
                "{checked} layouts, eta_ref {eta_ref:.4}, {} violations {}",
                violations.len(),
                violations.join("; ")
            ),
        ))
    })
}

// ---------------------------------------------------------------- 8

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn binary_sweep(opts: &ValidationOptions, binary: &Path, threads: usize, dir: &Path) -> Result<Vec<u8>> {
    let status = std::process::Command::new(binary)
        .arg("sweep")
        .args(["--seed", &opts.seed.to_string()])
        .args(["--iters", &opts.mc_iters.to_string()])
        .args(["--mode", opts.mode.as_str()])
        .args(["--threads", &threads.to_string()])
        .arg("--out")
        .arg(dir)
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(|source| Error::Io {
            path: binary.to_path_buf(),
            source,
        })?;
    if !status.success() {
        return Err(Error::Config(format!(
            "{} sweep exited with {status}",
            binary.display()
        )));
    }
    read_bytes(&dir.join("results.csv"))
}

pub fn determinism(opts: &ValidationOptions) -> CriterionOutcome {
    timed(8, "deterministic sweep output", None, || {
        let run = |threads: usize, dir: PathBuf| -> Result<Vec<u8>> {
            let cfg = RunConfig {
                mc: McSettings {
                    iters: opts.mc_iters,
                    seed: opts.seed,
                    mode: opts.mode,
                },
                output_dir: dir,
                ..RunConfig::default()
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            let out = pool.install(|| run_sweep(&cfg))?;
            read_bytes(&out.results_csv)
        };
        let base = &opts.scratch_dir;
        let serial = run(1, base.join("serial"))?;
        let mut outputs = vec![
            run(opts.threads, base.join("parallel"))?,
            run(opts.threads, base.join("parallel-repeat"))?,
        ];
        let mut runs = "library sweep with 1 and N workers and a repeat";
        if let Some(binary) = &opts.sweep_binary {
            outputs.push(binary_sweep(opts, binary, 1, &base.join("binary-serial"))?);
            outputs.push(binary_sweep(opts, binary, opts.threads, &base.join("binary-parallel"))?);
            outputs.push(binary_sweep(
                opts,
                binary,
                opts.threads,
                &base.join("binary-parallel-repeat"),
            )?);
            runs = "library and `aircomp sweep` runs with 1 and N workers, each repeated";
        }
        let same = outputs.iter().all(|o| *o == serial);
        Ok((
            same,
            format!(
                "{runs} (N = {}): results.csv {} ({} bytes)",
                opts.threads,
                if same { "byte-identical" } else { "DIFFERS" },
                serial.len()
            ),
        ))
    })
}

/// Writes `validation.json` with every outcome.
pub fn write_outcomes(dir: &Path, outcomes: &[CriterionOutcome]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join("validation.json");
    std::fs::write(&path, serde_json::to_string_pretty(outcomes)?).map_err(|source| Error::Io { path, source })
}

/// Run every criterion in order, reusing the density grid for 3 and 4 and
/// the variant selected by 3 for 5.
pub fn run_all(opts: &ValidationOptions, mut report: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
    let mut out = Vec::new();
    let mut push = |o: CriterionOutcome, out: &mut Vec<CriterionOutcome>| {
        report(&o);
        out.push(o);
    };
    push(special_functions(), &mut out);
    push(campbell(opts), &mut out);
    let start = Instant::now();
    let grid = density_grid(opts).map_err(|e| e.to_string());
    let (c3, variant) = analytic_agreement(&grid, start.elapsed());
    push(c3, &mut out);
    push(density_trend(&grid), &mut out);
    push(radius_reproduction(variant), &mut out);
    push(eta_optimization(), &mut out);
    push(eta_star_property(opts.seed), &mut out);
    push(determinism(opts), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotonic_fit_pools_violators() {
        let fit = isotonic_decreasing(&[5.0, 3.0, 4.0, 1.0], &[1.0; 4]);
        assert_eq!(fit, vec![5.0, 3.5, 3.5, 1.0]);
        let already = isotonic_decreasing(&[3.0, 2.0, 1.0], &[1.0, 2.0, 3.0]);
        assert_eq!(already, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn pmf_oracle_small_mean() {
        let x = 0.1f64;
        let direct: f64 = (1..30)
            .map(|m| {
                let fact: f64 = (1..=m).map(|k| k as f64).product();
                (-x).exp() * x.powi(m) / fact / m as f64
            })
            .sum();
        assert!((poisson_inverse_moment_oracle(x) - direct).abs() < 1e-16);
    }
}

//! One function per CLI subcommand. Each writes its outputs under a
//! directory and returns a printable summary.

use std::env;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kernel::{validate_hypotheses, CheckId, KernelFamily, KernelSpec};
use crate::nonlinearity::NonlinearitySpec;
use crate::oracle::{march, rescaled_error, Trajectory};
use crate::rg::{
    contraction_constants, contraction_study, linear_flow, mean_zero_family, run_flow, scaling_exponent,
    theory_constants, FlowRun, Guards, Renormalized, TheoryConstants,
};
use crate::spectral::{bq_norm, bq_norm_grid, SpectralFunction, SpectralGrid};
use crate::stats::log_log_fit;
use crate::timescale::TimeScale;

use super::config::RunConfig;
use super::report::{self, num, CompareRow, RescaledRow};

/// Largest accepted `||f_n^RG - f_n^oracle||` in `compare`.
pub const COMPARE_GATE: f64 = 1e-4;
/// Relative tolerance on the fitted contraction slope.
pub const SLOPE_TOLERANCE: f64 = 0.15;
/// Scales swept by `contraction-study`.
pub const CONTRACTION_SCALES: [f64; 3] = [2.0, 4.0, 8.0];
/// Kernel times at which the hypotheses are checked.
pub const KERNEL_TIMES: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ValidateKernel,
    LinearDemo,
    RgRun,
    OracleRun,
    Compare,
    ContractionStudy,
    Constants,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ValidateKernel => "validate-kernel",
            Command::LinearDemo => "linear-demo",
            Command::RgRun => "rg-run",
            Command::OracleRun => "oracle-run",
            Command::Compare => "compare",
            Command::ContractionStudy => "contraction-study",
            Command::Constants => "constants",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub summary: String,
    pub warnings: Vec<String>,
    /// Whether the subcommand's own check passed.
    pub passed: bool,
    pub files: Vec<PathBuf>,
    /// Numerical failure after partial outputs were written.
    pub failure: Option<Error>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            summary: String::new(),
            warnings: Vec::new(),
            passed: true,
            files: Vec::new(),
            failure: None,
        }
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.summary.push_str(text.as_ref());
        self.summary.push('\n');
    }
}

/// `RGFLOW_OUTPUT_DIR` if set, else `output.dir` from the config.
pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    env::var_os("RGFLOW_OUTPUT_DIR")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(&cfg.output_dir))
}

struct Setup {
    k: KernelSpec,
    ts: TimeScale,
    spec: NonlinearitySpec,
    grid: SpectralGrid,
}

impl Setup {
    fn new(cfg: &RunConfig) -> Result<Self> {
        Ok(Setup {
            k: cfg.kernel_spec()?,
            ts: cfg.time_scale()?,
            spec: cfg.nonlinearity_spec()?,
            grid: cfg.spectral_grid()?,
        })
    }

    fn p(&self) -> f64 {
        self.ts.p()
    }

    fn linear_spec(&self) -> Result<NonlinearitySpec> {
        NonlinearitySpec::new(0.0, self.spec.alpha(), self.spec.coeffs().to_vec(), self.spec.rho())
    }
}

/// `amplitude f_p* + perturbation g`, `g` the first seeded mean-zero member.
pub fn initial_data(cfg: &RunConfig) -> Result<SpectralFunction> {
    let s = Setup::new(cfg)?;
    initial_from(cfg, &s)
}

fn initial_from(cfg: &RunConfig, s: &Setup) -> Result<SpectralFunction> {
    let mut f = s.k.fpstar(s.p(), s.grid)?.scaled(cfg.initial.amplitude);
    if cfg.initial.perturbation != 0.0 {
        let g = mean_zero_family(&s.k, s.p(), s.grid, cfg.seed, 1)?.remove(0);
        f = f.axpy(cfg.initial.perturbation, &g)?;
    }
    Ok(f)
}

fn write_manifest(cmd: Command, cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> Result<()> {
    let path = dir.join(format!("manifest_{}.txt", cmd.name().replace('-', "_")));
    let text = format!(
        "# rgflow {} {}\n# config\n{}",
        env!("CARGO_PKG_VERSION"),
        cmd.name(),
        cfg
    );
    report::write_text(&path, &text)?;
    out.files.push(path);
    Ok(())
}

fn write_plot(dir: &Path, csv_name: &str, out: &mut Outcome) -> Result<()> {
    let path = dir.join(format!("plot_{}.py", csv_name.trim_end_matches(".csv")));
    report::write_text(&path, &report::plot_script(csv_name))?;
    out.files.push(path);
    Ok(())
}

pub fn run(cmd: Command, cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let mut out = match cmd {
        Command::ValidateKernel => validate_kernel(cfg, dir)?,
        Command::LinearDemo => linear_demo(cfg, dir)?,
        Command::RgRun => rg_run(cfg, dir)?,
        Command::OracleRun => oracle_run(cfg, dir)?,
        Command::Compare => compare(cfg, dir)?,
        Command::ContractionStudy => contraction(cfg, dir)?,
        Command::Constants => constants(cfg, dir)?,
    };
    write_manifest(cmd, cfg, dir, &mut out)?;
    Ok(out)
}

pub fn validate_kernel(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let s = Setup::new(cfg)?;
    let stable = matches!(s.k.family(), KernelFamily::Stable { .. });
    let tol = if stable { 1e-6 } else { 1e-10 };
    let rep = validate_hypotheses(&s.k, &s.grid, &KERNEL_TIMES, tol)?;
    let mut out = Outcome::new();
    out.line(format!("kernel: {}", s.k));
    for c in &rep.checks {
        out.line(format!(
            "{:<18} residual {}  tol {:.1e}  {}",
            c.id.label(),
            num(c.residual),
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        ));
    }
    match rep.tail_exponent {
        Some(e) => out.line(format!("tail exponent      {e:.4}")),
        None => out.line("tail exponent      none (tail below rounding floor)"),
    }
    let decay = rep.get(CheckId::Decay);
    let others = rep.checks.iter().filter(|c| c.id != CheckId::Decay).all(|c| c.passed);
    out.passed = if stable {
        if !decay.passed {
            out.warnings.push(format!(
                "WARNING: decay hypothesis G(i) violated: algebraic tail with exponent {}; stable kernels lie outside the theory",
                rep.tail_exponent.map_or_else(|| "unknown".to_string(), |e| format!("{e:.3}"))
            ));
        }
        others
    } else {
        others && decay.passed
    };
    let path = dir.join("kernel_validation.csv");
    report::write_hypotheses(&path, &rep)?;
    out.files.push(path);
    Ok(out)
}

fn powers_within(big_l: f64, n_max: u32, big_t: f64) -> u32 {
    (0..=n_max)
        .take_while(|&n| big_l.powi(n as i32) <= big_t * (1.0 + 1e-12))
        .last()
        .unwrap_or(0)
}

pub fn linear_demo(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let s = Setup::new(cfg)?;
    let f0 = initial_from(cfg, &s)?;
    let big_l = cfg.rg.big_l;
    let steps = linear_flow(&f0, cfg.rg.n_steps, big_l, &s.k, &s.ts)?;
    let a = f0.hat_at_zero().re;
    let traj = march(&f0, cfg.oracle.big_t, &s.k, &s.ts, &s.linear_spec()?, cfg.march_options())?;
    let n_oracle = powers_within(big_l, cfg.rg.n_steps, cfg.oracle.big_t);
    let mut out = Outcome::new();
    let mut oracle_err = Vec::new();
    for step in &steps {
        if step.n <= n_oracle {
            let e = rescaled_error(&traj, step.t, a, &s.k, s.p())?;
            if let Some(w) = e.warning {
                out.warnings.push(w);
            }
            oracle_err.push(Some(e.value));
        } else {
            oracle_err.push(None);
        }
    }

    let (_, c) = contraction_constants(&s.k, s.p(), &s.grid);
    let bound = c * big_l.powf(-scaling_exponent(&s.k, &s.ts));
    // ratios of remainders at the rounding level carry no information
    let worst = steps
        .windows(2)
        .filter(|w| w[0].bq_g > 1e-12 * w[0].bq_f)
        .filter_map(|w| w[1].ratio)
        .fold(0.0f64, f64::max);
    out.passed = worst < bound;
    out.line(format!("A = {}", num(a)));
    out.line(format!(
        "final err_to_Afpstar (n = {}) = {}",
        cfg.rg.n_steps,
        num(steps.last().map_or(f64::NAN, |r| r.err_to_afpstar))
    ));
    out.line(format!(
        "worst per-step ratio ||g_n||/||g_(n-1)|| = {}  bound C L^(-(p+1)/d) = {}  {}",
        num(worst),
        num(bound),
        if out.passed { "PASS" } else { "FAIL" }
    ));
    let (ts_, es): (Vec<f64>, Vec<f64>) = steps
        .iter()
        .zip(&oracle_err)
        .filter_map(|(r, e)| e.filter(|v| *v > 0.0 && r.n > 0).map(|v| (r.t, v)))
        .unzip();
    if let Some(fit) = log_log_fit(&ts_, &es) {
        out.line(format!(
            "oracle rescaled error: fitted slope in t = {:.4} (R^2 = {:.4})",
            fit.slope, fit.r_squared
        ));
    }
    let path = dir.join("linear_convergence.csv");
    report::write_linear_convergence(&path, &steps, &oracle_err)?;
    out.files.push(path);
    write_plot(dir, "linear_convergence.csv", &mut out)?;
    Ok(out)
}

fn guards(c: &TheoryConstants) -> Guards {
    Guards {
        sigma: c.sigma,
        rho0: c.rho0,
        k: c.k,
        k1: c.k1,
    }
}

fn flow(cfg: &RunConfig, s: &Setup, f0: &SpectralFunction, n_steps: u32) -> Result<(FlowRun, TheoryConstants)> {
    let constants = theory_constants(&s.k, &s.ts, &s.spec, &s.grid, cfg.rg.big_l, cfg.rg.delta)?;
    let problem = Renormalized {
        kernel: &s.k,
        timescale: &s.ts,
        nonlinearity: &s.spec,
        big_l: cfg.rg.big_l,
        options: cfg.picard_options(),
        guards: Some(guards(&constants)),
    };
    let run = run_flow(&problem, f0, n_steps, Some(&constants))?;
    Ok((run, constants))
}

pub fn rg_run(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let s = Setup::new(cfg)?;
    let f0 = initial_from(cfg, &s)?;
    let (run, _) = flow(cfg, &s, &f0, cfg.rg.n_steps)?;
    let rep = &run.report;
    let mut out = Outcome::new();
    out.warnings.extend(rep.warnings.iter().cloned());
    out.line(format!("steps completed = {}", rep.steps.len()));
    out.line(format!("A = {} +/- {}", num(rep.a_final), num(rep.a_error_bar)));
    if let Some(last) = rep.rows.last() {
        out.line(format!("err_to_Afpstar at n = {} = {}", last.n, num(last.err_to_afpstar)));
    }
    if let Some(fit) = &rep.fit_g {
        out.line(format!("fitted per-step ratio of ||g_n|| = {:.6}", fit.slope.exp()));
    }
    if let Some(fit) = &rep.fit_a {
        out.line(format!("fitted per-step ratio of |A_(n+1) - A_n| = {:.6}", fit.slope.exp()));
    }
    let worst = rep.steps.iter().filter_map(|s| s.contraction_ratio).fold(0.0f64, f64::max);
    out.line(format!("largest Picard contraction ratio = {worst:.6}"));
    let path = dir.join("rg_convergence.csv");
    report::write_rg_convergence(&path, rep)?;
    out.files.push(path);
    let path = dir.join("rg_steps.csv");
    report::write_rg_steps(&path, rep)?;
    out.files.push(path);
    write_plot(dir, "rg_convergence.csv", &mut out)?;
    out.passed = run.failure.is_none();
    out.failure = run.failure;
    Ok(out)
}

/// Snapshot indices at `t = 2^i`.
fn octave_snapshots(traj: &Trajectory) -> Vec<usize> {
    let t_max = *traj.times().last().expect("trajectory is nonempty");
    let mut idx = Vec::new();
    let mut t = 1.0;
    while t <= t_max * (1.0 + 1e-12) {
        let m = traj.nearest(t);
        if traj.times()[m] == t {
            idx.push(m);
        }
        t *= 2.0;
    }
    idx
}

pub fn oracle_run(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let s = Setup::new(cfg)?;
    let f0 = initial_from(cfg, &s)?;
    let traj = march(&f0, cfg.oracle.big_t, &s.k, &s.ts, &s.spec, cfg.march_options())?;
    let final_snap = traj.snaps().last().expect("trajectory is nonempty");
    let a = final_snap.hat_at_zero().re;
    let which = octave_snapshots(&traj);
    let mut out = Outcome::new();
    let mut rows = Vec::new();
    for &m in &which {
        let t = traj.times()[m];
        let e = rescaled_error(&traj, t, a, &s.k, s.p())?;
        rows.push(RescaledRow {
            t,
            mass: traj.snaps()[m].hat_at_zero().re,
            bq_similarity: bq_norm_grid(&traj.similarity(m)),
            rescaled_error: e.value,
        });
    }
    out.line(format!("snapshots = {}", traj.times().len()));
    out.line(format!("A (mass at t = {}) = {}", cfg.oracle.big_t, num(a)));
    if let Some(last) = rows.last() {
        out.line(format!("rescaled error at t = {} = {}", last.t, num(last.rescaled_error)));
    }
    let (t, e): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.t > 1.0 && r.rescaled_error > 0.0)
        .map(|r| (r.t, r.rescaled_error))
        .unzip();
    if let Some(fit) = log_log_fit(&t, &e) {
        out.line(format!("fitted slope in t = {:.4} (R^2 = {:.4})", fit.slope, fit.r_squared));
    }
    let path = dir.join("rescaled_error.csv");
    report::write_rescaled_error(&path, &rows)?;
    out.files.push(path);
    let path = dir.join("trajectory.csv");
    report::write_trajectory(&path, &traj, &which)?;
    out.files.push(path);
    let path = dir.join("trajectory_manifest.txt");
    report::write_text(&path, &report::trajectory_manifest(&traj))?;
    out.files.push(path);
    write_plot(dir, "rescaled_error.csv", &mut out)?;
    Ok(out)
}

pub fn compare(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let s = Setup::new(cfg)?;
    let f0 = initial_from(cfg, &s)?;
    let big_l = cfg.rg.big_l;
    let n_max = powers_within(big_l, cfg.rg.n_steps, cfg.oracle.big_t);
    if n_max == 0 {
        return Err(Error::InvalidArgument(format!(
            "oracle.T = {} is below one RG block L = {big_l}",
            cfg.oracle.big_t
        )));
    }
    let (run, _) = flow(cfg, &s, &f0, n_max)?;
    let t_end = big_l.powi(n_max as i32);
    let traj = march(&f0, t_end, &s.k, &s.ts, &s.spec, cfg.march_options())?;
    let mut out = Outcome::new();
    out.warnings.extend(run.report.warnings.iter().cloned());
    let mut rows = Vec::new();
    for state in &run.states {
        let t = big_l.powi(state.n as i32);
        let m = traj.nearest(t);
        if (traj.times()[m] - t).abs() > 1e-12 * t {
            out.warnings.push(format!(
                "no oracle snapshot at t = {t}; comparing with t = {}",
                traj.times()[m]
            ));
        }
        let oracle = traj.similarity(m);
        rows.push(CompareRow {
            n: state.n,
            t,
            a_rg: state.a,
            mass_oracle: oracle.hat_at_zero().re,
            discrepancy: bq_norm(&(&state.f - &oracle)),
        });
    }
    let worst = rows.iter().map(|r| r.discrepancy).fold(0.0f64, f64::max);
    out.passed = run.failure.is_none() && worst < COMPARE_GATE;
    out.line(format!("steps compared = {}", rows.len()));
    out.line(format!(
        "max discrepancy ||f_n^RG - f_n^oracle|| = {}  gate {COMPARE_GATE:e}  {}",
        num(worst),
        if out.passed { "PASS" } else { "FAIL" }
    ));
    let path = dir.join("compare.csv");
    report::write_compare(&path, &rows)?;
    out.files.push(path);
    write_plot(dir, "compare.csv", &mut out)?;
    out.failure = run.failure;
    Ok(out)
}

pub fn contraction(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let s = Setup::new(cfg)?;
    let family = mean_zero_family(&s.k, s.p(), s.grid, cfg.seed, cfg.contraction_samples)?;
    let study = contraction_study(&family, &CONTRACTION_SCALES, &s.k, &s.ts)?;
    let (_, c) = contraction_constants(&s.k, s.p(), &s.grid);
    let a = scaling_exponent(&s.k, &s.ts);
    let bound = |l: f64| c * l.powf(-a);
    let mut out = Outcome::new();
    for (l, w) in &study.worst {
        out.line(format!("L = {l}: worst ratio {}  bound {}", num(*w), num(bound(*l))));
    }
    let below = study.rows.iter().all(|r| r.ratio < bound(r.big_l));
    let slope_ok = study.fit.as_ref().is_some_and(|f| {
        (f.slope - study.expected_slope).abs() <= SLOPE_TOLERANCE * study.expected_slope.abs()
    });
    if let Some(fit) = &study.fit {
        out.line(format!(
            "fitted slope {:.4} (R^2 = {:.4}), expected {:.4}",
            fit.slope, fit.r_squared, study.expected_slope
        ));
    }
    out.line(format!("all ratios below bound: {below}"));
    out.passed = below && slope_ok;
    let path = dir.join("contraction.csv");
    report::write_contraction(&path, &study, bound)?;
    out.files.push(path);
    write_plot(dir, "contraction.csv", &mut out)?;
    Ok(out)
}

pub fn constants(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let s = Setup::new(cfg)?;
    let c = theory_constants(&s.k, &s.ts, &s.spec, &s.grid, cfg.rg.big_l, cfg.rg.delta)?;
    let mut out = Outcome::new();
    out.summary = report::table(&c.table());
    out.passed = c.sigma_below_epsilon();
    if c.l1.is_none() {
        out.warnings.push("WARNING: no L satisfies the time-window bounds for every tabulated n".into());
    }
    let path = dir.join("constants.csv");
    report::write_constants(&path, &c)?;
    out.files.push(path);
    Ok(out)
}

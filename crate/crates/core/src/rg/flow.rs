//! The nonlinear RG iteration with the amplitude/remainder bookkeeping
//! `f_n = A_n R^0_{L^n} f_p* + g_n`.

use crate::error::{Error, Result};
use crate::nonlinearity::Verdict;
use crate::spectral::{bq_norm, rescale, SpectralFunction};
use crate::stats::{linear_fit, LinearFit};

use super::constants::TheoryConstants;
use super::linear::{evolved_profile, linear_rg_apply, scaling_exponent};
use super::picard::{Renormalized, StepReport};

#[derive(Debug, Clone, PartialEq)]
pub struct RgState {
    pub n: u32,
    pub f: SpectralFunction,
    pub a: f64,
    pub g: SpectralFunction,
    pub lambda_n: f64,
    pub big_l: f64,
}

impl RgState {
    /// Decomposes `f0 = f^0(0) f_p* + g_0`.
    pub fn initial(problem: &Renormalized<'_>, f0: SpectralFunction) -> Result<Self> {
        let a = f0.hat_at_zero().re;
        let profile = evolved_profile(problem.kernel, problem.timescale, *f0.grid(), 0, problem.big_l)?;
        let mut g = f0.axpy(-a, &profile)?;
        zero_mean(&mut g);
        Ok(RgState {
            n: 0,
            f: f0,
            a,
            g,
            lambda_n: problem.nonlinearity.lambda(),
            big_l: problem.big_l,
        })
    }

    /// `||f_n - A_n R^0_{L^n} f_p* - g_n||`.
    pub fn decomposition_residual(&self, problem: &Renormalized<'_>) -> Result<f64> {
        let profile = evolved_profile(problem.kernel, problem.timescale, *self.f.grid(), self.n, self.big_l)?;
        let rest = self.f.axpy(-self.a, &profile)?.axpy(-1.0, &self.g)?;
        Ok(bq_norm(&rest))
    }
}

// g_n has zero mass by construction; clear the rounding residue of the
// subtraction at omega = 0.
fn zero_mean(g: &mut SpectralFunction) {
    let (grid, mut hat, hat_deriv) = g.clone().into_parts();
    hat[grid.zero_index()] = num_complex::Complex64::new(0.0, 0.0);
    *g = SpectralFunction::new(grid, hat, hat_deriv).expect("same lengths");
}

/// One nonlinear RG step: solve on `[1, L]`, rescale, and update `(A, g)`.
pub fn rg_step(problem: &Renormalized<'_>, state: &RgState) -> Result<(RgState, StepReport)> {
    let p = problem.timescale.p();
    let d = problem.kernel.d();
    let verdict = problem.nonlinearity.classify(p, d);
    if verdict.verdict != Verdict::Irrelevant {
        return Err(Error::FlowRefused {
            verdict: verdict.verdict,
            alpha: problem.nonlinearity.alpha(),
            alpha_c: verdict.alpha_c,
        });
    }
    let n = state.n;
    let big_l = problem.big_l;
    let sol = problem.solve(&state.f, n)?;
    let scale = big_l.powf(scaling_exponent(problem.kernel, problem.timescale));
    let nu_scaled = rescale(&sol.nu, scale)?;
    let nu0 = sol.nu.hat_at_zero();

    let f_next = &linear_rg_apply(&state.f, n, big_l, problem.kernel, problem.timescale)? + &nu_scaled;
    let profile = evolved_profile(problem.kernel, problem.timescale, *state.f.grid(), n + 1, big_l)?;
    let g_lin = linear_rg_apply(&state.g, n, big_l, problem.kernel, problem.timescale)?;
    let mut g_next = &g_lin + &nu_scaled;
    if nu0.re != 0.0 || nu0.im != 0.0 {
        let hat: Vec<_> = profile.hat().iter().map(|v| v * nu0).collect();
        let hat_deriv: Vec<_> = profile.hat_deriv().iter().map(|v| v * nu0).collect();
        let correction = SpectralFunction::new(*profile.grid(), hat, hat_deriv)?;
        g_next = &g_next - &correction;
    }

    let next = RgState {
        n: n + 1,
        f: f_next,
        a: state.a + nu0.re,
        g: g_next,
        lambda_n: problem.nonlinearity.lambda_n(n + 1, big_l, p, d)?,
        big_l,
    };
    let mut report = sol.report;
    report.bq_f = bq_norm(&next.f);
    report.bq_g = bq_norm(&next.g);
    report.decomposition_residual = next.decomposition_residual(problem)?;
    Ok((next, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowRow {
    pub n: u32,
    pub t: f64,
    pub a: f64,
    pub bq_g: f64,
    pub bq_f: f64,
    pub err_to_afpstar: f64,
    pub theory_rate_g: f64,
    pub theory_rate_a: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowReport {
    pub rows: Vec<FlowRow>,
    pub steps: Vec<StepReport>,
    /// `A_N`, the amplitude at the last completed step.
    pub a_final: f64,
    /// Geometric tail estimate for `|A - A_N|`.
    pub a_error_bar: f64,
    /// Fit of `ln ||g_n||` against `n` (slope = log of the per-step ratio).
    pub fit_g: Option<LinearFit>,
    /// Fit of `ln |A_{n+1} - A_n|` against `n`.
    pub fit_a: Option<LinearFit>,
    pub warnings: Vec<String>,
}

impl FlowReport {
    /// `|A_{n+1} - A_n|` for consecutive rows.
    pub fn amplitude_increments(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| (w[1].a - w[0].a).abs()).collect()
    }
}

/// Outcome of a flow run; `failure` holds the error that stopped it early,
/// in which case `report` covers the completed steps.
#[derive(Debug)]
pub struct FlowRun {
    pub report: FlowReport,
    pub states: Vec<RgState>,
    pub failure: Option<Error>,
}

/// Runs `n_steps` RG steps from `f0`. With `constants` given, `||f0||` is
/// checked against `epsilon_bar` and the rates in the rows use `delta` and
/// `C_tilde`.
pub fn run_flow(
    problem: &Renormalized<'_>,
    f0: &SpectralFunction,
    n_steps: u32,
    constants: Option<&TheoryConstants>,
) -> Result<FlowRun> {
    let p = problem.timescale.p();
    let d = problem.kernel.d();
    let class = problem.nonlinearity.classify(p, d);
    if class.verdict != Verdict::Irrelevant {
        return Err(Error::FlowRefused {
            verdict: class.verdict,
            alpha: problem.nonlinearity.alpha(),
            alpha_c: class.alpha_c,
        });
    }
    let mut warnings = Vec::new();
    let bq_f0 = bq_norm(f0);
    if let Some(c) = constants {
        if bq_f0 >= c.epsilon_bar && problem.nonlinearity.lambda() != 0.0 {
            if problem.options.small_data_override {
                warnings.push(format!(
                    "WARNING: ||f_0|| = {bq_f0:.3e} exceeds the small-data bound epsilon_bar = {:.3e}; running under override",
                    c.epsilon_bar
                ));
            } else {
                return Err(Error::SmallData {
                    norm: bq_f0,
                    bound: c.epsilon_bar,
                });
            }
        }
    }

    let big_l = problem.big_l;
    let mut state = RgState::initial(problem, f0.clone())?;
    let mut states = vec![state.clone()];
    let mut steps = Vec::new();
    let mut failure = None;
    for _ in 0..n_steps {
        match rg_step(problem, &state) {
            Ok((next, report)) => {
                warnings.extend(report.warnings.iter().cloned());
                steps.push(report);
                state = next;
                states.push(state.clone());
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    let grid = *f0.grid();
    let a_final = state.a;
    let target = problem.kernel.fpstar(p, grid)?.scaled(a_final);
    let delta = constants.map(|c| c.delta).unwrap_or(0.5);
    let c_tilde = constants.map(|c| c.c_tilde).unwrap_or(f64::NAN);
    let lam_ratio = big_l.powf(class.d_f / d);
    let mut rows = Vec::with_capacity(states.len());
    for s in &states {
        let bq_f = bq_norm(&s.f);
        rows.push(FlowRow {
            n: s.n,
            t: big_l.powi(s.n as i32),
            a: s.a,
            bq_g: bq_norm(&s.g),
            bq_f,
            err_to_afpstar: bq_norm(&(&s.f - &target)),
            theory_rate_g: bq_f0 * big_l.powf(-(s.n as f64) * (p + 1.0) * (1.0 - delta) / d),
            theory_rate_a: c_tilde * lam_ratio.powi(s.n as i32) * bq_f * bq_f,
        });
    }

    let mut report = FlowReport {
        rows,
        steps,
        a_final,
        warnings,
        ..FlowReport::default()
    };
    let incs = report.amplitude_increments();
    if let Some(last) = incs.last() {
        report.a_error_bar = last * lam_ratio / (1.0 - lam_ratio);
    }
    report.fit_g = log_fit(report.rows.iter().skip(1).map(|r| (r.n as f64, r.bq_g)));
    report.fit_a = log_fit(incs.iter().enumerate().map(|(i, v)| (i as f64, *v)));
    Ok(FlowRun {
        report,
        states,
        failure,
    })
}

fn log_fit(points: impl Iterator<Item = (f64, f64)>) -> Option<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = points.filter(|(_, v)| *v > 0.0).map(|(n, v)| (n, v.ln())).unzip();
    linear_fit(&x, &y)
}

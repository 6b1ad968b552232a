//! Picard solution of the renormalized integral equation on `[1, L]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::nonlinearity::{evaluate_f, NonlinearitySpec};
use crate::spectral::{bq_norm, bq_norm_grid, SpectralFunction};
use crate::timescale::TimeScale;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub substeps: usize,
    pub small_data_override: bool,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            tol: 1e-10,
            max_iter: 50,
            substeps: 64,
            small_data_override: false,
        }
    }
}

/// Norm-level guards taken from the theory constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guards {
    /// Small-data radius `sigma`.
    pub sigma: f64,
    pub rho0: f64,
    pub k: f64,
    pub k1: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepReport {
    pub nu_hat_zero: f64,
    pub picard_iters: usize,
    pub picard_residual: f64,
    /// Largest ratio of successive Picard increments.
    pub contraction_ratio: Option<f64>,
    pub bq_f: f64,
    pub bq_g: f64,
    pub decomposition_residual: f64,
    pub warnings: Vec<String>,
}

pub struct Renormalized<'a> {
    pub kernel: &'a KernelSpec,
    pub timescale: &'a TimeScale,
    pub nonlinearity: &'a NonlinearitySpec,
    pub big_l: f64,
    pub options: PicardOptions,
    pub guards: Option<Guards>,
}

pub struct Solution {
    /// `u_n(., L)`.
    pub u_end: SpectralFunction,
    /// `nu_n = u_n(., L) - u_{f_n}(., L)`.
    pub nu: SpectralFunction,
    pub report: StepReport,
}

impl Renormalized<'_> {
    /// Solves for `u_n` on the uniform grid `tau_i = 1 + i (L-1)/S`, with the
    /// Duhamel integral discretized by the trapezoid rule and the kernel
    /// propagated exactly between nodes.
    pub fn solve(&self, f_n: &SpectralFunction, n: u32) -> Result<Solution> {
        let opts = self.options;
        if opts.substeps == 0 || opts.max_iter == 0 {
            return Err(Error::InvalidArgument(
                "substeps and max_iter must be positive".into(),
            ));
        }
        let p = self.timescale.p();
        let d = self.kernel.d();
        let big_l = self.big_l;
        let mut report = StepReport::default();
        let bq_f = bq_norm(f_n);

        // the guards protect the nonlinear term only
        if let Some(g) = self.guards.filter(|_| self.nonlinearity.lambda() != 0.0) {
            if bq_f >= g.sigma {
                if opts.small_data_override {
                    report.warnings.push(format!(
                        "step {n}: ||f_n|| = {bq_f:.3e} exceeds the small-data radius sigma = {:.3e} (override active)",
                        g.sigma
                    ));
                } else {
                    return Err(Error::SmallData {
                        norm: bq_f,
                        bound: g.sigma,
                    });
                }
            }
            let s_l = self.timescale.s_n(n, big_l, big_l)?;
            let bound = g.rho0 / (1.0 + g.k + g.k1 * s_l.powf(1.0 / d));
            if bq_f >= bound {
                return Err(Error::Analyticity {
                    quantity: "||f_n||",
                    value: bq_f,
                    bound,
                });
            }
        }

        let lambda_n = self.nonlinearity.lambda_n(n, big_l, p, d)?;
        let coeffs = self.nonlinearity.rescaled_coeffs(n, big_l, p, d)?;
        let alpha = self.nonlinearity.alpha();
        let rho = self.nonlinearity.rho();

        let s_count = opts.substeps;
        let h = (big_l - 1.0) / s_count as f64;
        let taus: Vec<f64> = (0..=s_count)
            .map(|i| if i == s_count { big_l } else { 1.0 + i as f64 * h })
            .collect();
        let s_vals = taus
            .iter()
            .map(|&t| self.timescale.s_n(n, big_l, t))
            .collect::<Result<Vec<f64>>>()?;
        let grid = *f_n.grid();
        let u_lin: Vec<SpectralFunction> = s_vals
            .iter()
            .map(|&s| {
                let (m, dm) = self.kernel.arrays(&grid, s, 1.0);
                f_n.multiply(&m, &dm)
            })
            .collect();
        let steps: Vec<(Vec<Complex64>, Vec<Complex64>)> = s_vals
            .windows(2)
            .map(|w| self.kernel.arrays(&grid, w[1] - w[0], 1.0))
            .collect();

        let mut u = u_lin.clone();
        let mut prev_inc: Option<f64> = None;
        let mut converged = false;
        for iter in 1..=opts.max_iter {
            let forcing = u
                .iter()
                .map(|ui| evaluate_f(&coeffs, alpha, lambda_n, ui, rho))
                .collect::<Result<Vec<SpectralFunction>>>()?;
            // J_0 = (h/2) F_0,  J_i = G(ds_i) J_{i-1} + h F_i,  N_i = J_i - (h/2) F_i
            let mut next = Vec::with_capacity(u.len());
            next.push(u_lin[0].clone());
            let mut acc = forcing[0].scaled(0.5 * h);
            for i in 1..=s_count {
                let (m, dm) = &steps[i - 1];
                acc = acc.multiply(m, dm).axpy(h, &forcing[i])?;
                let duhamel = acc.axpy(-0.5 * h, &forcing[i])?;
                next.push(&u_lin[i] + &duhamel);
            }
            let inc = u
                .iter()
                .zip(&next)
                .map(|(a, b)| bq_norm_grid(&(b - a)))
                .fold(0.0f64, f64::max);
            u = next;
            report.picard_iters = iter;
            report.picard_residual = inc;
            if let Some(prev) = prev_inc {
                if prev > 0.0 && inc > 0.0 {
                    let r = inc / prev;
                    report.contraction_ratio = Some(report.contraction_ratio.map_or(r, |c: f64| c.max(r)));
                }
            }
            prev_inc = Some(inc);
            if inc < opts.tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::PicardDivergence {
                iterations: opts.max_iter,
                increment: report.picard_residual,
                tol: opts.tol,
            });
        }
        if let Some(r) = report.contraction_ratio {
            if r >= 1.0 {
                report
                    .warnings
                    .push(format!("step {n}: Picard increments grew (ratio {r:.3})"));
            }
        }

        let u_end = u.pop().expect("time grid is nonempty");
        let nu = &u_end - u_lin.last().expect("time grid is nonempty");
        report.nu_hat_zero = nu.hat_at_zero().re;
        Ok(Solution { u_end, nu, report })
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::SpectralGrid;

    fn problem<'a>(
        k: &'a KernelSpec,
        ts: &'a TimeScale,
        nl: &'a NonlinearitySpec,
    ) -> Renormalized<'a> {
        Renormalized {
            kernel: k,
            timescale: ts,
            nonlinearity: nl,
            big_l: 2.0,
            options: PicardOptions::default(),
            guards: None,
        }
    }

    #[test]
    fn linear_case_is_one_iteration() {
        let k = KernelSpec::gaussian(2, 1).unwrap();
        let ts = TimeScale::zero(1.0).unwrap();
        let nl = NonlinearitySpec::new(0.0, 3, vec![1.0], 10.0).unwrap();
        let grid = SpectralGrid::new(16.0, 512, 2).unwrap();
        let f = k.fpstar(1.0, grid).unwrap().scaled(0.3);
        let sol = problem(&k, &ts, &nl).solve(&f, 0).unwrap();
        assert_eq!(sol.report.picard_iters, 1);
        assert!(sol.nu.is_zero());
        let lin = k.apply(&f, 1.5).unwrap();
        assert_eq!(sol.u_end, lin);
    }

    #[test]
    fn first_order_duhamel_mass() {
        let k = KernelSpec::gaussian(2, 1).unwrap();
        let ts = TimeScale::zero(1.0).unwrap();
        let nl = NonlinearitySpec::new(1.0, 3, vec![1.0], 10.0).unwrap();
        let grid = SpectralGrid::new(16.0, 2048, 2).unwrap();
        let eps = 1e-3;
        let f = k.fpstar(1.0, grid).unwrap().scaled(eps);
        let sol = problem(&k, &ts, &nl).solve(&f, 0).unwrap();
        // lambda int_1^2 int u_lin^3 dx dtau with u_lin(x, tau) the heat
        // kernel of variance tau^2 times eps, by nested trapezoid sums
        let mut outer = 0.0;
        let nt = 4000;
        for it in 0..=nt {
            let tau = 1.0 + it as f64 / nt as f64;
            let var = tau * tau;
            let hx = 0.01;
            let mut inner = 0.0;
            for ix in -3000..=3000 {
                let x = ix as f64 * hx;
                let u = eps * (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
                inner += u * u * u;
            }
            inner *= hx;
            let w = if it == 0 || it == nt { 0.5 } else { 1.0 };
            outer += w * inner;
        }
        outer /= nt as f64;
        let rel = (sol.report.nu_hat_zero - outer).abs() / outer;
        assert!(rel < 1e-3, "nu(0) = {}, oracle {outer}, rel {rel}", sol.report.nu_hat_zero);
        let r = sol.report.contraction_ratio.unwrap();
        assert!(r < 1.0);
    }

    #[test]
    fn small_data_guard() {
        let k = KernelSpec::gaussian(2, 1).unwrap();
        let ts = TimeScale::zero(1.0).unwrap();
        let nl = NonlinearitySpec::new(1.0, 3, vec![1.0], 10.0).unwrap();
        let grid = SpectralGrid::new(16.0, 512, 2).unwrap();
        let f = k.fpstar(1.0, grid).unwrap().scaled(0.01);
        let mut pr = problem(&k, &ts, &nl);
        pr.guards = Some(Guards {
            sigma: 1e-6,
            rho0: 1.8,
            k: 1.0,
            k1: 0.86,
        });
        assert!(matches!(pr.solve(&f, 0), Err(Error::SmallData { .. })));
        pr.options.small_data_override = true;
        let sol = pr.solve(&f, 0).unwrap();
        assert_eq!(sol.report.warnings.len(), 1);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let k = KernelSpec::gaussian(2, 1).unwrap();
        let ts = TimeScale::zero(1.0).unwrap();
        let nl = NonlinearitySpec::new(1.0, 3, vec![1.0], 10.0).unwrap();
        let grid = SpectralGrid::new(16.0, 512, 2).unwrap();
        let f = k.fpstar(1.0, grid).unwrap().scaled(0.01);
        let mut pr = problem(&k, &ts, &nl);
        pr.options.max_iter = 1;
        assert!(matches!(pr.solve(&f, 0), Err(Error::PicardDivergence { .. })));
    }
}

//! Direct time marching of the original integral equation, independent of
//! the RG machinery.
//!
//! Snapshot `m` is stored on the base grid dilated by `tau_m = t_m^{(p+1)/d}`,
//! so every snapshot resolves the solution with the same number of points
//! while it spreads. In the similarity frame `tau u(tau x, t)` the snapshot
//! arrays are read on the base grid without interpolation.

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::nonlinearity::{evaluate_f, NonlinearitySpec};
use crate::spectral::{bq_norm, bq_norm_grid, resample, SpectralFunction, SpectralGrid};
use crate::timescale::TimeScale;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchOptions {
    pub steps_per_octave: u32,
    /// Relative tolerance of the implicit trapezoid fixed-point iteration.
    pub tol: f64,
    pub max_iter: usize,
    /// Abort when the similarity-frame norm exceeds this multiple of the
    /// initial norm.
    pub blowup_factor: f64,
}

impl Default for MarchOptions {
    fn default() -> Self {
        MarchOptions {
            steps_per_octave: 16,
            tol: 1e-12,
            max_iter: 50,
            blowup_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    base: SpectralGrid,
    exponent: f64,
    times: Vec<f64>,
    snaps: Vec<SpectralFunction>,
}

impl Trajectory {
    pub fn base_grid(&self) -> &SpectralGrid {
        &self.base
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snaps(&self) -> &[SpectralFunction] {
        &self.snaps
    }

    /// Spatial dilation `t^{(p+1)/d}` of the similarity frame at time `t`.
    pub fn dilation(&self, t: f64) -> f64 {
        t.powf(self.exponent)
    }

    /// Index of the snapshot closest to `t` (in `ln t`).
    pub fn nearest(&self, t: f64) -> usize {
        let lt = t.ln();
        let mut best = 0;
        for (i, s) in self.times.iter().enumerate() {
            if (s.ln() - lt).abs() < (self.times[best].ln() - lt).abs() {
                best = i;
            }
        }
        best
    }

    /// `tau u(tau x, t_m)` on the base grid.
    pub fn similarity(&self, m: usize) -> SpectralFunction {
        let tau = self.dilation(self.times[m]);
        self.snaps[m].relabeled(self.base, 1.0 / tau)
    }
}

/// Marches from `u(., 1) = f` to `t = big_t` on the geometric grid
/// `t_m = T^{m/M}`, `M = round(steps_per_octave * log2 T)`.
pub fn march(
    f: &SpectralFunction,
    big_t: f64,
    k: &KernelSpec,
    ts: &TimeScale,
    spec: &NonlinearitySpec,
    opts: MarchOptions,
) -> Result<Trajectory> {
    if !(big_t.is_finite() && big_t > 1.0) {
        return Err(Error::InvalidArgument(format!("T must exceed 1, got {big_t}")));
    }
    if opts.steps_per_octave == 0 {
        return Err(Error::InvalidArgument("steps_per_octave must be positive".into()));
    }
    let base = *f.grid();
    let exponent = (ts.p() + 1.0) / k.d();
    let log2_t = big_t.log2();
    let total = ((opts.steps_per_octave as f64 * log2_t).round() as usize).max(1);
    let times: Vec<f64> = (0..=total)
        .map(|m| {
            if m == total {
                big_t
            } else {
                (log2_t * m as f64 / total as f64).exp2()
            }
        })
        .collect();

    let coeffs = spec.coeffs();
    let alpha = spec.alpha();
    let lambda = spec.lambda();
    let rho = spec.rho();
    let initial_norm = bq_norm_grid(f);
    let limit = opts.blowup_factor * initial_norm;

    let mut snaps = Vec::with_capacity(times.len());
    snaps.push(f.clone());
    let mut s_prev = ts.s(times[0])?;
    for m in 0..total {
        let (t0, t1) = (times[m], times[m + 1]);
        let s1 = ts.s(t1)?;
        let tau1 = t1.powf(exponent);
        let grid1 = base.dilated(tau1)?;
        let u0 = resample(&snaps[m], grid1, 1.0)?;
        let (gm, gdm) = k.arrays(&grid1, s1 - s_prev, 1.0);
        let linear = u0.multiply(&gm, &gdm);
        let next = if lambda == 0.0 {
            linear
        } else {
            let h = t1 - t0;
            let f0 = evaluate_f(coeffs, alpha, lambda, &u0, rho)?.multiply(&gm, &gdm);
            // u1 = linear + (h/2)(G f0 + F(u1)), predictor u1 = linear + h G f0
            let explicit = linear.axpy(0.5 * h, &f0)?;
            let mut u1 = linear.axpy(h, &f0)?;
            let mut converged = false;
            let mut inc = f64::INFINITY;
            for _ in 0..opts.max_iter {
                let norm = bq_norm_grid(&u1.relabeled(base, 1.0 / tau1));
                if initial_norm > 0.0 && (norm.is_nan() || norm > limit) {
                    return Err(Error::BlowUp { t: t1, norm, limit });
                }
                let f1 = evaluate_f(coeffs, alpha, lambda, &u1, rho)?;
                let cand = explicit.axpy(0.5 * h, &f1)?;
                inc = bq_norm_grid(&(&cand - &u1));
                let scale = bq_norm_grid(&cand);
                u1 = cand;
                if inc <= opts.tol * scale {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::PicardDivergence {
                    iterations: opts.max_iter,
                    increment: inc,
                    tol: opts.tol,
                });
            }
            u1
        };
        let norm = bq_norm_grid(&next.relabeled(base, 1.0 / tau1));
        if initial_norm > 0.0 && norm > limit {
            return Err(Error::BlowUp { t: t1, norm, limit });
        }
        snaps.push(next);
        s_prev = s1;
    }
    Ok(Trajectory {
        base,
        exponent,
        times,
        snaps,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescaledError {
    /// Snapshot time actually used.
    pub t: f64,
    pub value: f64,
    pub warning: Option<String>,
}

/// `|| tau u(tau ., t) - A f_p* ||` with `tau = t^{(p+1)/d}`.
pub fn rescaled_error(
    traj: &Trajectory,
    t: f64,
    a: f64,
    k: &KernelSpec,
    p: f64,
) -> Result<RescaledError> {
    let m = traj.nearest(t);
    let used = traj.times[m];
    let warning = ((used - t).abs() > 1e-12 * t)
        .then(|| format!("no snapshot at t = {t}; using nearest t = {used}"));
    let frame = traj.similarity(m);
    let target = k.fpstar(p, traj.base)?;
    let value = bq_norm(&frame.axpy(-a, &target)?);
    Ok(RescaledError {
        t: used,
        value,
        warning,
    })
}

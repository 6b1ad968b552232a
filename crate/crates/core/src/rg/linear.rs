use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::spectral::{bq_norm, rescale, SpectralFunction, SpectralGrid};
use crate::stats::{log_log_fit, LinearFit};
use crate::timescale::TimeScale;

/// Spatial scaling exponent `(p+1)/d` of one RG step.
pub fn scaling_exponent(k: &KernelSpec, ts: &TimeScale) -> f64 {
    (ts.p() + 1.0) / k.d()
}

/// Linear RG map at step `n`: `g^(omega) -> G^(omega/L^a, s_n(L)) g^(omega/L^a)`
/// with `a = (p+1)/d`.
pub fn linear_rg_apply(
    g: &SpectralFunction,
    n: u32,
    big_l: f64,
    k: &KernelSpec,
    ts: &TimeScale,
) -> Result<SpectralFunction> {
    if !(big_l.is_finite() && big_l > 1.0) {
        return Err(Error::InvalidArgument(format!("L must exceed 1, got {big_l}")));
    }
    let scale = big_l.powf(scaling_exponent(k, ts));
    let compressed = rescale(g, scale)?;
    let s = ts.s_n(n, big_l, big_l)?;
    let (m, dm) = k.arrays(g.grid(), s, scale);
    Ok(compressed.multiply(&m, &dm))
}

/// Kernel time of `R^0_{L^n} f_p*`, i.e. `(s(L^n) + 1/(p+1)) / L^{n(p+1)}`.
pub fn profile_time(ts: &TimeScale, n: u32, big_l: f64) -> Result<f64> {
    let p = ts.p();
    let ln = big_l.powi(n as i32);
    Ok((ts.s(ln)? + 1.0 / (p + 1.0)) / ln.powf(p + 1.0))
}

/// `R^0_{L^n} f_p*`, the linearly evolved and rescaled profile.
pub fn evolved_profile(
    k: &KernelSpec,
    ts: &TimeScale,
    grid: SpectralGrid,
    n: u32,
    big_l: f64,
) -> Result<SpectralFunction> {
    k.profile(grid, profile_time(ts, n, big_l)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearStep {
    pub n: u32,
    pub t: f64,
    pub a: f64,
    pub bq_g: f64,
    pub bq_f: f64,
    /// `||f_n - A f_p*||`.
    pub err_to_afpstar: f64,
    /// `||g_n|| / ||g_{n-1}||`, absent at `n = 0` or when `g_{n-1}` vanishes.
    pub ratio: Option<f64>,
}

/// Iterates the linear RG map from `f0`, recording the decomposition
/// `f_n = A R^0_{L^n} f_p* + g_n` at each step.
pub fn linear_flow(
    f0: &SpectralFunction,
    steps: u32,
    big_l: f64,
    k: &KernelSpec,
    ts: &TimeScale,
) -> Result<Vec<LinearStep>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("linear flow needs at least one step".into()));
    }
    let grid = *f0.grid();
    let a = f0.hat_at_zero().re;
    let fpstar = k.fpstar(ts.p(), grid)?;
    let target = fpstar.scaled(a);
    let mut rows = Vec::with_capacity(steps as usize + 1);
    let mut f = f0.clone();
    let mut prev_g: Option<f64> = None;
    for n in 0..=steps {
        let profile = evolved_profile(k, ts, grid, n, big_l)?;
        let g = f.axpy(-a, &profile)?;
        let bq_g = bq_norm(&g);
        rows.push(LinearStep {
            n,
            t: big_l.powi(n as i32),
            a,
            bq_g,
            bq_f: bq_norm(&f),
            err_to_afpstar: bq_norm(&(&f - &target)),
            ratio: prev_g.filter(|v| *v > 0.0).map(|v| bq_g / v),
        });
        prev_g = Some(bq_g);
        if n < steps {
            f = linear_rg_apply(&f, n, big_l, k, ts)?;
        }
    }
    Ok(rows)
}

/// Seeded family of mean-zero test functions
/// `g^(omega) = sum_{j=1..3} c_j (i omega)^j f_p*^(omega)`, `c_j ~ U(-1, 1)`.
pub fn mean_zero_family(
    k: &KernelSpec,
    p: f64,
    grid: SpectralGrid,
    seed: u64,
    count: usize,
) -> Result<Vec<SpectralFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = k.fpstar(p, grid)?;
    (0..count)
        .map(|_| {
            let c: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let omegas = grid.omegas();
            // P(w) = sum c_j (i w)^j and its derivative
            let poly: Vec<Complex64> = omegas
                .iter()
                .map(|&w| {
                    let iw = Complex64::new(0.0, w);
                    c[0] * iw + c[1] * iw * iw + c[2] * iw * iw * iw
                })
                .collect();
            let dpoly: Vec<Complex64> = omegas
                .iter()
                .map(|&w| {
                    let iw = Complex64::new(0.0, w);
                    let i = Complex64::new(0.0, 1.0);
                    i * (c[0] + 2.0 * c[1] * iw + 3.0 * c[2] * iw * iw)
                })
                .collect();
            Ok(base.multiply(&poly, &dpoly))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionRow {
    pub big_l: f64,
    pub member: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionStudy {
    pub rows: Vec<ContractionRow>,
    /// `(L, worst-case ratio)`.
    pub worst: Vec<(f64, f64)>,
    pub fit: Option<LinearFit>,
    pub expected_slope: f64,
}

/// Measures `||R^0_{L,0} g|| / ||g||` for each member of the family and each `L`.
pub fn contraction_study(
    family: &[SpectralFunction],
    scales: &[f64],
    k: &KernelSpec,
    ts: &TimeScale,
) -> Result<ContractionStudy> {
    let mut rows = Vec::new();
    let mut worst = Vec::new();
    for &big_l in scales {
        let mut w = 0.0f64;
        for (i, g) in family.iter().enumerate() {
            let out = linear_rg_apply(g, 0, big_l, k, ts)?;
            let ratio = bq_norm(&out) / bq_norm(g);
            w = w.max(ratio);
            rows.push(ContractionRow {
                big_l,
                member: i,
                ratio,
            });
        }
        worst.push((big_l, w));
    }
    let (ls, rs): (Vec<f64>, Vec<f64>) = worst.iter().copied().unzip();
    Ok(ContractionStudy {
        rows,
        worst,
        fit: log_log_fit(&ls, &rs),
        expected_slope: -scaling_exponent(k, ts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralGrid;

    fn setup() -> (KernelSpec, TimeScale, SpectralGrid) {
        (
            KernelSpec::gaussian(2, 1).unwrap(),
            TimeScale::zero(1.0).unwrap(),
            SpectralGrid::new(16.0, 2048, 2).unwrap(),
        )
    }

    #[test]
    fn fixed_point_is_invariant() {
        let (k, ts, grid) = setup();
        let f = k.fpstar(1.0, grid).unwrap();
        for n in 0..3 {
            let out = linear_rg_apply(&f, n, 2.0, &k, &ts).unwrap();
            assert!(bq_norm(&(&out - &f)) < 1e-10);
        }
    }

    #[test]
    fn mean_zero_stays_mean_zero() {
        let (k, ts, grid) = setup();
        let g = &mean_zero_family(&k, 1.0, grid, 3, 1).unwrap()[0];
        assert_eq!(g.hat_at_zero(), Complex64::new(0.0, 0.0));
        let out = linear_rg_apply(g, 0, 2.0, &k, &ts).unwrap();
        assert_eq!(out.hat_at_zero().norm(), 0.0);
    }

    #[test]
    fn first_moment_mode_against_dense_scan() {
        let (k, ts, grid) = setup();
        let g = SpectralFunction::from_closed_form(
            grid,
            |w| Complex64::new(w * (-w * w).exp(), 0.0),
            |w| Complex64::new((1.0 - 2.0 * w * w) * (-w * w).exp(), 0.0),
        );
        let out = linear_rg_apply(&g, 0, 2.0, &k, &ts).unwrap();
        // out^(w) = (w/2) e^{-w^2/4} e^{-3 w^2/8} = (w/2) e^{-5 w^2/8}
        let scan = |h: &dyn Fn(f64) -> f64| {
            (0..=1_000_000)
                .map(|i| h(-16.0 + 32.0 * i as f64 / 1e6))
                .fold(0.0f64, f64::max)
        };
        let num = scan(&|w: f64| {
            let e = (-5.0 * w * w / 8.0).exp();
            (1.0 + w * w) * ((w / 2.0).abs() * e + (0.5 - 5.0 * w * w / 8.0).abs() * e)
        });
        let den = scan(&|w: f64| {
            let e = (-w * w).exp();
            (1.0 + w * w) * (w.abs() * e + (1.0 - 2.0 * w * w).abs() * e)
        });
        let measured = bq_norm(&out) / bq_norm(&g);
        assert!((measured - num / den).abs() < 1e-6 * (num / den));
    }

    #[test]
    fn linear_flow_of_fixed_point() {
        let (k, ts, grid) = setup();
        let f = k.fpstar(1.0, grid).unwrap();
        for row in linear_flow(&f, 5, 2.0, &k, &ts).unwrap() {
            assert!(row.bq_g < 1e-10);
            assert!(row.err_to_afpstar < 1e-10);
        }
    }

    #[test]
    fn linear_flow_reaches_scaled_profile() {
        let (k, ts, grid) = setup();
        // f^0 = 2 e^{-0.51 w^2}; exact iterate is 2 e^{-w^2/2 - 0.01 w^2 / 4^n}
        let f0 = SpectralFunction::from_closed_form(
            grid,
            |w| Complex64::new(2.0 * (-0.51 * w * w).exp(), 0.0),
            |w| Complex64::new(-2.04 * w * (-0.51 * w * w).exp(), 0.0),
        );
        let rows = linear_flow(&f0, 12, 2.0, &k, &ts).unwrap();
        assert!((rows[0].a - 2.0).abs() < 1e-15);
        let last = rows.last().unwrap();
        assert!(last.err_to_afpstar < 1e-8, "{}", last.err_to_afpstar);
        let b = 0.5 + 0.01 / 4f64.powi(12);
        let oracle = SpectralFunction::from_closed_form(
            grid,
            |w| Complex64::new(2.0 * (-b * w * w).exp(), 0.0),
            |w| Complex64::new(-4.0 * b * w * (-b * w * w).exp(), 0.0),
        );
        let fp = k.fpstar(1.0, grid).unwrap().scaled(2.0);
        let exact_err = bq_norm(&(&oracle - &fp));
        assert!((last.err_to_afpstar - exact_err).abs() < 1e-12);
    }

    #[test]
    fn contraction_scaling() {
        let (k, ts, grid) = setup();
        let family = mean_zero_family(&k, 1.0, grid, 0, 20).unwrap();
        let study = contraction_study(&family, &[2.0, 4.0, 8.0], &k, &ts).unwrap();
        let slope = study.fit.unwrap().slope;
        assert!((slope + 1.0).abs() < 0.15, "slope {slope}");
        assert_eq!(study.rows.len(), 60);
    }
}

use std::f64::consts::PI;

use num_complex::Complex64;

use super::function::{from_physical_padded, to_physical_complex, to_physical_padded, SpectralFunction};
use super::grid::SpectralGrid;
use super::transform;
use crate::error::{Error, Result};

/// Zero-padding factor that keeps a degree-`j` product free of aliasing in
/// the retained band.
pub fn padding_factor(j: u32) -> usize {
    let need = (j as usize + 2) / 2;
    need.next_power_of_two().max(2)
}

/// Physical samples of `f` on the grid refined by `factor`.
pub fn physical_padded(f: &SpectralFunction, factor: usize) -> Vec<f64> {
    to_physical_padded(f.hat(), f.grid(), factor)
}

/// Transform of samples produced on a grid refined by `factor`, truncated back
/// to `grid`.
pub fn from_physical_refined(samples: &[f64], grid: SpectralGrid, factor: usize) -> Result<SpectralFunction> {
    if samples.len() != grid.n_points() * factor {
        return Err(Error::LengthMismatch {
            expected: grid.n_points() * factor,
            got: samples.len(),
        });
    }
    Ok(from_physical_padded(samples, grid, factor))
}

/// Transform of `f(x)^j`, computed pseudo-spectrally on a zero-padded grid.
pub fn pointwise_power(f: &SpectralFunction, j: u32) -> Result<SpectralFunction> {
    if j < 2 {
        return Err(Error::InvalidArgument(format!(
            "pointwise power needs j >= 2, got {j}"
        )));
    }
    if f.is_zero() {
        return Ok(SpectralFunction::zeros(*f.grid()));
    }
    let factor = padding_factor(j);
    let samples: Vec<f64> = physical_padded(f, factor)
        .into_iter()
        .map(|v| v.powi(j as i32))
        .collect();
    Ok(from_physical_padded(&samples, *f.grid(), factor))
}

/// Spatial rescaling `g(x) -> s g(s x)`, i.e. `g^(omega) -> g^(omega / s)`,
/// on the same grid.
pub fn rescale(f: &SpectralFunction, s: f64) -> Result<SpectralFunction> {
    if !(s.is_finite() && s >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rescale factor must be >= 1, got {s}"
        )));
    }
    if s == 1.0 {
        return Ok(f.clone());
    }
    resample_unchecked(f, *f.grid(), s)
}

/// Evaluates `omega -> f^(omega / s)` on `target`. Every target frequency,
/// divided by `s`, must lie inside the source grid.
pub fn resample(f: &SpectralFunction, target: SpectralGrid, s: f64) -> Result<SpectralFunction> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "resample factor must be positive, got {s}"
        )));
    }
    if target.omega_max() / s > f.grid().omega_max() * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "target band {} exceeds source band {} (extrapolation)",
            target.omega_max() / s,
            f.grid().omega_max()
        )));
    }
    if target.q() != f.grid().q() {
        return Err(Error::GridMismatch);
    }
    resample_unchecked(f, target, s)
}

// The source transform is the trigonometric sum `dx sum_j f_j e^{-i omega x_j}`
// over its physical samples, so any set of frequencies on a uniform lattice is
// a chirp-z transform of those samples.
fn resample_unchecked(f: &SpectralFunction, target: SpectralGrid, s: f64) -> Result<SpectralFunction> {
    let src = f.grid();
    let dx = src.dx();
    let gamma = target.d_omega() * dx / (2.0 * PI * s);
    let n_out = target.n_points();
    let eval = |hat: &[Complex64], scale: f64| -> Vec<Complex64> {
        let phys = to_physical_complex(hat, src, 1);
        transform::chirp_eval(&phys, gamma, n_out)
            .into_iter()
            .map(|v| v * (dx * scale))
            .collect()
    };
    let mut hat = eval(f.hat(), 1.0);
    let hat_deriv = eval(f.hat_deriv(), 1.0 / s);
    // omega = 0 maps to itself: keep the mass exactly.
    hat[target.zero_index()] = f.hat_at_zero();
    SpectralFunction::new(target, hat, hat_deriv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: SpectralGrid, a: f64) -> SpectralFunction {
        SpectralFunction::from_closed_form(
            grid,
            |w| Complex64::new((-a * w * w).exp(), 0.0),
            |w| Complex64::new(-2.0 * a * w * (-a * w * w).exp(), 0.0),
        )
    }

    #[test]
    fn padding_factors() {
        assert_eq!(padding_factor(2), 2);
        assert_eq!(padding_factor(3), 2);
        assert_eq!(padding_factor(4), 4);
        assert_eq!(padding_factor(7), 4);
        assert_eq!(padding_factor(8), 8);
    }

    #[test]
    fn rescale_gaussian_by_two() {
        let grid = SpectralGrid::new(16.0, 2048, 2).unwrap();
        let f = gaussian(grid, 1.0);
        let g = rescale(&f, 2.0).unwrap();
        let expect = gaussian(grid, 0.25);
        for k in 0..grid.n_points() {
            assert!((g.hat()[k] - expect.hat()[k]).norm() < 1e-8);
            assert!((g.hat_deriv()[k] - expect.hat_deriv()[k]).norm() < 1e-8);
        }
    }

    #[test]
    fn rescale_identity_and_rejection() {
        let grid = SpectralGrid::new(16.0, 256, 2).unwrap();
        let f = gaussian(grid, 1.0);
        assert_eq!(rescale(&f, 1.0).unwrap(), f);
        assert!(rescale(&f, 0.5).is_err());
        assert!(rescale(&f, f64::NAN).is_err());
    }

    #[test]
    fn rescale_keeps_mass() {
        let grid = SpectralGrid::new(16.0, 2048, 2).unwrap();
        let f = gaussian(grid, 0.7).scaled(1.3);
        let g = rescale(&f, 3.7).unwrap();
        assert!((g.hat_at_zero() - f.hat_at_zero()).norm() < 1e-12);
    }

    #[test]
    fn resample_onto_narrower_grid() {
        let src = SpectralGrid::new(16.0, 2048, 2).unwrap();
        let dst = SpectralGrid::new(4.0, 512, 2).unwrap();
        let g = resample(&gaussian(src, 0.5), dst, 1.0).unwrap();
        let expect = gaussian(dst, 0.5);
        for k in 0..dst.n_points() {
            assert!((g.hat()[k] - expect.hat()[k]).norm() < 1e-10);
        }
        let wide = SpectralGrid::new(32.0, 2048, 2).unwrap();
        assert!(resample(&gaussian(src, 0.5), wide, 1.0).is_err());
    }

    #[test]
    fn power_rejects_small_exponent() {
        let grid = SpectralGrid::new(8.0, 64, 2).unwrap();
        assert!(pointwise_power(&gaussian(grid, 1.0), 1).is_err());
    }

    #[test]
    fn square_against_direct_convolution() {
        let grid = SpectralGrid::new(16.0, 2048, 2).unwrap();
        let sq = pointwise_power(&gaussian(grid, 1.0), 2).unwrap();
        // (f^2)^(w) = (1/2pi) int f^(w - v) f^(v) dv
        let conv = |w: f64| {
            let h = 1e-3;
            (-20_000..=20_000)
                .map(|i| {
                    let v = i as f64 * h;
                    (-(w - v) * (w - v) - v * v).exp()
                })
                .sum::<f64>()
                * h
                / (2.0 * PI)
        };
        for k in [1024, 1040, 1100, 1200, 900] {
            let w = grid.omega(k);
            let expect = conv(w);
            assert!((sq.hat()[k].re - expect).abs() < 1e-12, "w = {w}");
            assert!(sq.hat()[k].im.abs() < 1e-12);
            let closed = (-w * w / 2.0).exp() / (2.0 * (2.0 * PI).sqrt());
            assert!((expect - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn cube_of_even_function_is_even() {
        let grid = SpectralGrid::new(16.0, 1024, 2).unwrap();
        let cube = pointwise_power(&gaussian(grid, 0.5), 3).unwrap();
        let n = grid.n_points();
        for k in 1..n / 2 {
            let (a, b) = (cube.hat()[n / 2 + k], cube.hat()[n / 2 - k]);
            assert!((a - b).norm() < 1e-14);
            assert!(a.im.abs() < 1e-14);
        }
    }

    #[test]
    fn rescale_composes() {
        let grid = SpectralGrid::new(16.0, 2048, 2).unwrap();
        let f = gaussian(grid, 0.3);
        let twice = rescale(&rescale(&f, 2.0).unwrap(), 3.0).unwrap();
        let once = rescale(&f, 6.0).unwrap();
        for k in 0..grid.n_points() {
            assert!((twice.hat()[k] - once.hat()[k]).norm() < 1e-8);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn rescale_matches_closed_form(a in 0.2f64..1.5, s in 1.0f64..6.0) {
            let grid = SpectralGrid::new(16.0, 1024, 2).unwrap();
            let g = rescale(&gaussian(grid, a), s).unwrap();
            let expect = gaussian(grid, a / (s * s));
            for k in 0..grid.n_points() {
                proptest::prop_assert!((g.hat()[k] - expect.hat()[k]).norm() < 1e-8);
            }
        }
    }
}

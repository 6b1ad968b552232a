//! Functions of one real variable stored as samples of their transform.

mod function;
mod grid;
mod norm;
mod ops;
pub(crate) mod transform;

pub use function::SpectralFunction;
pub use grid::SpectralGrid;
pub use norm::{bq_norm, bq_norm_grid, bq_norm_report, NormReport};
pub(crate) use norm::golden_max;
pub use ops::{
    from_physical_refined, padding_factor, physical_padded, pointwise_power, rescale, resample,
};

/// Convenience wrapper around [`SpectralGrid::new`].
pub fn make_grid(omega_max: f64, n_points: usize, q: u32) -> crate::Result<SpectralGrid> {
    SpectralGrid::new(omega_max, n_points, q)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use num_complex::Complex64;

    use super::*;

    fn grid() -> SpectralGrid {
        SpectralGrid::new(16.0, 2048, 2).unwrap()
    }

    #[test]
    fn heat_kernel_transform() {
        let g = grid();
        let samples: Vec<f64> = g
            .xs()
            .iter()
            .map(|x| (2.0 * PI).powf(-0.5) * (-x * x / 2.0).exp())
            .collect();
        let f = SpectralFunction::from_physical(&samples, g).unwrap();
        assert!((f.hat_at_zero().re - 1.0).abs() < 1e-10);
        for (k, w) in g.omegas().iter().enumerate() {
            let e = (-w * w / 2.0).exp();
            assert!((f.hat()[k] - e).norm() < 1e-10);
            assert!((f.hat_deriv()[k] - (-w * e)).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_and_odd_samples() {
        let g = grid();
        let zero = SpectralFunction::from_physical(&vec![0.0; 2048], g).unwrap();
        assert!(zero.is_zero());
        assert_eq!(bq_norm(&zero), 0.0);
        let odd: Vec<f64> = g.xs().iter().map(|x| x * (-x * x).exp()).collect();
        let f = SpectralFunction::from_physical(&odd, g).unwrap();
        assert!(f.hat_at_zero().norm() < 1e-15);
        assert!(SpectralFunction::from_physical(&[0.0; 10], g).is_err());
    }

    #[test]
    fn physical_round_trip() {
        let g = grid();
        let v: Vec<f64> = g
            .xs()
            .iter()
            .map(|x| (1.0 + 0.3 * x) * (-x * x / 3.0).exp())
            .collect();
        let back = SpectralFunction::from_physical(&v, g).unwrap().to_physical();
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn hermitian_symmetry_of_real_data() {
        let g = grid();
        let v: Vec<f64> = g.xs().iter().map(|x| (-(x - 0.7).powi(2)).exp()).collect();
        let f = SpectralFunction::from_physical(&v, g).unwrap();
        let n = g.n_points();
        for k in 1..n {
            let mirror = n - k;
            assert!((f.hat()[k] - f.hat()[mirror].conj()).norm() < 1e-13);
        }
    }

    #[test]
    fn norm_matches_dense_scan() {
        let g = grid();
        let f = SpectralFunction::from_closed_form(
            g,
            |w| Complex64::new((-w * w / 2.0).exp(), 0.0),
            |w| Complex64::new(-w * (-w * w / 2.0).exp(), 0.0),
        );
        let scan = (0..1_000_000)
            .map(|i| {
                let w = -16.0 + 32.0 * i as f64 / 1e6;
                (1.0 + w * w) * (1.0 + w.abs()) * (-w * w / 2.0).exp()
            })
            .fold(0.0f64, f64::max);
        let report = bq_norm_report(&f);
        assert!((report.value - scan).abs() < 1e-6, "{} vs {scan}", report.value);
        assert!(report.value >= report.grid_value);
        assert!(!report.boundary_dominated);
    }

    #[test]
    fn boundary_flag() {
        let g = SpectralGrid::new(4.0, 64, 2).unwrap();
        let f = SpectralFunction::from_closed_form(
            g,
            |w| Complex64::new((-0.01 * w * w).exp(), 0.0),
            |_| Complex64::new(0.0, 0.0),
        );
        assert!(bq_norm_report(&f).boundary_dominated);
    }

    #[test]
    fn grid_norm_triangle_inequality() {
        let g = grid();
        let a = SpectralFunction::from_closed_form(
            g,
            |w| Complex64::new((-w * w).exp(), 0.0),
            |w| Complex64::new(-2.0 * w * (-w * w).exp(), 0.0),
        );
        let b = SpectralFunction::from_closed_form(
            g,
            |w| Complex64::new(w * (-w * w / 3.0).exp(), 0.0),
            |w| Complex64::new((1.0 - 2.0 * w * w / 3.0) * (-w * w / 3.0).exp(), 0.0),
        );
        let sum = &a + &b;
        assert!(bq_norm_grid(&sum) <= bq_norm_grid(&a) + bq_norm_grid(&b));
    }

    #[test]
    fn norm_homogeneity() {
        let g = grid();
        let f = SpectralFunction::from_closed_form(
            g,
            |w| Complex64::new((-w * w / 2.0).exp(), 0.0),
            |w| Complex64::new(-w * (-w * w / 2.0).exp(), 0.0),
        );
        let r = bq_norm(&f.scaled(3.0)) / bq_norm(&f);
        assert!((r - 3.0).abs() < 1e-12);
        let r = bq_norm(&f.scaled(-3.0)) / bq_norm(&f);
        assert!((r - 3.0).abs() < 1e-12);
    }
}

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Symmetric frequency grid `omega_k = -omega_max + k * d_omega`, `k = 0..n_points`.
///
/// The grid always contains `omega = 0` at index `n_points / 2`. Its dual
/// physical grid has spacing `pi / omega_max` and period `2 pi / d_omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    omega_max: f64,
    n_points: usize,
    q: u32,
}

impl SpectralGrid {
    pub fn new(omega_max: f64, n_points: usize, q: u32) -> Result<Self> {
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "omega_max must be a positive finite number, got {omega_max}"
            )));
        }
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 16, got {n_points}"
            )));
        }
        if q < 2 {
            return Err(Error::InvalidGrid(format!(
                "decay exponent q must be an integer > 1, got {q}"
            )));
        }
        Ok(SpectralGrid {
            omega_max,
            n_points,
            q,
        })
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn d_omega(&self) -> f64 {
        2.0 * self.omega_max / self.n_points as f64
    }

    /// Index of the `omega = 0` node.
    pub fn zero_index(&self) -> usize {
        self.n_points / 2
    }

    pub fn omega(&self, k: usize) -> f64 {
        (k as f64 - (self.n_points / 2) as f64) * self.d_omega()
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.omega(k)).collect()
    }

    /// Physical sample spacing `pi / omega_max`.
    pub fn dx(&self) -> f64 {
        PI / self.omega_max
    }

    /// Physical period `2 pi / d_omega` (the "x extent" of the window).
    pub fn x_extent(&self) -> f64 {
        2.0 * PI / self.d_omega()
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.n_points / 2) as f64) * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// The same grid with `omega_max` divided by `factor`; the physical window
    /// grows by the same factor.
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        SpectralGrid::new(self.omega_max / factor, self.n_points, self.q)
    }

    /// Whether two grids coincide up to a relative tolerance on `omega_max`.
    pub fn matches(&self, other: &SpectralGrid, rel_tol: f64) -> bool {
        self.n_points == other.n_points
            && self.q == other.q
            && (self.omega_max - other.omega_max).abs() <= rel_tol * self.omega_max
    }

    /// Weight `1 + |omega|^q` of the B_q norm.
    pub fn weight(&self, omega: f64) -> f64 {
        1.0 + omega.abs().powi(self.q as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grid_layout() {
        let g = SpectralGrid::new(16.0, 2048, 2).unwrap();
        assert_eq!(g.d_omega(), 0.015625);
        assert_eq!(g.omega(1024), 0.0);
        assert_eq!(g.zero_index(), 1024);
        assert_eq!(g.omega(0), -16.0);
    }

    #[test]
    fn smallest_legal_grid() {
        let g = SpectralGrid::new(8.0, 16, 2).unwrap();
        assert_eq!(g.omega(0), -8.0);
        assert_eq!(g.omega(15), 7.0);
        assert_eq!(g.omega(8), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SpectralGrid::new(16.0, 100, 2).is_err());
        assert!(SpectralGrid::new(16.0, 2047, 2).is_err());
        assert!(SpectralGrid::new(16.0, 8, 2).is_err());
        assert!(SpectralGrid::new(16.0, 2048, 1).is_err());
        assert!(SpectralGrid::new(0.0, 2048, 2).is_err());
        assert!(SpectralGrid::new(-1.0, 2048, 2).is_err());
        assert!(SpectralGrid::new(f64::NAN, 2048, 2).is_err());
    }

    #[test]
    fn dual_grid_relation() {
        let g = SpectralGrid::new(16.0, 2048, 2).unwrap();
        let prod = g.d_omega() * g.dx() * g.n_points() as f64;
        assert!((prod - 2.0 * PI).abs() < 1e-12);
        assert!((g.x_extent() - g.dx() * 2048.0).abs() < 1e-9);
    }
}

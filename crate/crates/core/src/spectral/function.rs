use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::grid::SpectralGrid;
use super::transform;
use crate::error::{Error, Result};

/// A real function of one variable, held as samples of its transform
/// `f^(omega_k)` and of the transform derivative `f^'(omega_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    grid: SpectralGrid,
    hat: Vec<Complex64>,
    hat_deriv: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn new(grid: SpectralGrid, hat: Vec<Complex64>, hat_deriv: Vec<Complex64>) -> Result<Self> {
        let n = grid.n_points();
        for len in [hat.len(), hat_deriv.len()] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        Ok(SpectralFunction {
            grid,
            hat,
            hat_deriv,
        })
    }

    pub fn zeros(grid: SpectralGrid) -> Self {
        let n = grid.n_points();
        SpectralFunction {
            grid,
            hat: vec![Complex64::new(0.0, 0.0); n],
            hat_deriv: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Samples a transform given in closed form together with its derivative.
    pub fn from_closed_form(
        grid: SpectralGrid,
        mut hat: impl FnMut(f64) -> Complex64,
        mut hat_deriv: impl FnMut(f64) -> Complex64,
    ) -> Self {
        let omegas = grid.omegas();
        SpectralFunction {
            grid,
            hat: omegas.iter().map(|&w| hat(w)).collect(),
            hat_deriv: omegas.iter().map(|&w| hat_deriv(w)).collect(),
        }
    }

    /// Transform of physical samples `f(x_j)` on the grid's dual window.
    pub fn from_physical(samples: &[f64], grid: SpectralGrid) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: samples.len(),
            });
        }
        Ok(from_physical_padded(samples, grid, 1))
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn hat(&self) -> &[Complex64] {
        &self.hat
    }

    pub fn hat_deriv(&self) -> &[Complex64] {
        &self.hat_deriv
    }

    pub fn into_parts(self) -> (SpectralGrid, Vec<Complex64>, Vec<Complex64>) {
        (self.grid, self.hat, self.hat_deriv)
    }

    /// `f^(0)`, the total mass of the physical function.
    pub fn hat_at_zero(&self) -> Complex64 {
        self.hat[self.grid.zero_index()]
    }

    /// Physical samples on the dual window (real part; the imaginary part is
    /// rounding noise for Hermitian data).
    pub fn to_physical(&self) -> Vec<f64> {
        to_physical_padded(&self.hat, &self.grid, 1)
    }

    /// Same function, reinterpreted on another grid with identical layout.
    /// Used when the underlying frequencies are relabeled by a dilation.
    pub(crate) fn relabeled(&self, grid: SpectralGrid, deriv_scale: f64) -> Self {
        debug_assert_eq!(grid.n_points(), self.grid.n_points());
        SpectralFunction {
            grid,
            hat: self.hat.clone(),
            hat_deriv: self.hat_deriv.iter().map(|v| v * deriv_scale).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        SpectralFunction {
            grid: self.grid,
            hat: self.hat.iter().map(|v| v * c).collect(),
            hat_deriv: self.hat_deriv.iter().map(|v| v * c).collect(),
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &SpectralFunction) -> Result<Self> {
        self.check_grid(other)?;
        Ok(SpectralFunction {
            grid: self.grid,
            hat: self.hat.iter().zip(&other.hat).map(|(a, b)| a + b * c).collect(),
            hat_deriv: self
                .hat_deriv
                .iter()
                .zip(&other.hat_deriv)
                .map(|(a, b)| a + b * c)
                .collect(),
        })
    }

    /// Pointwise product with a frequency multiplier `m(omega)` whose
    /// derivative is `dm(omega)`; the derivative array follows the product rule.
    pub fn multiply(&self, m: &[Complex64], dm: &[Complex64]) -> Self {
        debug_assert_eq!(m.len(), self.hat.len());
        let hat = self.hat.iter().zip(m).map(|(h, g)| h * g).collect();
        let hat_deriv = self
            .hat
            .iter()
            .zip(&self.hat_deriv)
            .zip(m.iter().zip(dm))
            .map(|((h, hd), (g, gd))| gd * h + g * hd)
            .collect();
        SpectralFunction {
            grid: self.grid,
            hat,
            hat_deriv,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.hat
            .iter()
            .chain(&self.hat_deriv)
            .all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub(crate) fn check_grid(&self, other: &SpectralFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

impl Add for &SpectralFunction {
    type Output = SpectralFunction;

    fn add(self, rhs: &SpectralFunction) -> SpectralFunction {
        self.axpy(1.0, rhs).expect("adding spectral functions on different grids")
    }
}

impl Sub for &SpectralFunction {
    type Output = SpectralFunction;

    fn sub(self, rhs: &SpectralFunction) -> SpectralFunction {
        self.axpy(-1.0, rhs)
            .expect("subtracting spectral functions on different grids")
    }
}

impl Mul<f64> for &SpectralFunction {
    type Output = SpectralFunction;

    fn mul(self, c: f64) -> SpectralFunction {
        self.scaled(c)
    }
}

impl Neg for &SpectralFunction {
    type Output = SpectralFunction;

    fn neg(self) -> SpectralFunction {
        self.scaled(-1.0)
    }
}

/// Physical samples on a grid refined by `factor` (same period, spacing
/// `dx / factor`), obtained by zero-padding the spectrum.
pub(crate) fn to_physical_padded(hat: &[Complex64], grid: &SpectralGrid, factor: usize) -> Vec<f64> {
    to_physical_complex(hat, grid, factor)
        .into_iter()
        .map(|v| v.re)
        .collect()
}

pub(crate) fn to_physical_complex(
    hat: &[Complex64],
    grid: &SpectralGrid,
    factor: usize,
) -> Vec<Complex64> {
    let m = grid.n_points() * factor;
    let mut buf = transform::pad_spectrum(hat, m);
    transform::inverse_centered(&mut buf, grid.dx() / factor as f64);
    buf
}

/// Inverse of [`to_physical_padded`]: transform `factor * n` physical samples
/// and keep the central `n` frequencies. `hat_deriv` is the transform of
/// `(-i x) f(x)`.
pub(crate) fn from_physical_padded(samples: &[f64], grid: SpectralGrid, factor: usize) -> SpectralFunction {
    let m = samples.len();
    debug_assert_eq!(m, grid.n_points() * factor);
    let dx = grid.dx() / factor as f64;
    let centre = (m / 2) as f64;
    let mut hat: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut hat_deriv: Vec<Complex64> = samples
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let x = (j as f64 - centre) * dx;
            Complex64::new(0.0, -x * v)
        })
        .collect();
    transform::forward_centered(&mut hat, dx);
    transform::forward_centered(&mut hat_deriv, dx);
    let n = grid.n_points();
    SpectralFunction {
        grid,
        hat: transform::truncate_spectrum(&hat, n),
        hat_deriv: transform::truncate_spectrum(&hat_deriv, n),
    }
}

use num_complex::Complex64;

use super::function::{to_physical_complex, SpectralFunction};
use super::transform;

/// Outcome of a B_q norm evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    /// Refined estimate of the supremum.
    pub value: f64,
    /// Plain maximum over grid nodes.
    pub grid_value: f64,
    /// Frequency at which the refined maximum was found.
    pub argmax: f64,
    /// The grid maximum sits in the outer 10% of the grid, so the window is
    /// probably too narrow for the weight to have decayed.
    pub boundary_dominated: bool,
}

fn weighted(grid_weight: f64, hat: Complex64, hat_deriv: Complex64) -> f64 {
    grid_weight * (hat.norm() + hat_deriv.norm())
}

/// Maximum over grid nodes of `(1 + |omega|^q)(|f^| + |f^'|)`.
pub fn bq_norm_grid(f: &SpectralFunction) -> f64 {
    grid_argmax(f).1
}

fn grid_argmax(f: &SpectralFunction) -> (usize, f64) {
    let grid = f.grid();
    let mut best = (grid.zero_index(), 0.0);
    for (k, (h, hd)) in f.hat().iter().zip(f.hat_deriv()).enumerate() {
        let v = weighted(grid.weight(grid.omega(k)), *h, *hd);
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

/// B_q norm with the grid maximum refined between neighbouring nodes.
pub fn bq_norm(f: &SpectralFunction) -> f64 {
    bq_norm_report(f).value
}

/// Grid maximum followed by a golden-section search on the trigonometric
/// interpolant over the two cells adjacent to the maximizing node.
pub fn bq_norm_report(f: &SpectralFunction) -> NormReport {
    let grid = *f.grid();
    let n = grid.n_points();
    let (k, grid_value) = grid_argmax(f);
    let edge = n / 10;
    let boundary_dominated = grid_value > 0.0 && (k < edge || k >= n - edge);
    let mut report = NormReport {
        value: grid_value,
        grid_value,
        argmax: grid.omega(k),
        boundary_dominated,
    };
    if grid_value == 0.0 || k == 0 || k == n - 1 {
        return report;
    }

    let dx = grid.dx();
    let xs = grid.xs();
    let phys = to_physical_complex(f.hat(), &grid, 1);
    let phys_deriv = to_physical_complex(f.hat_deriv(), &grid, 1);
    let eval = |w: f64| {
        let h = transform::eval_at(&phys, &xs, dx, w);
        let hd = transform::eval_at(&phys_deriv, &xs, dx, w);
        weighted(grid.weight(w), h, hd)
    };

    let (w, v) = golden_max(eval, grid.omega(k - 1), grid.omega(k + 1), 1e-10 * grid.d_omega());
    if v > report.value {
        report.value = v;
        report.argmax = w;
    }
    report
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub(crate) fn golden_max(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

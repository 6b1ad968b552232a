//! The time reparametrization `s(t) = (t^{p+1} - 1)/(p+1) + r(t)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Rate function `c(t) = s'(t)` supplied by the caller.
pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum RModel {
    /// `r = 0`, i.e. `c(t) = t^p`.
    Zero,
    /// `c(t) = t^p + b t^{p - gamma}`, so `r(t) = b (t^{p+1-gamma} - 1)/(p+1-gamma)`.
    Power { b: f64, gamma: f64 },
    /// Arbitrary positive `c(t)`; `s` is obtained by adaptive quadrature.
    Quadrature(RateFn),
}

impl fmt::Debug for RModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RModel::Zero => write!(f, "Zero"),
            RModel::Power { b, gamma } => write!(f, "Power {{ b: {b:?}, gamma: {gamma:?} }}"),
            RModel::Quadrature(_) => write!(f, "Quadrature(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TimeScale {
    p: f64,
    r: RModel,
}

const QUAD_TOL: f64 = 1e-10;

impl TimeScale {
    pub fn new(p: f64, r: RModel) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidArgument(format!("p must be positive, got {p}")));
        }
        if let RModel::Power { b, gamma } = r {
            if !(gamma.is_finite() && gamma > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "gamma must be positive, got {gamma}"
                )));
            }
            // c(t) = t^p (1 + b t^{-gamma}) stays positive on [1, inf) iff b > -1
            if !(b.is_finite() && b > -1.0) {
                return Err(Error::InvalidArgument(format!(
                    "b must exceed -1 for a positive rate, got {b}"
                )));
            }
        }
        Ok(TimeScale { p, r })
    }

    pub fn zero(p: f64) -> Result<Self> {
        Self::new(p, RModel::Zero)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn r_model(&self) -> &RModel {
        &self.r
    }

    pub fn is_pure_power(&self) -> bool {
        matches!(self.r, RModel::Zero)
    }

    fn core(&self, t: f64) -> f64 {
        // (t^{p+1} - 1)/(p+1) without cancellation near t = 1
        ((self.p + 1.0) * t.ln()).exp_m1() / (self.p + 1.0)
    }

    /// `c(t)`.
    pub fn rate(&self, t: f64) -> f64 {
        match &self.r {
            RModel::Zero => t.powf(self.p),
            RModel::Power { b, gamma } => t.powf(self.p) + b * t.powf(self.p - gamma),
            RModel::Quadrature(c) => c(t),
        }
    }

    /// `r(t)`.
    pub fn r(&self, t: f64) -> Result<f64> {
        check_ge_one(t)?;
        Ok(match &self.r {
            RModel::Zero => 0.0,
            RModel::Power { b, gamma } => b * power_increment(self.p + 1.0 - gamma, t),
            RModel::Quadrature(c) => simpson(&**c, 1.0, t, QUAD_TOL) - self.core(t),
        })
    }

    /// `s(t)`.
    pub fn s(&self, t: f64) -> Result<f64> {
        check_ge_one(t)?;
        Ok(match &self.r {
            RModel::Quadrature(c) => simpson(&**c, 1.0, t, QUAD_TOL),
            _ => self.core(t) + self.r(t)?,
        })
    }

    /// `r_n(t) = (r(L^n t) - r(L^n)) / L^{n(p+1)}`.
    pub fn r_n(&self, n: u32, big_l: f64, t: f64) -> Result<f64> {
        check_window_arg(big_l, t)?;
        Ok(match &self.r {
            RModel::Zero => 0.0,
            RModel::Power { b, gamma } => {
                b * big_l.powf(-(n as f64) * gamma) * power_increment(self.p + 1.0 - gamma, t)
            }
            RModel::Quadrature(_) => self.s_n(n, big_l, t)? - self.core(t),
        })
    }

    /// `s_n(t) = (t^{p+1} - 1)/(p+1) + r_n(t)`, `1 <= t <= L`.
    pub fn s_n(&self, n: u32, big_l: f64, t: f64) -> Result<f64> {
        check_window_arg(big_l, t)?;
        Ok(match &self.r {
            RModel::Quadrature(c) => {
                let ln = big_l.powi(n as i32);
                let scale = ln.powf(self.p + 1.0);
                // substitute tau = L^n u so the integrand is O(1) on [1, t]
                let g = |u: f64| c(ln * u) * ln / scale;
                simpson(&g, 1.0, t, QUAD_TOL)
            }
            _ => self.core(t) + self.r_n(n, big_l, t)?,
        })
    }

    /// Window condition `1/(6(p+1)) < s_n(L)/L^{p+1} < 3/(2(p+1))` for
    /// `n = 0..=n_max`, plus the smallest `L` satisfying it for every `n`.
    pub fn check_window(&self, big_l: f64, n_max: u32) -> Result<WindowReport> {
        if !(big_l.is_finite() && big_l > 1.0) {
            return Err(Error::InvalidArgument(format!("L must exceed 1, got {big_l}")));
        }
        let rows = self.window_rows(big_l, n_max)?;
        let passed = rows.iter().all(|r| r.passed);
        Ok(WindowReport {
            big_l,
            lower: self.window_lower(),
            upper: self.window_upper(),
            rows,
            passed,
            smallest_l: self.smallest_window_l(n_max)?,
        })
    }

    pub fn window_lower(&self) -> f64 {
        1.0 / (6.0 * (self.p + 1.0))
    }

    pub fn window_upper(&self) -> f64 {
        3.0 / (2.0 * (self.p + 1.0))
    }

    fn window_rows(&self, big_l: f64, n_max: u32) -> Result<Vec<WindowRow>> {
        let (lo, hi) = (self.window_lower(), self.window_upper());
        (0..=n_max)
            .map(|n| {
                let ratio = self.s_n(n, big_l, big_l)? / big_l.powf(self.p + 1.0);
                Ok(WindowRow {
                    n,
                    ratio,
                    passed: ratio > lo && ratio < hi,
                })
            })
            .collect()
    }

    fn window_ok(&self, big_l: f64, n_max: u32) -> Result<bool> {
        Ok(self.window_rows(big_l, n_max)?.iter().all(|r| r.passed))
    }

    fn smallest_window_l(&self, n_max: u32) -> Result<Option<f64>> {
        let mut lo = 1.0;
        let mut hi = 2.0;
        while !self.window_ok(hi, n_max)? {
            lo = hi;
            hi *= 2.0;
            if hi > 1e12 {
                return Ok(None);
            }
        }
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            if self.window_ok(mid, n_max)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some(hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRow {
    pub n: u32,
    pub ratio: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport {
    pub big_l: f64,
    pub lower: f64,
    pub upper: f64,
    pub rows: Vec<WindowRow>,
    pub passed: bool,
    pub smallest_l: Option<f64>,
}

fn check_ge_one(t: f64) -> Result<()> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::TimeOutOfRange {
            t,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    Ok(())
}

fn check_window_arg(big_l: f64, t: f64) -> Result<()> {
    if !(big_l.is_finite() && big_l > 1.0) {
        return Err(Error::InvalidArgument(format!("L must exceed 1, got {big_l}")));
    }
    if !(t >= 1.0 && t <= big_l) {
        return Err(Error::TimeOutOfRange {
            t,
            lo: 1.0,
            hi: big_l,
        });
    }
    Ok(())
}

/// `(t^e - 1)/e`, continued by `ln t` at `e = 0`.
fn power_increment(e: f64, t: f64) -> f64 {
    if e == 0.0 {
        t.ln()
    } else {
        (e * t.ln()).exp_m1() / e
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

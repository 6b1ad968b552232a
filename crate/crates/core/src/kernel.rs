//! Generalized heat kernels given by their frequency multipliers
//! `G^(omega, t) = exp(-t |omega|^beta)`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{golden_max, SpectralFunction, SpectralGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    Gaussian,
    /// Symmetric stable law with the given index in `(0, 2)`.
    Stable { index: f64 },
}

impl KernelFamily {
    /// Exponent `beta` of the closed-form multiplier.
    pub fn exponent(&self) -> f64 {
        match *self {
            KernelFamily::Gaussian => 2.0,
            KernelFamily::Stable { index } => index,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Stable { .. } => "stable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    d: f64,
    q: u32,
    m: u32,
}

impl KernelSpec {
    /// A kernel whose declared scaling exponent is the family's own.
    pub fn new(family: KernelFamily, q: u32, m: u32) -> Result<Self> {
        if let KernelFamily::Stable { index } = family {
            if !(index > 0.0 && index < 2.0) {
                return Err(Error::InvalidArgument(format!(
                    "stable index must lie in (0, 2), got {index}"
                )));
            }
        }
        Self::declared(family, family.exponent(), q, m)
    }

    pub fn gaussian(q: u32, m: u32) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, q, m)
    }

    pub fn stable(index: f64, q: u32, m: u32) -> Result<Self> {
        Self::new(KernelFamily::Stable { index }, q, m)
    }

    /// A kernel with an arbitrary declared scaling exponent `d`, which may
    /// disagree with the family. Only the validator can tell.
    pub fn declared(family: KernelFamily, d: f64, q: u32, m: u32) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scaling exponent d must be positive, got {d}"
            )));
        }
        if q < 2 {
            return Err(Error::InvalidArgument(format!("q must be > 1, got {q}")));
        }
        if m < 1 {
            return Err(Error::InvalidArgument(format!("M must be > 0, got {m}")));
        }
        Ok(KernelSpec { family, d, q, m })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    fn check_t(t: f64) -> Result<()> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kernel time must be positive, got {t}"
            )));
        }
        Ok(())
    }

    /// `G^(omega, t)`.
    pub fn multiplier(&self, omega: f64, t: f64) -> Result<Complex64> {
        Self::check_t(t)?;
        Ok(Complex64::new(self.mult(omega, t), 0.0))
    }

    /// `d/d omega G^(omega, t)`, taken as 0 at `omega = 0`.
    pub fn multiplier_deriv(&self, omega: f64, t: f64) -> Result<Complex64> {
        Self::check_t(t)?;
        Ok(Complex64::new(self.mult_deriv(omega, t), 0.0))
    }

    pub(crate) fn mult(&self, omega: f64, t: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (-t * omega * omega).exp(),
            KernelFamily::Stable { index } => (-t * omega.abs().powf(index)).exp(),
        }
    }

    pub(crate) fn mult_deriv(&self, omega: f64, t: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => -2.0 * t * omega * (-t * omega * omega).exp(),
            KernelFamily::Stable { index } => {
                if omega == 0.0 {
                    return 0.0;
                }
                let a = omega.abs();
                -t * index * a.powf(index - 1.0) * omega.signum() * (-t * a.powf(index)).exp()
            }
        }
    }

    /// Multiplier arrays `(G^(omega_k / c, t), d/d omega of the same)` on a grid.
    pub(crate) fn arrays(&self, grid: &SpectralGrid, t: f64, c: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let omegas = grid.omegas();
        let m = omegas
            .iter()
            .map(|&w| Complex64::new(self.mult(w / c, t), 0.0))
            .collect();
        let dm = omegas
            .iter()
            .map(|&w| Complex64::new(self.mult_deriv(w / c, t) / c, 0.0))
            .collect();
        (m, dm)
    }

    /// `G(., t) * f`: multiplies the transform by `G^(., t)`.
    pub fn apply(&self, f: &SpectralFunction, t: f64) -> Result<SpectralFunction> {
        Self::check_t(t)?;
        let (m, dm) = self.arrays(f.grid(), t, 1.0);
        Ok(f.multiply(&m, &dm))
    }

    /// The profile `G(x, t)` as a spectral function.
    pub fn profile(&self, grid: SpectralGrid, t: f64) -> Result<SpectralFunction> {
        Self::check_t(t)?;
        Ok(SpectralFunction::from_closed_form(
            grid,
            |w| Complex64::new(self.mult(w, t), 0.0),
            |w| Complex64::new(self.mult_deriv(w, t), 0.0),
        ))
    }

    /// The asymptotic profile `f_p* = G(x, 1/(p+1))`.
    pub fn fpstar(&self, p: f64, grid: SpectralGrid) -> Result<SpectralFunction> {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::InvalidArgument(format!("p must be >= 0, got {p}")));
        }
        self.profile(grid, 1.0 / (p + 1.0))
    }

    /// `K = sup |G^(omega, 1)|` and `K1 = sup |G^'(omega, 1)|`: grid maxima
    /// refined by golden-section search on the closed forms.
    pub fn constants_k_k1(&self, grid: &SpectralGrid) -> (f64, f64) {
        let k = sup_refined(grid, |w| self.mult(w, 1.0).abs());
        let k1 = sup_refined(grid, |w| self.mult_deriv(w, 1.0).abs());
        (k, k1)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            KernelFamily::Gaussian => write!(f, "gaussian")?,
            KernelFamily::Stable { index } => write!(f, "stable({index})")?,
        }
        write!(f, " [d = {}, q = {}, M = {}]", self.d, self.q, self.m)
    }
}

/// Supremum of `h` over the grid, refined around the best node.
pub(crate) fn sup_refined(grid: &SpectralGrid, mut h: impl FnMut(f64) -> f64) -> f64 {
    let n = grid.n_points();
    let mut best = (0, f64::NEG_INFINITY);
    for k in 0..n {
        let v = h(grid.omega(k));
        if v > best.1 {
            best = (k, v);
        }
    }
    let (k, v) = best;
    let lo = grid.omega(k.saturating_sub(1));
    let hi = grid.omega((k + 1).min(n - 1));
    let (_, refined) = golden_max(&mut h, lo, hi, 1e-12 * grid.d_omega());
    v.max(refined)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckId {
    Decay,
    Scaling,
    Semigroup,
    Positivity,
    Normalization,
}

impl CheckId {
    pub const ALL: [CheckId; 5] = [
        CheckId::Decay,
        CheckId::Scaling,
        CheckId::Semigroup,
        CheckId::Positivity,
        CheckId::Normalization,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CheckId::Decay => "G(i) decay",
            CheckId::Scaling => "G(ii) scaling",
            CheckId::Semigroup => "G(iii) semigroup",
            CheckId::Positivity => "G(iv) positivity",
            CheckId::Normalization => "normalization",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckResult {
    pub id: CheckId,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub checks: Vec<CheckResult>,
    /// Log-log slope of the physical density tail, when the tail is above
    /// the rounding floor.
    pub tail_exponent: Option<f64>,
}

impl HypothesisReport {
    pub fn get(&self, id: CheckId) -> &CheckResult {
        self.checks
            .iter()
            .find(|c| c.id == id)
            .expect("every check is present")
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(id: CheckId, residual: f64, tol: f64) -> CheckResult {
    CheckResult {
        id,
        residual,
        tolerance: tol,
        passed: residual.is_finite() && residual < tol,
    }
}

/// Numerical check of the kernel hypotheses on `grid`.
pub fn validate_hypotheses(
    k: &KernelSpec,
    grid: &SpectralGrid,
    t_samples: &[f64],
    tol: f64,
) -> Result<HypothesisReport> {
    if t_samples.is_empty() {
        return Err(Error::InvalidArgument("t_samples is empty".into()));
    }
    for &t in t_samples {
        KernelSpec::check_t(t)?;
    }
    let omegas = grid.omegas();

    let mut scaling: f64 = 0.0;
    for &t in t_samples {
        let c = t.powf(1.0 / k.d);
        for &w in &omegas {
            scaling = scaling.max((k.mult(w, t) - k.mult(c * w, 1.0)).abs());
        }
    }

    let mut semigroup: f64 = 0.0;
    for &t in t_samples {
        let mut splits: Vec<f64> = t_samples.iter().copied().filter(|&s| s < t).collect();
        splits.push(0.5 * t);
        for s in splits {
            for &w in &omegas {
                let lhs = k.mult(w, t);
                let rhs = k.mult(w, t - s) * k.mult(w, s);
                semigroup = semigroup.max((lhs - rhs).abs());
            }
        }
    }

    let mut positivity: f64 = 0.0;
    let mut normalization: f64 = 0.0;
    for &t in t_samples {
        let g = k.profile(*grid, t)?.to_physical();
        let min = g.iter().copied().fold(f64::INFINITY, f64::min);
        positivity = positivity.max(-min);
        let mass: f64 = g.iter().sum::<f64>() * grid.dx();
        normalization = normalization.max((mass - 1.0).abs());
    }

    let (decay, tail_exponent) = decay_check(k, grid)?;

    Ok(HypothesisReport {
        checks: vec![
            check(CheckId::Decay, decay, tol),
            check(CheckId::Scaling, scaling, tol),
            check(CheckId::Semigroup, semigroup, tol),
            check(CheckId::Positivity, positivity.max(0.0), tol),
            check(CheckId::Normalization, normalization, tol),
        ],
        tail_exponent,
    })
}

// Weighted derivatives W_j(x) = (1+|x|)^{M+2} |G^{(j)}(x, 1)| for j = 0..=q+1.
// A bounded weight leaves the tail window small compared to the core; the
// residual is the largest tail/core ratio.
fn decay_check(k: &KernelSpec, grid: &SpectralGrid) -> Result<(f64, Option<f64>)> {
    let period = grid.x_extent();
    let core = period / 32.0;
    let tail_hi = period / 8.0;
    let xs = grid.xs();
    let power = (k.m + 2) as i32;
    let base = k.profile(*grid, 1.0)?;
    let omegas = grid.omegas();
    let mut residual: f64 = 0.0;
    let mut g0 = Vec::new();
    for j in 0..=(k.q + 1) {
        let factor: Vec<Complex64> = omegas
            .iter()
            .map(|&w| Complex64::new(0.0, w).powu(j))
            .collect();
        let deriv = base.multiply(&factor, &vec![Complex64::new(0.0, 0.0); factor.len()]);
        let samples = deriv.to_physical();
        let mut core_max: f64 = 0.0;
        let mut tail_max: f64 = 0.0;
        for (x, v) in xs.iter().zip(&samples) {
            let w = (1.0 + x.abs()).powi(power) * v.abs();
            let ax = x.abs();
            if ax <= core {
                core_max = core_max.max(w);
            } else if ax <= tail_hi {
                tail_max = tail_max.max(w);
            }
        }
        if core_max > 0.0 {
            residual = residual.max(tail_max / core_max);
        }
        if j == 0 {
            g0 = samples;
        }
    }
    Ok((residual, tail_exponent(&xs, &g0, core, tail_hi)))
}

fn tail_exponent(xs: &[f64], g: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let peak = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-12 * peak;
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (x, v) in xs.iter().zip(g) {
        if *x > lo && *x <= hi {
            if *v <= floor {
                return None;
            }
            lx.push(x.ln());
            ly.push(v.ln());
        }
    }
    crate::stats::linear_fit(&lx, &ly).map(|fit| -fit.slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpectralGrid {
        SpectralGrid::new(16.0, 2048, 2).unwrap()
    }

    #[test]
    fn closed_forms() {
        let g = KernelSpec::gaussian(2, 1).unwrap();
        let s = KernelSpec::stable(1.5, 2, 1).unwrap();
        assert!((g.multiplier(1.0, 2.0).unwrap().re - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.multiplier(0.0, 7.0).unwrap().re, 1.0);
        assert_eq!(s.multiplier(0.0, 7.0).unwrap().re, 1.0);
        let want = (-(2.0f64).powf(1.5)).exp();
        assert!((s.multiplier(2.0, 1.0).unwrap().re - want).abs() < 1e-15);
        assert!((g.multiplier_deriv(1.0, 1.0).unwrap().re + 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.multiplier_deriv(0.0, 5.0).unwrap().re, 0.0);
        assert!((s.multiplier_deriv(1.0, 1.0).unwrap().re + 1.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(g.multiplier(1.0, 0.0).is_err());
        assert!(g.multiplier_deriv(1.0, -1.0).is_err());
    }

    #[test]
    fn family_invariants() {
        assert!(KernelSpec::stable(2.0, 2, 1).is_err());
        assert!(KernelSpec::stable(0.0, 2, 1).is_err());
        assert!(KernelSpec::gaussian(1, 1).is_err());
        assert!(KernelSpec::gaussian(2, 0).is_err());
        assert_eq!(KernelSpec::gaussian(2, 1).unwrap().d(), 2.0);
    }

    #[test]
    fn fpstar_profiles() {
        let k = KernelSpec::gaussian(2, 1).unwrap();
        let f1 = k.fpstar(1.0, grid()).unwrap();
        let f0 = k.fpstar(0.0, grid()).unwrap();
        for (i, w) in grid().omegas().iter().enumerate() {
            assert!((f1.hat()[i].re - (-w * w / 2.0).exp()).abs() < 1e-15);
            assert!((f0.hat()[i].re - (-w * w).exp()).abs() < 1e-15);
        }
        assert_eq!(f1.hat_at_zero().re, 1.0);
    }

    #[test]
    fn k_and_k1() {
        let (k, k1) = KernelSpec::gaussian(2, 1).unwrap().constants_k_k1(&grid());
        assert_eq!(k, 1.0);
        // independent dense scan of 2 w exp(-w^2)
        let scan = (0..1_000_000)
            .map(|i| {
                let w = i as f64 * 4e-6;
                2.0 * w * (-w * w).exp()
            })
            .fold(0.0f64, f64::max);
        assert!((k1 - scan).abs() < 1e-9);
        assert!((k1 - (2.0 / std::f64::consts::E).sqrt()).abs() < 1e-12);
        let (ks, _) = KernelSpec::stable(1.5, 2, 1).unwrap().constants_k_k1(&grid());
        assert_eq!(ks, 1.0);
    }

    #[test]
    fn monotone_in_time() {
        let k = KernelSpec::stable(1.5, 2, 1).unwrap();
        for w in grid().omegas() {
            assert!(k.mult(w, 2.0) <= k.mult(w, 1.0));
        }
    }

    #[test]
    fn gaussian_passes_validation() {
        let k = KernelSpec::gaussian(2, 1).unwrap();
        let r = validate_hypotheses(&k, &grid(), &[0.5, 1.0, 2.0, 4.0], 1e-10).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{:?}", c);
        }
        assert_eq!(r.checks.len(), CheckId::ALL.len());
        assert!(r.tail_exponent.is_none());
    }

    #[test]
    fn stable_fails_decay_only() {
        let k = KernelSpec::stable(1.5, 2, 1).unwrap();
        let r = validate_hypotheses(&k, &grid(), &[0.5, 1.0, 2.0, 4.0], 1e-6).unwrap();
        assert!(!r.get(CheckId::Decay).passed);
        for id in [CheckId::Scaling, CheckId::Semigroup, CheckId::Positivity, CheckId::Normalization] {
            assert!(r.get(id).passed, "{:?}", r.get(id));
        }
        let e = r.tail_exponent.unwrap();
        assert!((e - 2.5).abs() < 0.1, "tail exponent {e}");
    }

    #[test]
    fn wrong_scaling_exponent_is_caught() {
        let k = KernelSpec::declared(KernelFamily::Gaussian, 3.0, 2, 1).unwrap();
        let r = validate_hypotheses(&k, &grid(), &[0.5, 2.0, 4.0], 1e-10).unwrap();
        assert!(r.get(CheckId::Scaling).residual > 0.1);
        assert!(!r.get(CheckId::Scaling).passed);
    }
}

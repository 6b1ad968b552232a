//! Explicit constants from the linear and nonlinear estimates, evaluated as
//! diagnostics (sups are refined grid maxima of closed forms).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernel::{sup_refined, KernelSpec};
use crate::nonlinearity::{Classification, NonlinearitySpec};
use crate::spectral::SpectralGrid;
use crate::timescale::TimeScale;

/// Number of steps for which `epsilon_n` is tabulated.
pub const EPSILON_STEPS: u32 = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryConstants {
    pub big_l: f64,
    pub k: f64,
    pub k1: f64,
    pub c_dpq: f64,
    pub k_tilde: f64,
    pub m: f64,
    pub a_dpq: f64,
    pub c: f64,
    pub rho0: f64,
    pub s_rho0: f64,
    pub c_tilde: f64,
    pub m_tilde: f64,
    pub sigma: f64,
    /// `epsilon_n` for `n = 0..=EPSILON_STEPS`.
    pub epsilon_n: Vec<f64>,
    pub classification: Classification,
    pub delta: f64,
    pub delta_range: (f64, f64),
    /// Smallest `L` satisfying the window bounds for every tabulated `n`.
    pub l1: Option<f64>,
    pub l_delta: Option<f64>,
    pub d: f64,
    pub epsilon_bar: f64,
}

impl TheoryConstants {
    pub fn sigma_below_epsilon(&self) -> bool {
        self.epsilon_n.iter().all(|e| self.sigma <= *e)
    }

    /// Labeled values for tabular output.
    pub fn table(&self) -> Vec<(String, String)> {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:.6e}"));
        let mut rows = vec![
            ("L".to_string(), format!("{}", self.big_l)),
            ("K".to_string(), format!("{:.6e}", self.k)),
            ("K1".to_string(), format!("{:.6e}", self.k1)),
            ("C_dpq".to_string(), format!("{:.6e}", self.c_dpq)),
            ("K_tilde".to_string(), format!("{:.6e}", self.k_tilde)),
            ("M".to_string(), format!("{:.6e}", self.m)),
            ("A_dpq".to_string(), format!("{:.6e}", self.a_dpq)),
            ("C".to_string(), format!("{:.6e}", self.c)),
            ("rho0".to_string(), format!("{:.6e}", self.rho0)),
            ("S(rho0)".to_string(), format!("{:.6e}", self.s_rho0)),
            ("C_tilde".to_string(), format!("{:.6e}", self.c_tilde)),
            ("M_tilde".to_string(), format!("{:.6e}", self.m_tilde)),
            ("sigma".to_string(), format!("{:.6e}", self.sigma)),
            ("alpha_c".to_string(), format!("{}", self.classification.alpha_c)),
            ("d_F".to_string(), format!("{}", self.classification.d_f)),
            ("verdict".to_string(), self.classification.verdict.to_string()),
            ("delta".to_string(), format!("{}", self.delta)),
            ("L1".to_string(), opt(self.l1)),
            ("L_delta".to_string(), opt(self.l_delta)),
            ("D".to_string(), format!("{:.6e}", self.d)),
            ("epsilon_bar".to_string(), format!("{:.6e}", self.epsilon_bar)),
        ];
        for (n, e) in self.epsilon_n.iter().enumerate() {
            rows.push((format!("epsilon_{n}"), format!("{e:.6e}")));
        }
        rows.push((
            "sigma <= epsilon_n".to_string(),
            self.sigma_below_epsilon().to_string(),
        ));
        rows
    }
}

/// Admissible open interval for `delta`: `(1 - delta)(p+1) < -d_F`.
pub fn delta_range(classification: &Classification, p: f64) -> (f64, f64) {
    let lo = (1.0 + classification.d_f / (p + 1.0)).max(0.0);
    (lo, 1.0)
}

/// `(A_dpq, C)` of the contraction estimate `||R g|| <= C L^{-(p+1)/d} ||g||`
/// for mean-zero `g`.
pub fn contraction_constants(k: &KernelSpec, p: f64, grid: &SpectralGrid) -> (f64, f64) {
    let d = k.d();
    let q = grid.q() as i32;
    let (kk, k1) = k.constants_k_k1(grid);
    let a_dpq = (6.0 * (p + 1.0)).powf((1.0 + q as f64) / d)
        * (kk * (2.0 + 6.0 * (p + 1.0)).powf(1.0 / d) + k1 * 8f64.powf(1.0 / d));
    let g = |x: f64| k.mult(x, 1.0).abs();
    let gp = |x: f64| k.mult_deriv(x, 1.0).abs();
    let sup_c = sup_refined(grid, |x| {
        (1.0 + x.abs().powi(q)) * (x.abs() * g(x) + x.abs() * gp(x) + g(x))
    });
    (a_dpq, a_dpq * sup_c)
}

pub fn theory_constants(
    k: &KernelSpec,
    ts: &TimeScale,
    spec: &NonlinearitySpec,
    grid: &SpectralGrid,
    big_l: f64,
    delta: Option<f64>,
) -> Result<TheoryConstants> {
    if !(big_l.is_finite() && big_l > 1.0) {
        return Err(Error::InvalidArgument(format!("L must exceed 1, got {big_l}")));
    }
    let p = ts.p();
    let d = k.d();
    let q = grid.q() as i32;
    let w = |x: f64| 1.0 + x.abs().powi(q);
    let g = |x: f64| k.mult(x, 1.0).abs();
    let gp = |x: f64| k.mult_deriv(x, 1.0).abs();

    let (kk, k1) = k.constants_k_k1(grid);
    let sup_g = sup_refined(grid, |x| w(x) * (g(x) + gp(x)));
    let c_dpq = (p + 1.0).powf(q as f64 / d) * sup_g;
    let k_tilde = (6.0 * (p + 1.0)).powf(q as f64 / d) * (kk + 7.0 * k1 / (3.0 * (p + 1.0))) * sup_g;
    let sup_m = sup_refined(grid, |x| w(x) * ((x.abs() + 1.0) * g(x) + x.abs() * gp(x)));
    let m = k1 * (p + 1.0).powf(q as f64 / d) * (1.0 + (p + 1.0).powf(1.0 / d)) * sup_m;
    let (a_dpq, c) = contraction_constants(k, p, grid);

    let qf = q as f64;
    let weight_integral = 2.0 * (PI / qf) / (PI / qf).sin();
    let rho0 = 2.0 * PI * spec.rho() / ((2f64.powi(q + 1) + 3.0) * weight_integral);
    let s_rho0: f64 = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let j = (spec.alpha() as usize + i) as i32;
            (c / (2.0 * PI)).powi(j - 1) * j as f64 * a.abs() * rho0.powi(j - 2)
        })
        .sum();

    let nonlinear_factor = |s: f64| {
        let sd = s.powf(1.0 / d);
        let bracket = 1.0 + kk + k1 * sd;
        (bracket, bracket * bracket * (2.0 * kk + sd) * (big_l - 1.0) * s_rho0)
    };
    let s_max = 3.0 * big_l.powf(p + 1.0) / (2.0 * (p + 1.0));
    let (bracket_max, c_tilde) = nonlinear_factor(s_max);
    let sigma = (0.5 / c_tilde).min(rho0 / bracket_max);
    let epsilon_n = (0..=EPSILON_STEPS)
        .map(|n| {
            let s = ts.s_n(n, big_l, big_l)?;
            let (bracket, c_n) = nonlinear_factor(s);
            Ok((0.5 / c_n).min(rho0 / bracket))
        })
        .collect::<Result<Vec<f64>>>()?;

    let m_tilde = (big_l.powf(qf * (p + 1.0) / d) + k_tilde) * c_tilde;

    let classification = spec.classify(p, d);
    let range = delta_range(&classification, p);
    let delta = match delta {
        Some(v) => {
            if !(v > range.0 && v < range.1) {
                return Err(Error::InvalidArgument(format!(
                    "delta = {v} violates (1 - delta)(p+1) < alpha(p+1) - (p+1+d); admissible range ({}, {})",
                    range.0, range.1
                )));
            }
            v
        }
        None => {
            if range.0 >= range.1 {
                return Err(Error::InvalidArgument(format!(
                    "no admissible delta for a {} nonlinearity",
                    classification.verdict
                )));
            }
            0.5 * (range.0 + range.1)
        }
    };

    let l1 = ts.check_window(big_l, EPSILON_STEPS)?.smallest_l;
    let l_delta = l1.map(|l1| l1.max((2.0 * c * (1.0 + c_dpq)).powf(d / (delta * (p + 1.0)))));

    let ratio = big_l.powf(-(p + 1.0) * (1.0 - delta) / d);
    let mut series = 0.0;
    let mut term = 1.0;
    for _ in 0..100_000 {
        series += term;
        term *= ratio;
        // remaining geometric tail is term / (1 - ratio)
        if term / (1.0 - ratio) < 1e-12 {
            break;
        }
    }
    let d_const = 1.0 + k_tilde * series;
    let epsilon_bar = (sigma / d_const)
        .min(1.0 / (2.0 * m_tilde * d_const * d_const * big_l.powf((1.0 - delta) * (p + 1.0) / d)));

    Ok(TheoryConstants {
        big_l,
        k: kk,
        k1,
        c_dpq,
        k_tilde,
        m,
        a_dpq,
        c,
        rho0,
        s_rho0,
        c_tilde,
        m_tilde,
        sigma,
        epsilon_n,
        classification,
        delta,
        delta_range: range,
        l1,
        l_delta,
        d: d_const,
        epsilon_bar,
    })
}

//! Power-series nonlinearities `F(u) = lambda * sum_{j >= alpha} a_j u^j`
//! and their scaling classification.

use std::fmt;

use crate::error::{Error, Result};
use crate::spectral::{from_physical_refined, padding_factor, physical_padded, SpectralFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Irrelevant,
    Marginal,
    Relevant,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Irrelevant => "irrelevant",
            Verdict::Marginal => "marginal",
            Verdict::Relevant => "relevant",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub alpha_c: f64,
    pub d_f: f64,
    pub verdict: Verdict,
}

/// Critical power `alpha_c = (p+1+d)/(p+1)` and scaling dimension
/// `d_F = -alpha(p+1) + p+1+d`.
pub fn classify(alpha: u32, p: f64, d: f64) -> Classification {
    let alpha_c = (p + 1.0 + d) / (p + 1.0);
    let d_f = -(alpha as f64) * (p + 1.0) + p + 1.0 + d;
    let a = alpha as f64;
    let verdict = if a > alpha_c {
        Verdict::Irrelevant
    } else if a == alpha_c {
        Verdict::Marginal
    } else {
        Verdict::Relevant
    };
    Classification {
        alpha_c,
        d_f,
        verdict,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    lambda: f64,
    alpha: u32,
    coeffs: Vec<f64>,
    rho: f64,
}

impl NonlinearitySpec {
    /// `coeffs[i]` multiplies `u^{alpha + i}`.
    pub fn new(lambda: f64, alpha: u32, coeffs: Vec<f64>, rho: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!(
                "lambda must lie in [-1, 1], got {lambda}"
            )));
        }
        if alpha < 2 {
            return Err(Error::InvalidArgument(format!("alpha must be >= 2, got {alpha}")));
        }
        match coeffs.first() {
            None => return Err(Error::InvalidArgument("coefficient list is empty".into())),
            Some(0.0) => {
                return Err(Error::InvalidArgument(
                    "leading coefficient a_alpha must be nonzero".into(),
                ))
            }
            _ => {}
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
        }
        Ok(NonlinearitySpec {
            lambda,
            alpha,
            coeffs,
            rho,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Highest power present.
    pub fn degree(&self) -> u32 {
        self.alpha + self.coeffs.len() as u32 - 1
    }

    pub fn classify(&self, p: f64, d: f64) -> Classification {
        classify(self.alpha, p, d)
    }

    fn refuse_relevant(&self, p: f64, d: f64) -> Result<Classification> {
        let c = self.classify(p, d);
        if c.verdict == Verdict::Relevant {
            return Err(Error::FlowRefused {
                verdict: c.verdict,
                alpha: self.alpha,
                alpha_c: c.alpha_c,
            });
        }
        Ok(c)
    }

    /// Per-step factor `L^{d_F/d}` of the effective coupling.
    pub fn lambda_factor(&self, big_l: f64, p: f64, d: f64) -> Result<f64> {
        let c = self.refuse_relevant(p, d)?;
        Ok(big_l.powf(c.d_f / d))
    }

    /// `lambda_n = L^{n d_F / d} lambda`, built by repeated multiplication so
    /// that consecutive values differ by exactly one factor.
    pub fn lambda_n(&self, n: u32, big_l: f64, p: f64, d: f64) -> Result<f64> {
        let factor = self.lambda_factor(big_l, p, d)?;
        let mut lam = self.lambda;
        for _ in 0..n {
            lam *= factor;
        }
        Ok(lam)
    }

    /// Coefficients of the step-`n` series, `a_j L^{n(alpha - j)(p+1)/d}`.
    pub fn rescaled_coeffs(&self, n: u32, big_l: f64, p: f64, d: f64) -> Result<Vec<f64>> {
        self.refuse_relevant(p, d)?;
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if i == 0 {
                    *a
                } else {
                    a * big_l.powf(-(n as f64) * i as f64 * (p + 1.0) / d)
                }
            })
            .collect())
    }
}

/// `lambda_eff * sum_i coeffs[i] u^{alpha+i}`, evaluated in physical space on
/// a zero-padded grid. Fails when `max |u|` reaches `rho`.
pub fn evaluate_f(
    coeffs: &[f64],
    alpha: u32,
    lambda_eff: f64,
    u: &SpectralFunction,
    rho: f64,
) -> Result<SpectralFunction> {
    if lambda_eff == 0.0 || coeffs.iter().all(|a| *a == 0.0) || u.is_zero() {
        return Ok(SpectralFunction::zeros(*u.grid()));
    }
    let degree = alpha + coeffs.len().saturating_sub(1) as u32;
    let factor = padding_factor(degree);
    let mut samples = physical_padded(u, factor);
    let amplitude = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if amplitude >= rho {
        return Err(Error::Analyticity {
            quantity: "max |u|",
            value: amplitude,
            bound: rho,
        });
    }
    for v in samples.iter_mut() {
        let x = *v;
        let mut acc = 0.0;
        for a in coeffs.iter().rev() {
            acc = acc * x + a;
        }
        *v = lambda_eff * acc * x.powi(alpha as i32);
    }
    from_physical_refined(&samples, *u.grid(), factor)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use num_complex::Complex64;

    use super::*;
    use crate::spectral::SpectralGrid;

    fn cubic() -> NonlinearitySpec {
        NonlinearitySpec::new(1.0, 3, vec![1.0], 10.0).unwrap()
    }

    #[test]
    fn classification_examples() {
        let c = classify(3, 1.0, 2.0);
        assert_eq!(c.alpha_c, 2.0);
        assert_eq!(c.d_f, -2.0);
        assert_eq!(c.verdict, Verdict::Irrelevant);
        assert_eq!(classify(2, 1.0, 2.0).verdict, Verdict::Marginal);
        let c = classify(3, 0.0, 2.0);
        assert_eq!(c.alpha_c, 3.0);
        assert_eq!(c.verdict, Verdict::Marginal);
        assert_eq!(classify(2, 0.5, 2.0).verdict, Verdict::Relevant);
    }

    #[test]
    fn lambda_sequence() {
        let s = cubic();
        assert_eq!(s.lambda_n(1, 2.0, 1.0, 2.0).unwrap(), 0.5);
        assert_eq!(s.lambda_n(0, 2.0, 1.0, 2.0).unwrap(), 1.0);
        let f = s.lambda_factor(3.0, 1.0, 2.0).unwrap();
        for n in 0..30 {
            let a = s.lambda_n(n, 3.0, 1.0, 2.0).unwrap();
            let b = s.lambda_n(n + 1, 3.0, 1.0, 2.0).unwrap();
            assert_eq!(b, a * f);
        }
        let marginal = NonlinearitySpec::new(0.7, 2, vec![1.0], 1.0).unwrap();
        for n in 0..10 {
            assert_eq!(marginal.lambda_n(n, 2.0, 1.0, 2.0).unwrap(), 0.7);
        }
        let relevant = NonlinearitySpec::new(1.0, 2, vec![1.0], 1.0).unwrap();
        assert!(relevant.lambda_n(1, 2.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn rescaled_coefficients() {
        let s = NonlinearitySpec::new(1.0, 3, vec![1.0, 1.0], 10.0).unwrap();
        assert_eq!(s.rescaled_coeffs(1, 2.0, 1.0, 2.0).unwrap(), vec![1.0, 0.5]);
        assert_eq!(s.rescaled_coeffs(0, 2.0, 1.0, 2.0).unwrap(), vec![1.0, 1.0]);
        assert_eq!(cubic().rescaled_coeffs(9, 2.0, 1.0, 2.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn aggregated_exponent_identity() {
        let s = NonlinearitySpec::new(0.3, 3, vec![1.0, 2.0, -1.0], 10.0).unwrap();
        let (big_l, p, d) = (2.5, 0.7, 1.6);
        for n in 0..6 {
            let lam = s.lambda_n(n, big_l, p, d).unwrap();
            let cs = s.rescaled_coeffs(n, big_l, p, d).unwrap();
            for (i, a) in cs.iter().enumerate() {
                let j = (3 + i) as f64;
                let agg = big_l.powf(n as f64 * (-j * (p + 1.0) + p + 1.0 + d) / d) * 0.3 * s.coeffs()[i];
                assert!((lam * a - agg).abs() < 1e-12 * agg.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(NonlinearitySpec::new(1.5, 3, vec![1.0], 1.0).is_err());
        assert!(NonlinearitySpec::new(1.0, 1, vec![1.0], 1.0).is_err());
        assert!(NonlinearitySpec::new(1.0, 3, vec![0.0, 1.0], 1.0).is_err());
        assert!(NonlinearitySpec::new(1.0, 3, vec![], 1.0).is_err());
        assert!(NonlinearitySpec::new(1.0, 3, vec![1.0], 0.0).is_err());
    }

    fn gaussian_u(grid: SpectralGrid, eps: f64) -> SpectralFunction {
        SpectralFunction::from_closed_form(
            grid,
            |w| Complex64::new(eps * (-w * w).exp(), 0.0),
            |w| Complex64::new(-2.0 * eps * w * (-w * w).exp(), 0.0),
        )
    }

    #[test]
    fn zero_coupling_and_constants() {
        let grid = SpectralGrid::new(16.0, 256, 2).unwrap();
        let u = gaussian_u(grid, 0.1);
        assert!(evaluate_f(&[1.0], 3, 0.0, &u, 1.0).unwrap().is_zero());
        let c = 0.2;
        let constant = SpectralFunction::from_physical(&vec![c; 256], grid).unwrap();
        let out = evaluate_f(&[1.0], 3, 0.5, &constant, 1.0).unwrap().to_physical();
        for v in out {
            assert!((v - 0.5 * c * c * c).abs() < 1e-14);
        }
    }

    #[test]
    fn analyticity_guard() {
        let grid = SpectralGrid::new(16.0, 256, 2).unwrap();
        let u = gaussian_u(grid, 100.0);
        assert!(matches!(
            evaluate_f(&[1.0], 3, 1.0, &u, 1.0),
            Err(Error::Analyticity { .. })
        ));
    }

    #[test]
    fn cube_matches_triple_convolution() {
        let grid = SpectralGrid::new(16.0, 2048, 2).unwrap();
        let eps = 1e-3;
        let u = gaussian_u(grid, eps);
        let f = evaluate_f(&[1.0], 3, 1.0, &u, 1.0).unwrap();
        // (2 pi)^{-2} int int u^(w1) u^(w2) u^(w - w1 - w2) dw1 dw2 by a
        // trapezoid rule, which is spectrally accurate for Gaussians
        let h = 0.02;
        let m = 600i32;
        let uh = |w: f64| eps * (-w * w).exp();
        for &k in &[1024usize, 1040, 1088, 1152, 1200] {
            let w = grid.omega(k);
            let mut acc = 0.0;
            for a in -m..=m {
                let w1 = a as f64 * h;
                let u1 = uh(w1);
                for b in -m..=m {
                    let w2 = b as f64 * h;
                    acc += u1 * uh(w2) * uh(w - w1 - w2);
                }
            }
            let oracle = acc * h * h / (4.0 * PI * PI);
            let got = f.hat()[k];
            assert!(got.im.abs() < 1e-6 * oracle.abs());
            assert!((got.re - oracle).abs() < 1e-6 * oracle.abs(), "{k}: {} vs {oracle}", got.re);
        }
    }
}

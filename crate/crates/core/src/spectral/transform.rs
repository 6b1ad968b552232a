//! Discrete realizations of `f^(omega) = \int f(x) e^{-i omega x} dx` on
//! centered grids, plus a Bluestein evaluator for the same sum at scaled
//! frequencies.
//!
//! With `x_j = (j - M/2) dx` and `omega_k = (k - M/2) d_omega`,
//! `d_omega * dx = 2 pi / M`, and `M` divisible by 4, the centered kernel
//! factors as `e^{-2 pi i k j / M} (-1)^{j+k}`, so every transform is a plain
//! FFT with alternating signs.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

fn alternate(buf: &mut [Complex64]) {
    for v in buf.iter_mut().skip(1).step_by(2) {
        *v = -*v;
    }
}

/// Physical samples -> transform samples, `hat_k = dx * sum_j f_j e^{-i omega_k x_j}`.
pub(crate) fn forward_centered(samples: &mut [Complex64], dx: f64) {
    debug_assert!(samples.len().is_multiple_of(4));
    alternate(samples);
    plan(samples.len(), false).process(samples);
    alternate(samples);
    for v in samples.iter_mut() {
        *v *= dx;
    }
}

/// Transform samples -> physical samples,
/// `f_j = (d_omega / 2 pi) sum_k hat_k e^{i omega_k x_j}` with `d_omega / 2 pi = 1 / (M dx)`.
pub(crate) fn inverse_centered(hat: &mut [Complex64], dx: f64) {
    debug_assert!(hat.len().is_multiple_of(4));
    let scale = 1.0 / (hat.len() as f64 * dx);
    alternate(hat);
    plan(hat.len(), true).process(hat);
    alternate(hat);
    for v in hat.iter_mut() {
        *v *= scale;
    }
}

/// Embed an `n`-point centered spectrum into `m >= n` points (zero padding
/// at high frequency).
pub(crate) fn pad_spectrum(hat: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = hat.len();
    let offset = (m - n) / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    out[offset..offset + n].copy_from_slice(hat);
    out
}

/// Keep the central `n` points of an `m`-point centered spectrum.
pub(crate) fn truncate_spectrum(hat: &[Complex64], n: usize) -> Vec<Complex64> {
    let offset = (hat.len() - n) / 2;
    hat[offset..offset + n].to_vec()
}

/// `e^{-2 pi i * gamma * m^2 / 2}` with the phase reduced modulo one turn
/// before scaling, so that large `m^2` does not inflate the rounding error.
fn chirp(gamma: f64, m: i64) -> Complex64 {
    let sq = (m * m) as f64;
    let prod = gamma * sq;
    let err = gamma.mul_add(sq, -prod);
    let half = 0.5 * prod;
    let frac = (half - half.floor()) + 0.5 * err;
    let angle = 2.0 * PI * frac;
    Complex64::new(angle.cos(), -angle.sin())
}

/// Evaluates `S_k = sum_j a_j e^{-2 pi i gamma k' j'}` for `k = 0..n_out`,
/// where `j' = j - a.len()/2` and `k' = k - n_out/2`, in `O(M log M)` via
/// Bluestein's identity `k'j' = (k'^2 + j'^2 - (k'-j')^2) / 2`.
pub(crate) fn chirp_eval(a: &[Complex64], gamma: f64, n_out: usize) -> Vec<Complex64> {
    let n_in = a.len();
    let c_in = (n_in / 2) as i64;
    let c_out = (n_out / 2) as i64;
    // k' - j' ranges over [-(c_out + n_in - 1 - c_in), n_out - 1 - c_out + c_in].
    let lo = -(n_in as i64 - 1 - c_in) - c_out;
    let hi = (n_out as i64 - 1 - c_out) + c_in;
    let h_len = (hi - lo + 1) as usize;
    let conv_len = (n_in + h_len - 1).next_power_of_two();

    let mut b = vec![Complex64::new(0.0, 0.0); conv_len];
    for (j, v) in a.iter().enumerate() {
        let jp = j as i64 - c_in;
        b[j] = v * chirp(gamma, jp);
    }
    let mut h = vec![Complex64::new(0.0, 0.0); conv_len];
    for (i, slot) in h.iter_mut().take(h_len).enumerate() {
        let m = lo + i as i64;
        *slot = chirp(gamma, m).conj();
    }
    let fwd = plan(conv_len, false);
    fwd.process(&mut b);
    fwd.process(&mut h);
    for (bv, hv) in b.iter_mut().zip(&h) {
        *bv *= hv;
    }
    plan(conv_len, true).process(&mut b);
    let norm = 1.0 / conv_len as f64;

    // Linear convolution index for output k and input j is j + (k' - j' - lo),
    // i.e. k + c_in - c_out - lo after summing over j.
    let shift = (c_in - c_out - lo) as usize;
    (0..n_out)
        .map(|k| {
            let kp = k as i64 - c_out;
            b[k + shift] * norm * chirp(gamma, kp)
        })
        .collect()
}

/// Direct evaluation of `dx * sum_j f_j e^{-i omega x_j}` at a single frequency.
pub(crate) fn eval_at(samples: &[Complex64], xs: &[f64], dx: f64, omega: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (f, &x) in samples.iter().zip(xs) {
        if f.re == 0.0 && f.im == 0.0 {
            continue;
        }
        let (s, c) = (omega * x).sin_cos();
        acc += f * Complex64::new(c, -s);
    }
    acc * dx
}

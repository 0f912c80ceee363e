//! Second-order IIR sections and zero-phase (forward-backward) filtering.
//!
//! Sections are Butterworth (`Q = 1/√2`) designs obtained by the bilinear
//! transform with frequency prewarping. With `K = tan(π f_c / f_s)` and
//! `D = 1 + √2 K + K²`:
//!
//! ```text
//! high-pass: b = [1, -2, 1] / D
//! low-pass:  b = [K², 2K², K²] / D
//! both:      a = [1, 2(K² - 1)/D, (1 - √2 K + K²)/D]
//! ```
//!
//! and the difference equation is
//! `y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// Relative impulse-response amplitude that counts as settled.
pub const SETTLE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    /// `[a1, a2]`; `a0` is normalized to 1.
    pub a: [f64; 2],
}

fn prewarp(fs: f64, fc: f64) -> Result<f64> {
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::InvalidArgument(format!("sampling rate must be > 0, got {fs}")));
    }
    if !(fc.is_finite() && fc > 0.0 && fc < fs / 2.0) {
        return Err(Error::InvalidArgument(format!(
            "cutoff {fc} Hz must lie strictly between 0 and Nyquist ({} Hz)",
            fs / 2.0
        )));
    }
    Ok((PI * fc / fs).tan())
}

impl Biquad {
    pub fn highpass(fs: f64, fc: f64) -> Result<Self> {
        let k = prewarp(fs, fc)?;
        let d = 1.0 + SQRT_2 * k + k * k;
        Ok(Biquad {
            b: [1.0 / d, -2.0 / d, 1.0 / d],
            a: [2.0 * (k * k - 1.0) / d, (1.0 - SQRT_2 * k + k * k) / d],
        })
    }

    pub fn lowpass(fs: f64, fc: f64) -> Result<Self> {
        let k = prewarp(fs, fc)?;
        let d = 1.0 + SQRT_2 * k + k * k;
        let b0 = k * k / d;
        Ok(Biquad {
            b: [b0, 2.0 * b0, b0],
            a: [2.0 * (k * k - 1.0) / d, (1.0 - SQRT_2 * k + k * k) / d],
        })
    }

    /// Largest pole magnitude.
    pub fn pole_radius(&self) -> f64 {
        let [a1, a2] = self.a;
        let disc = a1 * a1 - 4.0 * a2;
        if disc < 0.0 {
            a2.sqrt()
        } else {
            let s = disc.sqrt();
            ((-a1 + s) / 2.0).abs().max(((-a1 - s) / 2.0).abs())
        }
    }

    /// Samples until the impulse-response envelope decays below [`SETTLE_TOL`].
    pub fn settling_samples(&self) -> usize {
        let r = self.pole_radius();
        if r <= 0.0 {
            return 1;
        }
        (SETTLE_TOL.ln() / r.ln()).ceil().max(1.0) as usize
    }

    /// Transposed direct-form-II state that holds the output steady for a
    /// constant unit input.
    fn unit_step_state(&self) -> [f64; 2] {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let y = (b0 + b1 + b2) / (1.0 + a1 + a2);
        [y - b0, b2 - a2 * y]
    }

    /// Causal filtering from state `z`.
    fn run(&self, x: &[f64], mut z: [f64; 2]) -> Vec<f64> {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        x.iter()
            .map(|&xn| {
                let y = b0 * xn + z[0];
                z[0] = b1 * xn - a1 * y + z[1];
                z[1] = b2 * xn - a2 * y;
                y
            })
            .collect()
    }

    /// Causal filtering with zero initial state.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        self.run(x, [0.0, 0.0])
    }

    fn run_steady(&self, x: &[f64]) -> Vec<f64> {
        let zi = self.unit_step_state();
        let x0 = x.first().copied().unwrap_or(0.0);
        self.run(x, [zi[0] * x0, zi[1] * x0])
    }

    /// Zero-phase filtering: odd-symmetric extension by `padlen` samples at
    /// both ends, forward pass, backward pass, and trimming. Each pass starts
    /// from the steady state for its first input sample.
    ///
    /// `padlen` is clamped to `x.len() - 1`.
    pub fn filtfilt(&self, x: &[f64], padlen: usize) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = padlen.min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        let mut y = self.run_steady(&ext);
        y.reverse();
        let mut y = self.run_steady(&y);
        y.reverse();
        y.drain(..pad);
        y.truncate(n);
        y
    }
}

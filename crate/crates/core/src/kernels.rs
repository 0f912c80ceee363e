//! Univariate kernel basis functions.
//!
//! Each [`KernelKind`] provides the basis function `k(u)`, its twofold
//! convolution `k̄(v) = ∫ k(u) k(v - u) du` in closed form, and the two moment
//! constants used by the asymptotic error expansions:
//!
//! * `kappa  = ∫ k(u)² du`
//! * `kappa2 = ∫ u² k(u) du`
//!
//! | kernel       | k(u)                   | support  | k̄(v), 0 ≤ v ≤ 2                                   |
//! |--------------|------------------------|----------|---------------------------------------------------|
//! | gaussian     | exp(-u²/2)/√(2π)       | ℝ        | exp(-v²/4)/√(4π) (all v)                          |
//! | epanechnikov | 3/4 (1 - u²)           | \|u\| ≤ 1 | 3/160 (2 - v)³ (v² + 6v + 4)                      |
//! | uniform      | 1/2                    | \|u\| ≤ 1 | (2 - v)/4                                         |
//! | cosine       | π/4 cos(πu/2)          | \|u\| ≤ 1 | π²/32 [ (2/π) sin(πv/2) + (2 - v) cos(πv/2) ]     |
//!
//! All convolutions are even in `v` and vanish for `|v| > 2` on the compact kernels.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Evaluation cutoff for the Gaussian basis in summation loops.
///
/// `k(8) ≈ 5e-15`, so terms with `|u| > 8` are skipped. The convolution kernel
/// has twice the spread and uses twice the cutoff.
pub const GAUSSIAN_CUTOFF: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Gaussian,
    Epanechnikov,
    Uniform,
    Cosine,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Gaussian,
        KernelKind::Epanechnikov,
        KernelKind::Uniform,
        KernelKind::Cosine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Gaussian => "gaussian",
            KernelKind::Epanechnikov => "epanechnikov",
            KernelKind::Uniform => "uniform",
            KernelKind::Cosine => "cosine",
        }
    }

    /// Radius outside which the kernel is identically zero (infinite for the Gaussian).
    pub fn support_radius(self) -> f64 {
        match self {
            KernelKind::Gaussian => f64::INFINITY,
            _ => 1.0,
        }
    }

    /// Radius beyond which summation loops skip a term for `k`.
    pub(crate) fn prune_radius(self) -> f64 {
        match self {
            KernelKind::Gaussian => GAUSSIAN_CUTOFF,
            _ => 1.0,
        }
    }

    /// Radius beyond which summation loops skip a term for `k̄`.
    pub(crate) fn convolution_prune_radius(self) -> f64 {
        2.0 * self.prune_radius()
    }

    pub fn profile(self) -> KernelProfile {
        let (kappa, kappa2) = kernel_moments(self);
        KernelProfile {
            kind: self,
            support_radius: self.support_radius(),
            kappa,
            kappa2,
        }
    }

    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        eval_kernel(self, u)
    }

    #[inline]
    pub fn eval_convolution(self, v: f64) -> f64 {
        eval_convolution(self, v)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(KernelKind::Gaussian),
            "epanechnikov" => Ok(KernelKind::Epanechnikov),
            "uniform" => Ok(KernelKind::Uniform),
            "cosine" => Ok(KernelKind::Cosine),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel '{other}' (expected gaussian|epanechnikov|uniform|cosine)"
            ))),
        }
    }
}

/// A kernel together with its cached moment constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelProfile {
    pub kind: KernelKind,
    pub support_radius: f64,
    pub kappa: f64,
    pub kappa2: f64,
}

/// Basis function `k(u)`. The compact kernels include the boundary `|u| = 1`.
pub fn eval_kernel(kind: KernelKind, u: f64) -> f64 {
    match kind {
        KernelKind::Gaussian => (-0.5 * u * u).exp() / (2.0 * PI).sqrt(),
        KernelKind::Epanechnikov => {
            if u.abs() <= 1.0 {
                0.75 * (1.0 - u * u)
            } else {
                0.0
            }
        }
        KernelKind::Uniform => {
            if u.abs() <= 1.0 {
                0.5
            } else {
                0.0
            }
        }
        KernelKind::Cosine => {
            if u.abs() <= 1.0 {
                FRAC_PI_4 * (FRAC_PI_2 * u).cos()
            } else {
                0.0
            }
        }
    }
}

/// Twofold convolution `k̄(v) = ∫ k(u) k(v - u) du`.
pub fn eval_convolution(kind: KernelKind, v: f64) -> f64 {
    let a = v.abs();
    match kind {
        KernelKind::Gaussian => (-0.25 * v * v).exp() / (4.0 * PI).sqrt(),
        _ if a > 2.0 => 0.0,
        KernelKind::Epanechnikov => {
            let r = 2.0 - a;
            3.0 / 160.0 * r * r * r * (a * a + 6.0 * a + 4.0)
        }
        KernelKind::Uniform => (2.0 - a) / 4.0,
        KernelKind::Cosine => {
            let w = FRAC_PI_2 * a;
            PI * PI / 32.0 * (2.0 / PI * w.sin() + (2.0 - a) * w.cos())
        }
    }
}

/// Returns `(kappa, kappa2) = (∫k², ∫u²k)`.
pub fn kernel_moments(kind: KernelKind) -> (f64, f64) {
    match kind {
        KernelKind::Gaussian => (1.0 / (2.0 * PI.sqrt()), 1.0),
        KernelKind::Epanechnikov => (0.6, 0.2),
        KernelKind::Uniform => (0.5, 1.0 / 3.0),
        KernelKind::Cosine => (PI * PI / 16.0, 1.0 - 8.0 / (PI * PI)),
    }
}

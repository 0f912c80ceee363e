//! Leave-one-out cross-validated bandwidth selection and the pointwise
//! asymptotic bias/variance diagnostics.
//!
//! The cross-validation score estimates `MISE(h) - ∫p²` without knowing `p`:
//!
//! ```text
//! CV(h) = 1/n² ΣᵢΣⱼ K̄_h(Xᵢ, Xⱼ)  -  2/(n(n-1)) Σᵢ Σ_{j≠i} K_h(Xᵢ, Xⱼ)
//! ```
//!
//! where `K_h = Πₛ hₛ⁻¹ k(·/hₛ)` and `K̄_h` is the same product built from the
//! twofold convolution kernel. The diagonal `i = j` is part of the first sum only.

use rayon::prelude::*;

use crate::density::{check_bandwidth, Bandwidth, Sample1D, SampleQD};
use crate::error::{Error, Result};
use crate::kernels::KernelKind;

/// Default number of candidates in a data-driven grid.
pub const DEFAULT_GRID_STEPS: usize = 40;

/// Strictly ascending candidate bandwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthGrid(Vec<f64>);

impl BandwidthGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("no candidates".into()));
        }
        for &h in &values {
            check_bandwidth(h)?;
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("values must be strictly ascending".into()));
        }
        Ok(BandwidthGrid(values))
    }

    pub fn log_spaced(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        check_endpoints(lo, hi, steps)?;
        if steps == 1 {
            return Self::new(vec![lo]);
        }
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / (steps - 1) as f64;
        Self::new(
            (0..steps)
                .map(|i| match i {
                    0 => lo,
                    _ if i + 1 == steps => hi,
                    _ => (a + step * i as f64).exp(),
                })
                .collect(),
        )
    }

    pub fn linear(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        check_endpoints(lo, hi, steps)?;
        if steps == 1 {
            return Self::new(vec![lo]);
        }
        Self::new(crate::density::linspace(lo, hi, steps))
    }

    /// 40 log-spaced values between `0.01·range` and `range`.
    pub fn default_for_range(range: f64) -> Result<Self> {
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "data range {range} is degenerate; cannot derive a default grid"
            )));
        }
        Self::log_spaced(0.01 * range, range, DEFAULT_GRID_STEPS)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_endpoints(lo: f64, hi: f64, steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::InvalidGrid("steps must be >= 1".into()));
    }
    check_bandwidth(lo)?;
    check_bandwidth(hi)?;
    if steps > 1 && lo >= hi {
        return Err(Error::InvalidGrid(format!("min {lo} must be below max {hi}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvPoint {
    pub h: Bandwidth,
    pub score: f64,
}

/// Cross-validation score per candidate, in candidate order.
#[derive(Debug, Clone, PartialEq)]
pub struct CvCurve {
    pub entries: Vec<CvPoint>,
}

impl CvCurve {
    /// Index of the minimal score; ties resolve to the earliest (smallest) candidate.
    pub fn argmin(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, e) in self.entries.iter().enumerate() {
            match best {
                Some(b) if self.entries[b].score <= e.score => {}
                _ => best = Some(i),
            }
        }
        best
    }

    /// Writes `h,score`; per-axis curves write one `h` column per axis (`h1,h2,...`).
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let dim = self.entries.first().map_or(1, |e| e.h.dim());
        let shared = self.entries.iter().all(|e| e.h.as_scalar().is_some());
        if shared {
            writeln!(w, "h,score")?;
        } else {
            let cols: Vec<String> = (1..=dim).map(|s| format!("h{s}")).collect();
            writeln!(w, "{},score", cols.join(","))?;
        }
        for e in &self.entries {
            if shared {
                writeln!(w, "{},{}", e.h.per_axis()[0], e.score)?;
            } else {
                let hs: Vec<String> = e.h.per_axis().iter().map(f64::to_string).collect();
                writeln!(w, "{},{}", hs.join(","), e.score)?;
            }
        }
        Ok(())
    }
}

/// How the per-axis bandwidths of a multivariate estimate are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandwidthMode {
    /// One `h` on every axis, `H = h² I`.
    #[default]
    Shared,
    /// Independent `hₛ` per axis; searched over the Cartesian product of grids.
    PerAxis,
}

/// 1D leave-one-out score.
pub fn cv_score_1d(data: &Sample1D, kind: KernelKind, h: f64) -> Result<f64> {
    check_bandwidth(h)?;
    let sample = SampleQD::from_flat(data.values().to_vec(), 1)?;
    cv_score_qd(&sample, kind, &Bandwidth::isotropic(h, 1)?)
}

/// Multivariate leave-one-out score with product kernels.
pub fn cv_score_qd(data: &SampleQD, kind: KernelKind, h: &Bandwidth) -> Result<f64> {
    let n = data.len();
    if n < 2 {
        return Err(Error::TooFewForCrossValidation(n));
    }
    if h.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: h.dim(),
        });
    }
    let hs = h.per_axis();
    let radius = kind.prune_radius();
    let conv_radius = kind.convolution_prune_radius();

    // Off-diagonal pairs i < j, each counted twice below.
    let (conv_off, kern_off) = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = data.row(i);
            let mut conv = 0.0;
            let mut kern = 0.0;
            'pairs: for j in (i + 1)..n {
                let xj = data.row(j);
                let mut cprod = 1.0;
                let mut kprod = 1.0;
                for s in 0..xi.len() {
                    let u = (xi[s] - xj[s]) / hs[s];
                    let a = u.abs();
                    if a > conv_radius {
                        continue 'pairs;
                    }
                    cprod *= kind.eval_convolution(u);
                    if a > radius {
                        kprod = 0.0;
                    } else {
                        kprod *= kind.eval(u);
                    }
                }
                conv += cprod;
                kern += kprod;
            }
            (conv, kern)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));

    let diag = kind.eval_convolution(0.0).powi(data.dim() as i32) * n as f64;
    let vol = h.volume();
    let nf = n as f64;
    let first = (diag + 2.0 * conv_off) / (nf * nf * vol);
    let second = 2.0 * (2.0 * kern_off) / (nf * (nf - 1.0) * vol);
    Ok(first - second)
}

fn pick(curve: CvCurve) -> Result<(Bandwidth, CvCurve)> {
    let best = curve
        .argmin()
        .ok_or_else(|| Error::InvalidGrid("no candidates".into()))?;
    if let Some(e) = curve.entries.iter().find(|e| !e.score.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite CV score at h = {:?}",
            e.h.per_axis()
        )));
    }
    Ok((curve.entries[best].h.clone(), curve))
}

fn score_candidates(
    data: &SampleQD,
    kind: KernelKind,
    candidates: Vec<Bandwidth>,
) -> Result<CvCurve> {
    let entries = candidates
        .into_par_iter()
        .map(|h| cv_score_qd(data, kind, &h).map(|score| CvPoint { h, score }))
        .collect::<Result<Vec<_>>>()?;
    Ok(CvCurve { entries })
}

/// Grid-search minimizer of [`cv_score_1d`].
pub fn select_bandwidth_1d(
    data: &Sample1D,
    kind: KernelKind,
    grid: &BandwidthGrid,
) -> Result<(f64, CvCurve)> {
    let sample = SampleQD::from_flat(data.values().to_vec(), 1)?;
    let (h, curve) = select_bandwidth(&sample, kind, grid)?;
    Ok((h.per_axis()[0], curve))
}

/// Grid-search minimizer of [`cv_score_qd`] with one shared `h` on every axis.
pub fn select_bandwidth(
    data: &SampleQD,
    kind: KernelKind,
    grid: &BandwidthGrid,
) -> Result<(Bandwidth, CvCurve)> {
    let q = data.dim();
    let candidates = grid
        .values()
        .iter()
        .map(|&h| Bandwidth::isotropic(h, q))
        .collect::<Result<Vec<_>>>()?;
    pick(score_candidates(data, kind, candidates)?)
}

/// Grid-search over the Cartesian product of per-axis grids.
///
/// Candidates are enumerated with the last axis varying fastest, so ties
/// resolve toward the smallest bandwidth on the first axis, then the next.
pub fn select_bandwidth_per_axis(
    data: &SampleQD,
    kind: KernelKind,
    grids: &[BandwidthGrid],
) -> Result<(Bandwidth, CvCurve)> {
    if grids.len() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: grids.len(),
        });
    }
    let mut candidates: Vec<Vec<f64>> = vec![Vec::new()];
    for g in grids {
        candidates = candidates
            .into_iter()
            .flat_map(|prefix| {
                g.values().iter().map(move |&h| {
                    let mut c = prefix.clone();
                    c.push(h);
                    c
                })
            })
            .collect();
    }
    let candidates = candidates
        .into_iter()
        .map(Bandwidth::new)
        .collect::<Result<Vec<_>>>()?;
    pick(score_candidates(data, kind, candidates)?)
}

/// Leading-order pointwise bias `(h²/2) p''(x) κ₂`.
pub fn asymptotic_bias(kind: KernelKind, h: f64, p2x: f64) -> f64 {
    0.5 * h * h * p2x * kind.profile().kappa2
}

/// Leading-order pointwise variance `κ p(x) / (n h)`.
pub fn asymptotic_variance(kind: KernelKind, n: usize, h: f64, px: f64) -> f64 {
    kind.profile().kappa * px / (n as f64 * h)
}

/// Bandwidth minimizing the leading-order pointwise MSE:
/// `c(x) n^{-1/5}` with `c(x) = {κ p(x) / [κ₂ p''(x)]²}^{1/5}`.
pub fn h_opt_pointwise(kind: KernelKind, n: usize, px: f64, p2x: f64) -> Result<f64> {
    if p2x == 0.0 {
        return Err(Error::SingularBandwidth);
    }
    if !(px > 0.0 && px.is_finite() && p2x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need p(x) > 0 and finite p''(x), got {px}, {p2x}"
        )));
    }
    if n == 0 {
        return Err(Error::EmptyData);
    }
    let prof = kind.profile();
    let c = (prof.kappa * px / (prof.kappa2 * p2x).powi(2)).powf(0.2);
    Ok(c * (n as f64).powf(-0.2))
}

//! Conformal prediction sets from kernel density level sets.
//!
//! Given training points `x₁..x_N` with densities `yₙ = p̂(xₙ)` sorted
//! ascending, the prediction set is the upper level set
//!
//! ```text
//! B = { x : p̂(x) ≥ C_k },   C_k = y_k - K(0) / (N |H|^{1/2}),   k = ⌊(N+1) P_FA⌋
//! ```
//!
//! with `K(0) = k(0)^q` the unscaled product basis value, so for `H = h² I₂`
//! the correction is `k(0)² / (N h²)`. `B` contains the exact conformal set
//! `A = { x : η_x ≥ P_FA }`, where `η_x` is the rank p-value of `x` under the
//! KDE of the augmented sample `x₁..x_N, x`. [`p_value_field`] evaluates `η`
//! literally and is meant for small `N`.
//!
//! Membership of new points is decided against the convex hull of the grid
//! nodes in `B`, which makes the decision region convex even when the density
//! is multimodal.

use std::io::Write;

use log::warn;
use rayon::prelude::*;

use crate::density::{Bandwidth, DensityGrid, SampleQD};
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, point_in_hull, Point};
use crate::kernels::KernelKind;

/// Threshold plane together with the rank it was read from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub c_k: f64,
    /// 1-based rank into the ascending training densities.
    pub k: usize,
    pub y_k: f64,
    pub correction: f64,
}

fn check_p_fa(p_fa: f64) -> Result<()> {
    if p_fa > 0.0 && p_fa < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("p_fa must lie in (0, 1), got {p_fa}")))
    }
}

/// `k = max(1, ⌊(n+1) p_fa⌋)`.
pub fn threshold_rank(n: usize, p_fa: f64) -> Result<usize> {
    check_p_fa(p_fa)?;
    if n == 0 {
        return Err(Error::EmptyData);
    }
    // the epsilon keeps products like 0.29 * 100 from flooring one rank low
    let k = (((n + 1) as f64 * p_fa) + 1e-9).floor() as usize;
    let k = k.max(1);
    if k > n {
        return Err(Error::RankOutOfRange { k, n });
    }
    Ok(k)
}

/// `C_k = y_k - k(0)^q / (n · h₁⋯h_q)` for the `n` training densities.
pub fn compute_threshold(
    train_densities: &[f64],
    p_fa: f64,
    kind: KernelKind,
    h: &Bandwidth,
) -> Result<Threshold> {
    let n = train_densities.len();
    let k = threshold_rank(n, p_fa)?;
    let mut sorted = train_densities.to_vec();
    sorted.sort_by(f64::total_cmp);
    let y_k = sorted[k - 1];
    let k0 = kind.eval(0.0).powi(h.dim() as i32);
    let correction = k0 / (n as f64 * h.volume());
    Ok(Threshold {
        c_k: y_k - correction,
        k,
        y_k,
        correction,
    })
}

/// Upper level set of a density grid and the convex hull of its nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub c_k: f64,
    /// Row-major like [`DensityGrid::values`].
    pub mask: Vec<bool>,
    pub nx: usize,
    pub ny: usize,
    /// Counterclockwise hull vertices.
    pub hull: Vec<Point>,
    pub p_fa: f64,
    pub n_train: usize,
    pub h: Bandwidth,
    pub kind: KernelKind,
}

pub fn build_prediction_set(
    grid: &DensityGrid,
    c_k: f64,
    p_fa: f64,
    n_train: usize,
) -> PredictionSet {
    let mask: Vec<bool> = grid.values.iter().map(|&v| v >= c_k).collect();
    let nodes: Vec<Point> = mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(idx, _)| grid.node(idx / grid.ny(), idx % grid.ny()))
        .collect();
    if nodes.is_empty() {
        warn!("prediction set is empty (c_k = {c_k} above grid maximum); every point will be flagged");
    }
    PredictionSet {
        c_k,
        mask,
        nx: grid.nx(),
        ny: grid.ny(),
        hull: convex_hull(&nodes),
        p_fa,
        n_train,
        h: grid.h.clone(),
        kind: grid.kind,
    }
}

impl PredictionSet {
    pub fn is_empty(&self) -> bool {
        self.hull.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        point_in_hull(&self.hull, p)
    }

    pub fn mask_at(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.ny + j]
    }

    /// Hull vertices as `x,y` preceded by a metadata comment line.
    pub fn write_hull_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# c_k={} p_fa={} n={} h={} kernel={}",
            self.c_k,
            self.p_fa,
            self.n_train,
            format_bandwidth(&self.h),
            self.kind
        )?;
        writeln!(w, "x,y")?;
        for v in &self.hull {
            writeln!(w, "{},{}", v[0], v[1])?;
        }
        Ok(())
    }
}

/// Shared bandwidths print as one number, per-axis ones joined with `:`.
pub fn format_bandwidth(h: &Bandwidth) -> String {
    match h.as_scalar() {
        Some(v) => v.to_string(),
        None => h
            .per_axis()
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(":"),
    }
}

/// True when `x_m` lies outside the hull of the prediction set (predicted onset).
pub fn test_onset(set: &PredictionSet, x_m: Point) -> bool {
    !set.contains(x_m)
}

/// Conformal p-values `η` on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueField {
    pub values: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub n_train: usize,
}

impl PValueField {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    /// Nodes of the exact conformal set `{ η ≥ p_fa }`.
    pub fn accept_mask(&self, p_fa: f64) -> Vec<bool> {
        self.values.iter().map(|&v| v >= p_fa).collect()
    }
}

/// `η_x = 1/(N+1) Σₙ 𝕀(p̂ᵃ(xₙ) ≤ p̂ᵃ(x))` at every node of `grid`, where `p̂ᵃ`
/// is the estimate from the augmented sample `x₁..x_N, x`.
///
/// Costs `O(N²)` per node.
pub fn p_value_field(
    train: &SampleQD,
    grid: &DensityGrid,
    kind: KernelKind,
    h: &Bandwidth,
) -> Result<PValueField> {
    if train.dim() != 2 || h.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: if train.dim() != 2 { train.dim() } else { h.dim() },
        });
    }
    let n = train.len();
    let hs = h.per_axis();
    let kern = |a: &[f64], b: &[f64]| -> f64 {
        kind.eval((a[0] - b[0]) / hs[0]) * kind.eval((a[1] - b[1]) / hs[1])
    };
    // The common factor 1/((N+1) h₁h₂) does not change the ranks.
    let augmented = |points: &[&[f64]], at: &[f64]| -> f64 { points.iter().map(|p| kern(p, at)).sum() };

    let values = (0..grid.nx() * grid.ny())
        .into_par_iter()
        .map(|idx| {
            let node = grid.node(idx / grid.ny(), idx % grid.ny());
            let mut points: Vec<&[f64]> = train.rows().collect();
            points.push(&node);
            let at_x = augmented(&points, &node);
            let count = (0..n)
                .filter(|&m| augmented(&points, train.row(m)) <= at_x)
                .count();
            count as f64 / (n + 1) as f64
        })
        .collect();
    Ok(PValueField {
        values,
        nx: grid.nx(),
        ny: grid.ny(),
        n_train: n,
    })
}

//! Kernel density estimation: univariate, product-kernel multivariate and
//! 2D grid evaluation.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::KernelKind;

/// Observations `X₁..Xₙ` of a real random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample1D(Vec<f64>);

impl Sample1D {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyData);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Sample1D(values))
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

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

/// `n` observations of a `q`-vector, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleQD {
    data: Vec<f64>,
    dim: usize,
}

impl SampleQD {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyData)?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, dim)
    }

    pub fn from_points(points: &[[f64; 2]]) -> Result<Self> {
        Self::from_flat(points.iter().flatten().copied().collect(), 2)
    }

    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.len() % dim,
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i / dim));
        }
        Ok(SampleQD { data, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// `(min, max)` of coordinate `axis`.
    pub fn axis_range(&self, axis: usize) -> (f64, f64) {
        self.rows().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r[axis]), hi.max(r[axis]))
        })
    }
}

/// Per-axis bandwidths `h₁..h_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bandwidth(Vec<f64>);

impl Bandwidth {
    pub fn new(per_axis: Vec<f64>) -> Result<Self> {
        if per_axis.is_empty() {
            return Err(Error::InvalidArgument("bandwidth needs at least one axis".into()));
        }
        for &h in &per_axis {
            check_bandwidth(h)?;
        }
        Ok(Bandwidth(per_axis))
    }

    /// The same `h` on every one of `q` axes, i.e. `H = h² I_q`.
    pub fn isotropic(h: f64, q: usize) -> Result<Self> {
        Self::new(vec![h; q])
    }

    pub fn per_axis(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `h₁ ⋯ h_q`, which equals `|H|^{1/2}` for a diagonal bandwidth matrix.
    pub fn volume(&self) -> f64 {
        self.0.iter().product()
    }

    /// The shared value when every axis uses the same bandwidth.
    pub fn as_scalar(&self) -> Option<f64> {
        let h = self.0[0];
        self.0.iter().all(|&v| v == h).then_some(h)
    }
}

pub(crate) fn check_bandwidth(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBandwidth(h))
    }
}

/// `(1/(nh)) Σ k((Xᵢ - x)/h)`.
pub fn kde_univariate(data: &Sample1D, kind: KernelKind, h: f64, x: f64) -> Result<f64> {
    check_bandwidth(h)?;
    let reach = h * kind.prune_radius();
    let sum: f64 = data
        .values()
        .iter()
        .filter(|&&xi| (xi - x).abs() <= reach)
        .map(|&xi| kind.eval((xi - x) / h))
        .sum();
    Ok(sum / (data.len() as f64 * h))
}

/// Product-kernel estimate `(1/(n h₁⋯h_q)) Σᵢ Πₛ k((X_{is} - x_s)/h_s)`.
pub fn kde_product(data: &SampleQD, kind: KernelKind, h: &Bandwidth, x: &[f64]) -> Result<f64> {
    check_dims(data, h, x)?;
    Ok(product_sum(data, kind, h, x) / (data.len() as f64 * h.volume()))
}

fn check_dims(data: &SampleQD, h: &Bandwidth, x: &[f64]) -> Result<()> {
    if h.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: h.dim(),
        });
    }
    if x.len() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Unnormalized `Σᵢ Πₛ k((X_{is} - x_s)/h_s)`; dimensions must already agree.
pub(crate) fn product_sum(data: &SampleQD, kind: KernelKind, h: &Bandwidth, x: &[f64]) -> f64 {
    let hs = h.per_axis();
    let radius = kind.prune_radius();
    let mut sum = 0.0;
    'rows: for row in data.rows() {
        let mut prod = 1.0;
        for s in 0..row.len() {
            let u = (row[s] - x[s]) / hs[s];
            if u.abs() > radius {
                continue 'rows;
            }
            prod *= kind.eval(u);
        }
        sum += prod;
    }
    sum
}

/// Density at every sample point, `yₙ = p̂(xₙ)` (each point's own term included).
pub fn densities_at_samples(data: &SampleQD, kind: KernelKind, h: &Bandwidth) -> Result<Vec<f64>> {
    if h.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: h.dim(),
        });
    }
    let norm = data.len() as f64 * h.volume();
    Ok((0..data.len())
        .into_par_iter()
        .map(|i| product_sum(data, kind, h, data.row(i)) / norm)
        .collect())
}

/// Density evaluated on a rectangular 2D grid.
///
/// `values[i * y_axis.len() + j]` is the estimate at `(x_axis[i], y_axis[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub x_axis: Vec<f64>,
    pub y_axis: Vec<f64>,
    pub values: Vec<f64>,
    pub h: Bandwidth,
    pub kind: KernelKind,
}

impl DensityGrid {
    pub fn nx(&self) -> usize {
        self.x_axis.len()
    }

    pub fn ny(&self) -> usize {
        self.y_axis.len()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny() + j]
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x_axis[i], self.y_axis[j]]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes `x,y,density`, row-major over the nodes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,density")?;
        for (i, x) in self.x_axis.iter().enumerate() {
            for (j, y) in self.y_axis.iter().enumerate() {
                writeln!(w, "{x},{y},{}", self.value(i, j))?;
            }
        }
        Ok(())
    }
}

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect()
}

/// Evaluates the 2D estimate on a `grid_size × grid_size` grid spanning
/// `[min - margin·h, max + margin·h]` on each axis.
pub fn kde_grid(
    data: &SampleQD,
    kind: KernelKind,
    h: &Bandwidth,
    grid_size: usize,
    margin_factor: f64,
) -> Result<DensityGrid> {
    if data.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: data.dim(),
        });
    }
    if grid_size < 2 {
        return Err(Error::InvalidArgument(format!("grid_size must be >= 2, got {grid_size}")));
    }
    if !(margin_factor.is_finite() && margin_factor >= 0.0) {
        return Err(Error::InvalidArgument(format!("invalid margin factor {margin_factor}")));
    }
    check_dims(data, h, &[0.0, 0.0])?;
    let axis = |a: usize| {
        let (lo, hi) = data.axis_range(a);
        let pad = margin_factor * h.per_axis()[a];
        linspace(lo - pad, hi + pad, grid_size)
    };
    let x_axis = axis(0);
    let y_axis = axis(1);
    let norm = data.len() as f64 * h.volume();
    let values: Vec<f64> = x_axis
        .par_iter()
        .flat_map_iter(|&x| {
            y_axis
                .iter()
                .map(move |&y| product_sum(data, kind, h, &[x, y]) / norm)
        })
        .collect();
    Ok(DensityGrid {
        x_axis,
        y_axis,
        values,
        h: h.clone(),
        kind,
    })
}

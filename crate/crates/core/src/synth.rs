//! Seeded synthetic R-tuple generator: a diagonal Gaussian mixture in
//! `(t_sample, amplitude)` space plus planted anomalies with ground-truth labels.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::eval::PeakRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: [f64; 2],
    /// Per-axis standard deviations.
    pub sd: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub components: Vec<MixtureComponent>,
    /// Total number of records, anomalies included.
    pub n_points: usize,
    pub n_anomalies: usize,
    /// Anomaly distance from the mixture mean in units of the mixture's
    /// per-axis standard deviation.
    pub displacement: f64,
    /// Consecutive records sharing one event id.
    pub points_per_event: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            components: vec![
                MixtureComponent {
                    weight: 0.6,
                    mean: [3750.0, 1.0],
                    sd: [1500.0, 0.15],
                },
                MixtureComponent {
                    weight: 0.4,
                    mean: [5500.0, 0.6],
                    sd: [1000.0, 0.1],
                },
            ],
            n_points: 500,
            n_anomalies: 25,
            displacement: 6.0,
            points_per_event: 25,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSynthetic(m));
        if self.components.is_empty() {
            return bad("no mixture components".into());
        }
        let mut total = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return bad(format!("component {i}: weight must be > 0"));
            }
            if !c.mean.iter().all(|v| v.is_finite()) {
                return bad(format!("component {i}: mean is not finite"));
            }
            if !c.sd.iter().all(|v| v.is_finite() && *v > 0.0) {
                return bad(format!("component {i}: standard deviations must be > 0"));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("weights sum to {total}, not 1"));
        }
        if self.n_points == 0 {
            return bad("n_points must be >= 1".into());
        }
        if self.n_anomalies > self.n_points {
            return bad(format!(
                "{} anomalies exceed {} points",
                self.n_anomalies, self.n_points
            ));
        }
        if !(self.displacement.is_finite() && self.displacement >= 0.0) {
            return bad("displacement must be >= 0".into());
        }
        if self.points_per_event == 0 {
            return bad("points_per_event must be >= 1".into());
        }
        Ok(())
    }

    /// Mean and per-axis standard deviation of the whole mixture.
    pub fn moments(&self) -> ([f64; 2], [f64; 2]) {
        let mut mean = [0.0; 2];
        let mut second = [0.0; 2];
        for c in &self.components {
            for a in 0..2 {
                mean[a] += c.weight * c.mean[a];
                second[a] += c.weight * (c.sd[a] * c.sd[a] + c.mean[a] * c.mean[a]);
            }
        }
        let sd = [
            (second[0] - mean[0] * mean[0]).max(0.0).sqrt(),
            (second[1] - mean[1] * mean[1]).max(0.0).sqrt(),
        ];
        (mean, sd)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub records: Vec<PeakRecord>,
    /// `true` marks a planted anomaly.
    pub labels: Vec<bool>,
}

/// Draws `n_points - n_anomalies` mixture points and `n_anomalies` points on
/// the ellipse `mean + displacement · sd ⊙ (cos θ, sin θ)`, then shuffles.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let n_normal = spec.n_points - spec.n_anomalies;

    let mut points: Vec<([f64; 2], bool)> = Vec::with_capacity(spec.n_points);
    for _ in 0..n_normal {
        let mut pick = rng.random::<f64>();
        let c = spec
            .components
            .iter()
            .find(|c| {
                pick -= c.weight;
                pick < 0.0
            })
            .unwrap_or_else(|| spec.components.last().expect("validated"));
        let p = [
            c.mean[0] + c.sd[0] * std_normal.sample(&mut rng),
            c.mean[1] + c.sd[1] * std_normal.sample(&mut rng),
        ];
        points.push((p, false));
    }
    let (mean, sd) = spec.moments();
    for _ in 0..spec.n_anomalies {
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let p = [
            mean[0] + spec.displacement * sd[0] * theta.cos(),
            mean[1] + spec.displacement * sd[1] * theta.sin(),
        ];
        points.push((p, true));
    }
    points.shuffle(&mut rng);

    let records = points
        .iter()
        .enumerate()
        .map(|(i, (p, _))| PeakRecord {
            event_id: i / spec.points_per_event,
            t_sample: p[0],
            amplitude: p[1],
        })
        .collect();
    let labels = points.iter().map(|&(_, l)| l).collect();
    Ok(SyntheticData { records, labels })
}

//! Train/validation/test splitting, onset labeling, confusion-matrix metrics
//! and the Monte Carlo evaluation loop.
//!
//! A trial runs the full prediction pipeline on pooled R-tuples:
//!
//! 1. shuffle and split the records,
//! 2. fit the coordinate normalization on the training split,
//! 3. pick `h` by leave-one-out cross-validation on the validation split,
//! 4. estimate the density of the training split on a grid, derive `C_k` and
//!    the prediction set,
//! 5. flag every test point outside the hull and compare with its label.
//!
//! The positive class is "onset". Trial `i` of a Monte Carlo run uses seed
//! `base_seed + i`; that seed drives both the shuffle and the per-event draw of
//! the onset search window.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bandwidth::{
    select_bandwidth, select_bandwidth_per_axis, BandwidthGrid, BandwidthMode, DEFAULT_GRID_STEPS,
};
use crate::conformal::{
    build_prediction_set, compute_threshold, format_bandwidth, test_onset, PredictionSet, Threshold,
};
use crate::density::{densities_at_samples, kde_grid, Bandwidth, SampleQD};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kernels::KernelKind;
use crate::qrs::{Normalization, PeakTransform};

/// Samples after an onset searched for the bradycardia peak when `u = 1`.
pub const ONSET_SEARCH_SAMPLES: usize = 1500;

/// Fractions of the pooled records given to training, validation and test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
}

impl SplitSpec {
    pub fn new(train_frac: f64, val_frac: f64, test_frac: f64) -> Result<Self> {
        for f in [train_frac, val_frac, test_frac] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidSplit(format!("fraction {f} not in (0, 1)")));
            }
        }
        let sum = train_frac + val_frac + test_frac;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSplit(format!("fractions sum to {sum}, not 1")));
        }
        Ok(SplitSpec {
            train_frac,
            val_frac,
            test_frac,
        })
    }

    /// The three demarcations evaluated per kernel: `.7/.1/.2`, `.7/.2/.1`, `.6/.2/.2`.
    pub fn reference_specs() -> [SplitSpec; 3] {
        [
            SplitSpec::new(0.7, 0.1, 0.2).unwrap(),
            SplitSpec::new(0.7, 0.2, 0.1).unwrap(),
            SplitSpec::new(0.6, 0.2, 0.2).unwrap(),
        ]
    }

    /// `(train, val, test)` sizes for `n` items: validation and test get
    /// `⌊frac·n⌋`, training takes the remainder.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize, usize)> {
        // tolerance so 0.7 * 10 style products floor to the intended integer
        let part = |f: f64| (f * n as f64 + 1e-9).floor() as usize;
        let val = part(self.val_frac);
        let test = part(self.test_frac);
        let train = n.saturating_sub(val + test);
        if train == 0 || val == 0 || test == 0 {
            return Err(Error::InvalidSplit(format!(
                "{n} items give an empty split ({train}/{val}/{test})"
            )));
        }
        Ok((train, val, test))
    }
}

impl fmt::Display for SplitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.train_frac, self.val_frac, self.test_frac)
    }
}

impl FromStr for SplitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidSplit(format!("cannot parse '{s}'")))?;
        match parts[..] {
            [a, b, c] => SplitSpec::new(a, b, c),
            _ => Err(Error::InvalidSplit(format!("'{s}' needs three fractions"))),
        }
    }
}

/// Index partition produced by a shuffle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Fisher–Yates shuffle of `0..n` under `rng`, then consecutive train/val/test blocks.
pub fn split_indices<R: Rng>(n: usize, spec: &SplitSpec, rng: &mut R) -> Result<SplitIndices> {
    if n < 3 {
        return Err(Error::InvalidSplit(format!("need at least 3 items, got {n}")));
    }
    let (n_train, n_val, _) = spec.sizes(n)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let test = idx.split_off(n_train + n_val);
    let val = idx.split_off(n_train);
    Ok(SplitIndices {
        train: idx,
        val,
        test,
    })
}

/// Shuffles `points` with a generator seeded by `seed` and splits per `spec`.
pub fn shuffle_split<T: Clone>(
    points: &[T],
    spec: &SplitSpec,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = split_indices(points.len(), spec, &mut rng)?;
    let pick = |ix: &[usize]| ix.iter().map(|&i| points[i].clone()).collect::<Vec<T>>();
    Ok((pick(&s.train), pick(&s.val), pick(&s.test)))
}

/// `m < peak_t < m + ⌈u·1500⌉`, strict on both sides.
pub fn label_bradycardia(peak_t: f64, m: f64, u: f64) -> bool {
    let end = m + (u * ONSET_SEARCH_SAMPLES as f64).ceil();
    m < peak_t && peak_t < end
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: Self) -> Self {
        ConfusionMatrix::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_, self.tn + o.tn)
    }
}

/// Derived metrics; `None` marks a metric whose denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub sensitivity: Option<f64>,
    pub precision: Option<f64>,
    pub fdr: Option<f64>,
    pub for_rate: Option<f64>,
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
    pub epe: Option<f64>,
}

fn ratio(num: usize, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num as f64 / den)
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> MetricsReport {
    let &ConfusionMatrix { tp, fp, fn_, tn } = cm;
    let total = cm.total() as f64;
    MetricsReport {
        sensitivity: ratio(tp, (tp + fn_) as f64),
        precision: ratio(tp, (tp + fp) as f64),
        fdr: ratio(fp, (tp + fp) as f64),
        for_rate: ratio(fn_, (fn_ + tn) as f64),
        accuracy: ratio(tp + tn, total),
        f1: ratio(tp, tp as f64 + 0.5 * (fp + fn_) as f64),
        epe: ratio(fp + fn_, total),
    }
}

/// False classifications over tested points, `(fp + fn) / n_tested`.
pub fn compute_epe(cm: &ConfusionMatrix, n_tested: usize) -> Result<f64> {
    if cm.total() != n_tested {
        return Err(Error::CountMismatch {
            total: cm.total(),
            tested: n_tested,
        });
    }
    if n_tested == 0 {
        return Err(Error::EmptyData);
    }
    Ok((cm.fp + cm.fn_) as f64 / n_tested as f64)
}

/// One R-tuple as stored in a peak file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakRecord {
    pub event_id: usize,
    pub t_sample: f64,
    pub amplitude: f64,
}

/// Source of the ground-truth label of a test point.
#[derive(Debug, Clone, PartialEq)]
pub enum Labeling {
    /// Peaks in `(onset, onset + ⌈u·1500⌉)` are onsets, one `u ~ U(0,1]` per
    /// event per trial; `onset_offset` is the onset position within events.
    OnsetWindow { onset_offset: f64 },
    /// Per-record labels supplied alongside the data.
    Truth(Vec<bool>),
}

/// How the candidate bandwidths are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// `steps` log-spaced values between `0.01·R` and `R`, `R` the range of
    /// the validation data in normalized coordinates.
    DataDriven { steps: usize },
    Fixed(BandwidthGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub kind: KernelKind,
    pub p_fa: f64,
    pub grid_size: usize,
    pub margin_factor: f64,
    pub fs: f64,
    pub normalization: Normalization,
    pub bandwidth_mode: BandwidthMode,
    pub h_grid: GridSpec,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            kind: KernelKind::Gaussian,
            p_fa: 0.05,
            grid_size: 128,
            margin_factor: 3.0,
            fs: 500.0,
            normalization: Normalization::ZScore,
            bandwidth_mode: BandwidthMode::Shared,
            h_grid: GridSpec::DataDriven {
                steps: DEFAULT_GRID_STEPS,
            },
        }
    }
}

/// A prediction set fitted from normalized training and validation points.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub h: Bandwidth,
    pub threshold: Threshold,
    pub set: PredictionSet,
}

fn candidate_grids(val: &SampleQD, cfg: &TrialConfig) -> Result<Vec<BandwidthGrid>> {
    let ranges: Vec<f64> = (0..val.dim())
        .map(|a| {
            let (lo, hi) = val.axis_range(a);
            hi - lo
        })
        .collect();
    match (&cfg.h_grid, cfg.bandwidth_mode) {
        (GridSpec::Fixed(g), BandwidthMode::Shared) => Ok(vec![g.clone()]),
        (GridSpec::Fixed(g), BandwidthMode::PerAxis) => Ok(vec![g.clone(); val.dim()]),
        (GridSpec::DataDriven { steps }, BandwidthMode::Shared) => {
            let r = ranges.iter().copied().fold(0.0, f64::max);
            Ok(vec![BandwidthGrid::log_spaced(0.01 * r, r, *steps).map_err(|_| {
                Error::InvalidGrid(format!("validation data range {r} is degenerate"))
            })?])
        }
        (GridSpec::DataDriven { steps }, BandwidthMode::PerAxis) => ranges
            .iter()
            .map(|&r| BandwidthGrid::log_spaced(0.01 * r, r, *steps))
            .collect(),
    }
}

/// Cross-validates `h` on `val`, then builds `C_k` and the prediction set from `train`.
pub fn fit_model(train: &[Point], val: &[Point], cfg: &TrialConfig) -> Result<FittedModel> {
    let train = SampleQD::from_points(train)?;
    let val = SampleQD::from_points(val)?;
    if val.len() < 2 {
        return Err(Error::TooFewForCrossValidation(val.len()));
    }
    let grids = candidate_grids(&val, cfg)?;
    let (h, _curve) = match cfg.bandwidth_mode {
        BandwidthMode::Shared => select_bandwidth(&val, cfg.kind, &grids[0])?,
        BandwidthMode::PerAxis => select_bandwidth_per_axis(&val, cfg.kind, &grids)?,
    };
    let ys = densities_at_samples(&train, cfg.kind, &h)?;
    let threshold = compute_threshold(&ys, cfg.p_fa, cfg.kind, &h)?;
    let grid = kde_grid(&train, cfg.kind, &h, cfg.grid_size, cfg.margin_factor)?;
    let set = build_prediction_set(&grid, threshold.c_k, cfg.p_fa, train.len());
    Ok(FittedModel { h, threshold, set })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub h: Bandwidth,
    pub c_k: f64,
    pub cm: ConfusionMatrix,
    pub epe: f64,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
}

fn check_labeling(records: &[PeakRecord], labeling: &Labeling) -> Result<()> {
    if let Labeling::Truth(labels) = labeling {
        if labels.len() != records.len() {
            return Err(Error::DimensionMismatch {
                expected: records.len(),
                got: labels.len(),
            });
        }
    }
    Ok(())
}

/// One shuffle/fit/test cycle with a generator seeded by `seed`.
pub fn run_trial(
    records: &[PeakRecord],
    labeling: &Labeling,
    spec: &SplitSpec,
    seed: u64,
    cfg: &TrialConfig,
) -> Result<TrialOutcome> {
    check_labeling(records, labeling)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let split = split_indices(records.len(), spec, &mut rng)?;

    let mut in_train = vec![false; records.len()];
    for &i in &split.train {
        in_train[i] = true;
    }
    assert!(
        split.test.iter().all(|&i| !in_train[i]),
        "a training point reached the test loop"
    );

    let raw = |ix: &[usize]| -> Vec<(f64, f64)> {
        ix.iter()
            .map(|&i| (records[i].t_sample, records[i].amplitude))
            .collect()
    };
    let tf = PeakTransform::fit(&raw(&split.train), cfg.fs, cfg.normalization)?;
    let project = |ix: &[usize]| -> Vec<Point> {
        ix.iter()
            .map(|&i| tf.apply(records[i].t_sample, records[i].amplitude))
            .collect()
    };
    let model = fit_model(&project(&split.train), &project(&split.val), cfg)?;

    let window_u: BTreeMap<usize, f64> = match labeling {
        Labeling::OnsetWindow { .. } => {
            let ids: std::collections::BTreeSet<usize> =
                records.iter().map(|r| r.event_id).collect();
            ids.into_iter()
                .map(|id| (id, 1.0 - rng.random::<f64>()))
                .collect()
        }
        Labeling::Truth(_) => BTreeMap::new(),
    };
    let actual = |i: usize| -> bool {
        match labeling {
            Labeling::Truth(labels) => labels[i],
            Labeling::OnsetWindow { onset_offset } => {
                let r = &records[i];
                label_bradycardia(r.t_sample, *onset_offset, window_u[&r.event_id])
            }
        }
    };

    let mut cm = ConfusionMatrix::default();
    for &i in &split.test {
        let x = tf.apply(records[i].t_sample, records[i].amplitude);
        cm.record(test_onset(&model.set, x), actual(i));
    }
    let epe = compute_epe(&cm, split.test.len())?;
    Ok(TrialOutcome {
        trial: 0,
        seed,
        h: model.h,
        c_k: model.threshold.c_k,
        cm,
        epe,
        n_train: split.train.len(),
        n_val: split.val.len(),
        n_test: split.test.len(),
    })
}

/// All trials of one split specification.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSummary {
    pub spec: SplitSpec,
    pub trials: Vec<TrialOutcome>,
    pub mean_epe: f64,
}

impl SplitSummary {
    pub fn pooled(&self) -> ConfusionMatrix {
        self.trials
            .iter()
            .fold(ConfusionMatrix::default(), |acc, t| acc + t.cm)
    }

    /// Per-trial rows `trial,seed,h,c_k,tp,fp,fn,tn,epe`.
    pub fn write_trials_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "trial,seed,h,c_k,tp,fp,fn,tn,epe")?;
        for t in &self.trials {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                t.trial,
                t.seed,
                format_bandwidth(&t.h),
                t.c_k,
                t.cm.tp,
                t.cm.fp,
                t.cm.fn_,
                t.cm.tn,
                t.epe
            )?;
        }
        Ok(())
    }
}

/// Runs `trials` trials per split spec with seeds `base_seed + trial`.
pub fn monte_carlo(
    records: &[PeakRecord],
    labeling: &Labeling,
    specs: &[SplitSpec],
    trials: usize,
    base_seed: u64,
    cfg: &TrialConfig,
) -> Result<Vec<SplitSummary>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    specs
        .iter()
        .map(|spec| {
            let outcomes = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let seed = base_seed.wrapping_add(trial as u64);
                    run_trial(records, labeling, spec, seed, cfg)
                        .map(|o| TrialOutcome { trial, ..o })
                })
                .collect::<Result<Vec<_>>>()?;
            let mean_epe = outcomes.iter().map(|o| o.epe).sum::<f64>() / trials as f64;
            Ok(SplitSummary {
                spec: *spec,
                trials: outcomes,
                mean_epe,
            })
        })
        .collect()
}

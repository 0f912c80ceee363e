//! Kernel density estimation with leave-one-out cross-validated bandwidths,
//! conformal prediction sets built from density level sets, and the ECG
//! pipeline that turns annotated recordings into R-peak samples for
//! bradycardia onset prediction.
//!
//! The modules follow the data flow:
//!
//! * [`ecg`] calibrates a recording, removes baseline wander and cuts events
//!   around onsets; [`qrs`] detects R-peaks and normalizes them.
//! * [`kernels`], [`density`] and [`bandwidth`] estimate densities and choose
//!   the bandwidth; [`parametric`] holds the Gaussian reference estimators.
//! * [`conformal`] turns a density grid into a prediction set and decides
//!   whether a new point is an onset.
//! * [`eval`] runs split/fit/test trials and computes metrics; [`synth`]
//!   produces labeled synthetic data.

pub mod bandwidth;
pub mod config;
pub mod conformal;
pub mod density;
pub mod dsp;
pub mod ecg;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod parametric;
pub mod qrs;
pub mod synth;

pub use bandwidth::{
    cv_score_1d, cv_score_qd, select_bandwidth, select_bandwidth_1d, BandwidthGrid, BandwidthMode,
    CvCurve,
};
pub use conformal::{build_prediction_set, compute_threshold, test_onset, PredictionSet};
pub use density::{kde_grid, kde_product, kde_univariate, Bandwidth, DensityGrid, Sample1D, SampleQD};
pub use error::{Error, Result};
pub use eval::{
    compute_epe, compute_metrics, monte_carlo, run_trial, ConfusionMatrix, MetricsReport,
    PeakRecord, SplitSpec, TrialConfig,
};
pub use kernels::KernelKind;

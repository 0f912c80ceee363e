//! Pan-Tompkins R-peak detection and R-tuple normalization.
//!
//! The detector runs on one baseline-removed event:
//!
//! 1. 5–15 Hz bandpass (Butterworth low-pass and high-pass sections, zero phase),
//! 2. five-point derivative `(-x[n-2] - 2x[n-1] + 2x[n+1] + x[n+2]) fs/8`,
//! 3. squaring,
//! 4. centred 150 ms moving-window integration,
//! 5. dual adaptive thresholds on the integrated signal with running signal
//!    and noise peak estimates, a 200 ms refractory period, T-wave
//!    discrimination inside 360 ms and search-back after 1.66 × the mean of
//!    the last eight RR intervals.
//!
//! Each accepted integrator peak is localized to the maximum of the event
//! within half an integration window, and the amplitude is read from the event
//! itself.

use crate::dsp::Biquad;
use crate::ecg::Event;
use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanTompkinsConfig {
    pub bandpass_low_hz: f64,
    pub bandpass_high_hz: f64,
    pub integration_window_s: f64,
    pub refractory_s: f64,
    pub t_wave_window_s: f64,
    pub searchback_factor: f64,
    pub learning_s: f64,
}

impl Default for PanTompkinsConfig {
    fn default() -> Self {
        PanTompkinsConfig {
            bandpass_low_hz: 5.0,
            bandpass_high_hz: 15.0,
            integration_window_s: 0.150,
            refractory_s: 0.200,
            t_wave_window_s: 0.360,
            searchback_factor: 1.66,
            learning_s: 2.0,
        }
    }
}

/// One detected R-peak: sample index within the event and amplitude there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RTuple {
    pub t: usize,
    pub r: f64,
}

/// Intermediate streams of the detector, exposed for inspection.
#[derive(Debug, Clone)]
pub struct Stages {
    pub bandpassed: Vec<f64>,
    pub derivative: Vec<f64>,
    pub integrated: Vec<f64>,
}

fn samples_of(seconds: f64, fs: f64) -> usize {
    (seconds * fs).round().max(1.0) as usize
}

pub fn stages(x: &[f64], fs: f64, cfg: &PanTompkinsConfig) -> Result<Stages> {
    let lp = Biquad::lowpass(fs, cfg.bandpass_high_hz)?;
    let hp = Biquad::highpass(fs, cfg.bandpass_low_hz)?;
    let bp = lp.filtfilt(x, lp.settling_samples());
    let bp = hp.filtfilt(&bp, hp.settling_samples());

    let n = bp.len();
    let mut derivative = vec![0.0; n];
    for i in 2..n.saturating_sub(2) {
        derivative[i] = (-bp[i - 2] - 2.0 * bp[i - 1] + 2.0 * bp[i + 1] + bp[i + 2]) * fs / 8.0;
    }

    let half = samples_of(cfg.integration_window_s, fs) / 2;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for d in &derivative {
        prefix.push(prefix.last().unwrap() + d * d);
    }
    let integrated = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect();
    Ok(Stages {
        bandpassed: bp,
        derivative,
        integrated,
    })
}

#[derive(Debug, Clone, Copy)]
struct Beat {
    idx: usize,
    value: f64,
    slope: f64,
}

struct Thresholds {
    spk: f64,
    npk: f64,
}

impl Thresholds {
    fn primary(&self) -> f64 {
        self.npk + 0.25 * (self.spk - self.npk)
    }

    fn secondary(&self) -> f64 {
        0.5 * self.primary()
    }
}

/// Detects R-peaks in an event; see the module docs for the pipeline.
pub fn detect_r_peaks(ev: &Event, fs: f64, cfg: &PanTompkinsConfig) -> Result<Vec<RTuple>> {
    detect_in_samples(&ev.samples, fs, cfg)
}

pub fn detect_in_samples(x: &[f64], fs: f64, cfg: &PanTompkinsConfig) -> Result<Vec<RTuple>> {
    let min = (2.0 * fs).ceil() as usize;
    if x.len() < min {
        return Err(Error::EventTooShort { len: x.len(), min });
    }
    let st = stages(x, fs, cfg)?;
    let x_amp = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let bp_amp = st.bandpassed.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    // nothing but rounding noise left in the QRS band
    if bp_amp <= 1e-9 * x_amp.max(f64::MIN_POSITIVE) {
        return Ok(Vec::new());
    }
    let m = &st.integrated;
    let n = m.len();
    let refractory = samples_of(cfg.refractory_s, fs);
    let t_wave = samples_of(cfg.t_wave_window_s, fs);
    let window = samples_of(cfg.integration_window_s, fs);

    let slope_at = |i: usize| {
        let lo = i.saturating_sub(window);
        st.derivative[lo..=i].iter().fold(0.0f64, |a, d| a.max(d.abs()))
    };

    let learn = samples_of(cfg.learning_s, fs).min(n);
    let learn_max = m[..learn].iter().fold(0.0f64, |a, &v| a.max(v));
    let learn_mean = m[..learn].iter().sum::<f64>() / learn as f64;
    let mut th = Thresholds {
        spk: learn_max / 3.0,
        npk: learn_mean / 2.0,
    };

    let candidates: Vec<(usize, f64)> = (1..n.saturating_sub(1))
        .filter(|&i| m[i] > m[i - 1] && m[i] >= m[i + 1] && m[i] > 0.0)
        .map(|i| (i, m[i]))
        .collect();

    let mut beats: Vec<Beat> = Vec::new();
    let mut noise: Vec<(usize, f64)> = Vec::new();

    let rr_mean = |beats: &[Beat]| -> Option<f64> {
        if beats.len() < 2 {
            return None;
        }
        let tail = &beats[beats.len().saturating_sub(9)..];
        let rr: Vec<f64> = tail.windows(2).map(|w| (w[1].idx - w[0].idx) as f64).collect();
        Some(rr.iter().sum::<f64>() / rr.len() as f64)
    };

    let search_back = |upto: usize, beats: &mut Vec<Beat>, noise: &[(usize, f64)], th: &mut Thresholds| {
        let (Some(last), Some(rr)) = (beats.last().copied(), rr_mean(beats)) else {
            return;
        };
        if (upto - last.idx) as f64 <= cfg.searchback_factor * rr {
            return;
        }
        let best = noise
            .iter()
            .filter(|&&(i, v)| i > last.idx + refractory && i < upto && v > th.secondary())
            .max_by(|a, b| a.1.total_cmp(&b.1));
        if let Some(&(i, v)) = best {
            th.spk = 0.25 * v + 0.75 * th.spk;
            beats.push(Beat {
                idx: i,
                value: v,
                slope: slope_at(i),
            });
        }
    };

    for &(i, v) in &candidates {
        search_back(i, &mut beats, &noise, &mut th);

        if let Some(last) = beats.last_mut() {
            if i - last.idx < refractory {
                if v > last.value {
                    *last = Beat {
                        idx: i,
                        value: v,
                        slope: slope_at(i),
                    };
                }
                continue;
            }
        }

        if v > th.primary() {
            let slope = slope_at(i);
            let is_t_wave = beats
                .last()
                .is_some_and(|last| i - last.idx < t_wave && slope < 0.5 * last.slope);
            if is_t_wave {
                th.npk = 0.125 * v + 0.875 * th.npk;
                noise.push((i, v));
            } else {
                th.spk = 0.125 * v + 0.875 * th.spk;
                beats.push(Beat { idx: i, value: v, slope });
            }
        } else {
            th.npk = 0.125 * v + 0.875 * th.npk;
            noise.push((i, v));
        }
    }
    search_back(n - 1, &mut beats, &noise, &mut th);
    beats.sort_by_key(|b| b.idx);

    // localize on the event and enforce the refractory period on the result
    let half = window / 2;
    let mut peaks: Vec<RTuple> = Vec::with_capacity(beats.len());
    for b in &beats {
        let lo = b.idx.saturating_sub(half);
        let hi = (b.idx + half).min(x.len() - 1);
        let mut t = lo;
        for k in lo..=hi {
            if x[k] > x[t] {
                t = k;
            }
        }
        let cand = RTuple { t, r: x[t] };
        match peaks.last_mut() {
            Some(prev) if t - prev.t < refractory => {
                if cand.r > prev.r {
                    *prev = cand;
                }
            }
            _ => peaks.push(cand),
        }
    }
    Ok(peaks)
}

/// How R-tuple coordinates are rescaled after converting time to seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Subtract the mean and divide by the population standard deviation.
    #[default]
    ZScore,
    /// Map `[min, max]` onto `[0, 1]`.
    MinMax,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zscore" => Ok(Normalization::ZScore),
            "minmax" => Ok(Normalization::MinMax),
            other => Err(Error::InvalidArgument(format!(
                "unknown normalization '{other}' (expected zscore|minmax)"
            ))),
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::ZScore => "zscore",
            Normalization::MinMax => "minmax",
        })
    }
}

/// Affine map from `(t_sample, amplitude)` to normalized plane coordinates:
/// `((t/fs - center₀)/scale₀, (r - center₁)/scale₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakTransform {
    pub fs: f64,
    pub mode: Normalization,
    pub center: [f64; 2],
    pub scale: [f64; 2],
}

impl PeakTransform {
    /// Fits the transform on `(t_sample, amplitude)` pairs.
    pub fn fit(raw: &[(f64, f64)], fs: f64, mode: Normalization) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidArgument(format!("sampling rate must be > 0, got {fs}")));
        }
        if raw.is_empty() {
            return Err(Error::EmptyData);
        }
        let mut center = [0.0; 2];
        let mut scale = [0.0; 2];
        for axis in 0..2 {
            let vals: Vec<f64> = raw
                .iter()
                .map(|&(t, r)| if axis == 0 { t / fs } else { r })
                .collect();
            let (c, s) = match mode {
                Normalization::ZScore => {
                    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                    let var =
                        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
                    (mean, var.sqrt())
                }
                Normalization::MinMax => {
                    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    (lo, hi - lo)
                }
            };
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::ZeroVariance(axis));
            }
            center[axis] = c;
            scale[axis] = s;
        }
        Ok(PeakTransform {
            fs,
            mode,
            center,
            scale,
        })
    }

    pub fn apply(&self, t_sample: f64, r: f64) -> Point {
        [
            (t_sample / self.fs - self.center[0]) / self.scale[0],
            (r - self.center[1]) / self.scale[1],
        ]
    }

    /// Back to `(t_sample, amplitude)`.
    pub fn invert(&self, p: Point) -> (f64, f64) {
        (
            (p[0] * self.scale[0] + self.center[0]) * self.fs,
            p[1] * self.scale[1] + self.center[1],
        )
    }
}

/// Normalizes peaks, fitting a z-score transform when `stats` is `None` and
/// reusing `stats` verbatim otherwise.
pub fn normalize_peaks(
    peaks: &[RTuple],
    fs: f64,
    stats: Option<&PeakTransform>,
) -> Result<(Vec<Point>, PeakTransform)> {
    let raw: Vec<(f64, f64)> = peaks.iter().map(|p| (p.t as f64, p.r)).collect();
    let tf = match stats {
        Some(tf) => *tf,
        None => PeakTransform::fit(&raw, fs, Normalization::ZScore)?,
    };
    Ok((raw.iter().map(|&(t, r)| tf.apply(t, r)).collect(), tf))
}

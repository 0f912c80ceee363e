//! Line-oriented `key = value` configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key is optional;
//! unknown keys and invalid values are rejected with the line number.
//!
//! | key                    | default               | meaning                                   |
//! |------------------------|-----------------------|-------------------------------------------|
//! | `kernel`               | `gaussian`            | gaussian, epanechnikov, uniform, cosine   |
//! | `p_fa`                 | `0.05`                | false-alarm level in (0, 1)               |
//! | `h_min`, `h_max`       | data driven           | bandwidth grid endpoints (set both)       |
//! | `h_steps`              | `40`                  | number of candidate bandwidths            |
//! | `h_scale`              | `log`                 | `log` or `linear` spacing                 |
//! | `h_mode`               | `shared`              | `shared` or `per-axis`                    |
//! | `grid_size`            | `128`                 | density grid nodes per axis               |
//! | `margin`               | `3`                   | grid margin in bandwidths                 |
//! | `splits`               | the three references  | `train,val,test`; several joined with `;` |
//! | `trials`               | `20`                  | Monte Carlo trials per split              |
//! | `seed`                 | `0`                   | base seed                                 |
//! | `pre`, `post`          | `5000`, `2500`        | event window around each onset (samples)  |
//! | `fs`                   | `500`                 | sampling rate of peak files (Hz)          |
//! | `hp_cutoff`            | `0.5`                 | baseline-wander high-pass cutoff (Hz)     |
//! | `normalization`        | `zscore`              | `zscore` or `minmax`                      |
//! | `pt_bandpass_low`      | `5`                   | Pan-Tompkins bandpass lower edge (Hz)     |
//! | `pt_bandpass_high`     | `15`                  | Pan-Tompkins bandpass upper edge (Hz)     |
//! | `pt_integration_window`| `0.150`               | moving-window length (s)                  |
//! | `pt_refractory`        | `0.200`               | refractory period (s)                     |
//! | `pt_t_wave_window`     | `0.360`               | T-wave discrimination window (s)          |
//! | `pt_searchback`        | `1.66`                | search-back factor on the mean RR         |
//! | `pt_learning`          | `2.0`                 | threshold learning phase (s)              |

use std::path::Path;
use std::str::FromStr;

use crate::bandwidth::{BandwidthGrid, BandwidthMode, DEFAULT_GRID_STEPS};
use crate::ecg::{BASELINE_CUTOFF_HZ, DEFAULT_POST, DEFAULT_PRE};
use crate::error::{Error, Result};
use crate::eval::{GridSpec, SplitSpec, TrialConfig};
use crate::kernels::KernelKind;
use crate::qrs::{Normalization, PanTompkinsConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridScale {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub kernel: KernelKind,
    pub p_fa: f64,
    pub h_range: Option<(f64, f64)>,
    pub h_steps: usize,
    pub h_scale: GridScale,
    pub h_mode: BandwidthMode,
    pub grid_size: usize,
    pub margin: f64,
    pub splits: Vec<SplitSpec>,
    pub trials: usize,
    pub seed: u64,
    pub pre: usize,
    pub post: usize,
    pub fs: f64,
    pub hp_cutoff: f64,
    pub normalization: Normalization,
    pub pan_tompkins: PanTompkinsConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            kernel: KernelKind::Gaussian,
            p_fa: 0.05,
            h_range: None,
            h_steps: DEFAULT_GRID_STEPS,
            h_scale: GridScale::Log,
            h_mode: BandwidthMode::Shared,
            grid_size: 128,
            margin: 3.0,
            splits: SplitSpec::reference_specs().to_vec(),
            trials: 20,
            seed: 0,
            pre: DEFAULT_PRE,
            post: DEFAULT_POST,
            fs: 500.0,
            hp_cutoff: BASELINE_CUTOFF_HZ,
            normalization: Normalization::ZScore,
            pan_tompkins: PanTompkinsConfig::default(),
        }
    }
}

fn parse<T: FromStr>(v: &str, what: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("{what}: cannot parse '{v}'"))
}

fn positive(v: &str, what: &str) -> std::result::Result<f64, String> {
    let x: f64 = parse(v, what)?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("{what} must be > 0, got {v}"))
    }
}

fn count(v: &str, what: &str) -> std::result::Result<usize, String> {
    let n: usize = parse(v, what)?;
    if n == 0 {
        Err(format!("{what} must be >= 1"))
    } else {
        Ok(n)
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut h_min = None;
        let mut h_max = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (k, v) = l.split_once('=').ok_or_else(|| Error::Config {
                line,
                msg: format!("expected 'key = value', found '{l}'"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            let res = match k {
                "h_min" => positive(v, k).map(|x| h_min = Some(x)),
                "h_max" => positive(v, k).map(|x| h_max = Some(x)),
                _ => cfg.set(k, v),
            };
            res.map_err(|msg| Error::Config { line, msg })?;
        }
        cfg.h_range = match (h_min, h_max) {
            (None, None) => None,
            (Some(a), Some(b)) => Some((a, b)),
            _ => {
                return Err(Error::Config {
                    line: 0,
                    msg: "h_min and h_max must be given together".into(),
                })
            }
        };
        cfg.validate().map_err(|msg| Error::Config { line: 0, msg })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Sets one key; `h_min`/`h_max` are handled by [`Config::parse`].
    fn set(&mut self, k: &str, v: &str) -> std::result::Result<(), String> {
        let pt = &mut self.pan_tompkins;
        match k {
            "kernel" => self.kernel = v.parse().map_err(|e: Error| e.to_string())?,
            "p_fa" => self.p_fa = parse(v, k)?,
            "h_steps" => self.h_steps = count(v, k)?,
            "h_scale" => {
                self.h_scale = match v {
                    "log" => GridScale::Log,
                    "linear" => GridScale::Linear,
                    _ => return Err(format!("h_scale must be log or linear, got '{v}'")),
                }
            }
            "h_mode" => {
                self.h_mode = match v {
                    "shared" => BandwidthMode::Shared,
                    "per-axis" => BandwidthMode::PerAxis,
                    _ => return Err(format!("h_mode must be shared or per-axis, got '{v}'")),
                }
            }
            "grid_size" => self.grid_size = count(v, k)?,
            "margin" => {
                let m: f64 = parse(v, k)?;
                if !(m.is_finite() && m >= 0.0) {
                    return Err(format!("margin must be >= 0, got {v}"));
                }
                self.margin = m;
            }
            "splits" => {
                self.splits = v
                    .split(';')
                    .map(|s| s.parse::<SplitSpec>().map_err(|e| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "trials" => self.trials = count(v, k)?,
            "seed" => self.seed = parse(v, k)?,
            "pre" => self.pre = parse(v, k)?,
            "post" => self.post = parse(v, k)?,
            "fs" => self.fs = positive(v, k)?,
            "hp_cutoff" => self.hp_cutoff = positive(v, k)?,
            "normalization" => self.normalization = v.parse().map_err(|e: Error| e.to_string())?,
            "pt_bandpass_low" => pt.bandpass_low_hz = positive(v, k)?,
            "pt_bandpass_high" => pt.bandpass_high_hz = positive(v, k)?,
            "pt_integration_window" => pt.integration_window_s = positive(v, k)?,
            "pt_refractory" => pt.refractory_s = positive(v, k)?,
            "pt_t_wave_window" => pt.t_wave_window_s = positive(v, k)?,
            "pt_searchback" => pt.searchback_factor = positive(v, k)?,
            "pt_learning" => pt.learning_s = positive(v, k)?,
            _ => return Err(format!("unknown key '{k}'")),
        }
        Ok(())
    }

    /// Cross-field checks; run after every change.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.p_fa > 0.0 && self.p_fa < 1.0) {
            return Err(format!("p_fa must lie in (0, 1), got {}", self.p_fa));
        }
        if let Some((lo, hi)) = self.h_range {
            self.grid_from(lo, hi).map_err(|e| e.to_string())?;
        }
        let pt = &self.pan_tompkins;
        if pt.bandpass_low_hz >= pt.bandpass_high_hz {
            return Err("pt_bandpass_low must be below pt_bandpass_high".into());
        }
        if self.splits.is_empty() {
            return Err("at least one split is required".into());
        }
        Ok(())
    }

    fn grid_from(&self, lo: f64, hi: f64) -> Result<BandwidthGrid> {
        match self.h_scale {
            GridScale::Log => BandwidthGrid::log_spaced(lo, hi, self.h_steps),
            GridScale::Linear => BandwidthGrid::linear(lo, hi, self.h_steps),
        }
    }

    /// Explicit bandwidth grid, if `h_min`/`h_max` were given.
    pub fn bandwidth_grid(&self) -> Result<Option<BandwidthGrid>> {
        self.h_range
            .map(|(lo, hi)| self.grid_from(lo, hi))
            .transpose()
    }

    pub fn trial_config(&self) -> Result<TrialConfig> {
        let h_grid = match self.bandwidth_grid()? {
            Some(g) => GridSpec::Fixed(g),
            None => GridSpec::DataDriven {
                steps: self.h_steps,
            },
        };
        Ok(TrialConfig {
            kind: self.kernel,
            p_fa: self.p_fa,
            grid_size: self.grid_size,
            margin_factor: self.margin,
            fs: self.fs,
            normalization: self.normalization,
            bandwidth_mode: self.h_mode,
            h_grid,
        })
    }
}

//! ECG header parsing, amplitude calibration, baseline-wander removal and
//! segmentation into fixed windows around annotated onsets.
//!
//! # Header grammar
//!
//! ```text
//! # comment lines and blank lines are ignored anywhere
//! <record> <n_signals> <fs>
//! <file> <fmt> <gain> [<token> ...] base=<int>      (n_signals lines)
//! ```
//!
//! `n_signals` is a positive integer, `fs` and `gain` positive reals. The
//! first signal line describes the channel that is processed. Anything else is
//! rejected with the offending line number.

use log::info;

use crate::dsp::Biquad;
use crate::error::{Error, Result};

/// Cutoff of the baseline-wander high-pass filter.
pub const BASELINE_CUTOFF_HZ: f64 = 0.5;
/// The signal must span this many settling lengths of the high-pass filter.
pub const MIN_SETTLING_MULTIPLE: usize = 6;

pub const DEFAULT_PRE: usize = 5000;
pub const DEFAULT_POST: usize = 2500;

#[derive(Debug, Clone, PartialEq)]
pub struct EcgHeader {
    pub record: String,
    pub fs: f64,
    /// ADC units per physical unit.
    pub gain: f64,
    /// ADC value of a zero physical reading.
    pub base: i64,
}

fn header_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Header {
        line,
        msg: msg.into(),
    }
}

fn positive(tok: &str, what: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| header_err(line, format!("{what} '{tok}' is not a number")))?;
    if !(v.is_finite() && v > 0.0) {
        let hint = if what == "gain" && v == 0.0 {
            " (zero gain means the signal is not calibrated)"
        } else {
            ""
        };
        return Err(header_err(line, format!("{what} must be > 0, got {tok}{hint}")));
    }
    Ok(v)
}

pub fn parse_header(text: &str) -> Result<EcgHeader> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, record_line) = lines.next().ok_or_else(|| header_err(0, "empty header"))?;
    let toks: Vec<&str> = record_line.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(header_err(
            ln,
            format!("record line needs '<name> <n_signals> <fs>', found {} fields", toks.len()),
        ));
    }
    let record = toks[0].to_string();
    let n_signals: usize = toks[1]
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| header_err(ln, format!("n_signals '{}' is not a positive integer", toks[1])))?;
    let fs = positive(toks[2], "sampling frequency", ln)?;

    let mut first: Option<(f64, i64)> = None;
    for _ in 0..n_signals {
        let (ln, sig) = lines
            .next()
            .ok_or_else(|| header_err(ln, format!("expected {n_signals} signal line(s)")))?;
        let toks: Vec<&str> = sig.split_whitespace().collect();
        if toks.len() < 4 {
            return Err(header_err(
                ln,
                "signal line needs '<file> <fmt> <gain> ... base=<int>'",
            ));
        }
        let gain = positive(toks[2], "gain", ln)?;
        let last = toks[toks.len() - 1];
        let base = last
            .strip_prefix("base=")
            .ok_or_else(|| header_err(ln, format!("last field must be base=<int>, found '{last}'")))?
            .parse::<i64>()
            .map_err(|_| header_err(ln, format!("base in '{last}' is not an integer")))?;
        first.get_or_insert((gain, base));
    }
    if let Some((ln, extra)) = lines.next() {
        return Err(header_err(ln, format!("unexpected line '{extra}'")));
    }
    let (gain, base) = first.expect("n_signals >= 1");
    Ok(EcgHeader {
        record,
        fs,
        gain,
        base,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcgSignal {
    pub samples: Vec<f64>,
    pub fs: f64,
    pub calibrated: bool,
}

/// `(raw - base) / gain` per sample.
pub fn calibrate(raw: &[f64], header: &EcgHeader) -> Result<EcgSignal> {
    if raw.is_empty() {
        return Err(Error::EmptyData);
    }
    let base = header.base as f64;
    Ok(EcgSignal {
        samples: raw.iter().map(|&v| (v - base) / header.gain).collect(),
        fs: header.fs,
        calibrated: true,
    })
}

/// Minimum signal length accepted by [`remove_baseline_wander`] at `fs`.
pub fn min_filter_length(fs: f64, cutoff: f64) -> Result<usize> {
    Ok(MIN_SETTLING_MULTIPLE * Biquad::highpass(fs, cutoff)?.settling_samples())
}

/// Zero-phase second-order high-pass at [`BASELINE_CUTOFF_HZ`].
pub fn remove_baseline_wander(sig: &EcgSignal) -> Result<EcgSignal> {
    remove_baseline_wander_at(sig, BASELINE_CUTOFF_HZ)
}

pub fn remove_baseline_wander_at(sig: &EcgSignal, cutoff: f64) -> Result<EcgSignal> {
    let filter = Biquad::highpass(sig.fs, cutoff)?;
    let settle = filter.settling_samples();
    let min = MIN_SETTLING_MULTIPLE * settle;
    if sig.samples.len() < min {
        return Err(Error::SignalTooShort {
            len: sig.samples.len(),
            min,
        });
    }
    Ok(EcgSignal {
        samples: filter.filtfilt(&sig.samples, settle),
        fs: sig.fs,
        calibrated: sig.calibrated,
    })
}

/// A window of `pre + post + 1` samples centred on an annotated onset.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub id: usize,
    /// Onset index in the source signal.
    pub onset_index: usize,
    pub samples: Vec<f64>,
    /// Position of the onset within `samples`; always `pre`.
    pub onset_offset: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Segmentation {
    pub events: Vec<Event>,
    /// Onsets without enough context on one side.
    pub skipped: Vec<usize>,
}

/// Cuts `samples[onset - pre ..= onset + post]` for each onset. Onsets that
/// would need padding are skipped and reported. Event ids count only the
/// events that were kept.
pub fn segment_events(
    sig: &EcgSignal,
    onsets: &[usize],
    pre: usize,
    post: usize,
) -> Result<Segmentation> {
    if let Some(i) = onsets.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::UnsortedOnsets(i + 1));
    }
    let n = sig.samples.len();
    let mut out = Segmentation::default();
    for &m in onsets {
        if m < pre || m + post >= n {
            out.skipped.push(m);
            continue;
        }
        out.events.push(Event {
            id: out.events.len(),
            onset_index: m,
            samples: sig.samples[m - pre..=m + post].to_vec(),
            onset_offset: pre,
        });
    }
    if !out.skipped.is_empty() {
        info!(
            "skipped {} onset(s) without {pre}/{post} samples of context: {:?}",
            out.skipped.len(),
            out.skipped
        );
    }
    Ok(out)
}

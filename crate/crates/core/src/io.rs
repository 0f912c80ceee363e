//! Plain-text file formats. Every writer goes through [`write_atomic`], every
//! reader reports malformed rows with their 1-based line number. LF and CRLF
//! line endings are both accepted; floats are written in shortest round-trip
//! form, so write/read cycles are lossless.
//!
//! | file      | layout                                                       |
//! |-----------|--------------------------------------------------------------|
//! | signal    | one sample per line                                          |
//! | onsets    | one sample index per line, ascending                         |
//! | events    | header `event_id,onset_index,i,value`, one row per sample    |
//! | peaks     | header `event_id,t_sample,amplitude`                         |
//! | labels    | header `label`, then `0` or `1` per peak row                 |
//! | hull      | `# c_k=.. p_fa=.. n=.. h=.. kernel=..`, header `x,y`, vertices |
//! | transform | `key = value` lines: `fs`, `mode`, `center_t`, `center_r`, `scale_t`, `scale_r` |
//!
//! Lines starting with `#` are comments in the signal, onsets and hull files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use tempfile::NamedTempFile;

use crate::ecg::Event;
use crate::error::{Error, Result};
use crate::eval::PeakRecord;
use crate::geometry::Point;
use crate::qrs::PeakTransform;

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut File>) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Non-empty, non-comment lines with their line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, tok: &str, what: &str) -> Result<T> {
    tok.trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("{what} '{}' is not valid", tok.trim())))
}

fn finite(path: &Path, line: usize, tok: &str, what: &str) -> Result<f64> {
    let v: f64 = field(path, line, tok, what)?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("{what} is not finite")));
    }
    Ok(v)
}

/// Splits a CSV body after checking the header; yields `(line, fields)`.
fn csv_rows<'a>(
    path: &'a Path,
    text: &'a str,
    header: &'a str,
) -> Result<impl Iterator<Item = Result<(usize, Vec<&'a str>)>> + 'a> {
    let mut lines = data_lines(text);
    match lines.next() {
        Some((_, h)) if h == header => {}
        Some((ln, h)) => {
            return Err(parse_err(path, ln, format!("expected header '{header}', found '{h}'")))
        }
        None => return Err(parse_err(path, 1, format!("missing header '{header}'"))),
    }
    let width = header.split(',').count();
    Ok(lines.map(move |(ln, l)| {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != width {
            return Err(parse_err(
                path,
                ln,
                format!("expected {width} fields, found {}", f.len()),
            ));
        }
        Ok((ln, f))
    }))
}

pub fn read_signal(path: &Path) -> Result<Vec<f64>> {
    let text = read_text(path)?;
    let out = data_lines(&text)
        .map(|(ln, l)| finite(path, ln, l, "sample"))
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(parse_err(path, 1, "no samples"));
    }
    Ok(out)
}

pub fn write_signal(path: &Path, samples: &[f64]) -> Result<()> {
    write_atomic(path, |w| {
        for s in samples {
            writeln!(w, "{s}")?;
        }
        Ok(())
    })
}

pub fn read_onsets(path: &Path) -> Result<Vec<usize>> {
    let text = read_text(path)?;
    data_lines(&text)
        .map(|(ln, l)| field(path, ln, l, "onset index"))
        .collect()
}

const EVENTS_HEADER: &str = "event_id,onset_index,i,value";

pub fn write_events(path: &Path, events: &[Event]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{EVENTS_HEADER}")?;
        for ev in events {
            for (i, v) in ev.samples.iter().enumerate() {
                writeln!(w, "{},{},{},{}", ev.id, ev.onset_index, i, v)?;
            }
        }
        Ok(())
    })
}

/// Reads events written by [`write_events`]; `pre` is the onset offset of every event.
pub fn read_events(path: &Path, pre: usize) -> Result<Vec<Event>> {
    let text = read_text(path)?;
    let mut events: Vec<Event> = Vec::new();
    for row in csv_rows(path, &text, EVENTS_HEADER)? {
        let (ln, f) = row?;
        let id: usize = field(path, ln, f[0], "event_id")?;
        let onset: usize = field(path, ln, f[1], "onset_index")?;
        let i: usize = field(path, ln, f[2], "i")?;
        let v = finite(path, ln, f[3], "value")?;
        match events.last_mut() {
            Some(ev) if ev.id == id => {
                if i != ev.samples.len() || onset != ev.onset_index {
                    return Err(parse_err(path, ln, "event rows out of order"));
                }
                ev.samples.push(v);
            }
            _ => {
                if i != 0 {
                    return Err(parse_err(path, ln, "event must start at i = 0"));
                }
                events.push(Event {
                    id,
                    onset_index: onset,
                    samples: vec![v],
                    onset_offset: pre,
                });
            }
        }
    }
    Ok(events)
}

const PEAKS_HEADER: &str = "event_id,t_sample,amplitude";

pub fn write_peaks(path: &Path, peaks: &[PeakRecord]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{PEAKS_HEADER}")?;
        for p in peaks {
            writeln!(w, "{},{},{}", p.event_id, p.t_sample, p.amplitude)?;
        }
        Ok(())
    })
}

pub fn read_peaks(path: &Path) -> Result<Vec<PeakRecord>> {
    let text = read_text(path)?;
    let peaks = csv_rows(path, &text, PEAKS_HEADER)?
        .map(|row| {
            let (ln, f) = row?;
            Ok(PeakRecord {
                event_id: field(path, ln, f[0], "event_id")?,
                t_sample: finite(path, ln, f[1], "t_sample")?,
                amplitude: finite(path, ln, f[2], "amplitude")?,
            })
        })
        .collect();
    peaks
}

pub fn write_labels(path: &Path, labels: &[bool]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "label")?;
        for &l in labels {
            writeln!(w, "{}", u8::from(l))?;
        }
        Ok(())
    })
}

pub fn read_labels(path: &Path) -> Result<Vec<bool>> {
    let text = read_text(path)?;
    let labels = csv_rows(path, &text, "label")?
        .map(|row| {
            let (ln, f) = row?;
            match f[0].trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(parse_err(path, ln, format!("label '{other}' must be 0 or 1"))),
            }
        })
        .collect();
    labels
}

/// Hull vertices and the metadata line of a hull file.
#[derive(Debug, Clone, PartialEq)]
pub struct HullFile {
    /// `key=value` pairs from the metadata comment, in file order.
    pub meta: Vec<(String, String)>,
    pub vertices: Vec<Point>,
}

impl HullFile {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn read_hull(path: &Path) -> Result<HullFile> {
    let text = read_text(path)?;
    let meta = text
        .lines()
        .map(str::trim)
        .find(|l| l.starts_with('#'))
        .map(|l| {
            l.trim_start_matches('#')
                .split_whitespace()
                .filter_map(|kv| kv.split_once('='))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect()
        })
        .unwrap_or_default();
    let vertices = csv_rows(path, &text, "x,y")?
        .map(|row| {
            let (ln, f) = row?;
            Ok([finite(path, ln, f[0], "x")?, finite(path, ln, f[1], "y")?])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HullFile { meta, vertices })
}

pub fn write_transform(path: &Path, tf: &PeakTransform) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "fs = {}", tf.fs)?;
        writeln!(w, "mode = {}", tf.mode)?;
        writeln!(w, "center_t = {}", tf.center[0])?;
        writeln!(w, "center_r = {}", tf.center[1])?;
        writeln!(w, "scale_t = {}", tf.scale[0])?;
        writeln!(w, "scale_r = {}", tf.scale[1])
    })
}

pub fn read_transform(path: &Path) -> Result<PeakTransform> {
    let text = read_text(path)?;
    let mut vals: [Option<f64>; 5] = [None; 5];
    let mut mode = None;
    for (ln, l) in data_lines(&text) {
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| parse_err(path, ln, "expected 'key = value'"))?;
        let (k, v) = (k.trim(), v.trim());
        let slot = match k {
            "mode" => {
                mode = Some(v.parse().map_err(|e: Error| parse_err(path, ln, e.to_string()))?);
                continue;
            }
            "fs" => 0,
            "center_t" => 1,
            "center_r" => 2,
            "scale_t" => 3,
            "scale_r" => 4,
            _ => return Err(parse_err(path, ln, format!("unknown key '{k}'"))),
        };
        vals[slot] = Some(finite(path, ln, v, k)?);
    }
    let missing = || parse_err(path, 0, "transform file is incomplete");
    let get = |i: usize| vals[i].ok_or_else(missing);
    let tf = PeakTransform {
        fs: get(0)?,
        mode: mode.ok_or_else(missing)?,
        center: [get(1)?, get(2)?],
        scale: [get(3)?, get(4)?],
    };
    if !(tf.fs > 0.0 && tf.scale[0] > 0.0 && tf.scale[1] > 0.0) {
        return Err(parse_err(path, 0, "fs and scales must be > 0"));
    }
    Ok(tf)
}

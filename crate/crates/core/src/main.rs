use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use bradyset::bandwidth::{select_bandwidth, BandwidthGrid};
use bradyset::config::Config;
use bradyset::conformal::{build_prediction_set, compute_threshold, format_bandwidth};
use bradyset::density::{densities_at_samples, kde_grid, Bandwidth, SampleQD};
use bradyset::ecg::{calibrate, parse_header, remove_baseline_wander_at, segment_events, EcgSignal};
use bradyset::eval::{
    compute_metrics, fit_model, monte_carlo, ConfusionMatrix, Labeling, PeakRecord, SplitSpec,
    SplitSummary,
};
use bradyset::geometry::{point_in_hull, Point};
use bradyset::io;
use bradyset::kernels::KernelKind;
use bradyset::qrs::{detect_r_peaks, Normalization, PeakTransform};
use bradyset::synth::{generate_synthetic, SyntheticSpec};
use bradyset::{Error, Result};

#[derive(Parser)]
#[command(name = "bradyset", version, about = "Conformal KDE prediction sets for bradycardia onset")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

/// Options shared by all subcommands; they override the config file.
#[derive(Args)]
struct Common {
    /// `key = value` config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// gaussian | epanechnikov | uniform | cosine
    #[arg(long, global = true)]
    kernel: Option<KernelKind>,

    #[arg(long, global = true)]
    p_fa: Option<f64>,

    /// Density grid nodes per axis
    #[arg(long, global = true)]
    grid_size: Option<usize>,

    #[arg(long, global = true)]
    h_min: Option<f64>,

    #[arg(long, global = true)]
    h_max: Option<f64>,

    #[arg(long, global = true)]
    h_steps: Option<usize>,

    /// Sampling rate in Hz
    #[arg(long, global = true)]
    fs: Option<f64>,

    /// zscore | minmax
    #[arg(long, global = true)]
    normalization: Option<Normalization>,

    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Convert raw ADC samples to physical units and remove baseline wander
    Calibrate {
        #[arg(long)]
        header: PathBuf,
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Skip the baseline-wander high-pass filter
        #[arg(long)]
        no_filter: bool,
    },
    /// Cut fixed windows around annotated onsets
    Segment {
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        onsets: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        pre: Option<usize>,
        #[arg(long)]
        post: Option<usize>,
    },
    /// Detect R-peaks in every event
    DetectPeaks {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        pre: Option<usize>,
    },
    /// Cross-validate the bandwidth on a peak file and print it
    SelectBandwidth {
        #[arg(long)]
        peaks: PathBuf,
        /// Write the cross-validation curve as CSV
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Use the peak coordinates as they are
        #[arg(long)]
        no_normalize: bool,
    },
    /// Fit the prediction set from training and validation peaks
    BuildSet {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        val: PathBuf,
        #[arg(long)]
        hull: PathBuf,
        #[arg(long)]
        transform: PathBuf,
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Classify peaks against a prediction set
    TestPoints {
        #[arg(long)]
        hull: PathBuf,
        #[arg(long)]
        transform: PathBuf,
        #[arg(long)]
        peaks: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth labels; prints the confusion matrix and metrics
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Monte Carlo evaluation over split specifications
    Evaluate {
        #[arg(long)]
        peaks: PathBuf,
        /// Ground-truth labels; without them peaks are labeled by the onset window
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// `train,val,test`; repeat for several splits
        #[arg(long)]
        splits: Vec<SplitSpec>,
        #[arg(long)]
        trials: Option<usize>,
        /// Onset position within events (samples)
        #[arg(long)]
        pre: Option<usize>,
    },
    /// Generate a labeled synthetic peak file
    Synth {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 25)]
        anomalies: usize,
        /// Anomaly distance in mixture standard deviations
        #[arg(long, default_value_t = 6.0)]
        displacement: f64,
        #[arg(long, default_value = "synth_peaks.csv")]
        out: PathBuf,
        #[arg(long, default_value = "synth_labels.csv")]
        labels: PathBuf,
    },
    /// Write the density grid and hull of a peak file for plotting
    ExportGrid {
        #[arg(long)]
        peaks: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        hull: PathBuf,
        /// Fixed bandwidth instead of cross-validation
        #[arg(long)]
        h: Option<f64>,
    },
}

fn load_config(c: &Common) -> Result<Config> {
    let mut cfg = match &c.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(k) = c.kernel {
        cfg.kernel = k;
    }
    if let Some(v) = c.p_fa {
        cfg.p_fa = v;
    }
    if let Some(v) = c.grid_size {
        cfg.grid_size = v;
    }
    if let Some(v) = c.h_steps {
        cfg.h_steps = v;
    }
    if let Some(v) = c.fs {
        cfg.fs = v;
    }
    if let Some(v) = c.normalization {
        cfg.normalization = v;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    match (c.h_min, c.h_max) {
        (None, None) => {}
        (Some(a), Some(b)) => cfg.h_range = Some((a, b)),
        _ => {
            return Err(Error::InvalidArgument(
                "--h-min and --h-max must be given together".into(),
            ))
        }
    }
    if cfg.grid_size == 0 || cfg.h_steps == 0 {
        return Err(Error::InvalidArgument("grid sizes must be >= 1".into()));
    }
    cfg.validate().map_err(Error::InvalidArgument)?;
    Ok(cfg)
}

fn raw_pairs(peaks: &[PeakRecord]) -> Vec<(f64, f64)> {
    peaks.iter().map(|p| (p.t_sample, p.amplitude)).collect()
}

fn project(peaks: &[PeakRecord], tf: &PeakTransform) -> Vec<Point> {
    peaks.iter().map(|p| tf.apply(p.t_sample, p.amplitude)).collect()
}

fn grid_for(cfg: &Config, data: &SampleQD) -> Result<BandwidthGrid> {
    match cfg.bandwidth_grid()? {
        Some(g) => Ok(g),
        None => {
            let r = (0..data.dim())
                .map(|a| {
                    let (lo, hi) = data.axis_range(a);
                    hi - lo
                })
                .fold(0.0, f64::max);
            BandwidthGrid::default_for_range(r)
        }
    }
}

fn write_summary(path: &Path, summaries: &[SplitSummary]) -> Result<()> {
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
    io::write_atomic(path, |w| {
        writeln!(
            w,
            "split,trials,mean_epe,tp,fp,fn,tn,sensitivity,precision,fdr,for,accuracy,f1"
        )?;
        for s in summaries {
            let cm = s.pooled();
            let m = compute_metrics(&cm);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.spec.to_string().replace(',', "/"),
                s.trials.len(),
                s.mean_epe,
                cm.tp,
                cm.fp,
                cm.fn_,
                cm.tn,
                opt(m.sensitivity),
                opt(m.precision),
                opt(m.fdr),
                opt(m.for_rate),
                opt(m.accuracy),
                opt(m.f1)
            )?;
        }
        Ok(())
    })
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli.common)?;
    match cli.command {
        Command::Calibrate {
            header,
            signal,
            out,
            no_filter,
        } => {
            let text = fs::read_to_string(&header).map_err(|e| Error::Io {
                path: header.clone(),
                source: e,
            })?;
            let h = parse_header(&text)?;
            let raw = io::read_signal(&signal)?;
            let mut sig: EcgSignal = calibrate(&raw, &h)?;
            if !no_filter {
                sig = remove_baseline_wander_at(&sig, cfg.hp_cutoff)?;
            }
            io::write_signal(&out, &sig.samples)?;
            println!("record={} fs={} samples={}", h.record, h.fs, sig.samples.len());
        }
        Command::Segment {
            signal,
            onsets,
            out,
            pre,
            post,
        } => {
            let samples = io::read_signal(&signal)?;
            let onsets = io::read_onsets(&onsets)?;
            let sig = EcgSignal {
                samples,
                fs: cfg.fs,
                calibrated: true,
            };
            let seg = segment_events(&sig, &onsets, pre.unwrap_or(cfg.pre), post.unwrap_or(cfg.post))?;
            io::write_events(&out, &seg.events)?;
            println!("events={} skipped={}", seg.events.len(), seg.skipped.len());
        }
        Command::DetectPeaks { events, out, pre } => {
            let events = io::read_events(&events, pre.unwrap_or(cfg.pre))?;
            let mut records = Vec::new();
            for ev in &events {
                for p in detect_r_peaks(ev, cfg.fs, &cfg.pan_tompkins)? {
                    records.push(PeakRecord {
                        event_id: ev.id,
                        t_sample: p.t as f64,
                        amplitude: p.r,
                    });
                }
            }
            io::write_peaks(&out, &records)?;
            println!("events={} peaks={}", events.len(), records.len());
        }
        Command::SelectBandwidth {
            peaks,
            curve,
            no_normalize,
        } => {
            let peaks = io::read_peaks(&peaks)?;
            let pts: Vec<Point> = if no_normalize {
                peaks.iter().map(|p| [p.t_sample, p.amplitude]).collect()
            } else {
                let tf = PeakTransform::fit(&raw_pairs(&peaks), cfg.fs, cfg.normalization)?;
                project(&peaks, &tf)
            };
            let data = SampleQD::from_points(&pts)?;
            let (h, cv) = select_bandwidth(&data, cfg.kernel, &grid_for(&cfg, &data)?)?;
            if let Some(path) = curve {
                io::write_atomic(&path, |w| cv.write_csv(w))?;
            }
            println!("h_cv={}", format_bandwidth(&h));
        }
        Command::BuildSet {
            train,
            val,
            hull,
            transform,
            grid,
        } => {
            let train = io::read_peaks(&train)?;
            let val = io::read_peaks(&val)?;
            let tf = PeakTransform::fit(&raw_pairs(&train), cfg.fs, cfg.normalization)?;
            let tcfg = cfg.trial_config()?;
            let model = fit_model(&project(&train, &tf), &project(&val, &tf), &tcfg)?;
            io::write_atomic(&hull, |w| model.set.write_hull_csv(w))?;
            io::write_transform(&transform, &tf)?;
            if let Some(g) = grid {
                let data = SampleQD::from_points(&project(&train, &tf))?;
                let dg = kde_grid(&data, cfg.kernel, &model.h, cfg.grid_size, tcfg.margin_factor)?;
                io::write_atomic(&g, |w| dg.write_csv(w))?;
            }
            println!(
                "h={} c_k={} k={} hull_vertices={}",
                format_bandwidth(&model.h),
                model.threshold.c_k,
                model.threshold.k,
                model.set.hull.len()
            );
        }
        Command::TestPoints {
            hull,
            transform,
            peaks,
            out,
            labels,
        } => {
            let hull = io::read_hull(&hull)?;
            let tf = io::read_transform(&transform)?;
            let peaks = io::read_peaks(&peaks)?;
            let flags: Vec<bool> = project(&peaks, &tf)
                .into_iter()
                .map(|p| !point_in_hull(&hull.vertices, p))
                .collect();
            io::write_atomic(&out, |w| {
                writeln!(w, "event_id,t_sample,amplitude,onset")?;
                for (p, &f) in peaks.iter().zip(&flags) {
                    writeln!(w, "{},{},{},{}", p.event_id, p.t_sample, p.amplitude, u8::from(f))?;
                }
                Ok(())
            })?;
            let flagged = flags.iter().filter(|&&f| f).count();
            println!("tested={} flagged={flagged}", flags.len());
            if let Some(l) = labels {
                let truth = io::read_labels(&l)?;
                if truth.len() != flags.len() {
                    return Err(Error::DimensionMismatch {
                        expected: flags.len(),
                        got: truth.len(),
                    });
                }
                let mut cm = ConfusionMatrix::default();
                for (&f, &t) in flags.iter().zip(&truth) {
                    cm.record(f, t);
                }
                println!("{cm:?}");
                println!("{:?}", compute_metrics(&cm));
            }
        }
        Command::Evaluate {
            peaks,
            labels,
            out_dir,
            splits,
            trials,
            pre,
        } => {
            let records = io::read_peaks(&peaks)?;
            let labeling = match labels {
                Some(l) => Labeling::Truth(io::read_labels(&l)?),
                None => Labeling::OnsetWindow {
                    onset_offset: pre.unwrap_or(cfg.pre) as f64,
                },
            };
            if !splits.is_empty() {
                cfg.splits = splits;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            let tcfg = cfg.trial_config()?;
            let summaries = monte_carlo(&records, &labeling, &cfg.splits, cfg.trials, cfg.seed, &tcfg)?;
            fs::create_dir_all(&out_dir).map_err(|e| Error::Io {
                path: out_dir.clone(),
                source: e,
            })?;
            for s in &summaries {
                let name = format!(
                    "trials_{}_{}_{}.csv",
                    s.spec.train_frac, s.spec.val_frac, s.spec.test_frac
                );
                io::write_atomic(&out_dir.join(name), |w| s.write_trials_csv(w))?;
                println!("split {} mean_epe={}", s.spec, s.mean_epe);
            }
            write_summary(&out_dir.join("summary.csv"), &summaries)?;
        }
        Command::Synth {
            n,
            anomalies,
            displacement,
            out,
            labels,
        } => {
            let spec = SyntheticSpec {
                n_points: n,
                n_anomalies: anomalies,
                displacement,
                ..SyntheticSpec::default()
            };
            let data = generate_synthetic(&spec, cfg.seed)?;
            io::write_peaks(&out, &data.records)?;
            io::write_labels(&labels, &data.labels)?;
            info!("wrote {} records", data.records.len());
        }
        Command::ExportGrid {
            peaks,
            grid,
            hull,
            h,
        } => {
            let peaks = io::read_peaks(&peaks)?;
            let tf = PeakTransform::fit(&raw_pairs(&peaks), cfg.fs, cfg.normalization)?;
            let data = SampleQD::from_points(&project(&peaks, &tf))?;
            let bw = match h {
                Some(v) => Bandwidth::isotropic(v, 2)?,
                None => select_bandwidth(&data, cfg.kernel, &grid_for(&cfg, &data)?)?.0,
            };
            let ys = densities_at_samples(&data, cfg.kernel, &bw)?;
            let th = compute_threshold(&ys, cfg.p_fa, cfg.kernel, &bw)?;
            let dg = kde_grid(&data, cfg.kernel, &bw, cfg.grid_size, cfg.margin)?;
            let set = build_prediction_set(&dg, th.c_k, cfg.p_fa, data.len());
            io::write_atomic(&grid, |w| dg.write_csv(w))?;
            io::write_atomic(&hull, |w| set.write_hull_csv(w))?;
            println!("h={} c_k={}", format_bandwidth(&bw), th.c_k);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

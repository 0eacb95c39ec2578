//! Monte Carlo threshold calibration, detection-rate sweeps, ROC curves and
//! the segment-similarity experiment.
//!
//! Thresholds are set empirically: score `trials` noise-only realizations and
//! take the `(1 - target_pf)` quantile. Sweeps then measure the detection
//! rate on signal-plus-noise trials and re-measure the false alarm rate on a
//! held-out noise stream, so the reported `pf` is honest about calibration
//! error.
//!
//! Every trial derives its own seed from the base seed, the purpose stream
//! and the SNR being processed, so reports are bitwise identical no matter
//! how many worker threads run the trials.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::detectors::{train_detector, train_kpca, train_pca, DetectorSpec, TrainedDetector};
use crate::framing::{
    frame_signal, generate_ar1, generate_gaussian_noise, generate_sinusoid_mix, load_samples,
    mix_at_snr, FrameSet, SampleFormat, SampleStream, SnrSpec,
};
use crate::rng::derive_seed;
use crate::{Error, Result};

// Disjoint seed streams.
const PURPOSE_SIGNAL: u64 = 1;
const PURPOSE_CALIBRATE: u64 = 2;
const PURPOSE_HOLDOUT: u64 = 3;
const PURPOSE_H1: u64 = 4;
const PURPOSE_ROC_H0: u64 = 5;
const PURPOSE_ROC_H1: u64 = 6;

/// Where the clean training signal comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    /// Sum of unit-amplitude sinusoids (frequencies in cycles/sample).
    SinusoidMix { freqs: Vec<f64>, phases: Vec<f64> },
    /// First-order autoregressive surrogate, normalized to unit power.
    Ar1 { coeff: f64 },
    /// Samples loaded from disk; the first `length` samples are used.
    File { path: PathBuf, format: SampleFormat },
}

impl SignalSpec {
    /// Three incommensurate tones, zero phases.
    pub fn default_sinusoid() -> Self {
        SignalSpec::SinusoidMix {
            freqs: vec![0.1, 0.2, 0.3],
            phases: vec![0.0, 0.0, 0.0],
        }
    }
}

/// Everything one experiment needs: the detector, the signal source, framing
/// geometry, the SNR grid and the Monte Carlo budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub detector: DetectorSpec,
    pub signal: SignalSpec,
    /// Frame dimension d.
    pub frame_dim: usize,
    /// Framing stride.
    pub stride: usize,
    /// Clean-signal length L; every trial stream has this length.
    pub length: usize,
    pub snr_grid_db: Vec<f64>,
    /// Trials per phase (calibration, held-out H0, H1) per SNR.
    pub trials: usize,
    /// Target false alarm rate in (0, 1).
    pub target_pf: f64,
    pub base_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        match &self.signal {
            SignalSpec::SinusoidMix { freqs, phases } => {
                if freqs.is_empty() {
                    return Err(Error::EmptyInput("frequency list"));
                }
                if freqs.len() != phases.len() {
                    return Err(Error::DimensionMismatch(freqs.len(), phases.len()));
                }
                if freqs.iter().chain(phases).any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("signal parameters"));
                }
            }
            SignalSpec::Ar1 { coeff } => {
                if !(coeff.is_finite() && coeff.abs() < 1.0) {
                    return Err(Error::InvalidParameter {
                        name: "coeff",
                        reason: "must satisfy |coeff| < 1",
                    });
                }
            }
            SignalSpec::File { .. } => {}
        }
        if self.frame_dim == 0 {
            return Err(Error::InvalidParameter {
                name: "frame_dim",
                reason: "must be positive",
            });
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter {
                name: "stride",
                reason: "must be positive",
            });
        }
        if self.length < self.frame_dim {
            return Err(Error::StreamTooShort {
                len: self.length,
                need: self.frame_dim,
            });
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::EmptyInput("snr grid"));
        }
        if self.snr_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("snr grid"));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                reason: "must be positive",
            });
        }
        if !(self.target_pf.is_finite() && 0.0 < self.target_pf && self.target_pf < 1.0) {
            return Err(Error::InvalidParameter {
                name: "target_pf",
                reason: "must lie strictly between 0 and 1",
            });
        }
        Ok(())
    }

    /// The clean signal this experiment trains on and embeds in noise.
    pub fn clean_signal(&self) -> Result<SampleStream> {
        match &self.signal {
            SignalSpec::SinusoidMix { freqs, phases } => {
                generate_sinusoid_mix(freqs, phases, self.length)
            }
            SignalSpec::Ar1 { coeff } => generate_ar1(
                self.length,
                *coeff,
                derive_seed(self.base_seed, PURPOSE_SIGNAL, 0, 0),
            ),
            SignalSpec::File { path, format } => {
                let stream = load_samples(path, *format)?;
                stream.truncated(self.length)
            }
        }
    }
}

/// One calibrated SNR point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub threshold: f64,
    pub pd: f64,
    pub pf: f64,
}

/// Per-SNR detection and false-alarm statistics with calibrated thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub detector: String,
    pub trials: usize,
    /// Rows sorted by SNR ascending.
    pub rows: Vec<SweepRow>,
}

impl TrialReport {
    /// CSV with header `snr_db,threshold,pd,pf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("snr_db,threshold,pd,pf\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.snr_db, r.threshold, r.pd, r.pf));
        }
        out
    }
}

/// ROC curve at one SNR: `(pf, pd)` points with `pf` nondecreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    /// CSV with header `pf,pd`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pf,pd\n");
        for (pf, pd) in &self.points {
            out.push_str(&format!("{pf},{pd}\n"));
        }
        out
    }

    /// Area under the curve by the trapezoid rule.
    pub fn area(&self) -> f64 {
        let mut auc = 0.0;
        for w in self.points.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            auc += (x1 - x0) * (y0 + y1) * 0.5;
        }
        auc
    }
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("worker pool")
        .install(f)
}

/// Empirical `(1 - target_pf)` quantile of the score sample, with linear
/// interpolation between order statistics. Errors out when every score is
/// identical (a constant detector cannot be calibrated).
fn threshold_from_scores(scores: &[f64], target_pf: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("score sample"));
    }
    if scores.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::DegenerateScores(scores.len()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    let n = sorted.len();
    let h = (n - 1) as f64 * (1.0 - target_pf);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
    } else {
        Ok(sorted[n - 1])
    }
}

fn fraction_above(scores: &[f64], threshold: f64) -> f64 {
    scores.iter().filter(|&&s| s > threshold).count() as f64 / scores.len() as f64
}

/// Scores `trials` noise-only realizations on one seed stream.
fn h0_scores(
    config: &ExperimentConfig,
    det: &TrainedDetector,
    noise_var: f64,
    purpose: u64,
    context: u64,
) -> Result<Vec<f64>> {
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(config.base_seed, purpose, context, t as u64);
            let noise = generate_gaussian_noise(config.length, noise_var, seed)?;
            det.score(&frame_signal(&noise, config.frame_dim, config.stride)?)
        })
        .collect()
}

/// Scores `trials` signal-plus-noise realizations; the clean signal is fixed,
/// the noise is fresh per trial.
fn h1_scores(
    config: &ExperimentConfig,
    det: &TrainedDetector,
    signal: &SampleStream,
    snr: &SnrSpec,
    purpose: u64,
    context: u64,
) -> Result<Vec<f64>> {
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(config.base_seed, purpose, context, t as u64);
            let received = mix_at_snr(signal, snr, seed)?;
            det.score(&frame_signal(&received, config.frame_dim, config.stride)?)
        })
        .collect()
}

/// Trains the configured detector; EC is retrained per SNR because its
/// weight matrix depends on the noise variance.
fn detector_for_snr(
    config: &ExperimentConfig,
    training: &FrameSet,
    base: &Option<TrainedDetector>,
    snr: &SnrSpec,
) -> Result<TrainedDetector> {
    match base {
        Some(det) => Ok(det.clone()),
        None => train_detector(&config.detector, training, Some(snr.noise_variance())),
    }
}

fn require_calibration_budget(config: &ExperimentConfig) -> Result<()> {
    if config.trials < 50 {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: "threshold calibration needs at least 50 trials",
        });
    }
    Ok(())
}

/// Calibrates the detection threshold at `snr_db`: the empirical
/// `(1 - target_pf)` quantile of `trials` noise-only scores.
pub fn calibrate_threshold(
    config: &ExperimentConfig,
    snr_db: f64,
    threads: usize,
) -> Result<f64> {
    config.validate()?;
    require_calibration_budget(config)?;
    with_pool(threads, || {
        let signal = config.clean_signal()?;
        let training = frame_signal(&signal, config.frame_dim, config.stride)?;
        let snr = SnrSpec::for_signal(snr_db, &signal)?;
        let det = train_detector(
            &config.detector,
            &training,
            Some(snr.noise_variance()),
        )?;
        let scores = h0_scores(
            config,
            &det,
            snr.noise_variance(),
            PURPOSE_CALIBRATE,
            snr_db.to_bits(),
        )?;
        threshold_from_scores(&scores, config.target_pf)
    })
}

/// Full sweep: for every SNR on the grid, calibrate the threshold on
/// noise-only trials, measure the detection rate on signal-plus-noise trials
/// and re-measure the false alarm rate on held-out noise trials.
pub fn run_sweep(config: &ExperimentConfig, threads: usize) -> Result<TrialReport> {
    config.validate()?;
    require_calibration_budget(config)?;
    with_pool(threads, || {
        let signal = config.clean_signal()?;
        let training = frame_signal(&signal, config.frame_dim, config.stride)?;
        let base = if config.detector.needs_noise_variance() {
            None
        } else {
            Some(train_detector(&config.detector, &training, None)?)
        };
        let mut grid = config.snr_grid_db.clone();
        grid.sort_by(|a, b| a.partial_cmp(b).expect("finite snr"));

        let mut rows = Vec::with_capacity(grid.len());
        for &snr_db in &grid {
            let snr = SnrSpec::for_signal(snr_db, &signal)?;
            let det = detector_for_snr(config, &training, &base, &snr)?;
            let ctx = snr_db.to_bits();
            let calib = h0_scores(config, &det, snr.noise_variance(), PURPOSE_CALIBRATE, ctx)?;
            let threshold = threshold_from_scores(&calib, config.target_pf)?;
            let holdout = h0_scores(config, &det, snr.noise_variance(), PURPOSE_HOLDOUT, ctx)?;
            let h1 = h1_scores(config, &det, &signal, &snr, PURPOSE_H1, ctx)?;
            rows.push(SweepRow {
                snr_db,
                threshold,
                pd: fraction_above(&h1, threshold),
                pf: fraction_above(&holdout, threshold),
            });
        }
        Ok(TrialReport {
            detector: config.detector.id().to_string(),
            trials: config.trials,
            rows,
        })
    })
}

/// ROC curve at one SNR: scores `trials` noise-only and `trials`
/// signal-plus-noise realizations once each, then sweeps the threshold over
/// the pooled score set.
///
/// The curve starts at `(0, 0)`, has one point per distinct pooled score
/// (descending), and ends at `(1, 1)`.
pub fn roc_curve(config: &ExperimentConfig, snr_db: f64, threads: usize) -> Result<RocCurve> {
    config.validate()?;
    with_pool(threads, || {
        let signal = config.clean_signal()?;
        let training = frame_signal(&signal, config.frame_dim, config.stride)?;
        let snr = SnrSpec::for_signal(snr_db, &signal)?;
        let det = train_detector(
            &config.detector,
            &training,
            Some(snr.noise_variance()),
        )?;
        let ctx = snr_db.to_bits();
        let h0 = h0_scores(config, &det, snr.noise_variance(), PURPOSE_ROC_H0, ctx)?;
        let h1 = h1_scores(config, &det, &signal, &snr, PURPOSE_ROC_H1, ctx)?;
        Ok(roc_from_scores(&h0, &h1))
    })
}

fn roc_from_scores(h0: &[f64], h1: &[f64]) -> RocCurve {
    let mut pooled: Vec<f64> = h0.iter().chain(h1).copied().collect();
    pooled.sort_by(|a, b| b.partial_cmp(a).expect("finite scores"));
    pooled.dedup();
    let mut points = Vec::with_capacity(pooled.len() + 2);
    points.push((0.0, 0.0));
    for &t in &pooled {
        points.push((fraction_above(h0, t), fraction_above(h1, t)));
    }
    points.push((1.0, 1.0));
    RocCurve { points }
}

/// Trains a template on segment 0 of the stream and returns the similarity
/// score of every subsequent full segment against it. Only the PCA and
/// kernel PCA detectors define a segment similarity.
pub fn segment_similarity(
    stream: &SampleStream,
    segment_len: usize,
    method: &DetectorSpec,
    frame_dim: usize,
    stride: usize,
    threads: usize,
) -> Result<Vec<f64>> {
    if segment_len == 0 {
        return Err(Error::InvalidParameter {
            name: "segment_len",
            reason: "must be positive",
        });
    }
    if stream.len() < 2 * segment_len {
        return Err(Error::StreamTooShort {
            len: stream.len(),
            need: 2 * segment_len,
        });
    }
    let segment = |i: usize| -> Result<FrameSet> {
        let slice = &stream.samples()[i * segment_len..(i + 1) * segment_len];
        frame_signal(&SampleStream::new(slice.to_vec())?, frame_dim, stride)
    };
    let training = segment(0)?;
    let det = match method {
        DetectorSpec::Pca => TrainedDetector::Pca(train_pca(&training)?),
        DetectorSpec::Kpca { kernel } => TrainedDetector::Kpca(train_kpca(kernel, &training)?),
        _ => {
            return Err(Error::InvalidParameter {
                name: "method",
                reason: "segment similarity supports the pca and kpca detectors",
            })
        }
    };
    let segments = stream.len() / segment_len;
    with_pool(threads, || {
        (1..segments)
            .into_par_iter()
            .map(|i| det.score(&segment(i)?))
            .collect()
    })
}

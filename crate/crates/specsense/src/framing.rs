//! Signal generation, noise injection at a target SNR, frame extraction, and
//! sample-stream file I/O.
//!
//! All generators are pure functions of their arguments including the seed,
//! so repeated calls are bitwise identical and safe to run concurrently.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::rng::Rng;
use crate::{Error, Result};

/// A finite stream of real-valued samples (dimensionless amplitude).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    samples: Vec<f64>,
}

impl SampleStream {
    /// Validates that the stream is non-empty and every sample is finite.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("sample stream"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample stream"));
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Mean-square power `(1/L) sum x(n)^2`.
    pub fn mean_square_power(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.len() as f64
    }

    /// The first `len` samples as a new stream.
    pub fn truncated(&self, len: usize) -> Result<SampleStream> {
        if len > self.len() {
            return Err(Error::StreamTooShort {
                len: self.len(),
                need: len,
            });
        }
        SampleStream::new(self.samples[..len].to_vec())
    }
}

/// A set of `d`-dimensional frames extracted from a stream at a fixed stride.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    // M frames of length d, stored flat row-major.
    data: Vec<f64>,
    dim: usize,
    stride: usize,
}

impl FrameSet {
    /// Builds a frame set directly from frame vectors; all frames must share
    /// one dimension and be finite.
    pub fn from_frames(frames: Vec<Vec<f64>>, stride: usize) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::EmptyInput("frame set"));
        }
        if stride == 0 {
            return Err(Error::InvalidParameter {
                name: "stride",
                reason: "must be positive",
            });
        }
        let dim = frames[0].len();
        if dim == 0 {
            return Err(Error::EmptyInput("frame dimension"));
        }
        let mut data = Vec::with_capacity(frames.len() * dim);
        for f in &frames {
            if f.len() != dim {
                return Err(Error::DimensionMismatch(f.len(), dim));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("frame"));
            }
            data.extend_from_slice(f);
        }
        Ok(Self { data, dim, stride })
    }

    /// Number of frames M.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // at least one frame by construction
    }

    /// Frame dimension d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Extraction stride.
    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn frame(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Target SNR paired with the signal power it refers to.
///
/// The convention throughout is `SNR(dB) = 10 log10(signal mean-square power
/// / noise variance)`, so the implied noise variance is
/// `signal_power / 10^(snr_db / 10)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSpec {
    pub snr_db: f64,
    pub signal_power: f64,
}

impl SnrSpec {
    pub fn new(snr_db: f64, signal_power: f64) -> Result<Self> {
        if !snr_db.is_finite() || !signal_power.is_finite() {
            return Err(Error::NonFinite("snr specification"));
        }
        if signal_power <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "signal_power",
                reason: "must be positive (zero-power signal has no defined SNR)",
            });
        }
        let spec = Self {
            snr_db,
            signal_power,
        };
        let var = spec.noise_variance();
        if !var.is_finite() || var <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "snr_db",
                reason: "implied noise variance is not finite and positive",
            });
        }
        Ok(spec)
    }

    /// SNR spec whose signal power is measured from `signal`.
    pub fn for_signal(snr_db: f64, signal: &SampleStream) -> Result<Self> {
        Self::new(snr_db, signal.mean_square_power())
    }

    /// Implied noise variance `signal_power / 10^(snr_db/10)`.
    pub fn noise_variance(&self) -> f64 {
        self.signal_power / 10f64.powf(self.snr_db / 10.0)
    }
}

/// Sum of sinusoids with unit amplitude each:
/// `x(n) = sum_j sin(2 pi f_j n + phi_j)`.
///
/// Frequencies are in cycles per sample and must lie strictly inside the
/// Nyquist band.
pub fn generate_sinusoid_mix(freqs: &[f64], phases: &[f64], length: usize) -> Result<SampleStream> {
    if freqs.is_empty() {
        return Err(Error::EmptyInput("frequency list"));
    }
    if freqs.len() != phases.len() {
        return Err(Error::DimensionMismatch(freqs.len(), phases.len()));
    }
    if length == 0 {
        return Err(Error::EmptyInput("stream length"));
    }
    for &f in freqs {
        if !f.is_finite() {
            return Err(Error::NonFinite("frequency"));
        }
        if f.abs() >= 0.5 {
            return Err(Error::InvalidParameter {
                name: "freq",
                reason: "must satisfy |freq| < 0.5 cycles/sample",
            });
        }
    }
    if phases.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("phase"));
    }
    let samples = (0..length)
        .map(|n| {
            freqs
                .iter()
                .zip(phases)
                .map(|(&f, &p)| (2.0 * PI * f * n as f64 + p).sin())
                .sum()
        })
        .collect();
    SampleStream::new(samples)
}

/// Zero-mean white Gaussian noise with the given variance; deterministic for
/// a fixed seed.
pub fn generate_gaussian_noise(length: usize, variance: f64, seed: u64) -> Result<SampleStream> {
    if length == 0 {
        return Err(Error::EmptyInput("stream length"));
    }
    if !variance.is_finite() || variance <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "variance",
            reason: "must be finite and positive",
        });
    }
    let sd = variance.sqrt();
    let mut rng = Rng::new(seed);
    let samples = (0..length).map(|_| sd * rng.next_gaussian()).collect();
    SampleStream::new(samples)
}

/// Signal plus white Gaussian noise at the variance implied by `snr`.
pub fn mix_at_snr(signal: &SampleStream, snr: &SnrSpec, seed: u64) -> Result<SampleStream> {
    let noise = generate_gaussian_noise(signal.len(), snr.noise_variance(), seed)?;
    let samples = signal
        .samples()
        .iter()
        .zip(noise.samples())
        .map(|(x, w)| x + w)
        .collect();
    SampleStream::new(samples)
}

/// Extracts `M = floor((L - d) / stride) + 1` frames; frame `j` starts at
/// sample `j * stride`.
pub fn frame_signal(stream: &SampleStream, d: usize, stride: usize) -> Result<FrameSet> {
    if d == 0 {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: "frame dimension must be positive",
        });
    }
    if stride == 0 {
        return Err(Error::InvalidParameter {
            name: "stride",
            reason: "must be positive",
        });
    }
    let len = stream.len();
    if len < d {
        return Err(Error::StreamTooShort { len, need: d });
    }
    let m = (len - d) / stride + 1;
    let mut data = Vec::with_capacity(m * d);
    for j in 0..m {
        let start = j * stride;
        data.extend_from_slice(&stream.samples()[start..start + d]);
    }
    Ok(FrameSet {
        data,
        dim: d,
        stride,
    })
}

/// First-order autoregressive surrogate for a correlated wide-sense
/// stationary signal: `s(n) = coeff * s(n-1) + e(n)` with unit-variance
/// Gaussian innovations and `s(-1) = 0`, normalized to unit mean-square
/// power.
pub fn generate_ar1(length: usize, coeff: f64, seed: u64) -> Result<SampleStream> {
    if length == 0 {
        return Err(Error::EmptyInput("stream length"));
    }
    if !coeff.is_finite() || coeff.abs() >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "coeff",
            reason: "must satisfy |coeff| < 1",
        });
    }
    let mut rng = Rng::new(seed);
    let mut samples = Vec::with_capacity(length);
    let mut prev = 0.0;
    for _ in 0..length {
        prev = coeff * prev + rng.next_gaussian();
        samples.push(prev);
    }
    let power = samples.iter().map(|v| v * v).sum::<f64>() / length as f64;
    let scale = 1.0 / power.sqrt();
    for v in &mut samples {
        *v *= scale;
    }
    SampleStream::new(samples)
}

/// On-disk encodings for sample streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    /// One decimal real per line, `\n`-terminated.
    Csv,
    /// Consecutive 8-byte little-endian IEEE-754 doubles.
    F64le,
}

/// Loads a sample stream from disk, preserving order.
pub fn load_samples(path: &Path, format: SampleFormat) -> Result<SampleStream> {
    match format {
        SampleFormat::Csv => {
            let reader = BufReader::new(File::open(path)?);
            let mut lines = Vec::new();
            for line in reader.lines() {
                lines.push(line?);
            }
            // A trailing newline is allowed; interior blank lines are not.
            while lines.last().is_some_and(|l| l.trim().is_empty()) {
                lines.pop();
            }
            let mut samples = Vec::with_capacity(lines.len());
            for (idx, line) in lines.iter().enumerate() {
                let trimmed = line.trim();
                let v: f64 = trimmed.parse().map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: format!("{trimmed:?}: {e}"),
                })?;
                samples.push(v);
            }
            SampleStream::new(samples)
        }
        SampleFormat::F64le => {
            let mut bytes = Vec::new();
            File::open(path)?.read_to_end(&mut bytes)?;
            if bytes.len() % 8 != 0 {
                return Err(Error::Parse {
                    line: bytes.len() / 8 + 1,
                    msg: format!("truncated record: {} trailing bytes", bytes.len() % 8),
                });
            }
            let samples = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            SampleStream::new(samples)
        }
    }
}

/// Writes a sample stream to disk in the given format.
pub fn save_samples(path: &Path, format: SampleFormat, stream: &SampleStream) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        SampleFormat::Csv => {
            for v in stream.samples() {
                writeln!(out, "{v}")?;
            }
        }
        SampleFormat::F64le => {
            for v in stream.samples() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quarter_period_sine() {
        let s = generate_sinusoid_mix(&[0.25], &[0.0], 4).unwrap();
        let expected = [0.0, 1.0, 0.0, -1.0];
        for (a, b) in s.samples().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn three_tone_starts_at_zero() {
        let s = generate_sinusoid_mix(&[0.1, 0.2, 0.3], &[0.0; 3], 500).unwrap();
        assert!(s.samples()[0].abs() < 1e-15);
    }

    #[test]
    fn three_tone_power_matches_direct_sum() {
        let s = generate_sinusoid_mix(&[0.1, 0.2, 0.3], &[0.0; 3], 500).unwrap();
        // Brute-force oracle: recompute the power by direct summation.
        let mut acc = 0.0;
        for n in 0..500 {
            let mut v = 0.0;
            for f in [0.1, 0.2, 0.3] {
                v += (2.0 * PI * f * n as f64).sin();
            }
            acc += v * v;
        }
        let oracle = acc / 500.0;
        assert!((s.mean_square_power() - oracle).abs() <= 1e-12 * oracle);
        // Three unit-amplitude tones carry about 3/2 total power.
        assert!((oracle - 1.5).abs() < 0.05);
    }

    #[test]
    fn sinusoid_rejects_bad_input() {
        assert!(matches!(
            generate_sinusoid_mix(&[], &[], 10),
            Err(Error::EmptyInput(_))
        ));
        assert!(generate_sinusoid_mix(&[0.5], &[0.0], 10).is_err());
        assert!(generate_sinusoid_mix(&[f64::NAN], &[0.0], 10).is_err());
        assert!(generate_sinusoid_mix(&[0.1], &[0.0, 0.0], 10).is_err());
    }

    #[test]
    fn noise_sample_mean_within_clt_bound() {
        let s = generate_gaussian_noise(100_000, 1.0, 7).unwrap();
        let mean: f64 = s.samples().iter().sum::<f64>() / s.len() as f64;
        // 3 / sqrt(L) ~ 0.0095; the frozen bound is looser.
        assert!(mean.abs() <= 0.02, "mean {mean}");
    }

    #[test]
    fn noise_sample_variance_within_chi_square_spread() {
        let s = generate_gaussian_noise(100_000, 4.0, 7).unwrap();
        let mean: f64 = s.samples().iter().sum::<f64>() / s.len() as f64;
        let var: f64 =
            s.samples().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / s.len() as f64;
        assert!((3.85..=4.15).contains(&var), "variance {var}");
    }

    #[test]
    fn noise_is_deterministic() {
        let a = generate_gaussian_noise(1000, 2.0, 123).unwrap();
        let b = generate_gaussian_noise(1000, 2.0, 123).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noise_rejects_bad_variance() {
        assert!(generate_gaussian_noise(10, 0.0, 1).is_err());
        assert!(generate_gaussian_noise(10, -1.0, 1).is_err());
    }

    #[test]
    fn snr_zero_db_unit_power() {
        let snr = SnrSpec::new(0.0, 1.0).unwrap();
        assert!((snr.noise_variance() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn snr_minus_twenty_db() {
        let snr = SnrSpec::new(-20.0, 1.0).unwrap();
        assert!((snr.noise_variance() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn snr_from_three_tone_signal() {
        let s = generate_sinusoid_mix(&[0.1, 0.2, 0.3], &[0.0; 3], 500).unwrap();
        let snr = SnrSpec::for_signal(-10.0, &s).unwrap();
        let oracle = s.mean_square_power() * 10.0;
        assert!((snr.noise_variance() - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn snr_rejects_zero_power() {
        assert!(SnrSpec::new(0.0, 0.0).is_err());
    }

    #[test]
    fn mix_noise_variance_close_to_spec() {
        let signal = generate_sinusoid_mix(&[0.1], &[0.0], 20_000).unwrap();
        let snr = SnrSpec::for_signal(-3.0, &signal).unwrap();
        let mixed = mix_at_snr(&signal, &snr, 99).unwrap();
        let resid: Vec<f64> = mixed
            .samples()
            .iter()
            .zip(signal.samples())
            .map(|(y, x)| y - x)
            .collect();
        let var = resid.iter().map(|v| v * v).sum::<f64>() / resid.len() as f64;
        let target = snr.noise_variance();
        assert!((var - target).abs() <= 0.05 * target);
    }

    #[test]
    fn framing_counts() {
        let s = SampleStream::new((0..500).map(|n| n as f64).collect()).unwrap();
        let frames = frame_signal(&s, 128, 1).unwrap();
        assert_eq!(frames.len(), 373);
        assert_eq!(frames.dim(), 128);
    }

    #[test]
    fn framing_single_frame() {
        let s = SampleStream::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let frames = frame_signal(&s, 5, 1).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames.frame(0), s.samples());
    }

    #[test]
    fn framing_with_stride() {
        let s = SampleStream::new((0..10).map(|n| n as f64).collect()).unwrap();
        let frames = frame_signal(&s, 4, 3).unwrap();
        assert_eq!(frames.len(), 3);
        // Hand-enumerated start indices 0, 3, 6.
        assert_eq!(frames.frame(0), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(frames.frame(1), &[3.0, 4.0, 5.0, 6.0]);
        assert_eq!(frames.frame(2), &[6.0, 7.0, 8.0, 9.0]);
    }

    #[test]
    fn framing_rejects_short_stream() {
        let s = SampleStream::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            frame_signal(&s, 3, 1),
            Err(Error::StreamTooShort { .. })
        ));
    }

    #[test]
    fn ar1_zero_coeff_is_white() {
        let s = generate_ar1(50_000, 0.0, 5).unwrap();
        assert!((s.mean_square_power() - 1.0).abs() < 1e-12);
        let r1 = lag1_autocorr(s.samples());
        assert!(r1.abs() < 0.02, "lag-1 autocorrelation {r1}");
    }

    #[test]
    fn ar1_strong_correlation() {
        let s = generate_ar1(100_000, 0.95, 5).unwrap();
        let r1 = lag1_autocorr(s.samples());
        assert!((0.93..=0.97).contains(&r1), "lag-1 autocorrelation {r1}");
    }

    #[test]
    fn ar1_deterministic_and_validated() {
        assert_eq!(
            generate_ar1(100, 0.9, 17).unwrap(),
            generate_ar1(100, 0.9, 17).unwrap()
        );
        assert!(generate_ar1(100, 1.0, 17).is_err());
        assert!(generate_ar1(100, -1.2, 17).is_err());
    }

    fn lag1_autocorr(x: &[f64]) -> f64 {
        let n = x.len();
        let num: f64 = x.windows(2).map(|w| w[0] * w[1]).sum();
        let den: f64 = x.iter().map(|v| v * v).sum();
        num / den * n as f64 / (n - 1) as f64
    }

    #[test]
    fn csv_round_trip_and_parse() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "1.0\n-2.5\n").unwrap();
        let s = load_samples(&path, SampleFormat::Csv).unwrap();
        assert_eq!(s.samples(), &[1.0, -2.5]);

        let path2 = dir.path().join("rt.csv");
        save_samples(&path2, SampleFormat::Csv, &s).unwrap();
        assert_eq!(load_samples(&path2, SampleFormat::Csv).unwrap(), s);
    }

    #[test]
    fn csv_rejects_malformed_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1.0\nnope\n2.0\n").unwrap();
        match load_samples(&path, SampleFormat::Csv) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn f64le_decode() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.f64");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&0.0f64.to_le_bytes());
        bytes.extend_from_slice(&1.0f64.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        let s = load_samples(&path, SampleFormat::F64le).unwrap();
        assert_eq!(s.samples(), &[0.0, 1.0]);
    }

    #[test]
    fn f64le_rejects_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.f64");
        std::fs::write(&path, [0u8; 12]).unwrap();
        assert!(matches!(
            load_samples(&path, SampleFormat::F64le),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn empty_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            load_samples(&path, SampleFormat::Csv),
            Err(Error::EmptyInput(_))
        ));
    }

    proptest! {
        #[test]
        fn frame_zero_reproduces_prefix(len in 1usize..200, d in 1usize..32, stride in 1usize..5) {
            prop_assume!(len >= d);
            let s = SampleStream::new((0..len).map(|n| (n as f64).sin()).collect()).unwrap();
            let frames = frame_signal(&s, d, stride).unwrap();
            prop_assert_eq!(frames.frame(0), &s.samples()[..d]);
            prop_assert_eq!(frames.len(), (len - d) / stride + 1);
        }

        #[test]
        fn f64le_round_trip(values in proptest::collection::vec(-1e12f64..1e12, 1..64)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.f64");
            let s = SampleStream::new(values).unwrap();
            save_samples(&path, SampleFormat::F64le, &s).unwrap();
            prop_assert_eq!(load_samples(&path, SampleFormat::F64le).unwrap(), s);
        }

        #[test]
        fn csv_round_trip_exact(values in proptest::collection::vec(-1e6f64..1e6, 1..64)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.csv");
            let s = SampleStream::new(values).unwrap();
            save_samples(&path, SampleFormat::Csv, &s).unwrap();
            prop_assert_eq!(load_samples(&path, SampleFormat::Csv).unwrap(), s);
        }
    }
}

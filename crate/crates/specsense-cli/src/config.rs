//! JSON experiment configuration.
//!
//! The schema is versioned (`"version": 1`) and strict: unknown keys are
//! rejected everywhere so a typo in a kernel parameter cannot silently fall
//! back to a default. Tagged sections (`detector`, `signal`, kernels) carry
//! their parameters inline next to their `"kind"`.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use specsense::{DetectorSpec, ExperimentConfig, KernelSpec, SampleFormat, SignalSpec};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub version: u32,
    pub detector: DetectorConfig,
    pub signal: SignalConfig,
    pub frame_dim: usize,
    pub stride: usize,
    pub length: usize,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub target_pf: f64,
    pub base_seed: u64,
    /// Output path; the `--out` flag overrides it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Segment length for the `similarity` command.
    #[serde(default)]
    pub segment_len: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct NoParams {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialParams {
    pub c: f64,
    pub degree: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianRbfParams {
    pub sigma: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbfParams {
    pub gamma: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeavyTailedRbfParams {
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TanhNnParams {
    pub b: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelConfig {
    Linear(NoParams),
    Polynomial(PolynomialParams),
    GaussianRbf(GaussianRbfParams),
    Rbf(RbfParams),
    HeavyTailedRbf(HeavyTailedRbfParams),
    TanhNn(TanhNnParams),
}

impl KernelConfig {
    fn to_spec(&self) -> KernelSpec {
        match self {
            KernelConfig::Linear(_) => KernelSpec::Linear,
            KernelConfig::Polynomial(p) => KernelSpec::Polynomial {
                c: p.c,
                degree: p.degree,
            },
            KernelConfig::GaussianRbf(p) => KernelSpec::GaussianRbf { sigma: p.sigma },
            KernelConfig::Rbf(p) => KernelSpec::Rbf { gamma: p.gamma },
            KernelConfig::HeavyTailedRbf(p) => KernelSpec::HeavyTailedRbf {
                gamma: p.gamma,
                a: p.a,
                b: p.b,
            },
            KernelConfig::TanhNn(p) => KernelSpec::TanhNn { b: p.b },
        }
    }
}

fn default_rank_tol() -> f64 {
    specsense::detectors::DEFAULT_RANK_TOL
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpcaParams {
    pub kernel: KernelConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlrtParams {
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KglrtParams {
    pub kernel: KernelConfig,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    #[serde(default)]
    pub centering: bool,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorConfig {
    Pca(NoParams),
    Kpca(KpcaParams),
    Glrt(GlrtParams),
    Kglrt(KglrtParams),
    Ec(NoParams),
    Mme(NoParams),
}

impl DetectorConfig {
    fn to_spec(&self) -> DetectorSpec {
        match self {
            DetectorConfig::Pca(_) => DetectorSpec::Pca,
            DetectorConfig::Kpca(p) => DetectorSpec::Kpca {
                kernel: p.kernel.to_spec(),
            },
            DetectorConfig::Glrt(p) => DetectorSpec::Glrt {
                rank_tol: p.rank_tol,
            },
            DetectorConfig::Kglrt(p) => DetectorSpec::Kglrt {
                kernel: p.kernel.to_spec(),
                rank_tol: p.rank_tol,
                centering: p.centering,
            },
            DetectorConfig::Ec(_) => DetectorSpec::Ec,
            DetectorConfig::Mme(_) => DetectorSpec::Mme,
        }
    }
}

fn default_freqs() -> Vec<f64> {
    vec![0.1, 0.2, 0.3]
}

fn default_ar1_coeff() -> f64 {
    0.95
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinusoidParams {
    #[serde(default = "default_freqs")]
    pub freqs: Vec<f64>,
    /// Defaults to zero phase per tone.
    #[serde(default)]
    pub phases: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ar1Params {
    #[serde(default = "default_ar1_coeff")]
    pub coeff: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileParams {
    pub path: PathBuf,
    pub format: FormatConfig,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
pub enum FormatConfig {
    Csv,
    F64le,
}

impl From<FormatConfig> for SampleFormat {
    fn from(f: FormatConfig) -> SampleFormat {
        match f {
            FormatConfig::Csv => SampleFormat::Csv,
            FormatConfig::F64le => SampleFormat::F64le,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalConfig {
    Sinusoid(SinusoidParams),
    Ar1(Ar1Params),
    File(FileParams),
}

impl SignalConfig {
    fn to_spec(&self) -> Result<SignalSpec, String> {
        Ok(match self {
            SignalConfig::Sinusoid(p) => {
                let phases = match &p.phases {
                    Some(ph) => {
                        if ph.len() != p.freqs.len() {
                            return Err(format!(
                                "signal: {} phases for {} freqs",
                                ph.len(),
                                p.freqs.len()
                            ));
                        }
                        ph.clone()
                    }
                    None => vec![0.0; p.freqs.len()],
                };
                SignalSpec::SinusoidMix {
                    freqs: p.freqs.clone(),
                    phases,
                }
            }
            SignalConfig::Ar1(p) => SignalSpec::Ar1 { coeff: p.coeff },
            SignalConfig::File(p) => SignalSpec::File {
                path: p.path.clone(),
                format: p.format.into(),
            },
        })
    }
}

/// A parsed and validated configuration.
pub struct LoadedConfig {
    pub experiment: ExperimentConfig,
    pub output: Option<PathBuf>,
    pub segment_len: Option<usize>,
}

/// Parses and validates a config file. Referenced files must exist.
pub fn load_config(path: &Path) -> Result<LoadedConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let file: ConfigFile =
        serde_json::from_str(&text).map_err(|e| format!("invalid config: {e}"))?;
    if file.version != 1 {
        return Err(format!(
            "unsupported config version {} (expected 1)",
            file.version
        ));
    }
    if let SignalConfig::File(p) = &file.signal {
        if !p.path.exists() {
            return Err(format!(
                "signal file does not exist: {}",
                p.path.display()
            ));
        }
    }
    let experiment = ExperimentConfig {
        detector: file.detector.to_spec(),
        signal: file.signal.to_spec()?,
        frame_dim: file.frame_dim,
        stride: file.stride,
        length: file.length,
        snr_grid_db: file.snr_grid_db,
        trials: file.trials,
        target_pf: file.target_pf,
        base_seed: file.base_seed,
    };
    experiment.validate().map_err(|e| e.to_string())?;
    Ok(LoadedConfig {
        experiment,
        output: file.output,
        segment_len: file.segment_len,
    })
}

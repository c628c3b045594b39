//! Declarative experiment configuration: a JSON file with the shape
//!
//! ```json
//! {
//!   "experiment": "qubit-decay-filter",
//!   "output_dir": "out",
//!   "params": { "seed": 7, "gamma": 1.0, "dt": 0.001, ... }
//! }
//! ```
//!
//! Parsing is strict at every level: unknown keys fail with the offending
//! path, malformed JSON fails with line and column. Operator-valued fields
//! accept either shorthand atoms (`"pauli_x"`, `"sigma_minus"`,
//! `"identity(2)"`, …) or explicit matrices with separate real and
//! imaginary parts, optionally scaled by a complex factor.

use crate::CliError;
use qflab::linalg::{self, CMatrix, MatrixJson, C64};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: String,
    #[serde(default)]
    output_dir: Option<String>,
    #[serde(default = "default_params")]
    params: serde_json::Value,
}

fn default_params() -> serde_json::Value {
    serde_json::Value::Object(serde_json::Map::new())
}

#[derive(Debug)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub output_dir: Option<String>,
    pub params: Params,
}

#[derive(Debug)]
pub enum Params {
    QubitDecayFilter(QubitDecayFilterParams),
    ZakaiMartingale(ZakaiMartingaleParams),
    InnovationsWhiteness(InnovationsWhitenessParams),
    CeAxioms(CeAxiomsParams),
    CovarianceLemma(CovarianceLemmaParams),
    TakesakiPosNeg(TakesakiParams),
    GaussianConditioning(GaussianConditioningParams),
    DmzVsKushner(DmzVsKushnerParams),
    KalmanCrosscheck(KalmanCrosscheckParams),
    VnPointerGaussian(VnPointerParams),
    NondemolitionTruncated(NondemolitionParams),
    ItoGoldens(ItoGoldensParams),
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
        CliError::Config(format!(
            "{} (line {}, column {})",
            e,
            e.line(),
            e.column()
        ))
    })?;
    let params = parse_params(&raw.experiment, raw.params)?;
    validate_params(&params)?;
    Ok(ExperimentConfig {
        experiment: raw.experiment,
        output_dir: raw.output_dir,
        params,
    })
}

fn validate_params(params: &Params) -> Result<(), CliError> {
    fn positive(name: &str, v: f64) -> Result<(), CliError> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(CliError::Config(format!("`{name}` must be positive, got {v}")))
        }
    }
    fn nonzero(name: &str, v: usize) -> Result<(), CliError> {
        if v > 0 {
            Ok(())
        } else {
            Err(CliError::Config(format!("`{name}` must be positive")))
        }
    }
    match params {
        Params::QubitDecayFilter(p) => {
            positive("gamma", p.gamma)?;
            positive("dt", p.dt)?;
            positive("t_final", p.t_final)?;
            nonzero("n_trajectories", p.n_trajectories)?;
        }
        Params::ZakaiMartingale(p) => {
            positive("gamma", p.gamma)?;
            positive("dt", p.dt)?;
            positive("t_final", p.t_final)?;
            nonzero("n_trajectories", p.n_trajectories)?;
            for &t in &p.check_times {
                positive("check_times", t)?;
                if t > p.t_final {
                    return Err(CliError::Config(format!(
                        "check time {t} beyond t_final {}",
                        p.t_final
                    )));
                }
            }
        }
        Params::InnovationsWhiteness(p) => {
            positive("gamma", p.gamma)?;
            positive("dt", p.dt)?;
            positive("t_final", p.t_final)?;
            nonzero("n_trajectories", p.n_trajectories)?;
            nonzero("max_lag", p.max_lag)?;
        }
        Params::CeAxioms(p) => nonzero("instances", p.instances as usize)?,
        Params::CovarianceLemma(p) => nonzero("instances", p.instances as usize)?,
        Params::TakesakiPosNeg(p) => {
            if p.t_samples.is_empty() {
                return Err(CliError::Config("`t_samples` must be nonempty".into()));
            }
        }
        Params::GaussianConditioning(p) => {
            positive("prior_variance", p.prior_variance)?;
            positive("noise_variance", p.noise_variance)?;
        }
        Params::DmzVsKushner(p) => positive("dt", p.dt)?,
        Params::KalmanCrosscheck(p) => {
            nonzero("n_paths", p.n_paths)?;
            positive("diffusion", p.diffusion)?;
            positive("t_final", p.t_final)?;
            positive("dt", p.dt)?;
        }
        Params::VnPointerGaussian(p) => {
            nonzero("n_samples", p.n_samples)?;
            if !p.mu.is_finite() {
                return Err(CliError::Config("`mu` must be finite".into()));
            }
        }
        Params::NondemolitionTruncated(p) => {
            positive("gamma", p.gamma)?;
            positive("t_total", p.t_total)?;
            if p.slot_levels.is_empty() {
                return Err(CliError::Config("`slot_levels` must be nonempty".into()));
            }
            for frac in [p.s_fraction, p.t_fraction] {
                if !(0.0..=1.0).contains(&frac) {
                    return Err(CliError::Config(format!(
                        "time fractions must lie in [0, 1], got {frac}"
                    )));
                }
            }
        }
        Params::ItoGoldens(_) => {}
    }
    Ok(())
}

fn parse_params(experiment: &str, value: serde_json::Value) -> Result<Params, CliError> {
    fn from<T: serde::de::DeserializeOwned>(
        experiment: &str,
        value: serde_json::Value,
    ) -> Result<T, CliError> {
        serde_json::from_value(value)
            .map_err(|e| CliError::Config(format!("params for `{experiment}`: {e}")))
    }
    Ok(match experiment {
        "qubit-decay-filter" => Params::QubitDecayFilter(from(experiment, value)?),
        "zakai-martingale" => Params::ZakaiMartingale(from(experiment, value)?),
        "innovations-whiteness" => Params::InnovationsWhiteness(from(experiment, value)?),
        "ce-axioms" => Params::CeAxioms(from(experiment, value)?),
        "covariance-lemma" => Params::CovarianceLemma(from(experiment, value)?),
        "takesaki-pos-neg" => Params::TakesakiPosNeg(from(experiment, value)?),
        "gaussian-conditioning" => Params::GaussianConditioning(from(experiment, value)?),
        "dmz-vs-kushner" => Params::DmzVsKushner(from(experiment, value)?),
        "kalman-crosscheck" => Params::KalmanCrosscheck(from(experiment, value)?),
        "vn-pointer-gaussian" => Params::VnPointerGaussian(from(experiment, value)?),
        "nondemolition-truncated" => Params::NondemolitionTruncated(from(experiment, value)?),
        "ito-goldens" => Params::ItoGoldens(from(experiment, value)?),
        other => return Err(CliError::ExperimentUnknown(other.to_string())),
    })
}

/// Operator-valued config entry: exactly one of `atom` or `re`/`im`,
/// optionally scaled by the complex factor `scale = [re, im]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default)]
    pub atom: Option<String>,
    #[serde(default)]
    pub re: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub scale: Option<[f64; 2]>,
}

impl OperatorSpec {
    pub fn named_atom(name: &str) -> Self {
        OperatorSpec {
            atom: Some(name.to_string()),
            re: None,
            im: None,
            scale: None,
        }
    }

    pub fn build(&self) -> Result<CMatrix, CliError> {
        let base = match (&self.atom, &self.re) {
            (Some(atom), None) => build_atom(atom)?,
            (None, Some(re)) => {
                let im = self
                    .im
                    .clone()
                    .unwrap_or_else(|| vec![vec![0.0; re[0].len()]; re.len()]);
                MatrixJson {
                    re: re.clone(),
                    im,
                }
                .decode()
                .map_err(|e| CliError::Config(format!("operator matrix: {e}")))?
            }
            _ => {
                return Err(CliError::Config(
                    "operator spec needs exactly one of `atom` or `re`".into(),
                ))
            }
        };
        Ok(match self.scale {
            Some([re, im]) => base.map(|z| z * C64::new(re, im)),
            None => base,
        })
    }
}

fn build_atom(atom: &str) -> Result<CMatrix, CliError> {
    let parse_dim = |text: &str, prefix: &str| -> Result<usize, CliError> {
        text.strip_prefix(prefix)
            .and_then(|rest| rest.strip_suffix(')'))
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&d| d >= 1)
            .ok_or_else(|| CliError::Config(format!("bad operator atom `{text}`")))
    };
    Ok(match atom {
        "pauli_x" => linalg::pauli_x(),
        "pauli_y" => linalg::pauli_y(),
        "pauli_z" => linalg::pauli_z(),
        "sigma_minus" => linalg::sigma_minus(),
        "sigma_plus" => linalg::sigma_plus(),
        "number" => linalg::number_op(),
        other if other.starts_with("identity(") => linalg::identity(parse_dim(other, "identity(")?),
        other if other.starts_with("zero(") => linalg::zeros(parse_dim(other, "zero(")?),
        other => return Err(CliError::Config(format!("unknown operator atom `{other}`"))),
    })
}

/// SLH triple in the config format.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlhModelSpec {
    pub s: OperatorSpec,
    pub l: OperatorSpec,
    pub h: OperatorSpec,
}

impl SlhModelSpec {
    pub fn build(&self) -> Result<qflab::slh::SlhModel, CliError> {
        let model =
            qflab::slh::SlhModel::new(self.s.build()?, self.l.build()?, self.h.build()?)?;
        let report = model.validate();
        if !report.passes() {
            return Err(CliError::Config(format!(
                "SLH model invalid: unitarity residual {:.3e}, hermiticity residual {:.3e}",
                report.unitarity_residual, report.hermiticity_residual
            )));
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpecConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl GridSpecConfig {
    pub fn build(&self) -> Result<qflab::classical::GridSpec, CliError> {
        Ok(qflab::classical::GridSpec::new(self.x_min, self.x_max, self.n)?)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModeConfig {
    FilterConsistent,
    ReferenceMeasure,
}

impl ModeConfig {
    pub fn to_mode(self) -> qflab::belavkin::TrajectoryMode {
        match self {
            ModeConfig::FilterConsistent => qflab::belavkin::TrajectoryMode::FilterConsistent,
            ModeConfig::ReferenceMeasure => qflab::belavkin::TrajectoryMode::ReferenceMeasure,
        }
    }
}

fn default_seed() -> u64 {
    0
}
fn default_gamma() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_t_final() -> f64 {
    3.0
}
fn default_n_traj() -> usize {
    2000
}
fn default_mode() -> ModeConfig {
    ModeConfig::FilterConsistent
}
fn default_dumps() -> usize {
    3
}
fn default_max_lag() -> usize {
    10
}
fn default_instances() -> u64 {
    100
}
fn default_check_times() -> Vec<f64> {
    vec![1.0, 2.0, 3.0]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitDecayFilterParams {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_n_traj")]
    pub n_trajectories: usize,
    #[serde(default = "default_mode")]
    pub mode: ModeConfig,
    #[serde(default = "default_dumps")]
    pub trajectory_dumps: usize,
    /// Optional explicit SLH model; overrides `gamma` when present.
    #[serde(default)]
    pub model: Option<SlhModelSpec>,
}

impl QubitDecayFilterParams {
    pub fn build_model(&self) -> Result<qflab::slh::SlhModel, CliError> {
        match &self.model {
            Some(spec) => spec.build(),
            None => Ok(qflab::slh::SlhModel::amplitude_damping(self.gamma)),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZakaiMartingaleParams {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_n_traj")]
    pub n_trajectories: usize,
    #[serde(default = "default_check_times")]
    pub check_times: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnovationsWhitenessParams {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_n_traj")]
    pub n_trajectories: usize,
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CeAxiomsParams {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_instances")]
    pub instances: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceLemmaParams {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_instances")]
    pub instances: u64,
}

fn default_t_samples() -> Vec<f64> {
    vec![0.1, 0.5, 1.0, 2.0]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TakesakiParams {
    #[serde(default = "default_t_samples")]
    pub t_samples: Vec<f64>,
}

fn default_gc_grid() -> GridSpecConfig {
    GridSpecConfig {
        x_min: -10.0,
        x_max: 10.0,
        n: 20_001,
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianConditioningParams {
    #[serde(default = "default_gc_grid")]
    pub grid: GridSpecConfig,
    #[serde(default)]
    pub mu0: f64,
    #[serde(default = "default_gamma")]
    pub prior_variance: f64,
    #[serde(default = "default_gamma")]
    pub noise_variance: f64,
    #[serde(default = "default_y")]
    pub y: f64,
}

fn default_y() -> f64 {
    2.0
}

fn default_dk_grid() -> GridSpecConfig {
    GridSpecConfig {
        x_min: -6.0,
        x_max: 6.0,
        n: 601,
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmzVsKushnerParams {
    #[serde(default = "default_dk_grid")]
    pub grid: GridSpecConfig,
    /// Coarsest per-step size; two halvings are evaluated below it.
    #[serde(default = "default_dk_dt")]
    pub dt: f64,
}

fn default_dk_dt() -> f64 {
    1.6e-4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KalmanCrosscheckParams {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_kc_paths")]
    pub n_paths: usize,
    #[serde(default = "default_gamma")]
    pub drift: f64,
    #[serde(default = "default_gamma")]
    pub diffusion: f64,
    #[serde(default = "default_gamma")]
    pub observation: f64,
    #[serde(default = "default_kc_t")]
    pub t_final: f64,
    #[serde(default = "default_kc_dt")]
    pub dt: f64,
    #[serde(default = "default_dk_grid")]
    pub grid: GridSpecConfig,
}

fn default_kc_paths() -> usize {
    100
}
fn default_kc_t() -> f64 {
    1.0
}
fn default_kc_dt() -> f64 {
    2e-4
}

fn default_vn_x_grid() -> GridSpecConfig {
    GridSpecConfig {
        x_min: -8.0,
        x_max: 8.0,
        n: 1601,
    }
}
fn default_vn_y_grid() -> GridSpecConfig {
    GridSpecConfig {
        x_min: -16.0,
        x_max: 16.0,
        n: 3201,
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VnPointerParams {
    #[serde(default = "default_vn_x_grid")]
    pub x_grid: GridSpecConfig,
    #[serde(default = "default_vn_y_grid")]
    pub y_grid: GridSpecConfig,
    #[serde(default = "default_gamma")]
    pub mu: f64,
    #[serde(default = "default_y")]
    pub y: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_vn_samples")]
    pub n_samples: usize,
}

fn default_vn_samples() -> usize {
    100_000
}

fn default_slot_levels() -> Vec<usize> {
    vec![1, 2, 3]
}
fn default_nd_t() -> f64 {
    0.02
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NondemolitionParams {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_nd_t")]
    pub t_total: f64,
    #[serde(default = "default_slot_levels")]
    pub slot_levels: Vec<usize>,
    #[serde(default = "default_nd_s")]
    pub s_fraction: f64,
    #[serde(default = "default_nd_tf")]
    pub t_fraction: f64,
}

fn default_nd_s() -> f64 {
    0.35
}
fn default_nd_tf() -> f64 {
    0.7
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItoGoldensParams {}

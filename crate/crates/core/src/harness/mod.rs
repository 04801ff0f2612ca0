//! Config-driven Monte Carlo harness.
//!
//! Experiments are described by JSON manifests (see the `configs/` directory
//! at the repository root) and produce fixed-schema CSV tables. Sweeps are
//! deterministic for a fixed master seed regardless of worker count: every
//! trial derives its own random substream from `(seed, grid point, trial
//! index)` and results merge in trial order.
//!
//! ```
//! use pnsimo::harness::{run_ser_sweep, sweep_csv, SweepConfig};
//!
//! let cfg: SweepConfig = serde_json::from_str(r#"{
//!     "name": "smoke",
//!     "channel": "fc",
//!     "oscillators": "ns",
//!     "rho_db": [10.0],
//!     "antennas": [2],
//!     "model": { "family": "von_mises", "param": 4.0, "terms": 32 },
//!     "constellation": { "psk": 4 },
//!     "trials": 200,
//!     "target_errors": 0,
//!     "seed": 5
//! }"#)?;
//! cfg.validate()?;
//!
//! // Identical output no matter how many workers run the trials.
//! let rows = run_ser_sweep(&cfg, Some(1))?;
//! assert_eq!(sweep_csv(&rows), sweep_csv(&run_ser_sweep(&cfg, Some(2))?));
//! # Ok::<(), pnsimo::Error>(())
//! ```

mod floors;
mod sweep;
mod tslot;
mod validate;

pub use floors::{floor_bounds_csv, run_floor_and_bounds, FloorBoundsRow};
pub use sweep::{
    run_ser_sweep, run_truncation_stats, sweep_csv, sweep_plot_script, truncation_csv,
    SerEstimate, SweepRow, TruncationRow,
};
pub use tslot::{run_tslot_comparison, tslot_csv, tslot_plot_script, TslotDetector, TslotRow};
pub use validate::{run_oracle_validation, OracleReport, ScenarioValidation};

use crate::detect::TruncationPolicy;
use crate::error::{Error, Result};
use crate::phase_noise::PhaseNoiseModel;
use crate::scenario::{
    AntennaModels, ChannelKind, Constellation, OscillatorMode, Scenario,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelSpec {
    Cc,
    Fc,
    Both,
}

impl ChannelSpec {
    pub fn kinds(self) -> Vec<ChannelKind> {
        match self {
            ChannelSpec::Cc => vec![ChannelKind::Constant],
            ChannelSpec::Fc => vec![ChannelKind::Fading],
            ChannelSpec::Both => vec![ChannelKind::Constant, ChannelKind::Fading],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OscillatorSpec {
    S,
    Ns,
    Both,
}

impl OscillatorSpec {
    pub fn modes(self) -> Vec<OscillatorMode> {
        match self {
            OscillatorSpec::S => vec![OscillatorMode::Synchronous],
            OscillatorSpec::Ns => vec![OscillatorMode::NonSynchronous],
            OscillatorSpec::Both => vec![
                OscillatorMode::Synchronous,
                OscillatorMode::NonSynchronous,
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    VonMises,
    WrappedGaussian,
    Uniform,
}

impl ModelFamily {
    pub fn label(self) -> &'static str {
        match self {
            ModelFamily::VonMises => "von_mises",
            ModelFamily::WrappedGaussian => "wrapped_gaussian",
            ModelFamily::Uniform => "uniform",
        }
    }
}

/// Phase-noise model selector: family plus its single parameter
/// (concentration κ for von Mises, variance σ² for wrapped Gaussian).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    #[serde(default)]
    pub param: f64,
    #[serde(default = "default_model_terms")]
    pub terms: usize,
}

fn default_model_terms() -> usize {
    crate::phase_noise::DEFAULT_TERMS
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            family: ModelFamily::VonMises,
            param: 4.0,
            terms: default_model_terms(),
        }
    }
}

impl ModelSpec {
    pub fn build(&self) -> Result<PhaseNoiseModel> {
        match self.family {
            ModelFamily::VonMises => PhaseNoiseModel::von_mises(self.param, self.terms),
            ModelFamily::WrappedGaussian => {
                PhaseNoiseModel::wrapped_gaussian(self.param, self.terms)
            }
            ModelFamily::Uniform => Ok(PhaseNoiseModel::uniform(self.terms)),
        }
    }
}

/// Constellation selector: `{"psk": N}` or `{"points": [[re, im], …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstellationSpec {
    Psk { psk: usize },
    Points { points: Vec<[f64; 2]> },
}

impl Default for ConstellationSpec {
    fn default() -> Self {
        ConstellationSpec::Psk { psk: 4 }
    }
}

impl ConstellationSpec {
    pub fn build(&self) -> Result<Constellation> {
        match self {
            ConstellationSpec::Psk { psk } => Constellation::psk(*psk),
            ConstellationSpec::Points { points } => Constellation::from_points(
                points
                    .iter()
                    .map(|p| Complex64::new(p[0], p[1]))
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruncationSpec {
    pub delta_acc: f64,
    pub min_terms: usize,
    pub max_terms: usize,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        let p = TruncationPolicy::default();
        Self {
            delta_acc: p.delta_acc,
            min_terms: p.min_terms,
            max_terms: p.max_terms,
        }
    }
}

impl TruncationSpec {
    pub fn policy(&self) -> TruncationPolicy {
        TruncationPolicy {
            delta_acc: self.delta_acc,
            min_terms: self.min_terms,
            max_terms: self.max_terms,
        }
    }
}

/// One experiment manifest; see the field-by-field description in the guide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Label copied into the CSV `scenario` column.
    pub name: String,
    pub channel: ChannelSpec,
    pub oscillators: OscillatorSpec,
    /// SNR grid in dB.
    pub rho_db: Vec<f64>,
    /// Antenna counts to sweep.
    pub antennas: Vec<usize>,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub constellation: ConstellationSpec,
    /// Monte Carlo trials per grid point.
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Stop a grid point early once this many symbol errors are seen
    /// (0 disables early stopping).
    #[serde(default = "default_target_errors")]
    pub target_errors: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub truncation: TruncationSpec,
    /// Data slots per burst; 1 is the two-slot protocol, larger values are
    /// consumed by the `tslot` comparison.
    #[serde(default = "default_data_slots")]
    pub data_slots: usize,
    /// Constant-channel amplitudes; all-ones when omitted.
    #[serde(default)]
    pub amplitudes: Option<Vec<f64>>,
}

fn default_trials() -> u64 {
    100_000
}

fn default_target_errors() -> u64 {
    200
}

fn default_data_slots() -> usize {
    1
}

impl SweepConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: SweepConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.rho_db.is_empty() || self.rho_db.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidConfig(
                "rho_db grid must be finite and non-empty".into(),
            ));
        }
        if self.antennas.is_empty() || self.antennas.contains(&0) {
            return Err(Error::InvalidConfig(
                "antenna list must be non-empty and positive".into(),
            ));
        }
        if self.target_errors > self.trials {
            return Err(Error::InvalidConfig(
                "target_errors cannot exceed trials".into(),
            ));
        }
        self.truncation.policy().validate()?;
        self.model.build()?;
        self.constellation.build()?;
        Ok(())
    }

    /// Materialize the scenario for one grid point.
    pub fn scenario(
        &self,
        channel: ChannelKind,
        osc: OscillatorMode,
        antennas: usize,
        rho_db: f64,
    ) -> Result<Scenario> {
        let snr = 10f64.powf(rho_db / 10.0);
        let scn = Scenario {
            channel,
            oscillators: osc,
            snr,
            antennas,
            amplitudes: self
                .amplitudes
                .clone()
                .unwrap_or_else(|| vec![1.0; antennas]),
            constellation: self.constellation.build()?,
            noise_model: AntennaModels::Shared(self.model.build()?),
            data_slots: self.data_slots,
            noise_scale: 1.0,
        };
        if scn.amplitudes.len() != antennas {
            // Amplitude lists are per-M; scale the all-ones default instead
            // of guessing how to resize a custom list.
            return Err(Error::InvalidConfig(format!(
                "amplitudes list has {} entries but M = {antennas}",
                scn.amplitudes.len()
            )));
        }
        scn.validate()?;
        Ok(scn)
    }
}

pub(crate) fn channel_label(kind: ChannelKind) -> &'static str {
    match kind {
        ChannelKind::Constant => "cc",
        ChannelKind::Fading => "fc",
    }
}

pub(crate) fn oscillator_label(mode: OscillatorMode) -> &'static str {
    match mode {
        OscillatorMode::Synchronous => "s",
        OscillatorMode::NonSynchronous => "ns",
    }
}

/// Stable per-grid-point stream tag fed into [`crate::rng::substream`].
pub(crate) fn point_tag(
    channel: ChannelKind,
    osc: OscillatorMode,
    antennas: usize,
    rho_index: usize,
) -> u64 {
    let c = match channel {
        ChannelKind::Constant => 1u64,
        ChannelKind::Fading => 2,
    };
    let o = match osc {
        OscillatorMode::Synchronous => 1u64,
        OscillatorMode::NonSynchronous => 2,
    };
    c | (o << 4) | ((antennas as u64) << 8) | ((rho_index as u64) << 32)
}

/// Run `f` inside a Rayon pool with the requested worker count (or the
/// default pool when `threads` is `None`).
pub(crate) fn with_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Render a float for CSV output (shortest round-trip representation, so
/// output is byte-stable across runs and worker counts).
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Write a CSV string and a small gnuplot companion script next to it.
pub fn write_output(path: &Path, csv: &str, plot_script: Option<&str>) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, csv)?;
    if let Some(script) = plot_script {
        std::fs::write(path.with_extension("gp"), script)?;
    }
    Ok(())
}

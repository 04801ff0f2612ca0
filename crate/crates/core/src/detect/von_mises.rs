//! Closed-form fading-channel detectors for von Mises increments.
//!
//! For `φ ~ VM(0, κ)` the per-antenna series collapses through the Bessel
//! addition theorem into a single `I_0` evaluation:
//! `Σ_l α_l I_l(b) [cos weights] = I_0(√(κ² + b² + 2κb cos ζ)) / I_0(κ)`,
//! so no truncation is needed at all. Decisions must agree with the
//! Fourier-series detector on the same input, which makes this an internal
//! cross-check as much as a fast path.

use super::{DecisionResult, SeriesStats};
use crate::error::{Error, Result};
use crate::scenario::{ChannelKind, Observation, Scenario, OscillatorMode};
use crate::special::log_bessel_i;
use num_complex::Complex64;

/// Closed-form fading-channel detector; oscillator mode comes from the scenario.
pub fn detect_fc_von_mises(scn: &Scenario, obs: &Observation) -> Result<DecisionResult> {
    scn.validate()?;
    if scn.channel != ChannelKind::Fading {
        return Err(Error::UnsupportedModel(
            "closed-form von Mises detector applies to the fading channel only".into(),
        ));
    }
    if scn.data_slots != 1 {
        return Err(Error::InvalidScenario(
            "closed-form von Mises detector requires data_slots = 1".into(),
        ));
    }
    obs.check_dims(scn)?;
    let shared = scn.noise_model.shared().ok_or_else(|| {
        Error::UnsupportedModel("closed-form detector needs one shared model".into())
    })?;
    let kappa = shared.von_mises_concentration().ok_or_else(|| {
        Error::UnsupportedModel(
            "closed-form detector requires von Mises phase-noise increments".into(),
        )
    })?;

    let m = scn.antennas;
    let rho = scn.snr;
    let y = &obs.data[0];
    let x_norm_sq: f64 = obs.pilot.iter().map(|v| v.norm_sqr()).sum();
    let y_norm_sq: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    let log_i0_kappa = log_bessel_i(0, kappa)?;

    let xhy: Complex64 = obs
        .pilot
        .iter()
        .zip(y)
        .map(|(x, yv)| x.conj() * yv)
        .sum();

    let mut metrics = Vec::with_capacity(scn.constellation.len());
    for s in scn.constellation.points() {
        let denom = 1.0 + rho + rho * s.norm_sqr();
        let mut metric = -(m as f64) * denom.ln()
            - (1.0 + rho * s.norm_sqr()) / denom * x_norm_sq
            - (1.0 + rho) / denom * y_norm_sq;
        match scn.oscillators {
            OscillatorMode::NonSynchronous => {
                #[allow(clippy::needless_range_loop)]
                for am in 0..m {
                    let b = 2.0 * rho * s.norm() * obs.pilot[am].norm() * y[am].norm() / denom;
                    let zeta = y[am].arg() - obs.pilot[am].arg() - s.arg();
                    metric += fused_log_i0(kappa, b, zeta)? - log_i0_kappa;
                }
            }
            OscillatorMode::Synchronous => {
                let b = 2.0 * rho * s.norm() * xhy.norm() / denom;
                let zeta = xhy.arg() - s.arg();
                metric += fused_log_i0(kappa, b, zeta)? - log_i0_kappa;
            }
        }
        metrics.push(metric);
    }
    let n = metrics.len();
    Ok(DecisionResult::from_metrics(
        metrics,
        vec![0; n],
        SeriesStats::default(),
    ))
}

/// `ln I_0(√(κ² + b² + 2κb cos ζ))`, guarded against tiny negative radicands.
fn fused_log_i0(kappa: f64, b: f64, zeta: f64) -> Result<f64> {
    let r2 = kappa * kappa + b * b + 2.0 * kappa * b * zeta.cos();
    log_bessel_i(0, r2.max(0.0).sqrt())
}

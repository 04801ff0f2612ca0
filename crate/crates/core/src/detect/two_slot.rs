//! The four optimal two-slot detectors (constant/fading channel ×
//! synchronous/non-synchronous oscillators).
//!
//! All four share the metric shape `B + Σ ln(series)`: non-synchronous
//! operation contributes one series per antenna, synchronous operation a
//! single series over combined statistics. The `β` coefficients multiply the
//! phase-noise Fourier coefficients by one Bessel factor (fading channel,
//! where the channel marginalization already absorbed the pilot) or two
//! (constant channel, pilot and data side separately). Truncation is shared
//! across a metric's series and stops once the metric's relative change
//! falls below the policy's `delta_acc`.

use super::{
    coeffs_one_factor, coeffs_two_factor, joint_log_metric, DecisionResult, JointSeries,
    LadderCache, SeriesStats, TruncationPolicy,
};
use crate::error::{Error, Result};
use crate::scenario::{ChannelKind, Observation, OscillatorMode, Scenario};
use num_complex::Complex64;

/// Jointly optimal symbol decision from the pilot and data vectors.
pub fn detect_two_slot(
    scn: &Scenario,
    obs: &Observation,
    policy: &TruncationPolicy,
) -> Result<DecisionResult> {
    policy.validate()?;
    scn.validate()?;
    if scn.data_slots != 1 {
        return Err(Error::InvalidScenario(
            "two-slot detector requires a scenario with data_slots = 1".into(),
        ));
    }
    obs.check_dims(scn)?;

    match (scn.channel, scn.oscillators) {
        (ChannelKind::Constant, OscillatorMode::NonSynchronous) => constant_ns(scn, obs, policy),
        (ChannelKind::Constant, OscillatorMode::Synchronous) => constant_sync(scn, obs, policy),
        (ChannelKind::Fading, OscillatorMode::NonSynchronous) => fading_ns(scn, obs, policy),
        (ChannelKind::Fading, OscillatorMode::Synchronous) => fading_sync(scn, obs, policy),
    }
}

/// CC-NS: per antenna `β_{m,l} = α_{m,l} I_l(2√ρ g_m |s||y_m|) I_l(2√ρ g_m |x_m|)`,
/// `ζ_m = arg y_m - arg x_m - arg s`, `B = -ρ|s|²‖g‖²`.
fn constant_ns(
    scn: &Scenario,
    obs: &Observation,
    policy: &TruncationPolicy,
) -> Result<DecisionResult> {
    let m = scn.antennas;
    let sr = scn.snr.sqrt();
    let g = &scn.amplitudes;
    let g_norm_sq: f64 = g.iter().map(|v| v * v).sum();
    let y = &obs.data[0];

    let mut cache = LadderCache::new(policy.max_terms);
    let mut stats = SeriesStats::default();
    let mut metrics = Vec::with_capacity(scn.constellation.len());
    let mut terms_used = Vec::with_capacity(scn.constellation.len());

    // Pilot-side ladders do not depend on the hypothesized symbol.
    let pilot_args: Vec<f64> = (0..m)
        .map(|am| 2.0 * sr * g[am] * obs.pilot[am].norm())
        .collect();

    for s in scn.constellation.points() {
        let mut coeff_sets = Vec::with_capacity(m);
        let mut angles = Vec::with_capacity(m);
        for am in 0..m {
            let data_arg = 2.0 * sr * g[am] * s.norm() * y[am].norm();
            let ladder_y = cache.get(data_arg)?.to_vec();
            let ladder_x = cache.get(pilot_args[am])?;
            coeff_sets.push(coeffs_two_factor(
                scn.model(am).coeffs(),
                &ladder_y,
                ladder_x,
                policy,
            ));
            angles.push(y[am].arg() - obs.pilot[am].arg() - s.arg());
        }
        let series: Vec<JointSeries> = coeff_sets
            .iter()
            .zip(&angles)
            .map(|(coeffs, &angle)| JointSeries { coeffs, angle })
            .collect();
        let eval = joint_log_metric(&series, -scn.snr * s.norm_sqr() * g_norm_sq, policy)?;
        stats.absorb_joint(&eval);
        metrics.push(eval.metric);
        terms_used.push(eval.terms);
    }
    Ok(DecisionResult::from_metrics(metrics, terms_used, stats))
}

/// CC-S: one series over the combined statistics `g^T x`, `g^T y` with
/// `β_l = α_l I_l(2√ρ|s||g^T y|) I_l(2√ρ|g^T x|)` and
/// `ζ = arg(g^T y) - arg(g^T x) - arg s`.
fn constant_sync(
    scn: &Scenario,
    obs: &Observation,
    policy: &TruncationPolicy,
) -> Result<DecisionResult> {
    let sr = scn.snr.sqrt();
    let g = &scn.amplitudes;
    let g_norm_sq: f64 = g.iter().map(|v| v * v).sum();

    let ux: Complex64 = obs.pilot.iter().zip(g).map(|(x, gm)| x * gm).sum();
    let uy: Complex64 = obs.data[0].iter().zip(g).map(|(y, gm)| y * gm).sum();

    let mut cache = LadderCache::new(policy.max_terms);
    let pilot_ladder = cache.get(2.0 * sr * ux.norm())?.to_vec();

    let mut stats = SeriesStats::default();
    let mut metrics = Vec::with_capacity(scn.constellation.len());
    let mut terms_used = Vec::with_capacity(scn.constellation.len());
    for s in scn.constellation.points() {
        let data_ladder = cache.get(2.0 * sr * s.norm() * uy.norm())?.to_vec();
        let coeffs = coeffs_two_factor(scn.model(0).coeffs(), &data_ladder, &pilot_ladder, policy);
        let eval = joint_log_metric(
            &[JointSeries {
                coeffs: &coeffs,
                angle: uy.arg() - ux.arg() - s.arg(),
            }],
            -scn.snr * s.norm_sqr() * g_norm_sq,
            policy,
        )?;
        stats.absorb_joint(&eval);
        metrics.push(eval.metric);
        terms_used.push(eval.terms);
    }
    Ok(DecisionResult::from_metrics(metrics, terms_used, stats))
}

/// FC-NS: per antenna `β_{m,l} = α_{m,l} I_l(2ρ|s||x_m||y_m| / (1+ρ+ρ|s|²))`,
/// with `B = -M ln(1+ρ+ρ|s|²) - (1+ρ|s|²)/(·)·‖x‖² - (1+ρ)/(·)·‖y‖²`.
fn fading_ns(
    scn: &Scenario,
    obs: &Observation,
    policy: &TruncationPolicy,
) -> Result<DecisionResult> {
    let m = scn.antennas;
    let rho = scn.snr;
    let y = &obs.data[0];
    let x_norm_sq: f64 = obs.pilot.iter().map(|v| v.norm_sqr()).sum();
    let y_norm_sq: f64 = y.iter().map(|v| v.norm_sqr()).sum();

    let mut cache = LadderCache::new(policy.max_terms);
    let mut stats = SeriesStats::default();
    let mut metrics = Vec::with_capacity(scn.constellation.len());
    let mut terms_used = Vec::with_capacity(scn.constellation.len());

    for s in scn.constellation.points() {
        let denom = 1.0 + rho + rho * s.norm_sqr();
        let offset = -(m as f64) * denom.ln()
            - (1.0 + rho * s.norm_sqr()) / denom * x_norm_sq
            - (1.0 + rho) / denom * y_norm_sq;
        let mut coeff_sets = Vec::with_capacity(m);
        let mut angles = Vec::with_capacity(m);
        #[allow(clippy::needless_range_loop)]
        for am in 0..m {
            let arg = 2.0 * rho * s.norm() * obs.pilot[am].norm() * y[am].norm() / denom;
            let ladder = cache.get(arg)?;
            coeff_sets.push(coeffs_one_factor(scn.model(am).coeffs(), ladder, policy));
            angles.push(y[am].arg() - obs.pilot[am].arg() - s.arg());
        }
        let series: Vec<JointSeries> = coeff_sets
            .iter()
            .zip(&angles)
            .map(|(coeffs, &angle)| JointSeries { coeffs, angle })
            .collect();
        let eval = joint_log_metric(&series, offset, policy)?;
        stats.absorb_joint(&eval);
        metrics.push(eval.metric);
        terms_used.push(eval.terms);
    }
    Ok(DecisionResult::from_metrics(metrics, terms_used, stats))
}

/// FC-S: one series with `β_l = α_l I_l(2ρ|s||x^H y| / (1+ρ+ρ|s|²))` and
/// `ζ = arg(x^H y) - arg s`.
fn fading_sync(
    scn: &Scenario,
    obs: &Observation,
    policy: &TruncationPolicy,
) -> Result<DecisionResult> {
    let m = scn.antennas;
    let rho = scn.snr;
    let y = &obs.data[0];
    let x_norm_sq: f64 = obs.pilot.iter().map(|v| v.norm_sqr()).sum();
    let y_norm_sq: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    let xhy: Complex64 = obs.pilot.iter().zip(y).map(|(x, yv)| x.conj() * yv).sum();

    let mut cache = LadderCache::new(policy.max_terms);
    let mut stats = SeriesStats::default();
    let mut metrics = Vec::with_capacity(scn.constellation.len());
    let mut terms_used = Vec::with_capacity(scn.constellation.len());

    for s in scn.constellation.points() {
        let denom = 1.0 + rho + rho * s.norm_sqr();
        let offset = -(m as f64) * denom.ln()
            - (1.0 + rho * s.norm_sqr()) / denom * x_norm_sq
            - (1.0 + rho) / denom * y_norm_sq;
        let arg = 2.0 * rho * s.norm() * xhy.norm() / denom;
        let ladder = cache.get(arg)?;
        let coeffs = coeffs_one_factor(scn.model(0).coeffs(), ladder, policy);
        let eval = joint_log_metric(
            &[JointSeries {
                coeffs: &coeffs,
                angle: xhy.arg() - s.arg(),
            }],
            offset,
            policy,
        )?;
        stats.absorb_joint(&eval);
        metrics.push(eval.metric);
        terms_used.push(eval.terms);
    }
    Ok(DecisionResult::from_metrics(metrics, terms_used, stats))
}

//! Multi-slot detectors: causal decision feedback (non-synchronous) and the
//! genie-aided reference (synchronous).
//!
//! Exact symbol-by-symbol ML over T data slots is intractable, so the
//! comparison runs a *suboptimal* NS detector against a *better-than-optimal*
//! S detector: if the former still wins, the two-slot conclusions carry over.
//!
//! The decision-feedback detector treats its own past decisions as true and
//! replaces past phase rotations by their mean phasor `d[τ] = α_{1,τ}` (first
//! Fourier coefficient of the accumulated-increment density); the slot-`t`
//! rotation keeps the full accumulated-increment statistics `α_{p,t}`. The
//! genie detector is handed the true accumulated phase and the true past
//! symbols from the simulator's truth record.

use super::{
    coeffs_one_factor, coeffs_two_factor, joint_log_metric, DecisionResult, JointSeries,
    LadderCache, SeriesStats, TruncationPolicy,
};
use crate::error::{Error, Result};
use crate::phase_noise::PhaseNoiseModel;
use crate::scenario::{ChannelKind, Observation, OscillatorMode, Scenario};
use num_complex::Complex64;

/// Accumulated-increment coefficient sets for slots `1..=T`.
fn convolved_models(model: &PhaseNoiseModel, slots: usize) -> Result<Vec<PhaseNoiseModel>> {
    (1..=slots as u32).map(|t| model.convolve_iid(t)).collect()
}

/// Causal decision-feedback detector for non-synchronous operation; returns
/// one decision per data slot.
pub fn detect_tslot_df_ns(
    scn: &Scenario,
    obs: &Observation,
    policy: &TruncationPolicy,
) -> Result<Vec<DecisionResult>> {
    policy.validate()?;
    scn.validate()?;
    obs.check_dims(scn)?;
    if scn.oscillators != OscillatorMode::NonSynchronous {
        return Err(Error::InvalidScenario(
            "decision-feedback detector is defined for non-synchronous operation".into(),
        ));
    }

    match scn.channel {
        ChannelKind::Constant => df_constant(scn, obs, policy),
        ChannelKind::Fading => df_fading(scn, obs, policy),
    }
}

/// CC decision feedback: running pilot-plus-feedback accumulator
/// `c_m[t] = x_m^* + Σ_{τ<t} y_m^*[τ] d[τ] ŝ_τ`, metric per slot
/// `-ρ|s|²‖g‖² + Σ_m ln Σ_p α_{p,t} I_p(2√ρ|y_m^* g_m s|) I_p(2√ρ|c_m g_m|) cos(p(arg(y_m^* g_m s) - arg c_m))`.
fn df_constant(
    scn: &Scenario,
    obs: &Observation,
    policy: &TruncationPolicy,
) -> Result<Vec<DecisionResult>> {
    let m = scn.antennas;
    let sr = scn.snr.sqrt();
    let g = &scn.amplitudes;
    let g_norm_sq: f64 = g.iter().map(|v| v * v).sum();
    let convolved: Vec<Vec<PhaseNoiseModel>> = (0..m)
        .map(|am| convolved_models(scn.model(am), scn.data_slots))
        .collect::<Result<_>>()?;

    let mut feedback: Vec<Complex64> = obs.pilot.iter().map(|x| x.conj()).collect();
    let mut results = Vec::with_capacity(scn.data_slots);

    for (t, y) in obs.data.iter().enumerate() {
        let mut cache = LadderCache::new(policy.max_terms);
        let mut stats = SeriesStats::default();
        let mut metrics = Vec::with_capacity(scn.constellation.len());
        let mut terms_used = Vec::with_capacity(scn.constellation.len());
        for s in scn.constellation.points() {
            let mut coeff_sets = Vec::with_capacity(m);
            let mut angles = Vec::with_capacity(m);
            for am in 0..m {
                let b_side = y[am].conj() * g[am] * s;
                let data_arg = 2.0 * sr * b_side.norm();
                let fb_arg = 2.0 * sr * (feedback[am] * g[am]).norm();
                let data_ladder = cache.get(data_arg)?.to_vec();
                let fb_ladder = cache.get(fb_arg)?;
                coeff_sets.push(coeffs_two_factor(
                    convolved[am][t].coeffs(),
                    &data_ladder,
                    fb_ladder,
                    policy,
                ));
                angles.push(b_side.arg() - feedback[am].arg());
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
        let decision = DecisionResult::from_metrics(metrics, terms_used, stats);
        let s_hat = scn.constellation.point(decision.argmax)?;
        for am in 0..m {
            let d = convolved[am][t].coeff(1);
            feedback[am] += y[am].conj() * d * s_hat;
        }
        results.push(decision);
    }
    Ok(results)
}

/// FC decision feedback: per-antenna accumulators
/// `â_m[t] = 1 + ρ + ρ Σ_{τ<t} |d[τ] ŝ_τ|²` and
/// `v̂_m[t] = x_m^* + Σ_{τ<t} y_m^*[τ] d[τ] ŝ_τ`, with
/// `χ̂_m = v̂_m^* y_m^*[t] s`.
fn df_fading(
    scn: &Scenario,
    obs: &Observation,
    policy: &TruncationPolicy,
) -> Result<Vec<DecisionResult>> {
    let m = scn.antennas;
    let rho = scn.snr;
    let convolved: Vec<Vec<PhaseNoiseModel>> = (0..m)
        .map(|am| convolved_models(scn.model(am), scn.data_slots))
        .collect::<Result<_>>()?;

    let mut v_acc: Vec<Complex64> = obs.pilot.iter().map(|x| x.conj()).collect();
    let mut a_acc: Vec<f64> = vec![1.0 + rho; m];
    let mut results = Vec::with_capacity(scn.data_slots);

    for (t, y) in obs.data.iter().enumerate() {
        let mut cache = LadderCache::new(policy.max_terms);
        let mut stats = SeriesStats::default();
        let mut metrics = Vec::with_capacity(scn.constellation.len());
        let mut terms_used = Vec::with_capacity(scn.constellation.len());
        for s in scn.constellation.points() {
            let mut offset = 0.0;
            let mut coeff_sets = Vec::with_capacity(m);
            let mut angles = Vec::with_capacity(m);
            for am in 0..m {
                let denom = a_acc[am] + rho * s.norm_sqr();
                let chi = v_acc[am].conj() * y[am].conj() * s;
                offset += -denom.ln()
                    + rho * (v_acc[am].norm_sqr() + y[am].norm_sqr() * s.norm_sqr()) / denom;
                let ladder = cache.get(2.0 * rho * chi.norm() / denom)?;
                coeff_sets.push(coeffs_one_factor(convolved[am][t].coeffs(), ladder, policy));
                angles.push(chi.arg());
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
        let decision = DecisionResult::from_metrics(metrics, terms_used, stats);
        let s_hat = scn.constellation.point(decision.argmax)?;
        for am in 0..m {
            let d = convolved[am][t].coeff(1);
            v_acc[am] += y[am].conj() * d * s_hat;
            a_acc[am] += rho * (d * s_hat).norm_sqr();
        }
        results.push(decision);
    }
    Ok(results)
}

/// Genie-aided detector for synchronous operation: the receiver is handed
/// the true accumulated phase through slot `t-1` and the true past symbols
/// from the observation's truth record.
pub fn detect_tslot_genie_s(
    scn: &Scenario,
    obs: &Observation,
    policy: &TruncationPolicy,
) -> Result<Vec<DecisionResult>> {
    policy.validate()?;
    scn.validate()?;
    obs.check_dims(scn)?;
    if scn.oscillators != OscillatorMode::Synchronous {
        return Err(Error::InvalidScenario(
            "genie-aided detector is defined for synchronous operation".into(),
        ));
    }
    let truth = obs.truth().ok_or(Error::MissingTruth)?;
    if truth.symbols.len() != scn.data_slots || truth.increments.len() != scn.data_slots {
        return Err(Error::DimensionMismatch(
            "truth record does not cover every data slot".into(),
        ));
    }

    match scn.channel {
        ChannelKind::Constant => genie_constant(scn, obs, policy),
        ChannelKind::Fading => genie_fading(scn, obs, policy),
    }
}

/// CC genie: with `θ_t = θ + Σ_{τ<t} φ_τ` known, the pilot is redundant and
/// the metric is a single series in `2√ρ|y_t^H g s|` with angle
/// `θ_t + arg(s · y_t^H g)` and single-increment coefficients.
fn genie_constant(
    scn: &Scenario,
    obs: &Observation,
    policy: &TruncationPolicy,
) -> Result<Vec<DecisionResult>> {
    let truth = obs.truth().unwrap();
    let sr = scn.snr.sqrt();
    let g = &scn.amplitudes;
    let g_norm_sq: f64 = g.iter().map(|v| v * v).sum();
    let alphas = scn.model(0).coeffs().to_vec();

    let mut theta_t = truth.theta[0];
    let mut results = Vec::with_capacity(scn.data_slots);
    for (t, y) in obs.data.iter().enumerate() {
        let yhg: Complex64 = y.iter().zip(g).map(|(yv, gm)| yv.conj() * gm).sum();
        let mut cache = LadderCache::new(policy.max_terms);
        let mut stats = SeriesStats::default();
        let mut metrics = Vec::with_capacity(scn.constellation.len());
        let mut terms_used = Vec::with_capacity(scn.constellation.len());
        for s in scn.constellation.points() {
            let chi = s * yhg;
            let ladder = cache.get(2.0 * sr * chi.norm())?;
            let coeffs = coeffs_one_factor(&alphas, ladder, policy);
            let eval = joint_log_metric(
                &[JointSeries {
                    coeffs: &coeffs,
                    angle: theta_t + chi.arg(),
                }],
                -scn.snr * s.norm_sqr() * g_norm_sq,
                policy,
            )?;
            stats.absorb_joint(&eval);
            metrics.push(eval.metric);
            terms_used.push(eval.terms);
        }
        results.push(DecisionResult::from_metrics(metrics, terms_used, stats));
        // The genie reveals this slot's increment before the next decision.
        theta_t += truth.increments[t][0];
    }
    Ok(results)
}

/// FC genie: accumulators over true symbols and true accumulated phases,
/// `a_t = 1 + ρ + ρ Σ_{τ<t}|s_τ|²`,
/// `v_{t-1} = x + Σ_{τ<t} s_τ^* e^{-jΣ_{τ'≤τ}φ} y_τ`, `χ_t = s^* v^H y_t`.
fn genie_fading(
    scn: &Scenario,
    obs: &Observation,
    policy: &TruncationPolicy,
) -> Result<Vec<DecisionResult>> {
    let truth = obs.truth().unwrap();
    let m = scn.antennas;
    let rho = scn.snr;
    let alphas = scn.model(0).coeffs().to_vec();

    let mut v_acc: Vec<Complex64> = obs.pilot.clone();
    let mut a_acc = 1.0 + rho;
    let mut theta_known = 0.0f64; // Σ_{τ<t} φ_τ, revealed by the genie
    let mut results = Vec::with_capacity(scn.data_slots);

    for (t, y) in obs.data.iter().enumerate() {
        let v_norm_sq: f64 = v_acc.iter().map(|v| v.norm_sqr()).sum();
        let y_norm_sq: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        let vhy: Complex64 = v_acc.iter().zip(y).map(|(v, yv)| v.conj() * yv).sum();

        let mut cache = LadderCache::new(policy.max_terms);
        let mut stats = SeriesStats::default();
        let mut metrics = Vec::with_capacity(scn.constellation.len());
        let mut terms_used = Vec::with_capacity(scn.constellation.len());
        for s in scn.constellation.points() {
            let denom = a_acc + rho * s.norm_sqr();
            let chi = s.conj() * vhy;
            let ladder = cache.get(2.0 * rho * chi.norm() / denom)?;
            let coeffs = coeffs_one_factor(&alphas, ladder, policy);
            let offset = rho * (v_norm_sq + s.norm_sqr() * y_norm_sq) / denom
                - (m as f64) * denom.ln();
            let eval = joint_log_metric(
                &[JointSeries {
                    coeffs: &coeffs,
                    angle: theta_known - chi.arg(),
                }],
                offset,
                policy,
            )?;
            stats.absorb_joint(&eval);
            metrics.push(eval.metric);
            terms_used.push(eval.terms);
        }
        results.push(DecisionResult::from_metrics(metrics, terms_used, stats));

        // Update with the true symbol and the true accumulated phase.
        let s_true = scn.constellation.point(truth.symbols[t])?;
        theta_known += truth.increments[t][0];
        let derotate = Complex64::from_polar(1.0, -theta_known);
        for (v, yv) in v_acc.iter_mut().zip(y) {
            *v += s_true.conj() * derotate * yv;
        }
        a_acc += rho * s_true.norm_sqr();
    }
    Ok(results)
}

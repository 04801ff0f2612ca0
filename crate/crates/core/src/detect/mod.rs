//! Decision rules: the four two-slot ML detectors, the von Mises closed
//! forms, the high-SNR rules, and the multi-slot decision-feedback and
//! genie-aided detectors.
//!
//! Every series detector evaluates metrics of the form
//! `B + ln(β_0 + 2 Σ_l β_l cos(lζ))` where `β_l` is a product of a Fourier
//! coefficient and one or two Bessel values. The whole computation runs in
//! the log domain with `β_0` (always the largest coefficient) factored out,
//! so metrics stay finite at SNRs where the raw `β` values would overflow.
//!
//! ```
//! use pnsimo::detect::{detect_tslot_df_ns, detect_tslot_genie_s, TruncationPolicy};
//! use pnsimo::phase_noise::PhaseNoiseModel;
//! use pnsimo::rng::substream;
//! use pnsimo::scenario::*;
//!
//! // A 6-slot burst through a fading channel with Wiener phase noise.
//! let model = PhaseNoiseModel::wrapped_gaussian(0.07, 64)?;
//! let policy = TruncationPolicy::default();
//! let symbols = [0usize, 3, 1, 2, 0, 1];
//!
//! let ns = Scenario::new(
//!     ChannelKind::Fading, OscillatorMode::NonSynchronous,
//!     100.0, 8, Constellation::psk(4)?, model.clone(),
//! )?.with_data_slots(6);
//! let obs = simulate_t_slot(&ns, &symbols, &mut substream(3, &[0]))?;
//! let decisions = detect_tslot_df_ns(&ns, &obs, &policy)?;
//! assert_eq!(decisions.len(), 6);
//!
//! // The genie-aided synchronous reference reads the truth record.
//! let s = Scenario::new(
//!     ChannelKind::Fading, OscillatorMode::Synchronous,
//!     100.0, 8, Constellation::psk(4)?, model,
//! )?.with_data_slots(6);
//! let obs = simulate_t_slot(&s, &symbols, &mut substream(3, &[1]))?;
//! let decisions = detect_tslot_genie_s(&s, &obs, &policy)?;
//! assert_eq!(decisions.len(), 6);
//! # Ok::<(), pnsimo::Error>(())
//! ```

mod high_snr;
mod tslot;
mod two_slot;
mod von_mises;

pub use high_snr::{detect_high_snr_ns, detect_min_distance_fc_ns};
pub use tslot::{detect_tslot_df_ns, detect_tslot_genie_s};
pub use two_slot::detect_two_slot;
pub use von_mises::detect_fc_von_mises;

use crate::error::{Error, Result};
use crate::special;

/// Stopping rule for the truncated detector series: stop at the first term
/// index `ν ≥ min_terms` whose relative change falls below `delta_acc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub delta_acc: f64,
    pub min_terms: usize,
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            delta_acc: 1e-12,
            min_terms: 2,
            max_terms: 64,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !self.delta_acc.is_finite() || self.delta_acc <= 0.0 || self.delta_acc >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "delta_acc must lie in (0,1), got {}",
                self.delta_acc
            )));
        }
        if self.min_terms < 1 || self.min_terms > self.max_terms {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= min_terms <= max_terms, got {} and {}",
                self.min_terms, self.max_terms
            )));
        }
        if self.max_terms > special::MAX_ORDER {
            return Err(Error::OrderCap {
                requested: self.max_terms,
                cap: special::MAX_ORDER,
            });
        }
        Ok(())
    }
}

/// One evaluated series `ln(β_0 + 2 Σ β_l cos(lζ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub log_value: f64,
    /// Number of terms `ν` past `β_0` actually summed.
    pub terms: usize,
    /// The truncated sum went nonpositive and was clamped to `β_0 · 1e-300`.
    pub clamped: bool,
    /// The relative-change test never fired before `max_terms`.
    pub converged: bool,
}

/// Truncation bookkeeping across many series evaluations.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct SeriesStats {
    pub evals: u64,
    pub total_terms: u64,
    pub max_terms: usize,
    pub clamped: u64,
    pub unconverged: u64,
}

impl SeriesStats {
    pub fn absorb(&mut self, eval: &SeriesEval) {
        self.evals += 1;
        self.total_terms += eval.terms as u64;
        self.max_terms = self.max_terms.max(eval.terms);
        if eval.clamped {
            self.clamped += 1;
        }
        if !eval.converged {
            self.unconverged += 1;
        }
    }

    /// One joint metric evaluation counts once, with its shared ν.
    pub(crate) fn absorb_joint(&mut self, eval: &JointEval) {
        self.evals += 1;
        self.total_terms += eval.terms as u64;
        self.max_terms = self.max_terms.max(eval.terms);
        self.clamped += eval.clamped;
        if !eval.converged {
            self.unconverged += 1;
        }
    }

    pub fn merge(&mut self, other: &SeriesStats) {
        self.evals += other.evals;
        self.total_terms += other.total_terms;
        self.max_terms = self.max_terms.max(other.max_terms);
        self.clamped += other.clamped;
        self.unconverged += other.unconverged;
    }

    pub fn mean_terms(&self) -> f64 {
        if self.evals == 0 {
            0.0
        } else {
            self.total_terms as f64 / self.evals as f64
        }
    }
}

/// Per-symbol log-metrics with the winning index.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionResult {
    pub metrics: Vec<f64>,
    /// Index of the metric maximum; ties break to the lowest index.
    pub argmax: usize,
    /// Terms used per metric (maximum over that metric's series).
    pub terms_used: Vec<usize>,
    /// Aggregate over every individual series evaluated for this decision.
    pub series_stats: SeriesStats,
}

impl DecisionResult {
    pub(crate) fn from_metrics(
        metrics: Vec<f64>,
        terms_used: Vec<usize>,
        series_stats: SeriesStats,
    ) -> Self {
        let argmax = argmax_lowest(&metrics);
        Self {
            metrics,
            argmax,
            terms_used,
            series_stats,
        }
    }
}

pub(crate) fn argmax_lowest(metrics: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in metrics.iter().enumerate().skip(1) {
        if v > metrics[best] {
            best = i;
        }
    }
    best
}

#[allow(clippy::excessive_precision)]
const LN_CLAMP: f64 = -690.775527898213705205; // ln(1e-300)

/// One series coefficient `β_l` carried as `(ln|β_l|, sign β_l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCoeff {
    pub log_abs: f64,
    pub sign: f64,
}

impl LogCoeff {
    pub fn from_value(a: f64) -> Self {
        if a == 0.0 {
            Self {
                log_abs: f64::NEG_INFINITY,
                sign: 0.0,
            }
        } else {
            Self {
                log_abs: a.abs().ln(),
                sign: a.signum(),
            }
        }
    }
}

/// Evaluate `ln(β_0 + 2 Σ_{l=1}^{ν} β_l cos(lζ))` with adaptive truncation.
///
/// `β_0` must be positive. The sum accumulates in units of `β_0` (always the
/// largest coefficient), which bounds every term magnitude by 2 and rules
/// out overflow; ν is the first index at or past `min_terms` where the
/// returned log value's relative change drops below `delta_acc`. A truncated
/// sum that ends nonpositive (possible only as a truncation artifact, the
/// exact density being positive) is clamped to `β_0 · 1e-300` and flagged
/// rather than treated as fatal.
pub fn log_truncated_series(
    coeffs: &[LogCoeff],
    angle: f64,
    policy: &TruncationPolicy,
) -> Result<SeriesEval> {
    let joint = joint_log_metric(&[JointSeries { coeffs, angle }], 0.0, policy)?;
    Ok(SeriesEval {
        log_value: joint.metric,
        terms: joint.terms,
        clamped: joint.clamped > 0,
        converged: joint.converged,
    })
}

/// One series inside a joint metric evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct JointSeries<'a> {
    pub coeffs: &'a [LogCoeff],
    pub angle: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct JointEval {
    pub metric: f64,
    /// Shared truncation index ν across all series of the metric.
    pub terms: usize,
    /// Number of constituent series whose truncated sum had to be clamped.
    pub clamped: u64,
    pub converged: bool,
}

/// Evaluate `offset + Σ_i ln(β_{i,0} + 2 Σ_l β_{i,l} cos(l ζ_i))` with one
/// shared truncation index.
///
/// Every series advances in lockstep and the stopping rule watches the
/// relative change of the *whole metric* — offset included — between
/// consecutive term counts, which is the accuracy measure the truncation
/// statistics report. Steps where some partial sum is nonpositive cannot be
/// measured and never stop the iteration.
pub(crate) fn joint_log_metric(
    series: &[JointSeries],
    offset: f64,
    policy: &TruncationPolicy,
) -> Result<JointEval> {
    policy.validate()?;
    if series.is_empty() {
        return Err(Error::Domain("joint metric needs at least one series".into()));
    }
    let mut lb0_total = offset;
    for s in series {
        let c0 = s
            .coeffs
            .first()
            .ok_or_else(|| Error::Domain("series without coefficients".into()))?;
        if c0.sign <= 0.0 || c0.log_abs.is_nan() || c0.log_abs == f64::INFINITY {
            return Err(Error::Domain(
                "series kernel requires a positive, finite β_0".into(),
            ));
        }
        lb0_total += c0.log_abs;
    }

    let mut sums = vec![1.0f64; series.len()];
    let mut prev: Option<f64> = None;
    let mut terms = 0usize;
    let mut converged = false;

    for l in 1..=policy.max_terms {
        for (sum, s) in sums.iter_mut().zip(series) {
            if let Some(c) = s.coeffs.get(l) {
                if c.sign != 0.0 {
                    *sum += 2.0
                        * c.sign
                        * (c.log_abs - s.coeffs[0].log_abs).exp()
                        * (l as f64 * s.angle).cos();
                }
            }
        }
        terms = l;
        if sums.iter().all(|&v| v > 0.0) {
            let metric = lb0_total + sums.iter().map(|v| v.ln()).sum::<f64>();
            if let Some(p) = prev {
                if l >= policy.min_terms {
                    let rel = (metric - p).abs() / p.abs().max(f64::MIN_POSITIVE);
                    if rel < policy.delta_acc {
                        converged = true;
                        break;
                    }
                }
            }
            prev = Some(metric);
        } else {
            prev = None;
        }
    }

    let mut clamped = 0u64;
    let mut metric = offset;
    for (sum, s) in sums.iter().zip(series) {
        metric += s.coeffs[0].log_abs;
        if *sum > 0.0 {
            metric += sum.ln();
        } else {
            metric += LN_CLAMP;
            clamped += 1;
        }
    }
    Ok(JointEval {
        metric,
        terms,
        clamped,
        converged: converged && clamped == 0,
    })
}

/// Coefficients `β_l = α_l · I_l(a) · I_l(b)` (constant channel: pilot and
/// data Bessel factors), trimmed to the orders that can matter.
pub(crate) fn coeffs_two_factor(
    alphas: &[f64],
    ladder_a: &[f64],
    ladder_b: &[f64],
    policy: &TruncationPolicy,
) -> Vec<LogCoeff> {
    let eff = effective_max_terms(alphas, policy);
    (0..=eff)
        .map(|l| {
            let c = LogCoeff::from_value(if l < alphas.len() { alphas[l] } else { 0.0 });
            LogCoeff {
                log_abs: c.log_abs + ladder_a[l] + ladder_b[l],
                sign: c.sign,
            }
        })
        .collect()
}

/// Coefficients `β_l = α_l · I_l(a)` (fading channel: single Bessel factor).
pub(crate) fn coeffs_one_factor(
    alphas: &[f64],
    ladder: &[f64],
    policy: &TruncationPolicy,
) -> Vec<LogCoeff> {
    let eff = effective_max_terms(alphas, policy);
    (0..=eff)
        .map(|l| {
            let c = LogCoeff::from_value(if l < alphas.len() { alphas[l] } else { 0.0 });
            LogCoeff {
                log_abs: c.log_abs + ladder[l],
                sign: c.sign,
            }
        })
        .collect()
}

/// Largest order worth evaluating: coefficients below 1e-18 in magnitude
/// cannot move the relative-change test at any usable `delta_acc`, so the
/// ladder can stop there. Never drops below `min_terms` so the stopping rule
/// keeps its semantics.
pub(crate) fn effective_max_terms(coeffs: &[f64], policy: &TruncationPolicy) -> usize {
    let mut eff = policy.max_terms.min(coeffs.len().saturating_sub(1));
    while eff > policy.min_terms && coeffs[eff].abs() < 1e-18 {
        eff -= 1;
    }
    eff.max(policy.min_terms)
}

/// Ladder cache keyed on the exact bit pattern of the Bessel argument;
/// detectors reuse ladders shared across symbols of equal magnitude.
pub(crate) struct LadderCache {
    max_order: usize,
    entries: Vec<(u64, Vec<f64>)>,
}

impl LadderCache {
    pub(crate) fn new(max_order: usize) -> Self {
        Self {
            max_order,
            entries: Vec::new(),
        }
    }

    pub(crate) fn get(&mut self, x: f64) -> Result<&[f64]> {
        let key = x.to_bits();
        if let Some(idx) = self.entries.iter().position(|(k, _)| *k == key) {
            return Ok(&self.entries[idx].1);
        }
        let ladder = special::log_bessel_ladder(self.max_order, x)?;
        self.entries.push((key, ladder));
        Ok(&self.entries.last().unwrap().1)
    }
}

//! High-SNR decision rules for PSK alphabets.
//!
//! As ρ → ∞ the per-antenna statistic `ψ_m = arg(x_m^* y_m)` carries all the
//! information about `arg(s)`: the non-synchronous ML rule reduces to
//! maximizing `Σ_m cos(ψ_m - arg s)`, and the suboptimal fading-channel rule
//! slices the antenna-averaged product vector against the PSK grid.

use super::{argmax_lowest, DecisionResult, SeriesStats};
use crate::error::{Error, Result};
use crate::scenario::Constellation;
use num_complex::Complex64;
use std::f64::consts::PI;

fn require_psk(constellation: &Constellation) -> Result<usize> {
    constellation.psk_order().ok_or_else(|| {
        Error::UnsupportedConstellation(
            "high-SNR decision rules are defined for N-PSK alphabets only".into(),
        )
    })
}

/// High-SNR non-synchronous ML rule: `argmax_n Σ_m cos(ψ_m - 2πn/N)`.
pub fn detect_high_snr_ns(psi: &[f64], constellation: &Constellation) -> Result<DecisionResult> {
    let n = require_psk(constellation)?;
    if psi.is_empty() {
        return Err(Error::DimensionMismatch("empty phase vector".into()));
    }
    let metrics: Vec<f64> = (0..n)
        .map(|k| {
            let target = 2.0 * PI * k as f64 / n as f64;
            psi.iter().map(|p| (p - target).cos()).sum()
        })
        .collect();
    let argmax = argmax_lowest(&metrics);
    Ok(DecisionResult {
        terms_used: vec![0; metrics.len()],
        argmax,
        metrics,
        series_stats: SeriesStats::default(),
    })
}

/// Suboptimal fading-channel rule: average the per-antenna products
/// `v_m = x̃_m^* ỹ_m`, then pick the nearest PSK point in Euclidean distance.
pub fn detect_min_distance_fc_ns(
    v: &[Complex64],
    constellation: &Constellation,
) -> Result<DecisionResult> {
    require_psk(constellation)?;
    if v.is_empty() {
        return Err(Error::DimensionMismatch("empty product vector".into()));
    }
    let zeta = v.iter().sum::<Complex64>() / v.len() as f64;
    // Negated squared distance, so argmax-with-lowest-tie-break applies.
    let metrics: Vec<f64> = constellation
        .points()
        .iter()
        .map(|s| -((zeta - s).norm_sqr()))
        .collect();
    let argmax = argmax_lowest(&metrics);
    Ok(DecisionResult {
        terms_used: vec![0; metrics.len()],
        argmax,
        metrics,
        series_stats: SeriesStats::default(),
    })
}

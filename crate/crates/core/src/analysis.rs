//! Closed-form high-SNR quantities: the synchronous SER floor and the
//! pairwise-error bounds for non-synchronous operation.
//!
//! In synchronous operation the phase statistic at infinite SNR is exactly
//! `arg(s) + φ`, so the residual error probability is the chance that one
//! increment leaves the `±π/N` wedge:
//!
//! `floor = 1 - α_0/N - Σ_l (2α_l / πl) sin(lπ/N)`.
//!
//! The floor depends only on the increment statistics and the PSK order,
//! never on the antenna count. Non-synchronous operation instead averages
//! independent rotations across the array, and the pairwise error of the
//! high-SNR rules concentrates: exponentially in `M` (Bernstein) for the
//! constant channel, and like `1/M` (Chebyshev) for the fading-channel
//! minimum-distance rule.
//!
//! ```
//! use pnsimo::analysis::*;
//! use pnsimo::phase_noise::PhaseNoiseModel;
//!
//! let model = PhaseNoiseModel::von_mises(4.0, 64)?;
//! let floor = ser_floor_sync(&model, 4)?.floor;
//! assert!((floor - 0.1418).abs() < 5e-5);
//!
//! // Non-synchronous arrays drive the floor down with antenna count.
//! let pairwise: Vec<f64> = (1..4)
//!     .map(|n| bernstein_pairwise_bound(4.0, 4, n, 16))
//!     .collect::<Result<_, _>>()?;
//! assert!(union_bound(&pairwise) < floor);
//! # Ok::<(), pnsimo::Error>(())
//! ```

use crate::error::{Error, Result};
use crate::phase_noise::PhaseNoiseModel;
use crate::special::bessel_ratio;
use std::f64::consts::PI;

/// Result of a floor evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorReport {
    pub psk_order: usize,
    pub model: PhaseNoiseModel,
    pub floor: f64,
    pub terms_used: usize,
}

/// High-SNR SER floor for synchronous operation with equiprobable `N`-PSK.
///
/// The Fourier series is summed to relative accuracy 1e-14 (or the stored
/// coefficient length), then cross-checked against direct quadrature of the
/// density over `[-π/N, π/N]`; disagreement beyond 1e-8 is a failure, since
/// the two routes must describe the same density.
pub fn ser_floor_sync(model: &PhaseNoiseModel, psk_order: usize) -> Result<FloorReport> {
    if psk_order < 2 {
        return Err(Error::Domain("PSK order must be at least 2".into()));
    }
    let n = psk_order as f64;

    let mut floor = 1.0 - model.coeff(0) / n;
    let mut terms_used = 0;
    // sin(lπ/N) vanishes at every multiple of N, so a single below-threshold
    // change is not evidence of convergence; require two in a row.
    let mut quiet = 0;
    for l in 1..=model.terms() {
        let lf = l as f64;
        let term = 2.0 * model.coeff(l) / (PI * lf) * (lf * PI / n).sin();
        let prev = floor;
        floor -= term;
        terms_used = l;
        if (floor - prev).abs() < 1e-14 * prev.abs().max(1e-30) {
            quiet += 1;
            if l >= 2 && quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }

    // Second, independent route: 1 - ∫_{-π/N}^{π/N} p(φ) dφ by composite
    // Simpson quadrature of the same density.
    let quad = 1.0 - integrate_pdf(model, PI / n)?;
    if (floor - quad).abs() > 1e-8 {
        return Err(Error::SelfCheck(format!(
            "floor series {floor} and quadrature {quad} disagree"
        )));
    }

    Ok(FloorReport {
        psk_order,
        model: model.clone(),
        floor,
        terms_used,
    })
}

/// Composite Simpson integral of the model density over `[-half, half]`.
fn integrate_pdf(model: &PhaseNoiseModel, half: f64) -> Result<f64> {
    let n = 4096usize; // even panel count; error ~ h^4 is far below 1e-10
    let h = 2.0 * half / n as f64;
    let mut acc = model.pdf(-half)? + model.pdf(half)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * model.pdf(-half + i as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

/// Bernstein bound on the pairwise error of the high-SNR NS rule for the
/// constant channel with von Mises increments: probability of favoring
/// `s_n = e^{j2πn/N}` over the transmitted `s_0 = 1`.
pub fn bernstein_pairwise_bound(
    kappa: f64,
    psk_order: usize,
    n: usize,
    antennas: usize,
) -> Result<f64> {
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(Error::Domain(
            "Bernstein bound requires von Mises concentration κ > 0".into(),
        ));
    }
    if n == 0 || n >= psk_order {
        return Err(Error::Domain(format!(
            "pairwise index must satisfy 1 <= n <= N-1, got n={n}, N={psk_order}"
        )));
    }
    if antennas == 0 {
        return Err(Error::Domain("antenna count must be positive".into()));
    }
    let r = bessel_ratio(1, kappa)?; // I_1(κ)/I_0(κ)
    let sn = (PI * n as f64 / psk_order as f64).sin();
    let cn = (2.0 * PI * n as f64 / psk_order as f64).cos();
    let var = sn * sn * (r * cn / kappa + sn * sn * (1.0 - r * r));
    if var <= 0.0 {
        return Err(Error::Degenerate(format!(
            "per-antenna variance {var} is not positive"
        )));
    }
    let c = sn + sn * sn * r;
    let numerator = antennas as f64 * (sn * sn / var.sqrt() * r).powi(2);
    let denominator = 2.0 + (2.0 / 3.0) * (c * sn * sn / var) * r;
    Ok((-numerator / denominator).exp())
}

/// Chebyshev bound on the pairwise error of the fading-channel
/// minimum-distance rule: `VAR(ξ_n) / E[ξ_n]²`, which carries an explicit
/// `1/M` factor.
pub fn chebyshev_pairwise_bound_fc_ns(
    kappa: f64,
    psk_order: usize,
    n: usize,
    antennas: usize,
) -> Result<f64> {
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(Error::Domain(
            "Chebyshev bound requires von Mises concentration κ > 0".into(),
        ));
    }
    if n == 0 || n >= psk_order {
        return Err(Error::Domain(format!(
            "pairwise index must satisfy 1 <= n <= N-1, got n={n}, N={psk_order}"
        )));
    }
    if antennas == 0 {
        return Err(Error::Domain("antenna count must be positive".into()));
    }
    let angle = 2.0 * PI * n as f64 / psk_order as f64;
    if (angle.cos() - 1.0).abs() < 1e-15 {
        return Err(Error::Domain(
            "pairwise direction with cos(2πn/N) = 1 has zero mean gap".into(),
        ));
    }
    let r1 = bessel_ratio(1, kappa)?;
    let r2 = r1 * bessel_ratio(2, kappa)?; // I_2/I_0 via the ratio chain
    let m = antennas as f64;
    let gap = 1.0 - angle.cos();
    let mean = gap * r1;
    let var = gap * gap / m * (1.0 + r2 - r1 * r1) + angle.sin().powi(2) / m * (1.0 - r2);
    Ok(var / (mean * mean))
}

/// Union bound: clamp the sum of pairwise probabilities at 1.
pub fn union_bound(pairwise: &[f64]) -> f64 {
    pairwise.iter().sum::<f64>().min(1.0)
}

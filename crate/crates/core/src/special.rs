//! Log-domain modified Bessel functions of the first kind and the
//! log-Gamma function.
//!
//! Every detector metric in this crate multiplies pairs of `I_l` values whose
//! arguments grow like `2·ρ·|x_m|·|y_m|`; past roughly 30 dB of SNR those
//! values overflow `f64`. All evaluation therefore happens on the log scale:
//! [`log_bessel_i`] returns `ln I_l(x)` computed through the scaled form
//! `ln(e^{-x} I_l(x)) + x`, which stays finite up to `x = 1e8`.
//!
//! Three evaluation regimes are used internally:
//!
//! * `x ≤ 40` — ascending power series per order (all terms positive, no
//!   cancellation),
//! * `x ≥ 4·l² + 50` — the large-argument asymptotic expansion per order,
//! * in between — a single backward (Miller) recurrence normalized against
//!   `ln I_0(x)`, which yields the whole order ladder in one pass.
//!
//! Ratios `I_l/I_{l-1}` come from a continued fraction rather than from
//! dividing two values, since ratio precision is what drives the series
//! truncation decisions downstream.
//!
//! ```
//! use pnsimo::special::{bessel_ratio, log_bessel_i};
//!
//! // I_0(1000) overflows f64 by almost 420 decades; its log is fine.
//! assert!((log_bessel_i(0, 1000.0)? - 995.6273088898695).abs() < 1e-9);
//!
//! // Ratios stay inside (0, 1) and never touch the raw values.
//! let r = bessel_ratio(1, 4.0)?;
//! assert!((r - 0.8635226110245506).abs() < 1e-12);
//! # Ok::<(), pnsimo::Error>(())
//! ```

use crate::error::{Error, Result};

/// Hard cap on the Bessel order accepted by this module. Detector series
/// observed in practice need fewer than 20 terms, so hitting this cap is
/// reported as an error rather than silently truncated.
pub const MAX_ORDER: usize = 256;

/// Largest argument handled by the ascending power series.
const SERIES_X_MAX: f64 = 40.0;

/// A single evaluation of `ln I_l(x)`.
///
/// `log_value` is finite for all `x > 0`; the case `I_l(0) = 0` for `l ≥ 1`
/// is represented by a `-∞` sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub order: usize,
    pub argument: f64,
    pub log_value: f64,
}

impl BesselEval {
    pub fn new(order: usize, argument: f64) -> Result<Self> {
        Ok(Self {
            order,
            argument,
            log_value: log_bessel_i(order, argument)?,
        })
    }
}

/// Natural log of the modified Bessel function of the first kind, `ln I_l(x)`.
///
/// Returns `-∞` for `l ≥ 1, x = 0`. Fails for negative `x` or orders above
/// [`MAX_ORDER`].
pub fn log_bessel_i(order: usize, x: f64) -> Result<f64> {
    let ladder = log_bessel_ladder(order, x)?;
    Ok(ladder[order])
}

/// The whole ladder `[ln I_0(x), …, ln I_max_order(x)]` in one call.
///
/// This is the primitive the series detectors consume: they need every order
/// up to the truncation point at a fixed argument.
pub fn log_bessel_ladder(max_order: usize, x: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; max_order + 1];
    log_bessel_ladder_into(max_order, x, &mut out)?;
    Ok(out)
}

/// In-place variant of [`log_bessel_ladder`] for hot loops.
pub fn log_bessel_ladder_into(max_order: usize, x: f64, out: &mut [f64]) -> Result<()> {
    if max_order > MAX_ORDER {
        return Err(Error::OrderCap {
            requested: max_order,
            cap: MAX_ORDER,
        });
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "bessel argument must be finite and nonnegative, got {x}"
        )));
    }
    assert!(out.len() > max_order);

    if x == 0.0 {
        out[0] = 0.0;
        for v in out.iter_mut().take(max_order + 1).skip(1) {
            *v = f64::NEG_INFINITY;
        }
    } else if x <= SERIES_X_MAX {
        series_ladder(max_order, x, out);
    } else if x >= asymptotic_min_x(max_order) {
        for (l, v) in out.iter_mut().enumerate().take(max_order + 1) {
            *v = asymptotic_log_i(l, x);
        }
    } else {
        miller_ladder(max_order, x, out);
    }
    Ok(())
}

/// Ratio `I_l(x) / I_{l-1}(x)`, always in `(0, 1)` for `x > 0`.
///
/// Computed by a continued fraction (or, for very large arguments, from the
/// asymptotic expansions), never by dividing two overflow-prone values.
pub fn bessel_ratio(order: usize, x: f64) -> Result<f64> {
    if order == 0 {
        return Err(Error::Domain("bessel_ratio requires order >= 1".into()));
    }
    if order > MAX_ORDER {
        return Err(Error::OrderCap {
            requested: order,
            cap: MAX_ORDER,
        });
    }
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "bessel_ratio argument must be finite and positive, got {x}"
        )));
    }

    let r = if x >= asymptotic_min_x(order) {
        (asymptotic_log_i(order, x) - asymptotic_log_i(order - 1, x)).exp()
    } else {
        ratio_continued_fraction(order, x)?
    };

    // Lemma-style sanity bound: I_{l-1}/I_l > max{1, (2/x)(l - 1/2)},
    // so the ratio must lie below min{1, x/(2l-1)}.
    debug_assert!({
        let cap = (x / (2.0 * order as f64 - 1.0)).min(1.0);
        r > 0.0 && r < cap + 1e-12
    });
    Ok(r)
}

/// `ln Γ(z)` for `z > 0` via the Lanczos approximation (g = 7, 9 terms).
pub fn log_gamma(z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::Domain(format!(
            "log_gamma requires z > 0, got {z}"
        )));
    }
    Ok(ln_gamma_lanczos(z))
}

// --- internals -------------------------------------------------------------

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn ln_gamma_lanczos(z: f64) -> f64 {
    if z < 0.5 {
        // Reflection keeps the approximation in its accurate half-plane.
        let s = (std::f64::consts::PI * z).sin();
        return std::f64::consts::PI.ln() - s.ln() - ln_gamma_lanczos(1.0 - z);
    }
    let z = z - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Smallest argument where the per-order asymptotic series converges to
/// machine precision for every order up to `max_order`.
fn asymptotic_min_x(max_order: usize) -> f64 {
    let l = max_order as f64;
    4.0 * l * l + 50.0
}

/// Ascending series ladder: `ln I_l = l·ln(x/2) - ln l! + ln Σ_k t_k`,
/// `t_0 = 1`, `t_k = t_{k-1}·(x²/4)/(k(k+l))`. Valid for `x ≤ 40`, where the
/// partial sums stay far below overflow.
#[allow(clippy::needless_range_loop)]
fn series_ladder(max_order: usize, x: f64, out: &mut [f64]) {
    let q = x * x / 4.0;
    let log_half_x = (x / 2.0).ln();
    let mut ln_factorial = 0.0;
    for l in 0..=max_order {
        if l > 0 {
            ln_factorial += (l as f64).ln();
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..400 {
            term *= q / (k as f64 * (k + l) as f64);
            sum += term;
            if term < sum * 1e-18 {
                break;
            }
        }
        out[l] = l as f64 * log_half_x - ln_factorial + sum.ln();
    }
}

/// Large-argument expansion
/// `I_l(x) ~ e^x/√(2πx) · Σ_k (-1)^k a_k(l)/x^k`,
/// `a_k(l) = Π_{j=1..k}(4l² - (2j-1)²)/(k! 8^k)`.
fn asymptotic_log_i(order: usize, x: f64) -> f64 {
    let mu = 4.0 * (order as f64) * (order as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60u32 {
        let odd = 2.0 * k as f64 - 1.0;
        term *= -(mu - odd * odd) / (8.0 * k as f64 * x);
        let prev = sum;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        // Asymptotic series: stop before terms start to grow.
        if term.abs() > prev.abs() {
            break;
        }
    }
    x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln()
}

/// Backward (Miller) recurrence `f_{j-1} = (2j/x)·f_j + f_{j+1}` started far
/// above `max_order`, normalized against `ln I_0(x)`. Stores each ladder
/// entry in log space so rescaling never under- or overflows.
fn miller_ladder(max_order: usize, x: f64, out: &mut [f64]) {
    // Contamination by the second recurrence solution decays like
    // exp(-(p² - l²)/x); this start order leaves > 30 decades of margin.
    let start = max_order + (74.0 * x).sqrt().ceil() as usize + 10;
    let two_over_x = 2.0 / x;

    let mut f_next = 0.0_f64; // f_{j+1}
    let mut f = 1e-30_f64; // f_j at j = start
    let mut scale_log = 0.0_f64;

    let mut j = start;
    while j > 0 {
        let f_prev = (j as f64) * two_over_x * f + f_next;
        f_next = f;
        f = f_prev;
        j -= 1;
        if f > 1e250 {
            f *= 1e-250;
            f_next *= 1e-250;
            scale_log += 250.0 * std::f64::consts::LN_10;
        }
        if j <= max_order {
            out[j] = f.ln() + scale_log;
        }
    }

    let log_i0 = log_i0_direct(x);
    let anchor = out[0];
    for v in out.iter_mut().take(max_order + 1) {
        *v = log_i0 + (*v - anchor);
    }
}

fn log_i0_direct(x: f64) -> f64 {
    if x <= SERIES_X_MAX {
        let mut one = [0.0];
        series_ladder(0, x, &mut one);
        one[0]
    } else {
        asymptotic_log_i(0, x)
    }
}

/// Continued fraction for `I_l/I_{l-1}`:
/// `r_l = 1/(b_1 + 1/(b_2 + …))` with `b_k = 2(l+k-1)/x` (modified Lentz).
fn ratio_continued_fraction(order: usize, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let b = |k: usize| 2.0 * (order + k - 1) as f64 / x;

    let mut f = b(1);
    if f == 0.0 {
        f = TINY;
    }
    let mut c = f;
    let mut d = 0.0;
    for k in 2..400_000 {
        let bk = b(k);
        d += bk;
        if d == 0.0 {
            d = TINY;
        }
        c = bk + 1.0 / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(1.0 / f);
        }
    }
    Err(Error::Degenerate(format!(
        "bessel ratio continued fraction failed to converge (order {order}, x {x})"
    )))
}

//! Property suites over randomized inputs.

use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use pnsimo::analysis::{ser_floor_sync, union_bound};
use pnsimo::detect::{
    detect_high_snr_ns, detect_min_distance_fc_ns, log_truncated_series, LogCoeff,
    TruncationPolicy,
};
use pnsimo::phase_noise::{wrap_angle, PhaseNoiseModel};
use pnsimo::rng::substream;
use pnsimo::scenario::{simulate_two_slot, ChannelKind, Constellation, OscillatorMode, Scenario};
use pnsimo::special::{bessel_ratio, log_bessel_ladder};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wrap_angle_lands_in_half_open_interval(phi in -100.0f64..100.0) {
        let w = wrap_angle(phi);
        prop_assert!((-PI..PI).contains(&w));
        // Wrapping is idempotent and 2π-periodic.
        prop_assert_eq!(wrap_angle(w), w);
        let shifted = wrap_angle(phi + 2.0 * PI);
        prop_assert!((shifted - w).abs() < 1e-9 || (shifted - w).abs() > 2.0 * PI - 1e-9);
    }

    #[test]
    fn von_mises_coefficients_decrease(kappa in 0.01f64..50.0) {
        let m = PhaseNoiseModel::von_mises(kappa, 24).unwrap();
        prop_assert_eq!(m.coeff(0), 1.0);
        for l in 1..=24 {
            prop_assert!(m.coeff(l) > 0.0);
            prop_assert!(m.coeff(l) < m.coeff(l - 1));
        }
    }

    #[test]
    fn pdf_is_even(kappa in 0.0f64..20.0, phi in -PI..PI) {
        let m = PhaseNoiseModel::von_mises(kappa, 64).unwrap();
        prop_assert_eq!(m.pdf(phi).unwrap(), m.pdf(-phi).unwrap());
    }

    #[test]
    fn convolution_composes(sigma2 in 0.001f64..0.3, a in 1u32..5, b in 1u32..5) {
        let m = PhaseNoiseModel::wrapped_gaussian(sigma2, 32).unwrap();
        let lhs = m.convolve_iid(a).unwrap().convolve_iid(b).unwrap();
        let rhs = m.convolve_iid(a * b).unwrap();
        for l in 0..=32 {
            prop_assert!((lhs.coeff(l) - rhs.coeff(l)).abs() < 1e-13);
        }
    }

    #[test]
    fn floor_stays_in_range(kappa in 0.0f64..30.0, n in 2usize..9) {
        let m = PhaseNoiseModel::von_mises(kappa, 64).unwrap();
        let rep = ser_floor_sync(&m, n).unwrap();
        prop_assert!(rep.floor >= -1e-12);
        prop_assert!(rep.floor <= 1.0 - 1.0 / n as f64 + 1e-12);
    }

    #[test]
    fn union_bound_properties(values in prop::collection::vec(0.0f64..0.4, 1..6)) {
        let u = union_bound(&values);
        let sum: f64 = values.iter().sum();
        prop_assert!(u <= 1.0);
        prop_assert!(u <= sum + 1e-15);
        if sum <= 1.0 {
            prop_assert!((u - sum).abs() < 1e-15);
        }
        let max = values.iter().cloned().fold(0.0f64, f64::max);
        prop_assert!(u >= max - 1e-15);
    }

    #[test]
    fn ladder_monotone_in_order(x in 0.01f64..5000.0) {
        let ladder = log_bessel_ladder(20, x).unwrap();
        for l in 1..=20 {
            prop_assert!(ladder[l] < ladder[l - 1], "x={x}, l={l}");
        }
    }

    #[test]
    fn ratio_in_unit_interval_and_increasing_in_x(l in 1usize..12, x in 0.01f64..200.0) {
        let r = bessel_ratio(l, x).unwrap();
        prop_assert!(r > 0.0 && r < 1.0);
        let r2 = bessel_ratio(l, x * 1.5).unwrap();
        prop_assert!(r2 > r);
    }

    #[test]
    fn series_value_shifts_by_log_scale(
        scale in 0.01f64..100.0,
        angle in -PI..PI,
        decay in 0.2f64..2.0,
    ) {
        // Scaling every β_l by c > 0 adds exactly ln c to the log value.
        let policy = TruncationPolicy::default();
        let coeffs: Vec<LogCoeff> = (0..=16)
            .map(|l| LogCoeff::from_value((-decay * l as f64).exp()))
            .collect();
        let scaled: Vec<LogCoeff> = coeffs
            .iter()
            .map(|c| LogCoeff { log_abs: c.log_abs + scale.ln(), sign: c.sign })
            .collect();
        let base = log_truncated_series(&coeffs, angle, &policy).unwrap();
        let shifted = log_truncated_series(&scaled, angle, &policy).unwrap();
        // The stopping rule watches the log value itself, so the two runs
        // may truncate at slightly different ν; both truncation errors are
        // bounded by delta_acc times the value scale.
        prop_assert!((shifted.log_value - base.log_value - scale.ln()).abs() < 1e-9);
    }

    #[test]
    fn trailing_zero_coefficients_do_not_change_value(angle in -PI..PI) {
        let policy = TruncationPolicy::default();
        let mut coeffs: Vec<LogCoeff> = (0..=8)
            .map(|l| LogCoeff::from_value((-0.7 * l as f64).exp()))
            .collect();
        let base = log_truncated_series(&coeffs, angle, &policy).unwrap();
        coeffs.extend(std::iter::repeat_n(LogCoeff::from_value(0.0), 20));
        let padded = log_truncated_series(&coeffs, angle, &policy).unwrap();
        prop_assert_eq!(base.log_value, padded.log_value);
    }

    #[test]
    fn high_snr_rule_is_periodic_and_equivariant(
        psi in prop::collection::vec(-PI..PI, 1..12),
        n in 2usize..9,
    ) {
        let c = Constellation::psk(n).unwrap();
        let base = detect_high_snr_ns(&psi, &c).unwrap();
        // 2π shifts change nothing.
        let shifted: Vec<f64> = psi.iter().map(|p| p + 2.0 * PI).collect();
        let res = detect_high_snr_ns(&shifted, &c).unwrap();
        for (a, b) in base.metrics.iter().zip(&res.metrics) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        // Rotating every phase by one PSK step permutes the metrics.
        let step: Vec<f64> = psi.iter().map(|p| p + 2.0 * PI / n as f64).collect();
        let rot = detect_high_snr_ns(&step, &c).unwrap();
        for k in 0..n {
            prop_assert!((rot.metrics[(k + 1) % n] - base.metrics[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn min_distance_rule_is_psk_equivariant(
        re in prop::collection::vec(-2.0f64..2.0, 1..10),
        im in prop::collection::vec(-2.0f64..2.0, 1..10),
    ) {
        let len = re.len().min(im.len());
        let v: Vec<Complex64> = (0..len).map(|i| Complex64::new(re[i], im[i])).collect();
        let c = Constellation::psk(4).unwrap();
        let base = detect_min_distance_fc_ns(&v, &c).unwrap();
        let rot_point = c.points()[1];
        let rotated: Vec<Complex64> = v.iter().map(|z| z * rot_point).collect();
        let rot = detect_min_distance_fc_ns(&rotated, &c).unwrap();
        for k in 0..4 {
            prop_assert!((rot.metrics[(k + 1) % 4] - base.metrics[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn simulation_is_substream_deterministic(
        seed in any::<u64>(),
        trial in 0u64..1000,
        sym in 0usize..4,
    ) {
        let scn = Scenario::new(
            ChannelKind::Fading,
            OscillatorMode::NonSynchronous,
            2.0,
            3,
            Constellation::psk(4).unwrap(),
            PhaseNoiseModel::von_mises(4.0, 16).unwrap(),
        ).unwrap();
        let mut a = substream(seed, &[0, trial]);
        let mut b = substream(seed, &[0, trial]);
        let one = simulate_two_slot(&scn, sym, &mut a).unwrap();
        let two = simulate_two_slot(&scn, sym, &mut b).unwrap();
        prop_assert_eq!(one, two);
    }
}

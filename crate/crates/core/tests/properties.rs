//! Property suites for the algebraic invariants of the public API.

use proptest::prelude::*;

use sicmaser::{
    angular_delta_p, delta_p_from_intensities, isotope_site_probabilities, lorentzian_derivative,
    masing_margin, saturation_delta_p, splitting_first_order, superradiance_exponent, threshold_q,
    trace_from_string, trace_to_string, LineShapeParams, MaserParams, Orientation, SaturationParams,
    SpectrumTrace, SpinSystem, TraceMeta, TransitionLabel,
};

fn v2() -> SpinSystem {
    SpinSystem::v2(0.2).unwrap()
}

fn base_maser_params() -> MaserParams {
    MaserParams::new(3.0e3, 1.0e3, 6.28e6, 5.84e10, 7.8e13, 0.3).unwrap()
}

proptest! {
    #[test]
    fn first_order_splitting_symmetric_about_equator(theta in 0.0..std::f64::consts::PI) {
        let system = v2();
        let a = splitting_first_order(&system, Orientation::from_radians(theta).unwrap());
        let b = splitting_first_order(
            &system,
            Orientation::from_radians(std::f64::consts::PI - theta).unwrap(),
        );
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn intensity_scaling_is_homogeneous(
        i_exc in -1e3..1e3_f64,
        i_dark in prop::sample::select(vec![0.4_f64, 1.0, 2.5, -3.0]),
        c in prop::sample::select(vec![0.5_f64, 2.0, 4.0]),
    ) {
        let dpb = 3.7e-4;
        let base = delta_p_from_intensities(i_exc, i_dark, dpb, TransitionLabel::BMinus)
            .unwrap()
            .delta_p;
        let scaled_exc = delta_p_from_intensities(c * i_exc, i_dark, dpb, TransitionLabel::BMinus)
            .unwrap()
            .delta_p;
        prop_assert!((scaled_exc - c * base).abs() <= 1e-12 * base.abs().max(1e-12));

        let scaled_dark = delta_p_from_intensities(i_exc, c * i_dark, dpb, TransitionLabel::BMinus)
            .unwrap()
            .delta_p;
        prop_assert!((scaled_dark - base / c).abs() <= 1e-12 * base.abs().max(1e-12));
    }

    #[test]
    fn saturation_curve_is_concave(
        p0 in 0.5..50.0_f64,
        p_alpha in 0.0..10.0_f64,
        power in 0.0..400.0_f64,
        h in 0.01..20.0_f64,
    ) {
        let params = SaturationParams::new(0.05, p0, p_alpha).unwrap();
        let lo = saturation_delta_p(&params, power).unwrap();
        let mid = saturation_delta_p(&params, power + h).unwrap();
        let hi = saturation_delta_p(&params, power + 2.0 * h).unwrap();
        prop_assert!(2.0 * mid >= lo + hi - 1e-12);
    }

    #[test]
    fn derivative_line_is_odd_and_linear(
        du in 1e-4..2.0_f64,
        amplitude in prop::sample::select(vec![0.25_f64, 1.0, -3.0]),
    ) {
        let params = LineShapeParams::new(0.05, amplitude, 100.0).unwrap();
        let up = lorentzian_derivative(100.0 + du, &params);
        let down = lorentzian_derivative(100.0 - du, &params);
        prop_assert!((up + down).abs() <= 1e-12 * up.abs().max(1e-300));

        let doubled = LineShapeParams::new(0.05, 2.0 * amplitude, 100.0).unwrap();
        prop_assert_eq!(lorentzian_derivative(100.0 + du, &doubled), 2.0 * up);
    }

    #[test]
    fn polarization_tracks_the_splitting(theta in 0.0..std::f64::consts::PI) {
        // delta_p(theta) / dB(theta) is angle-free wherever dB does not vanish
        let x = 3.0 * theta.cos() * theta.cos() - 1.0;
        prop_assume!(x.abs() >= 0.05);
        let system = v2();
        let orient = Orientation::from_radians(theta).unwrap();
        let ratio = angular_delta_p(0.24, orient) / splitting_first_order(&system, orient);
        let at_zero = angular_delta_p(0.24, Orientation::from_radians(0.0).unwrap())
            / splitting_first_order(&system, Orientation::from_radians(0.0).unwrap());
        prop_assert!((ratio - at_zero).abs() <= 1e-9 * at_zero.abs());
    }

    #[test]
    fn threshold_invariant_under_collective_scalings(c in prop::sample::select(vec![0.125_f64, 0.5, 2.0, 64.0])) {
        let p = base_maser_params();
        let q = threshold_q(&p).unwrap();

        let mut ratio_scaled = p;
        ratio_scaled.spin_decay_rate *= c;
        ratio_scaled.spin_count *= c;
        prop_assert!((threshold_q(&ratio_scaled).unwrap() - q).abs() <= 1e-12 * q);

        let mut rate_scaled = p;
        rate_scaled.pump_rate *= c;
        rate_scaled.relaxation_rate *= c;
        prop_assert!((threshold_q(&rate_scaled).unwrap() - q).abs() <= 1e-12 * q);
    }

    #[test]
    fn margin_is_homogeneous_in_q(c in 0.01..100.0_f64) {
        let p = base_maser_params();
        let m1 = masing_margin(1.0e4, &p).unwrap().margin;
        let mc = masing_margin(c * 1.0e4, &p).unwrap().margin;
        prop_assert!((mc - c * m1).abs() <= 1e-9 * mc.abs());
    }

    #[test]
    fn exponent_invariant_under_common_rescaling(
        c in 0.01..100.0_f64,
        d in 0.01..100.0_f64,
    ) {
        let base = superradiance_exponent(13.64, 1.0, 3.38, 1.0).unwrap().exponent_k;
        let scaled = superradiance_exponent(13.64 * c, c, 3.38 * d, d).unwrap().exponent_k;
        prop_assert!((scaled - base).abs() <= 1e-9 * base.abs());
    }

    #[test]
    fn site_probabilities_form_a_distribution(a in 0.0..1.0_f64, n in 1u32..40) {
        let p = isotope_site_probabilities(a, n).unwrap();
        for v in [p.p_central, p.p_one_satellite, p.p_multi] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!((p.p_central + p.p_one_satellite + p.p_multi - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn trace_serialization_round_trips_bit_exactly(
        start in 1.0..500.0_f64,
        step in 1e-3..0.1_f64,
        n in 2usize..64,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let field: Vec<f64> = (0..n).map(|i| start + i as f64 * step).collect();
        let signal: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let trace = SpectrumTrace::new(field, signal, TraceMeta::default()).unwrap();
        let back = trace_from_string(&trace_to_string(&trace)).unwrap();
        prop_assert_eq!(back.field_mt(), trace.field_mt());
        prop_assert_eq!(back.signal(), trace.signal());
    }
}

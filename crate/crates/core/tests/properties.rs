//! Property tests for the structural invariants: unitarity, post-selection
//! algebra, covariance, completeness, and round-trip serialization.

use noonlab::background::fourier_decompose;
use noonlab::construction::{run_paper_chain, ChainParams};
use noonlab::detection::{
    fanout_distinct_probability, pattern_probability, AnalyzerConfig, DetectionPattern,
};
use noonlab::elements::{
    hwp, partial_polarizer, phase_shift, qwp, rotator, PostSelectionOutcome,
};
use noonlab::experiment::fit::fit_fringe;
use noonlab::experiment::FringeData;
use noonlab::transform::apply_mode_transform;
use noonlab::{Complex, ModeSet, StateVector};
use proptest::prelude::*;
use std::f64::consts::TAU;

/// A random normalized three-photon polarization state.
fn three_photon_state() -> impl Strategy<Value = StateVector> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)
        .prop_filter_map("needs a nonzero amplitude", |amps| {
            let total: f64 = amps.iter().map(|(re, im)| re * re + im * im).sum();
            if total < 1e-3 {
                return None;
            }
            let occs = [[3u32, 0], [2, 1], [1, 2], [0, 3]];
            let terms: Vec<([u32; 2], Complex)> = occs
                .iter()
                .zip(&amps)
                .map(|(&occ, &(re, im))| (occ, Complex::new(re, im)))
                .collect();
            let state = StateVector::from_terms(ModeSet::polarization(), 3, terms).unwrap();
            Some(state.normalized().unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wave_plates_preserve_the_norm(
        state in three_photon_state(),
        theta in 0.0..TAU,
        gamma_choice in 0usize..3,
        phi in 0.0..TAU,
    ) {
        let element = match gamma_choice {
            0 => hwp(theta),
            1 => qwp(theta),
            _ => rotator(theta),
        };
        let out = apply_mode_transform(&state, &element).unwrap();
        let out = apply_mode_transform(&out, &phase_shift(phi)).unwrap();
        prop_assert!((out.squared_norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn attenuation_composes_multiplicatively(
        state in three_photon_state(),
        t1 in 0.2f64..1.0,
        t2 in 0.2f64..1.0,
    ) {
        // Two partial polarizers in sequence equal one with the product
        // transmission, in both state and success probability.
        let first = PostSelectionOutcome::from_unnormalized(
            apply_mode_transform(&state, &partial_polarizer(1.0, t1).unwrap()).unwrap(),
        );
        let second = PostSelectionOutcome::from_unnormalized(
            apply_mode_transform(&first.state, &partial_polarizer(1.0, t2).unwrap()).unwrap(),
        );
        let combined = PostSelectionOutcome::from_unnormalized(
            apply_mode_transform(&state, &partial_polarizer(1.0, t1 * t2).unwrap()).unwrap(),
        );
        let chained = first.success_probability * second.success_probability;
        prop_assert!((chained - combined.success_probability).abs() < 1e-10);
        let overlap = second
            .state
            .fidelity_up_to_global_phase(&combined.state)
            .unwrap();
        prop_assert!(overlap > 1.0 - 1e-10);
    }

    #[test]
    fn detection_is_rotation_covariant(
        state in three_photon_state(),
        alpha in -TAU..TAU,
        n_plus in 0u32..=3,
    ) {
        let pattern = DetectionPattern::new(n_plus, 3 - n_plus);
        let base = AnalyzerConfig::plus_minus_45();
        let p0 = pattern_probability(&state, &base, pattern).unwrap();
        let rotated = apply_mode_transform(&state, &rotator(alpha)).unwrap();
        let turned = AnalyzerConfig::new(
            base.basis + alpha,
            base.detectors_plus,
            base.detectors_minus,
        )
        .unwrap();
        let p1 = pattern_probability(&rotated, &turned, pattern).unwrap();
        prop_assert!((p0 - p1).abs() < 1e-10);
    }

    #[test]
    fn patterns_are_complete(
        state in three_photon_state(),
        basis in 0.0..TAU,
    ) {
        let analyzer = AnalyzerConfig::new(basis, 3, 3).unwrap();
        let total: f64 = (0..=3u32)
            .map(|k| {
                pattern_probability(&state, &analyzer, DetectionPattern::new(k, 3 - k))
                    .unwrap()
            })
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn chain_phases_add(
        a in 0.0..TAU,
        b in 0.0..TAU,
    ) {
        let params = ChainParams::default();
        let direct = run_paper_chain(a + b, &params).unwrap().state;
        let stepped = apply_mode_transform(
            &run_paper_chain(a, &params).unwrap().state,
            &phase_shift(b),
        )
        .unwrap();
        let overlap = direct.fidelity_up_to_global_phase(&stepped).unwrap();
        prop_assert!(overlap > 1.0 - 1e-10);
    }

    #[test]
    fn state_json_round_trips(state in three_photon_state()) {
        let text = state.to_json();
        let back = StateVector::from_json(&text).unwrap();
        prop_assert!(back.fidelity_up_to_global_phase(&state).unwrap() > 1.0 - 1e-12);
        for (occ, amp) in state.terms() {
            let b = back.amplitude(occ);
            prop_assert!((b - amp).norm() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trips_shortest_floats(
        rows in proptest::collection::vec(
            (0.0f64..7.0, 0.0f64..1e6, 0.0f64..1e6, 0.0f64..1e3),
            1..20,
        ),
    ) {
        let data = FringeData {
            phis: rows.iter().map(|r| r.0).collect(),
            mean: rows.iter().map(|r| r.1).collect(),
            sampled: rows.iter().map(|r| r.2).collect(),
            sigma: rows.iter().map(|r| r.3).collect(),
        };
        let back = FringeData::from_csv(&data.to_csv()).unwrap();
        prop_assert_eq!(back.phis, data.phis);
        prop_assert_eq!(back.mean, data.mean);
        prop_assert_eq!(back.sampled, data.sampled);
        prop_assert_eq!(back.sigma, data.sigma);
    }

    #[test]
    fn fourier_recovers_random_trig_polynomials(
        constant in 0.5f64..100.0,
        c1 in -10.0f64..10.0,
        s1 in -10.0f64..10.0,
        c2 in -10.0f64..10.0,
        s2 in -10.0f64..10.0,
        c3 in -10.0f64..10.0,
        s3 in -10.0f64..10.0,
    ) {
        let n = 16;
        let phis: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
        let values: Vec<f64> = phis
            .iter()
            .map(|&p| {
                constant
                    + c1 * p.cos() + s1 * p.sin()
                    + c2 * (2.0 * p).cos() + s2 * (2.0 * p).sin()
                    + c3 * (3.0 * p).cos() + s3 * (3.0 * p).sin()
            })
            .collect();
        let d = fourier_decompose(&phis, &values, 3).unwrap();
        prop_assert!((d.constant - constant).abs() < 1e-9);
        for (k, (c, s)) in [(1, (c1, s1)), (2, (c2, s2)), (3, (c3, s3))] {
            prop_assert!((d.cos_coeffs[k - 1] - c).abs() < 1e-9);
            prop_assert!((d.sin_coeffs[k - 1] - s).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_is_exact_and_scale_invariant(
        a in 1.0f64..1000.0,
        visibility in 0.01f64..0.99,
        delta in -3.0f64..3.0,
        k in 1u32..4,
        scale in 0.1f64..100.0,
    ) {
        let n = 24;
        let phis: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
        let values: Vec<f64> = phis
            .iter()
            .map(|&p| a * (1.0 + visibility * (k as f64 * p + delta).cos()))
            .collect();
        let fit = fit_fringe(&phis, &values, k).unwrap();
        prop_assert!((fit.visibility - visibility).abs() < 1e-9);
        let wrapped = (fit.delta - delta).rem_euclid(TAU).min(
            (delta - fit.delta).rem_euclid(TAU),
        );
        prop_assert!(wrapped < 1e-8);

        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let fit2 = fit_fringe(&phis, &scaled, k).unwrap();
        prop_assert!((fit2.visibility - fit.visibility).abs() < 1e-10);
    }

    #[test]
    fn fanout_recurrence_holds(n in 1u32..6, k in 1u32..8) {
        let whole = fanout_distinct_probability(n, k);
        let step = fanout_distinct_probability(n - 1, k)
            * ((k as f64 - (n - 1) as f64).max(0.0) / k as f64);
        prop_assert!((whole - step).abs() < 1e-12);
    }
}

//! Cross-module flows: chain into analyzer into decomposition and fits,
//! background composition, serialization of whole results.

use approx::assert_abs_diff_eq;
use noonlab::background::{
    accidental_triples, fourier_decompose, paper_channels, subtract_background, SourceRates,
};
use noonlab::construction::{run_paper_chain, ChainParams};
use noonlab::detection::{AnalyzerConfig, DetectionPattern};
use noonlab::experiment::fit::fit_fringe;
use noonlab::experiment::{scan, BackgroundModel, PhaseScan, ScanConfig};
use noonlab::StateVector;
use std::f64::consts::TAU;

fn triples_config(seed: u64, background: bool) -> ScanConfig {
    ScanConfig {
        phases: PhaseScan::full_period(24).unwrap(),
        chain: ChainParams::default(),
        analyzer: AnalyzerConfig::plus_minus_45(),
        pattern: DetectionPattern::new(2, 1),
        scale: 2.0e4,
        background: background.then(|| BackgroundModel {
            rates: SourceRates::paper_like(),
            channels: paper_channels(),
        }),
        seed,
    }
}

#[test]
fn signal_scan_is_a_pure_three_fold_fringe() {
    let data = scan(&triples_config(1, false)).unwrap();
    let d = fourier_decompose(&data.phis, &data.mean, 3).unwrap();
    assert!(d.constant > 0.0);
    assert!(d.amplitude(1) < 1e-10 * d.constant);
    assert!(d.amplitude(2) < 1e-10 * d.constant);
    assert_abs_diff_eq!(d.amplitude(3) / d.constant, 1.0, epsilon = 1e-10);
    // The third harmonic rides in antiphase: amplitude cos(3 phi + pi).
    assert_abs_diff_eq!(d.phase(3).cos(), -1.0, epsilon = 1e-9);
}

#[test]
fn background_subtraction_recovers_the_signal_means() {
    let with_bg = scan(&triples_config(2, true)).unwrap();
    let without = scan(&triples_config(2, false)).unwrap();
    let rates = SourceRates::paper_like();
    let channels = paper_channels();
    let analyzer = AnalyzerConfig::plus_minus_45();
    let bg: Vec<f64> = with_bg
        .phis
        .iter()
        .map(|&phi| {
            accidental_triples(&rates, &channels, &analyzer, DetectionPattern::new(2, 1), phi)
                .unwrap()
        })
        .collect();
    let clean =
        subtract_background(&with_bg.phis, &with_bg.mean, &with_bg.phis, &bg).unwrap();
    for (a, b) in clean.iter().zip(&without.mean) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-8);
    }
}

#[test]
fn sampled_fit_recovers_the_diluted_visibility() {
    let config = triples_config(9, true);
    let data = scan(&config).unwrap();
    let fit = fit_fringe(&data.phis, &data.sampled, 3).unwrap();
    let truth = fit_fringe(&data.phis, &data.mean, 3).unwrap();
    assert!(
        (fit.visibility - truth.visibility).abs() < 5.0 * fit.visibility_err,
        "fit {} vs truth {} err {}",
        fit.visibility,
        truth.visibility,
        fit.visibility_err
    );
    assert!(truth.visibility < 1.0);
    assert!(!fit.flagged);
}

#[test]
fn chain_result_json_is_complete_and_parseable() {
    let result = run_paper_chain(0.4, &ChainParams::default()).unwrap();
    let text = result.to_json();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(value["success_probability"].as_f64().unwrap() > 0.1);
    assert_abs_diff_eq!(
        value["phase_origin"].as_f64().unwrap(),
        std::f64::consts::PI / 6.0,
        epsilon = 1e-12
    );
    let stages: Vec<String> = value["stage_log"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["label"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(
        stages,
        ["dc_pair", "pbs", "hwp", "pp", "inject_lo", "qwp", "wedge"]
    );

    // The embedded state round-trips.
    let state_text = serde_json::to_string(&value["state"]).unwrap();
    let state = StateVector::from_json(&state_text).unwrap();
    assert!(state.fidelity_up_to_global_phase(&result.state).unwrap() > 1.0 - 1e-12);
}

#[test]
fn decomposition_and_fit_agree_on_the_same_data() {
    let data = scan(&triples_config(4, true)).unwrap();
    let d = fourier_decompose(&data.phis, &data.sampled, 3).unwrap();
    let fit = fit_fringe(&data.phis, &data.sampled, 3).unwrap();
    // Same constant and third-harmonic magnitude, up to the fit's use of
    // the identical design matrix: both are exact projections here.
    assert_abs_diff_eq!(d.constant, fit.a_offset, epsilon = 1e-8 * d.constant.abs());
    assert_abs_diff_eq!(
        d.amplitude(3),
        fit.b_amplitude,
        epsilon = 1e-6 * d.constant.abs()
    );
}

#[test]
fn scan_grid_matches_requested_phases() {
    let config = triples_config(5, false);
    let data = scan(&config).unwrap();
    for (i, &phi) in data.phis.iter().enumerate() {
        assert_abs_diff_eq!(phi, TAU * i as f64 / 24.0, epsilon = 1e-12);
    }
}

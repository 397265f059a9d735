//! Canned scans that mirror the published figures: the one-, two-, and
//! three-fold fringes, the sensitivity floor, and the (3,0) analogues.
//!
//! Count scales are derived at run time instead of frozen: fringes
//! without background normalize their constant term to a round target,
//! and fringes with background set the mean signal to twice the
//! background constant, the signal-to-background regime of the original
//! runs.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::background::{accidental_triples, paper_channels, SourceRates};
use crate::construction::{dc_transit, ChainParams};
use crate::detection::{
    coincidence_rate, phase_sensitivity, AnalyzerConfig, DetectionPattern,
};
use crate::elements::phase_shift;
use crate::error::{Error, Result};
use crate::experiment::fit::{fit_fringe, FringeFit};
use crate::experiment::{poisson, scan, BackgroundModel, FringeData, PhaseScan, ScanConfig};
use crate::transform::apply_mode_transform;

/// The reproducible figure scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// LO singles fringe on the plus port, one-fold, diluted by the flat
    /// down-conversion singles floor.
    Fig2a,
    /// Down-converted pair through the full stack, (1,1) doubles,
    /// two-fold with unit visibility.
    Fig2b,
    /// The headline (2,1) triples fringe, three-fold, on an accidental
    /// background at 2:1 signal to background.
    Fig2c,
    /// Phase sensitivity of the three-photon estimator across the scan.
    Fig2d,
    /// Ideal (3,0) triples fringe at high counts.
    Fig3a,
    /// (3,0) triples on the accidental background.
    Fig3b,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig2c => "fig2c",
            Preset::Fig2d => "fig2d",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
        }
    }

    pub fn all() -> [Preset; 6] {
        [
            Preset::Fig2a,
            Preset::Fig2b,
            Preset::Fig2c,
            Preset::Fig2d,
            Preset::Fig3a,
            Preset::Fig3b,
        ]
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig2a" => Ok(Preset::Fig2a),
            "fig2b" => Ok(Preset::Fig2b),
            "fig2c" => Ok(Preset::Fig2c),
            "fig2d" => Ok(Preset::Fig2d),
            "fig3a" => Ok(Preset::Fig3a),
            "fig3b" => Ok(Preset::Fig3b),
            other => Err(Error::InvalidParameter(format!(
                "unknown preset '{other}'; expected one of fig2a/fig2b/fig2c/fig2d/fig3a/fig3b"
            ))),
        }
    }
}

/// A preset's complete output: the dataset, its fit (when one applies),
/// and the background constant (when one was used).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReproduceBundle {
    pub preset: String,
    pub seed: u64,
    pub fit_harmonic: Option<u32>,
    pub background_constant: Option<f64>,
    pub data: FringeData,
    pub fit: Option<FringeFit>,
}

impl ReproduceBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle json")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }
}

const POINTS: usize = 24;
const SINGLES_TARGET: f64 = 5.0e3;
const DOUBLES_TARGET: f64 = 1.0e3;
const TRIPLES_TARGET: f64 = 1.0e4;
const SIGNAL_TO_BACKGROUND: f64 = 2.0;

/// Run one preset with the given sampling seed.
pub fn reproduce(preset: Preset, seed: u64) -> Result<ReproduceBundle> {
    match preset {
        Preset::Fig2a => singles_fringe(seed),
        Preset::Fig2b => pair_fringe(seed),
        Preset::Fig2c => triples_fringe(seed, DetectionPattern::new(2, 1), None),
        Preset::Fig2d => sensitivity_floor(seed),
        Preset::Fig3a => {
            triples_fringe(seed, DetectionPattern::new(3, 0), Some(TRIPLES_TARGET))
        }
        Preset::Fig3b => triples_fringe(seed, DetectionPattern::new(3, 0), None),
    }
    .map(|mut bundle| {
        bundle.preset = preset.name().to_string();
        bundle.seed = seed;
        bundle
    })
}

fn sample_record(seed: u64, means: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut sampled = Vec::with_capacity(means.len());
    let mut sigma = Vec::with_capacity(means.len());
    for (i, &mean) in means.iter().enumerate() {
        sampled.push(poisson::sample_streamed(seed, i as u64, mean)? as f64);
        sigma.push(mean.sqrt());
    }
    Ok((sampled, sigma))
}

fn empty_bundle() -> ReproduceBundle {
    ReproduceBundle {
        preset: String::new(),
        seed: 0,
        fit_harmonic: None,
        background_constant: None,
        data: FringeData {
            phis: Vec::new(),
            mean: Vec::new(),
            sampled: Vec::new(),
            sigma: Vec::new(),
        },
        fit: None,
    }
}

/// LO plus down-conversion singles at the plus port, normalized to a
/// round constant.
fn singles_fringe(seed: u64) -> Result<ReproduceBundle> {
    let rates = SourceRates::paper_like();
    let phis = PhaseScan::full_period(POINTS)?.phis();
    let raw: Vec<f64> = phis
        .iter()
        .map(|&phi| rates.lo.singles.plus.rate(phi) + rates.dc.singles.plus.rate(phi))
        .collect();
    let constant = raw.iter().sum::<f64>() / raw.len() as f64;
    let g = SINGLES_TARGET / constant;
    let mean: Vec<f64> = raw.iter().map(|r| r * g).collect();
    let (sampled, sigma) = sample_record(seed, &mean)?;
    let fit = fit_fringe(&phis, &sampled, 1)?;
    Ok(ReproduceBundle {
        fit_harmonic: Some(1),
        data: FringeData {
            phis,
            mean,
            sampled,
            sigma,
        },
        fit: Some(fit),
        ..empty_bundle()
    })
}

/// The surviving pair after the full attenuator stack, traversing the
/// same quarter-wave plate and wedge as the triple, detected in
/// coincidence across the two ports.
fn pair_fringe(seed: u64) -> Result<ReproduceBundle> {
    let params = ChainParams::default();
    let transit = dc_transit(&params)?;
    let through_qwp =
        apply_mode_transform(&transit.state, &crate::elements::qwp(params.qwp_theta))?;
    let analyzer = AnalyzerConfig::plus_minus_45();
    let pattern = DetectionPattern::new(1, 1);
    let phis = PhaseScan::full_period(POINTS)?.phis();
    let raw: Result<Vec<f64>> = phis
        .iter()
        .map(|&phi| {
            let state = apply_mode_transform(&through_qwp, &phase_shift(phi))?;
            coincidence_rate(&state, &analyzer, pattern)
        })
        .collect();
    let raw = raw?;
    let constant = raw.iter().sum::<f64>() / raw.len() as f64;
    let g = DOUBLES_TARGET / (constant * transit.success_probability);
    let mean: Vec<f64> = raw
        .iter()
        .map(|r| r * g * transit.success_probability)
        .collect();
    let (sampled, sigma) = sample_record(seed, &mean)?;
    let fit = fit_fringe(&phis, &sampled, 2)?;
    Ok(ReproduceBundle {
        fit_harmonic: Some(2),
        data: FringeData {
            phis,
            mean,
            sampled,
            sigma,
        },
        fit: Some(fit),
        ..empty_bundle()
    })
}

/// Triples fringe for the given pattern. With `ideal_target` the scan is
/// background-free and normalized to that constant; otherwise the
/// accidental background is added and the signal constant is pinned to
/// twice the background's.
fn triples_fringe(
    seed: u64,
    pattern: DetectionPattern,
    ideal_target: Option<f64>,
) -> Result<ReproduceBundle> {
    let chain = ChainParams::default();
    let analyzer = AnalyzerConfig::plus_minus_45();
    let phases = PhaseScan::full_period(POINTS)?;
    let phis = phases.phis();

    // Mean signal rate per unit scale over the grid.
    let probe = ScanConfig {
        phases,
        chain: chain.clone(),
        analyzer,
        pattern,
        scale: 1.0,
        background: None,
        seed,
    };
    let unit = scan(&probe)?;
    let unit_constant = unit.mean.iter().sum::<f64>() / unit.mean.len() as f64;
    if unit_constant <= 0.0 {
        return Err(Error::InvalidParameter(
            "pattern has no signal at this analyzer".into(),
        ));
    }

    let (scale, background, bg_constant) = match ideal_target {
        Some(target) => (target / unit_constant, None, None),
        None => {
            let rates = SourceRates::paper_like();
            let channels = paper_channels();
            let bg: Result<Vec<f64>> = phis
                .iter()
                .map(|&phi| accidental_triples(&rates, &channels, &analyzer, pattern, phi))
                .collect();
            let bg = bg?;
            let bg_constant = bg.iter().sum::<f64>() / bg.len() as f64;
            (
                SIGNAL_TO_BACKGROUND * bg_constant / unit_constant,
                Some(BackgroundModel { rates, channels }),
                Some(bg_constant),
            )
        }
    };

    let config = ScanConfig {
        scale,
        background,
        ..probe
    };
    let data = scan(&config)?;
    let fit = fit_fringe(&data.phis, &data.sampled, 3)?;
    Ok(ReproduceBundle {
        fit_harmonic: Some(3),
        background_constant: bg_constant,
        data,
        fit: Some(fit),
        ..empty_bundle()
    })
}

/// The three-photon estimator's phase uncertainty across a period. The
/// grid is offset half a step so it never lands on a stationary point.
fn sensitivity_floor(_seed: u64) -> Result<ReproduceBundle> {
    let points = 60;
    let span = std::f64::consts::TAU;
    let phases = PhaseScan::new(span / (2.0 * points as f64), span, points)?;
    let phis = phases.phis();
    let mean: Result<Vec<f64>> = phis.iter().map(|&phi| phase_sensitivity(3, phi)).collect();
    let mean = mean?;
    let sampled = mean.clone();
    let sigma = vec![0.0; mean.len()];
    Ok(ReproduceBundle {
        data: FringeData {
            phis,
            mean,
            sampled,
            sigma,
        },
        ..empty_bundle()
    })
}

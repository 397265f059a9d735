//! Simulated phase scans over the wedge: expected counts, Poisson count
//! records, and the glue that turns chain + analyzer + background into a
//! fringe dataset.
//!
//! Sampling is reproducible point by point: every phase point draws from
//! its own counter-mode stream of one seeded ChaCha generator, so the
//! record for point i does not depend on how many draws point i-1 used.

pub mod fit;
pub mod poisson;
pub mod presets;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::background::{accidental_triples, Channel, SourceRates};
use crate::construction::{run_paper_chain, ChainParams};
use crate::detection::{coincidence_rate, AnalyzerConfig, DetectionPattern};
use crate::elements::phase_shift;
use crate::error::{Error, Result};
use crate::transform::apply_mode_transform;

/// A uniform phase grid with the endpoint excluded, so a full-period scan
/// never double-counts phi = start.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PhaseScan {
    pub start: f64,
    pub span: f64,
    pub points: usize,
}

impl PhaseScan {
    pub fn new(start: f64, span: f64, points: usize) -> Result<Self> {
        if points == 0 || !span.is_finite() || span <= 0.0 {
            return Err(Error::InvalidParameter(
                "phase scan needs a positive span and at least one point".into(),
            ));
        }
        Ok(PhaseScan { start, span, points })
    }

    pub fn full_period(points: usize) -> Result<Self> {
        PhaseScan::new(0.0, std::f64::consts::TAU, points)
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.points)
            .map(|i| self.start + self.span * i as f64 / self.points as f64)
            .collect()
    }
}

/// One scan's worth of fringe data: the model mean, one Poisson record,
/// and the model standard deviation per point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FringeData {
    pub phis: Vec<f64>,
    pub mean: Vec<f64>,
    pub sampled: Vec<f64>,
    pub sigma: Vec<f64>,
}

const CSV_HEADER: &str = "phi_rad,mean,sampled,sigma";

impl FringeData {
    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.phis[i], self.mean[i], self.sampled[i], self.sigma[i]
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            _ => {
                return Err(Error::Serialization(format!(
                    "expected CSV header '{CSV_HEADER}'"
                )))
            }
        }
        let mut data = FringeData {
            phis: Vec::new(),
            mean: Vec::new(),
            sampled: Vec::new(),
            sigma: Vec::new(),
        };
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Serialization(format!(
                    "line {}: expected 4 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let mut parsed = [0.0f64; 4];
            for (slot, field) in parsed.iter_mut().zip(&fields) {
                *slot = field.trim().parse().map_err(|e| {
                    Error::Serialization(format!("line {}: {}", lineno + 2, e))
                })?;
            }
            data.phis.push(parsed[0]);
            data.mean.push(parsed[1]);
            data.sampled.push(parsed[2]);
            data.sigma.push(parsed[3]);
        }
        Ok(data)
    }
}

/// Accidental-background configuration attached to a scan.
#[derive(Clone, Debug)]
pub struct BackgroundModel {
    pub rates: SourceRates,
    pub channels: Vec<Channel>,
}

/// Everything a simulated triples scan needs.
#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub phases: PhaseScan,
    pub chain: ChainParams,
    pub analyzer: AnalyzerConfig,
    pub pattern: DetectionPattern,
    /// Construction trials per accumulation interval; expected signal
    /// counts are scale x chain success x coincidence rate.
    pub scale: f64,
    pub background: Option<BackgroundModel>,
    pub seed: u64,
}

/// Run a scan: per phase point, the expected count, one Poisson draw, and
/// sqrt(mean) as the model sigma.
///
/// The chain runs once at phi = 0; the wedge phase for each point is
/// applied on top, which is exact because the wedge commutes with nothing
/// downstream of it.
pub fn scan(config: &ScanConfig) -> Result<FringeData> {
    if !config.scale.is_finite() || config.scale < 0.0 {
        return Err(Error::InvalidParameter(
            "scan scale must be finite and nonnegative".into(),
        ));
    }
    let base = run_paper_chain(0.0, &config.chain)?;
    let phis = config.phases.phis();

    let rows: Result<Vec<(f64, f64)>> = phis
        .par_iter()
        .enumerate()
        .map(|(i, &phi)| {
            let state = apply_mode_transform(&base.state, &phase_shift(phi))?;
            let rate = coincidence_rate(&state, &config.analyzer, config.pattern)?;
            let mut mean = config.scale * base.success_probability * rate;
            if let Some(bg) = &config.background {
                mean += accidental_triples(
                    &bg.rates,
                    &bg.channels,
                    &config.analyzer,
                    config.pattern,
                    phi,
                )?;
            }
            let sampled = poisson::sample_streamed(config.seed, i as u64, mean)? as f64;
            Ok((mean, sampled))
        })
        .collect();
    let rows = rows?;

    Ok(FringeData {
        phis,
        mean: rows.iter().map(|r| r.0).collect(),
        sampled: rows.iter().map(|r| r.1).collect(),
        sigma: rows.iter().map(|r| r.0.sqrt()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::paper_channels;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    fn base_config(seed: u64) -> ScanConfig {
        ScanConfig {
            phases: PhaseScan::full_period(16).unwrap(),
            chain: ChainParams::default(),
            analyzer: AnalyzerConfig::plus_minus_45(),
            pattern: DetectionPattern::new(2, 1),
            scale: 4.0e3,
            background: None,
            seed,
        }
    }

    #[test]
    fn phase_grid_excludes_endpoint() {
        let scan = PhaseScan::full_period(8).unwrap();
        let phis = scan.phis();
        assert_eq!(phis.len(), 8);
        assert_abs_diff_eq!(phis[0], 0.0);
        assert_abs_diff_eq!(phis[7], TAU * 7.0 / 8.0, epsilon = 1e-15);
        assert!(PhaseScan::new(0.0, 0.0, 8).is_err());
        assert!(PhaseScan::new(0.0, TAU, 0).is_err());
    }

    #[test]
    fn scan_means_follow_the_ideal_fringe() {
        let config = base_config(3);
        let data = scan(&config).unwrap();
        let success = crate::construction::default_chain_success_closed_form();
        for (i, &phi) in data.phis.iter().enumerate() {
            // (2,1) rate with 3 counters a side: 3(1 - cos 3phi)/8 x 2/3.
            let rate = 3.0 * (1.0 - (3.0 * phi).cos()) / 8.0 * (2.0 / 3.0);
            assert_abs_diff_eq!(
                data.mean[i],
                config.scale * success * rate,
                epsilon = 1e-8
            );
            assert_abs_diff_eq!(data.sigma[i], data.mean[i].sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn scan_with_background_adds_accidentals() {
        let mut config = base_config(3);
        let rates = SourceRates::paper_like();
        config.background = Some(BackgroundModel {
            rates: rates.clone(),
            channels: paper_channels(),
        });
        let with_bg = scan(&config).unwrap();
        config.background = None;
        let without = scan(&config).unwrap();
        for (i, &phi) in with_bg.phis.iter().enumerate() {
            let bg = accidental_triples(
                &rates,
                &paper_channels(),
                &config.analyzer,
                config.pattern,
                phi,
            )
            .unwrap();
            assert_abs_diff_eq!(with_bg.mean[i], without.mean[i] + bg, epsilon = 1e-8);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic_and_stream_local() {
        let a = scan(&base_config(11)).unwrap();
        let b = scan(&base_config(11)).unwrap();
        let c = scan(&base_config(12)).unwrap();
        assert_eq!(a.sampled, b.sampled);
        assert_ne!(a.sampled, c.sampled);

        // Doubling the point count leaves earlier points' draws alone
        // only in mean, but the stream discipline makes each point's
        // draw depend only on (seed, index, mean); same index and mean
        // must reproduce.
        let mut longer = base_config(11);
        longer.phases = PhaseScan::new(0.0, TAU, 32).unwrap();
        let d = scan(&longer).unwrap();
        assert_eq!(a.sampled[0], d.sampled[0]);
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let data = scan(&base_config(5)).unwrap();
        let text = data.to_csv();
        assert!(text.starts_with("phi_rad,mean,sampled,sigma\n"));
        let back = FringeData::from_csv(&text).unwrap();
        assert_eq!(back.phis, data.phis);
        assert_eq!(back.mean, data.mean);
        assert_eq!(back.sampled, data.sampled);
        assert_eq!(back.sigma, data.sigma);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(FringeData::from_csv("wrong,header\n1,2\n").is_err());
        assert!(FringeData::from_csv("phi_rad,mean,sampled,sigma\n1,2,3\n").is_err());
        assert!(FringeData::from_csv("phi_rad,mean,sampled,sigma\n1,2,three,4\n").is_err());
    }
}

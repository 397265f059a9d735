//! Accidental-coincidence backgrounds for the triple-detection fringes.
//!
//! Real runs sit on a floor of false triples assembled from uncorrelated
//! events that happen to share a pulse: a genuine double plus a stray
//! single, or three independent singles. Each contributing source is
//! described by measured singles and doubles fringes versus the wedge
//! phase; the model combines them per pulse window and applies the same
//! detector fanout as the signal.
//!
//! Rates are events per second. A double event means one two-photon
//! emission; its port pattern already includes the analyzer, so the
//! doubles fringes are given per pattern, not per photon.

use serde::{Deserialize, Serialize};

use crate::detection::{fanout_distinct_probability, AnalyzerConfig, DetectionPattern};
use crate::error::{Error, Result};

/// A sinusoidal rate component: constant + amplitude cos(harmonic phi + phase).
/// Evaluation clamps at zero; a fully modulated fringe touches it.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Fringe {
    pub constant: f64,
    pub amplitude: f64,
    pub harmonic: u32,
    pub phase: f64,
}

impl Fringe {
    pub fn flat(rate: f64) -> Self {
        Fringe {
            constant: rate,
            amplitude: 0.0,
            harmonic: 0,
            phase: 0.0,
        }
    }

    pub fn rate(&self, phi: f64) -> f64 {
        (self.constant + self.amplitude * (self.harmonic as f64 * phi + self.phase).cos())
            .max(0.0)
    }

    fn scaled(&self, g: f64) -> Self {
        Fringe {
            constant: self.constant * g,
            amplitude: self.amplitude * g,
            ..*self
        }
    }
}

/// Singles rates on the analyzer's two ports.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PortFringes {
    pub plus: Fringe,
    pub minus: Fringe,
}

/// Doubles rates per two-photon port pattern.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DoubleFringes {
    pub two_plus: Fringe,
    pub one_one: Fringe,
    pub two_minus: Fringe,
}

/// One source's contribution inventory.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SourceSpec {
    pub singles: PortFringes,
    pub doubles: DoubleFringes,
}

/// Everything the accidental model needs: timing plus per-source fringes.
#[derive(Clone, Debug)]
pub struct SourceRates {
    /// Laser pulse period in seconds; also the coincidence window.
    pub pulse_period: f64,
    /// Accumulation time per phase point in seconds.
    pub interval: f64,
    pub lo: SourceSpec,
    pub dc: SourceSpec,
}

#[derive(Serialize, Deserialize)]
struct SourcesJson {
    #[serde(rename = "LO")]
    lo: SourceSpec,
    #[serde(rename = "DC")]
    dc: SourceSpec,
}

#[derive(Serialize, Deserialize)]
struct SourceRatesJson {
    pulse_period_ns: f64,
    interval_s: f64,
    sources: SourcesJson,
}

impl SourceRates {
    /// Representative rates for a run like the three-photon experiment:
    /// an 80 MHz pulse train, 30 s per point, a bright LO with its
    /// (1 -+ sin phi) singles fringes, a weaker unmodulated
    /// down-conversion singles floor, and doubles dominated by the pair
    /// source's two-fold fringe. LO doubles keep only each pattern's
    /// dominant harmonic; their (1,1) pattern is exactly two-fold.
    pub fn paper_like() -> Self {
        let s_lo = 3.0e5;
        let s_dc = 3.0e4;
        let d_dc = 1.0e4;
        let d_lo = 2.0e3;
        let half_pi = std::f64::consts::FRAC_PI_2;
        SourceRates {
            pulse_period: 12.5e-9,
            interval: 30.0,
            lo: SourceSpec {
                singles: PortFringes {
                    plus: Fringe {
                        constant: s_lo / 2.0,
                        amplitude: s_lo / 2.0,
                        harmonic: 1,
                        phase: half_pi,
                    },
                    minus: Fringe {
                        constant: s_lo / 2.0,
                        amplitude: s_lo / 2.0,
                        harmonic: 1,
                        phase: -half_pi,
                    },
                },
                doubles: DoubleFringes {
                    two_plus: Fringe {
                        constant: 0.375 * d_lo,
                        amplitude: 0.375 * d_lo,
                        harmonic: 1,
                        phase: half_pi,
                    },
                    one_one: Fringe {
                        constant: 0.25 * d_lo,
                        amplitude: 0.25 * d_lo,
                        harmonic: 2,
                        phase: 0.0,
                    },
                    two_minus: Fringe {
                        constant: 0.375 * d_lo,
                        amplitude: 0.375 * d_lo,
                        harmonic: 1,
                        phase: -half_pi,
                    },
                },
            },
            dc: SourceSpec {
                singles: PortFringes {
                    plus: Fringe::flat(s_dc / 2.0),
                    minus: Fringe::flat(s_dc / 2.0),
                },
                doubles: DoubleFringes {
                    two_plus: Fringe {
                        constant: 0.3 * d_dc,
                        amplitude: 0.3 * d_dc,
                        harmonic: 2,
                        phase: std::f64::consts::PI,
                    },
                    one_one: Fringe {
                        constant: 0.4 * d_dc,
                        amplitude: 0.4 * d_dc,
                        harmonic: 2,
                        phase: 0.0,
                    },
                    two_minus: Fringe {
                        constant: 0.3 * d_dc,
                        amplitude: 0.3 * d_dc,
                        harmonic: 2,
                        phase: std::f64::consts::PI,
                    },
                },
            },
        }
    }

    fn spec(&self, source: Source) -> &SourceSpec {
        match source {
            Source::Lo => &self.lo,
            Source::Dc => &self.dc,
        }
    }

    /// All fringes multiplied by a common factor; timing untouched.
    pub fn scaled(&self, g: f64) -> Self {
        let scale_spec = |s: &SourceSpec| SourceSpec {
            singles: PortFringes {
                plus: s.singles.plus.scaled(g),
                minus: s.singles.minus.scaled(g),
            },
            doubles: DoubleFringes {
                two_plus: s.doubles.two_plus.scaled(g),
                one_one: s.doubles.one_one.scaled(g),
                two_minus: s.doubles.two_minus.scaled(g),
            },
        };
        SourceRates {
            pulse_period: self.pulse_period,
            interval: self.interval,
            lo: scale_spec(&self.lo),
            dc: scale_spec(&self.dc),
        }
    }

    pub fn to_json(&self) -> String {
        let raw = SourceRatesJson {
            pulse_period_ns: self.pulse_period * 1e9,
            interval_s: self.interval,
            sources: SourcesJson {
                lo: self.lo,
                dc: self.dc,
            },
        };
        serde_json::to_string_pretty(&raw).expect("rates json")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SourceRatesJson =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if raw.pulse_period_ns <= 0.0 || raw.interval_s <= 0.0 {
            return Err(Error::InvalidParameter(
                "pulse period and interval must be positive".into(),
            ));
        }
        Ok(SourceRates {
            pulse_period: raw.pulse_period_ns * 1e-9,
            interval: raw.interval_s,
            lo: raw.sources.lo,
            dc: raw.sources.dc,
        })
    }
}

/// Which physical stream an accidental combination draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Lo,
    Dc,
}

/// An accidental-triple channel: a doubles stream paired with a singles
/// stream, or three singles from one stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Channel {
    DoubleSingle { double: Source, single: Source },
    TripleSingles { source: Source },
}

/// The combinations that matter in practice: pair doubles with stray
/// down-conversion singles, LO doubles with the same, and the bright LO
/// alone three times over.
pub fn paper_channels() -> Vec<Channel> {
    vec![
        Channel::DoubleSingle {
            double: Source::Dc,
            single: Source::Dc,
        },
        Channel::DoubleSingle {
            double: Source::Lo,
            single: Source::Dc,
        },
        Channel::TripleSingles { source: Source::Lo },
    ]
}

/// Expected accidental triples per accumulation interval at wedge phase
/// `phi`, for the given port pattern, summed over channels. Includes the
/// detector-fanout acceptance.
pub fn accidental_triples(
    rates: &SourceRates,
    channels: &[Channel],
    analyzer: &AnalyzerConfig,
    pattern: DetectionPattern,
    phi: f64,
) -> Result<f64> {
    if pattern.total() != 3 {
        return Err(Error::InvalidParameter(
            "accidental model covers three-photon patterns".into(),
        ));
    }
    let tau = rates.pulse_period;
    let t = rates.interval;
    let fanout = fanout_distinct_probability(pattern.n_plus, analyzer.detectors_plus)
        * fanout_distinct_probability(pattern.n_minus, analyzer.detectors_minus);

    let mut total = 0.0;
    for channel in channels {
        let raw = match *channel {
            Channel::DoubleSingle { double, single } => {
                let d = &rates.spec(double).doubles;
                let s = &rates.spec(single).singles;
                let mut sum = 0.0;
                // Enumerate double patterns (2,0), (1,1), (0,2) and the
                // single's port; keep combinations that add up.
                for (d_plus, d_rate) in [
                    (2u32, d.two_plus.rate(phi)),
                    (1, d.one_one.rate(phi)),
                    (0, d.two_minus.rate(phi)),
                ] {
                    let d_minus = 2 - d_plus;
                    for (s_plus, s_rate) in
                        [(1u32, s.plus.rate(phi)), (0, s.minus.rate(phi))]
                    {
                        if d_plus + s_plus == pattern.n_plus
                            && d_minus + (1 - s_plus) == pattern.n_minus
                        {
                            sum += d_rate * s_rate;
                        }
                    }
                }
                sum * tau * t
            }
            Channel::TripleSingles { source } => {
                let s = &rates.spec(source).singles;
                let lambda_plus = s.plus.rate(phi) * tau;
                let lambda_minus = s.minus.rate(phi) * tau;
                let p = pattern.n_plus;
                let m = pattern.n_minus;
                (lambda_plus.powi(p as i32) / factorial_small(p))
                    * (lambda_minus.powi(m as i32) / factorial_small(m))
                    * (t / tau)
            }
        };
        total += raw;
    }
    Ok(total * fanout)
}

fn factorial_small(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product::<f64>().max(1.0)
}

/// Constant plus cosine/sine coefficients for harmonics 1..=k_max.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HarmonicDecomposition {
    pub constant: f64,
    pub cos_coeffs: Vec<f64>,
    pub sin_coeffs: Vec<f64>,
}

impl HarmonicDecomposition {
    pub fn k_max(&self) -> u32 {
        self.cos_coeffs.len() as u32
    }

    /// Magnitude of harmonic k (1-based).
    pub fn amplitude(&self, k: u32) -> f64 {
        let i = (k - 1) as usize;
        self.cos_coeffs[i].hypot(self.sin_coeffs[i])
    }

    /// Phase delta of harmonic k in the form amplitude cos(k phi + delta).
    pub fn phase(&self, k: u32) -> f64 {
        let i = (k - 1) as usize;
        (-self.sin_coeffs[i]).atan2(self.cos_coeffs[i])
    }
}

/// Project uniformly sampled values over one full period onto
/// {1, cos k phi, sin k phi} for k = 1..=k_max. Exact for trigonometric
/// polynomials of degree k_max when the sample count exceeds 2 k_max.
pub fn fourier_decompose(
    phis: &[f64],
    values: &[f64],
    k_max: u32,
) -> Result<HarmonicDecomposition> {
    if phis.len() != values.len() {
        return Err(Error::GridMismatch);
    }
    let n = phis.len();
    let needed = (2 * k_max + 1) as usize;
    if n < needed {
        return Err(Error::Aliasing {
            harmonic: k_max,
            points: n,
            needed,
        });
    }
    let step = std::f64::consts::TAU / n as f64;
    for w in phis.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 {
            return Err(Error::NonUniformGrid);
        }
    }

    let mut constant = 0.0;
    let mut cos_coeffs = vec![0.0; k_max as usize];
    let mut sin_coeffs = vec![0.0; k_max as usize];
    for (&phi, &v) in phis.iter().zip(values) {
        constant += v;
        for k in 1..=k_max as usize {
            cos_coeffs[k - 1] += v * (k as f64 * phi).cos();
            sin_coeffs[k - 1] += v * (k as f64 * phi).sin();
        }
    }
    constant /= n as f64;
    for c in cos_coeffs.iter_mut().chain(sin_coeffs.iter_mut()) {
        *c *= 2.0 / n as f64;
    }
    Ok(HarmonicDecomposition {
        constant,
        cos_coeffs,
        sin_coeffs,
    })
}

/// Pointwise signal minus background. Grids must agree.
pub fn subtract_background(
    signal_phis: &[f64],
    signal: &[f64],
    background_phis: &[f64],
    background: &[f64],
) -> Result<Vec<f64>> {
    if signal_phis.len() != signal.len()
        || background_phis.len() != background.len()
        || signal.len() != background.len()
    {
        return Err(Error::GridMismatch);
    }
    for (a, b) in signal_phis.iter().zip(background_phis) {
        if (a - b).abs() > 1e-9 {
            return Err(Error::GridMismatch);
        }
    }
    Ok(signal.iter().zip(background).map(|(s, b)| s - b).collect())
}

/// Scale all source rates by one common factor so the accidental fringe's
/// constant term hits `target_constant` counts per interval. Returns the
/// scaled rates and the factor. The constant grows monotonically with the
/// factor (channels scale as its square or cube), so bisection suffices.
pub fn calibrate_to_constant(
    rates: &SourceRates,
    channels: &[Channel],
    analyzer: &AnalyzerConfig,
    pattern: DetectionPattern,
    target_constant: f64,
) -> Result<(SourceRates, f64)> {
    if target_constant <= 0.0 {
        return Err(Error::InvalidParameter(
            "target constant must be positive".into(),
        ));
    }
    let constant_at = |g: f64| -> Result<f64> {
        let scaled = rates.scaled(g);
        let n = 16;
        let phis: Vec<f64> = (0..n)
            .map(|i| std::f64::consts::TAU * i as f64 / n as f64)
            .collect();
        let values: Result<Vec<f64>> = phis
            .iter()
            .map(|&phi| accidental_triples(&scaled, channels, analyzer, pattern, phi))
            .collect();
        Ok(fourier_decompose(&phis, &values?, 3)?.constant)
    };

    let mut lo = 1e-9;
    let mut hi = 1e9;
    if constant_at(lo)? > target_constant || constant_at(hi)? < target_constant {
        return Err(Error::InvalidParameter(
            "target constant is outside the calibratable range".into(),
        ));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if constant_at(mid)? < target_constant {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) / hi < 1e-13 {
            break;
        }
    }
    let g = (lo * hi).sqrt();
    Ok((rates.scaled(g), g))
}

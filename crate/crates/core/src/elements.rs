//! Optical elements as mode transforms, plus the vacuum post-selection
//! primitive that turns lossy elements into probabilistic state filters.
//!
//! Conventions, fixed once and used everywhere:
//!
//! * Linear polarization angles are measured from vertical, so the state at
//!   angle θ has creation operator a†_θ = sinθ·a†_H + cosθ·a†_V.
//! * Wave-plate fast-axis angles are measured from horizontal; the fast
//!   axis picks up no retardance. With those choices qwp(0) = diag(1, i),
//!   hwp(0) = diag(1, -1), and hwp at 22.5 degrees takes H to the +45
//!   degree state.
//! * Circular basis: L = (H + iV)/√2, R = (H - iV)/√2.
//!
//! Global phases of element matrices are not meaningful; state comparisons
//! go through `fidelity_up_to_global_phase`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeSet, StateVector};
use crate::transform::{apply_mode_transform, ModeTransform};
use crate::Complex;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn mat2(label: &str, entries: [Complex; 4]) -> ModeTransform {
    ModeTransform::new(label, DMatrix::from_row_slice(2, 2, &entries))
        .expect("element constructors produce physical matrices")
}

/// Rotation of the polarization plane by `alpha`: takes the θ state to the
/// (θ + alpha) state.
pub fn rotator(alpha: f64) -> ModeTransform {
    let (s, co) = alpha.sin_cos();
    mat2("rotator", [c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0)])
}

/// General wave plate: retardance `gamma` on the slow axis, fast axis at
/// `theta` from horizontal.
pub fn wave_plate(gamma: f64, theta: f64) -> ModeTransform {
    let (s, co) = theta.sin_cos();
    let e = Complex::from_polar(1.0, gamma);
    let one = c(1.0, 0.0);
    let diag_h = one * co * co + e * s * s;
    let diag_v = one * s * s + e * co * co;
    let off = (one - e) * s * co;
    mat2("wave_plate", [diag_h, off, off, diag_v])
}

/// Half-wave plate, fast axis at `theta`.
pub fn hwp(theta: f64) -> ModeTransform {
    ModeTransform::new(
        "hwp",
        wave_plate(std::f64::consts::PI, theta).matrix().clone(),
    )
    .expect("unitary")
}

/// Quarter-wave plate, fast axis at `theta`.
pub fn qwp(theta: f64) -> ModeTransform {
    ModeTransform::new(
        "qwp",
        wave_plate(std::f64::consts::FRAC_PI_2, theta).matrix().clone(),
    )
    .expect("unitary")
}

/// Relative phase on V: diag(1, e^{i phi}). An n-photon V component picks
/// up e^{i n phi}, which is the whole super-resolution story.
pub fn phase_shift(phi: f64) -> ModeTransform {
    mat2(
        "phase_shift",
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), Complex::from_polar(1.0, phi)],
    )
}

/// Polarization-dependent amplitude transmission diag(tH, tV); intensity
/// transmissions are the squares.
pub fn partial_polarizer(t_h: f64, t_v: f64) -> Result<ModeTransform> {
    for t in [t_h, t_v] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::AmplitudeRange { value: t });
        }
    }
    Ok(mat2(
        "partial_polarizer",
        [c(t_h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(t_v, 0.0)],
    ))
}

/// Basis change from (H,V) to (L,R) mode labels.
pub fn to_circular() -> ModeTransform {
    let s = 0.5f64.sqrt();
    mat2(
        "to_circular",
        [c(s, 0.0), c(0.0, -s), c(s, 0.0), c(0.0, s)],
    )
}

/// Re-express a two-mode (H,V) state in the circular basis, relabeling the
/// modes to (L,R).
pub fn to_circular_state(state: &StateVector) -> Result<StateVector> {
    if state.modes().len() != 2 {
        return Err(Error::DimensionMismatch {
            dim: 2,
            modes: state.modes().len(),
        });
    }
    apply_mode_transform(state, &to_circular())?.renamed(ModeSet::circular())
}

/// Coefficients of the linear polarization state at `theta` from vertical.
pub fn polarization_coeffs(theta: f64) -> [Complex; 2] {
    let (s, co) = theta.sin_cos();
    [c(s, 0.0), c(co, 0.0)]
}

/// Result of conditioning on a detection outcome: the renormalized state
/// and the probability that the condition holds.
#[derive(Clone, Debug)]
pub struct PostSelectionOutcome {
    pub state: StateVector,
    pub success_probability: f64,
}

impl PostSelectionOutcome {
    /// Treat the norm lost by a sub-unitary transform as a failed implicit
    /// post-selection: success is the surviving squared norm relative to a
    /// normalized input.
    pub fn from_unnormalized(state: StateVector) -> PostSelectionOutcome {
        let p = state.squared_norm();
        if p == 0.0 {
            return PostSelectionOutcome {
                state,
                success_probability: 0.0,
            };
        }
        PostSelectionOutcome {
            state: state.normalized().expect("nonzero norm"),
            success_probability: p.min(1.0),
        }
    }
}

/// Keep only the components with zero photons in the listed modes, then
/// drop those modes. Success is the kept weight over the input weight. An
/// impossible outcome returns success 0 and the zero state, not an error.
pub fn postselect_vacuum(state: &StateVector, dark: &[&str]) -> Result<PostSelectionOutcome> {
    let dark_idx: Vec<usize> = dark
        .iter()
        .map(|name| state.modes().index_of(name))
        .collect::<Result<_>>()?;
    let keep: Vec<usize> = (0..state.modes().len())
        .filter(|i| !dark_idx.contains(i))
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidModeSet);
    }
    let input_sq = state.squared_norm();

    let mut projected = StateVector::zero(state.modes().clone(), state.n_max());
    for (occ, amp) in state.terms() {
        if dark_idx.iter().all(|&i| occ.counts()[i] == 0) {
            projected.add_term(occ.clone(), amp)?;
        }
    }
    let kept_sq = projected.squared_norm();
    let remaining = projected.restricted(&keep)?;
    if input_sq == 0.0 || kept_sq == 0.0 {
        return Ok(PostSelectionOutcome {
            state: remaining, // zero marker
            success_probability: 0.0,
        });
    }
    Ok(PostSelectionOutcome {
        state: remaining.normalized()?,
        success_probability: kept_sq / input_sq,
    })
}

/// Polarizing beamsplitter merging two spatial modes into one, conditioned
/// on the unused output staying dark.
///
/// Input modes are positional: (in1H, in1V, in2H, in2V). H transmits and V
/// reflects, so the bright port collects in1's H photon and in2's V photon;
/// anything else exits the dark port and is post-selected away. The output
/// is relabeled (H, V).
pub fn pbs_combine(state: &StateVector) -> Result<PostSelectionOutcome> {
    if state.modes().len() != 4 {
        return Err(Error::DimensionMismatch {
            dim: 4,
            modes: state.modes().len(),
        });
    }
    // Rows: (brightH, brightV, darkH, darkV); columns follow the input.
    let mut m = DMatrix::<Complex>::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0); // in1H -> brightH
    m[(3, 1)] = c(1.0, 0.0); // in1V -> darkV
    m[(2, 2)] = c(1.0, 0.0); // in2H -> darkH
    m[(1, 3)] = c(1.0, 0.0); // in2V -> brightV
    let routing = ModeTransform::new("pbs", m)?;
    let routed = apply_mode_transform(state, &routing)?
        .renamed(ModeSet::new(["brightH", "brightV", "darkH", "darkV"])?)?;
    let outcome = postselect_vacuum(&routed, &["darkH", "darkV"])?;
    Ok(PostSelectionOutcome {
        state: outcome.state.renamed(ModeSet::polarization())?,
        success_probability: outcome.success_probability,
    })
}

/// The 2x2 coupling [[t, r], [r, -t]] between a signal mode and the LO/dark
/// mode of one polarization, r = sqrt(1 - t^2).
pub fn lo_splitter(t: f64) -> Result<ModeTransform> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::AmplitudeRange { value: t });
    }
    let r = (1.0 - t * t).sqrt();
    Ok(mat2(
        "lo_splitter",
        [c(t, 0.0), c(r, 0.0), c(r, 0.0), c(-t, 0.0)],
    ))
}

/// Add one local-oscillator photon at linear polarization `lo_angle` on the
/// dark side of a per-polarization beamsplitter, couple it into the signal
/// mode, and condition on both dark outputs staying empty.
///
/// `bs_h` and `bs_v` are 2x2 transforms over (signal, lo) for each
/// polarization; their (0,0) entries are the signal transmissions and the
/// (0,1) entries the LO reflectivities into the bright port.
pub fn inject_lo(
    state: &StateVector,
    lo_angle: f64,
    bs_h: &ModeTransform,
    bs_v: &ModeTransform,
) -> Result<PostSelectionOutcome> {
    if state.modes().len() != 2 {
        return Err(Error::DimensionMismatch {
            dim: 2,
            modes: state.modes().len(),
        });
    }
    for bs in [bs_h, bs_v] {
        if bs.dim() != 2 {
            return Err(Error::DimensionMismatch {
                dim: bs.dim(),
                modes: 2,
            });
        }
    }
    let wide = state.extended(&["loH", "loV"])?;
    let [s, co] = polarization_coeffs(lo_angle);
    let with_lo =
        wide.apply_creation_superposition(&[c(0.0, 0.0), c(0.0, 0.0), s, co])?;

    // Block-diagonal coupling over (H, loH) and (V, loV); the lo modes
    // become the dark outputs.
    let bh = bs_h.matrix();
    let bv = bs_v.matrix();
    let mut m = DMatrix::<Complex>::zeros(4, 4);
    m[(0, 0)] = bh[(0, 0)];
    m[(0, 2)] = bh[(0, 1)];
    m[(2, 0)] = bh[(1, 0)];
    m[(2, 2)] = bh[(1, 1)];
    m[(1, 1)] = bv[(0, 0)];
    m[(1, 3)] = bv[(0, 1)];
    m[(3, 1)] = bv[(1, 0)];
    m[(3, 3)] = bv[(1, 1)];
    let coupling = ModeTransform::new("lo_coupling", m)?;
    let coupled = apply_mode_transform(&with_lo, &coupling)?;
    postselect_vacuum(&coupled, &["loH", "loV"])
}

/// One element record of a circuit description file.
///
/// Angles are degrees in the file format; `phase_shift` may carry the
/// literal string "scan" instead of a number to mark the swept element.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircuitElement {
    Hwp {
        theta_deg: f64,
    },
    Qwp {
        theta_deg: f64,
    },
    WavePlate {
        retardance_deg: f64,
        theta_deg: f64,
    },
    PhaseShift {
        phi: PhiArg,
    },
    PartialPolarizer {
        #[serde(rename = "tH")]
        t_h: f64,
        #[serde(rename = "tV")]
        t_v: f64,
    },
    Rotator {
        alpha_deg: f64,
    },
}

/// Fixed phase in degrees, or the scan placeholder.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PhiArg {
    Scan(String),
    Deg(f64),
}

/// Parse a circuit file: a JSON array of element records with at most one
/// scan placeholder.
pub fn parse_circuit(text: &str) -> Result<Vec<CircuitElement>> {
    let elements: Vec<CircuitElement> = serde_json::from_str(text)?;
    let mut scans = 0usize;
    for el in &elements {
        if let CircuitElement::PhaseShift { phi: PhiArg::Scan(tag) } = el {
            if tag != "scan" {
                return Err(Error::InvalidParameter(format!(
                    "phase_shift phi must be a number or \"scan\", got \"{tag}\""
                )));
            }
            scans += 1;
        }
    }
    if scans > 1 {
        return Err(Error::InvalidParameter(
            "circuit carries more than one scan placeholder".into(),
        ));
    }
    Ok(elements)
}

pub fn circuit_to_json(elements: &[CircuitElement]) -> String {
    serde_json::to_string_pretty(elements).expect("circuit serialization cannot fail")
}

/// Compose the circuit into a single transform, substituting `phi`
/// (radians) for the scan placeholder.
pub fn circuit_transform(elements: &[CircuitElement], phi: f64) -> Result<ModeTransform> {
    let mut combined = ModeTransform::identity(2);
    for el in elements {
        let t = match el {
            CircuitElement::Hwp { theta_deg } => hwp(theta_deg.to_radians()),
            CircuitElement::Qwp { theta_deg } => qwp(theta_deg.to_radians()),
            CircuitElement::WavePlate {
                retardance_deg,
                theta_deg,
            } => wave_plate(retardance_deg.to_radians(), theta_deg.to_radians()),
            CircuitElement::PhaseShift { phi: arg } => match arg {
                PhiArg::Scan(_) => phase_shift(phi),
                PhiArg::Deg(d) => phase_shift(d.to_radians()),
            },
            CircuitElement::PartialPolarizer { t_h, t_v } => partial_polarizer(*t_h, *t_v)?,
            CircuitElement::Rotator { alpha_deg } => rotator(alpha_deg.to_radians()),
        };
        combined = combined.then(&t)?;
    }
    Ok(combined)
}

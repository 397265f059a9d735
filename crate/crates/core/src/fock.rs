//! Sparse bosonic Fock states over labeled modes.
//!
//! States are maps from occupation vectors to complex amplitudes, held in a
//! `BTreeMap` so iteration and serialization are always in lexicographic
//! occupation order. A total-photon cap `n_max` bounds every stored term;
//! creation operators refuse to cross it. Unnormalized states are legal and
//! show up routinely here, because sub-unitary transforms shrink the norm
//! and the lost weight is exactly the post-selection failure probability.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Complex, PRUNE_THRESHOLD};

/// Relative slack allowed when an operation requires a normalized input.
const NORM_CHECK_TOL: f64 = 1e-8;

/// An ordered set of unique mode names; the index of a name is stable for
/// the lifetime of any state built on the set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeSet {
    names: Vec<String>,
}

/// A mode name together with its ordinal within a [`ModeSet`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeLabel {
    pub name: String,
    pub index: usize,
}

impl ModeSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidModeSet);
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::InvalidModeSet);
            }
        }
        Ok(ModeSet { names })
    }

    /// The two polarization modes of a single spatial mode.
    pub fn polarization() -> Self {
        ModeSet::new(["H", "V"]).expect("static labels")
    }

    /// Left/right circular polarization labels.
    pub fn circular() -> Self {
        ModeSet::new(["L", "R"]).expect("static labels")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownMode(name.to_string()))
    }

    pub fn label(&self, name: &str) -> Result<ModeLabel> {
        let index = self.index_of(name)?;
        Ok(ModeLabel {
            name: name.to_string(),
            index,
        })
    }

    fn describe(&self) -> String {
        self.names.join(",")
    }
}

/// Photon counts per mode; the Fock basis element. `Ord` is derived, so the
/// natural ordering of occupations is lexicographic on the count vector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occupation(Vec<u32>);

impl Occupation {
    pub fn new(counts: Vec<u32>) -> Self {
        Occupation(counts)
    }

    pub fn zeros(modes: usize) -> Self {
        Occupation(vec![0; modes])
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Copy with one more photon in the given mode.
    pub fn bumped(&self, index: usize) -> Self {
        let mut counts = self.0.clone();
        counts[index] += 1;
        Occupation(counts)
    }
}

impl From<Vec<u32>> for Occupation {
    fn from(counts: Vec<u32>) -> Self {
        Occupation(counts)
    }
}

impl<const N: usize> From<[u32; N]> for Occupation {
    fn from(counts: [u32; N]) -> Self {
        Occupation(counts.to_vec())
    }
}

/// All occupations of `modes` slots with the given total photon number, in
/// lexicographic order.
pub fn enumerate_occupations(modes: usize, total: u32) -> Vec<Occupation> {
    fn rec(modes: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Occupation>) {
        if modes == 1 {
            prefix.push(total);
            out.push(Occupation(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            rec(modes - 1, total - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if modes == 0 {
        return out;
    }
    rec(modes, total, &mut Vec::new(), &mut out);
    out
}

/// Sparse complex state over a mode set with a total-photon cap.
#[derive(Clone, Debug)]
pub struct StateVector {
    modes: ModeSet,
    n_max: u32,
    amps: BTreeMap<Occupation, Complex>,
}

impl StateVector {
    /// The vacuum |0,...,0⟩ with amplitude 1.
    pub fn vacuum(modes: ModeSet, n_max: u32) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(Occupation::zeros(modes.len()), Complex::new(1.0, 0.0));
        StateVector { modes, n_max, amps }
    }

    /// The zero vector; marks an impossible post-selection outcome.
    pub fn zero(modes: ModeSet, n_max: u32) -> Self {
        StateVector {
            modes,
            n_max,
            amps: BTreeMap::new(),
        }
    }

    pub fn from_terms<O, T>(modes: ModeSet, n_max: u32, terms: T) -> Result<Self>
    where
        O: Into<Occupation>,
        T: IntoIterator<Item = (O, Complex)>,
    {
        let mut state = StateVector::zero(modes, n_max);
        for (occ, amp) in terms {
            state.add_term(occ.into(), amp)?;
        }
        Ok(state)
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// Number of stored basis terms.
    pub fn term_count(&self) -> usize {
        self.amps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex {
        self.amps.get(occ).copied().unwrap_or_default()
    }

    /// Terms in lexicographic occupation order.
    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, Complex)> {
        self.amps.iter().map(|(o, a)| (o, *a))
    }

    /// Accumulate one term, validating length and the photon cap.
    pub fn add_term(&mut self, occ: Occupation, amp: Complex) -> Result<()> {
        if occ.len() != self.modes.len() {
            return Err(Error::OccupationLength {
                got: occ.len(),
                want: self.modes.len(),
            });
        }
        let total = occ.total();
        if total > self.n_max {
            return Err(Error::NMaxOverflow {
                total,
                n_max: self.n_max,
            });
        }
        *self.amps.entry(occ).or_default() += amp;
        Ok(())
    }

    /// Apply a† on the named mode: |…,n,…⟩ → √(n+1)·|…,n+1,…⟩ termwise.
    pub fn apply_creation(&self, mode: &str) -> Result<StateVector> {
        let index = self.modes.index_of(mode)?;
        self.apply_creation_index(index)
    }

    pub fn apply_creation_index(&self, index: usize) -> Result<StateVector> {
        let mut out = StateVector::zero(self.modes.clone(), self.n_max);
        for (occ, amp) in &self.amps {
            let total = occ.total();
            if total + 1 > self.n_max {
                return Err(Error::NMaxOverflow {
                    total: total + 1,
                    n_max: self.n_max,
                });
            }
            let n = occ.counts()[index];
            let scaled = amp * ((n as f64) + 1.0).sqrt();
            out.add_term(occ.bumped(index), scaled)?;
        }
        Ok(out)
    }

    /// Apply Σ_i c_i a†_i for one coefficient per mode.
    pub fn apply_creation_superposition(&self, coeffs: &[Complex]) -> Result<StateVector> {
        if coeffs.len() != self.modes.len() {
            return Err(Error::DimensionMismatch {
                dim: coeffs.len(),
                modes: self.modes.len(),
            });
        }
        let mut out = StateVector::zero(self.modes.clone(), self.n_max);
        for (index, c) in coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let part = self.apply_creation_index(index)?;
            out = out.add_scaled(&part, *c)?;
        }
        Ok(out)
    }

    pub fn scaled(&self, c: Complex) -> StateVector {
        let amps = self.amps.iter().map(|(o, a)| (o.clone(), a * c)).collect();
        StateVector {
            modes: self.modes.clone(),
            n_max: self.n_max,
            amps,
        }
    }

    /// self + c·other over a shared mode set.
    pub fn add_scaled(&self, other: &StateVector, c: Complex) -> Result<StateVector> {
        self.check_same_modes(other)?;
        let mut out = self.clone();
        out.n_max = self.n_max.max(other.n_max);
        for (occ, amp) in &other.amps {
            out.add_term(occ.clone(), amp * c)?;
        }
        Ok(out)
    }

    pub fn squared_norm(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex::new(1.0 / n, 0.0)))
    }

    /// Drop terms with |amplitude| below the threshold.
    pub fn pruned(mut self, threshold: f64) -> StateVector {
        self.amps.retain(|_, a| a.norm() >= threshold);
        self
    }

    pub fn pruned_default(self) -> StateVector {
        self.pruned(PRUNE_THRESHOLD)
    }

    fn check_same_modes(&self, other: &StateVector) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::ModeSetMismatch(
                self.modes.describe(),
                other.modes.describe(),
            ));
        }
        Ok(())
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex> {
        self.check_same_modes(other)?;
        // Walk the smaller support; terms absent on either side contribute 0.
        let keys: Box<dyn Iterator<Item = &Occupation>> = if self.amps.len() <= other.amps.len() {
            Box::new(self.amps.keys())
        } else {
            Box::new(other.amps.keys())
        };
        let mut acc = Complex::default();
        for occ in keys {
            if let (Some(a), Some(b)) = (self.amps.get(occ), other.amps.get(occ)) {
                acc += a.conj() * b;
            }
        }
        Ok(acc)
    }

    /// |⟨s1|s2⟩|² / (‖s1‖²‖s2‖²); invariant under global phases of either
    /// argument.
    pub fn fidelity_up_to_global_phase(&self, other: &StateVector) -> Result<f64> {
        let n1 = self.squared_norm();
        let n2 = other.squared_norm();
        if n1 == 0.0 || n2 == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let ip = self.inner_product(other)?;
        Ok(ip.norm_sqr() / (n1 * n2))
    }

    /// ⟨A_N⟩ with A_N = |0,N⟩⟨N,0| + |N,0⟩⟨0,N| on a normalized two-mode
    /// state: 2·Re(conj(amp(N,0))·amp(0,N)).
    pub fn expectation_a_n(&self, n: u32) -> Result<f64> {
        MeasurementOperator::swap_a(n).expectation(self)
    }

    /// Total photon number when every populated term agrees, else None.
    pub fn photon_number(&self) -> Option<u32> {
        let mut iter = self.amps.keys();
        let first = iter.next()?.total();
        for occ in iter {
            if occ.total() != first {
                return None;
            }
        }
        Some(first)
    }

    pub fn check_normalized(&self) -> Result<()> {
        let norm_sq = self.squared_norm();
        if (norm_sq - 1.0).abs() > NORM_CHECK_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(())
    }

    /// Same amplitudes under new mode names (dimension preserved).
    pub fn renamed(&self, modes: ModeSet) -> Result<StateVector> {
        if modes.len() != self.modes.len() {
            return Err(Error::DimensionMismatch {
                dim: modes.len(),
                modes: self.modes.len(),
            });
        }
        Ok(StateVector {
            modes,
            n_max: self.n_max,
            amps: self.amps.clone(),
        })
    }

    /// Append new, unoccupied modes to the state.
    pub fn extended<S: AsRef<str>>(&self, extra: &[S]) -> Result<StateVector> {
        let mut names: Vec<String> = self.modes.names().to_vec();
        names.extend(extra.iter().map(|s| s.as_ref().to_string()));
        let modes = ModeSet::new(names)?;
        let pad = extra.len();
        let amps = self
            .amps
            .iter()
            .map(|(occ, amp)| {
                let mut counts = occ.counts().to_vec();
                counts.extend(std::iter::repeat_n(0, pad));
                (Occupation::new(counts), *amp)
            })
            .collect();
        Ok(StateVector {
            modes,
            n_max: self.n_max,
            amps,
        })
    }

    /// Keep only the listed mode indices. Every populated term must have
    /// zero photons in the dropped modes (project first).
    pub fn restricted(&self, keep: &[usize]) -> Result<StateVector> {
        let names: Vec<String> = keep
            .iter()
            .map(|&i| {
                self.modes
                    .names()
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::UnknownMode(format!("index {i}")))
            })
            .collect::<Result<_>>()?;
        let modes = ModeSet::new(names)?;
        let mut amps = BTreeMap::new();
        for (occ, amp) in &self.amps {
            let counts = occ.counts();
            let dropped_occupied = (0..counts.len())
                .any(|i| !keep.contains(&i) && counts[i] != 0);
            if dropped_occupied {
                return Err(Error::InvalidParameter(
                    "cannot restrict: dropped mode still occupied".into(),
                ));
            }
            let kept: Vec<u32> = keep.iter().map(|&i| counts[i]).collect();
            amps.insert(Occupation::new(kept), *amp);
        }
        Ok(StateVector {
            modes,
            n_max: self.n_max,
            amps,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = StateJson {
            modes: self.modes.names().to_vec(),
            n_max: self.n_max,
            amplitudes: self
                .amps
                .iter()
                .map(|(occ, amp)| AmpJson {
                    occ: occ.counts().to_vec(),
                    re: amp.re,
                    im: amp.im,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("state serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<StateVector> {
        let doc: StateJson = serde_json::from_str(text)?;
        let modes = ModeSet::new(doc.modes)?;
        let mut state = StateVector::zero(modes, doc.n_max);
        for rec in doc.amplitudes {
            state.add_term(Occupation::new(rec.occ), Complex::new(rec.re, rec.im))?;
        }
        Ok(state)
    }
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    modes: Vec<String>,
    n_max: u32,
    amplitudes: Vec<AmpJson>,
}

#[derive(Serialize, Deserialize)]
struct AmpJson {
    occ: Vec<u32>,
    re: f64,
    im: f64,
}

/// Hermitian observables measured on states.
#[derive(Clone, Debug)]
pub enum MeasurementOperator {
    /// A_N = |0,N⟩⟨N,0| + |N,0⟩⟨0,N| on a two-mode state.
    SwapA { n: u32 },
    /// Projector |target⟩⟨target|.
    Projector { target: Occupation },
}

impl MeasurementOperator {
    pub fn swap_a(n: u32) -> Self {
        MeasurementOperator::SwapA { n }
    }

    pub fn projector<O: Into<Occupation>>(target: O) -> Self {
        MeasurementOperator::Projector {
            target: target.into(),
        }
    }

    /// Expectation value on a normalized state; real by hermiticity.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        state.check_normalized()?;
        match self {
            MeasurementOperator::SwapA { n } => {
                if state.modes.len() != 2 {
                    return Err(Error::DimensionMismatch {
                        dim: 2,
                        modes: state.modes.len(),
                    });
                }
                if *n == 0 {
                    return Err(Error::InvalidParameter("A_N needs N >= 1".into()));
                }
                let a_n0 = state.amplitude(&Occupation::new(vec![*n, 0]));
                let a_0n = state.amplitude(&Occupation::new(vec![0, *n]));
                Ok(2.0 * (a_n0.conj() * a_0n).re)
            }
            MeasurementOperator::Projector { target } => {
                if target.len() != state.modes.len() {
                    return Err(Error::OccupationLength {
                        got: target.len(),
                        want: state.modes.len(),
                    });
                }
                Ok(state.amplitude(target).norm_sqr())
            }
        }
    }
}

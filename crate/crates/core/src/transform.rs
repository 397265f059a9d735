//! Mode transforms and their lift to Fock space.
//!
//! A transform is a complex matrix `M` acting on creation operators as
//! a†_i → Σ_j M_ji a†_j (columns index input modes), equivalently c′ = M·c
//! on single-photon coefficient vectors. Matrices may be sub-unitary
//! (largest singular value ≤ 1) to model loss and filtering; applying one
//! shrinks the state norm and the missing weight is the probability that a
//! later vacuum post-selection fails.
//!
//! Two independent implementations of the induced Fock-space action live
//! here. The production path converts amplitudes to monomial coefficients
//! (divide by √(∏n!)), substitutes each creation operator, expands with
//! exact integer multinomials, and converts back (multiply by √(∏n!)).
//! The oracle path computes one matrix element at a time as a permanent of
//! a row/column-repeated matrix. The two must agree; tests and the
//! acceptance suite compare them over random transforms.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{enumerate_occupations, Occupation, StateVector};
use crate::{Complex, PRUNE_THRESHOLD};

/// Tolerance on the singular-value physicality bound.
const SV_TOL: f64 = 1e-12;

/// Tolerance for the unitarity flag.
const UNITARY_TOL: f64 = 1e-12;

/// A named complex matrix over a mode set, validated to be physical.
#[derive(Clone, Debug)]
pub struct ModeTransform {
    label: String,
    matrix: DMatrix<Complex>,
    unitary: bool,
}

impl ModeTransform {
    /// Validate and wrap a matrix. Rejects non-square matrices and any
    /// matrix with a singular value beyond 1 + 1e-12.
    pub fn new(label: impl Into<String>, matrix: DMatrix<Complex>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                dim: matrix.nrows(),
                modes: matrix.ncols(),
            });
        }
        let sigma_max = matrix
            .clone()
            .singular_values()
            .iter()
            .fold(0.0f64, |m, s| m.max(*s));
        if sigma_max > 1.0 + SV_TOL {
            return Err(Error::Unphysical { sigma_max });
        }
        let n = matrix.nrows();
        let gram = matrix.adjoint() * &matrix;
        let eye = DMatrix::<Complex>::identity(n, n);
        let unitary = (&gram - &eye)
            .iter()
            .all(|z| z.norm() <= UNITARY_TOL);
        Ok(ModeTransform {
            label: label.into(),
            matrix,
            unitary,
        })
    }

    pub fn identity(dim: usize) -> Self {
        ModeTransform {
            label: "identity".into(),
            matrix: DMatrix::identity(dim, dim),
            unitary: true,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &DMatrix<Complex> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// True when M†M = I within 1e-12.
    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// The transform applying `self` first, then `next`.
    pub fn then(&self, next: &ModeTransform) -> Result<ModeTransform> {
        if self.dim() != next.dim() {
            return Err(Error::DimensionMismatch {
                dim: next.dim(),
                modes: self.dim(),
            });
        }
        ModeTransform::new(
            format!("{}+{}", self.label, next.label),
            &next.matrix * &self.matrix,
        )
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

/// Exact n!/(k_1!...k_m!) as u128; inputs stay tiny (n ≤ n_max ≤ ~20).
fn multinomial(n: u32, parts: &[u32]) -> u128 {
    debug_assert_eq!(parts.iter().sum::<u32>(), n);
    let mut value: u128 = 1;
    let mut seen: u32 = 0;
    for &k in parts {
        for i in 1..=k {
            seen += 1;
            value = value * (seen as u128) / (i as u128);
        }
    }
    debug_assert_eq!(seen, n);
    value
}

/// Lift `M` to Fock space and apply it to every term of `state`.
///
/// Photon number is conserved term by term, so the cap `n_max` cannot be
/// exceeded. The output is unnormalized whenever `M` is sub-unitary.
pub fn apply_mode_transform(state: &StateVector, m: &ModeTransform) -> Result<StateVector> {
    let dim = state.modes().len();
    if m.dim() != dim {
        return Err(Error::DimensionMismatch {
            dim: m.dim(),
            modes: dim,
        });
    }
    let mat = m.matrix();
    let mut out = StateVector::zero(state.modes().clone(), state.n_max());
    for (occ, amp) in state.terms() {
        // Fock amplitude -> monomial coefficient.
        let in_norm: f64 = occ.counts().iter().map(|&n| factorial(n)).product();
        let mut poly = std::collections::BTreeMap::new();
        poly.insert(Occupation::zeros(dim), amp / in_norm.sqrt());

        for (i, &n) in occ.counts().iter().enumerate() {
            if n == 0 {
                continue;
            }
            // (sum_j M_ji a†_j)^n expanded with exact multinomials.
            let splits = enumerate_occupations(dim, n);
            let mut next = std::collections::BTreeMap::new();
            for (base, coeff) in &poly {
                for split in &splits {
                    let mut weight = Complex::new(multinomial(n, split.counts()) as f64, 0.0);
                    for (j, &k) in split.counts().iter().enumerate() {
                        for _ in 0..k {
                            weight *= mat[(j, i)];
                        }
                    }
                    if weight.norm_sqr() == 0.0 {
                        continue;
                    }
                    let combined: Vec<u32> = base
                        .counts()
                        .iter()
                        .zip(split.counts())
                        .map(|(a, b)| a + b)
                        .collect();
                    *next.entry(Occupation::new(combined)).or_insert(Complex::default()) +=
                        coeff * weight;
                }
            }
            poly = next;
        }

        // Monomial coefficient -> Fock amplitude.
        for (out_occ, coeff) in poly {
            let out_norm: f64 = out_occ.counts().iter().map(|&n| factorial(n)).product();
            out.add_term(out_occ, coeff * out_norm.sqrt())?;
        }
    }
    Ok(out.pruned(PRUNE_THRESHOLD))
}

/// Permanent by inclusion-exclusion (Ryser), O(2^n n). Matrices here never
/// exceed the photon cap in size.
pub fn permanent(m: &DMatrix<Complex>) -> Complex {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "permanent needs a square matrix");
    if n == 0 {
        return Complex::new(1.0, 0.0);
    }
    assert!(n <= 20, "permanent size out of intended range");
    let mut total = Complex::default();
    for subset in 1u32..(1 << n) {
        let bits = subset.count_ones();
        let mut prod = Complex::new(1.0, 0.0);
        for i in 0..n {
            let mut row_sum = Complex::default();
            for j in 0..n {
                if subset & (1 << j) != 0 {
                    row_sum += m[(i, j)];
                }
            }
            prod *= row_sum;
        }
        let sign = if (n as u32 - bits).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += prod * sign;
    }
    total
}

/// Independent amplitude oracle: ⟨out|U(M)|in⟩ within the number-conserving
/// sector, as perm of the repeated matrix over √(∏n_in!∏n_out!). Photon
/// mismatch returns 0 by contract.
pub fn fock_amplitude_oracle(
    m: &ModeTransform,
    input: &Occupation,
    output: &Occupation,
) -> Complex {
    if input.total() != output.total() {
        return Complex::default();
    }
    let n = input.total() as usize;
    if n == 0 {
        return Complex::new(1.0, 0.0);
    }
    let mut rows = Vec::with_capacity(n);
    for (mode, &count) in output.counts().iter().enumerate() {
        rows.extend(std::iter::repeat_n(mode, count as usize));
    }
    let mut cols = Vec::with_capacity(n);
    for (mode, &count) in input.counts().iter().enumerate() {
        cols.extend(std::iter::repeat_n(mode, count as usize));
    }
    let mat = m.matrix();
    let repeated = DMatrix::from_fn(n, n, |r, c| mat[(rows[r], cols[c])]);
    let norm: f64 = input
        .counts()
        .iter()
        .chain(output.counts())
        .map(|&k| factorial(k))
        .product();
    permanent(&repeated) / norm.sqrt()
}

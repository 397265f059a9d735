//! Python bindings over the core simulator.
//!
//! The module mirrors the library's vocabulary: states, the construction
//! chain, detection, the accidental background, and fringe fitting. All
//! angles are radians and all rates follow the core conventions; there is
//! no unit translation layer here.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use noonlab::background;
use noonlab::construction;
use noonlab::detection;
use noonlab::error::Error;
use noonlab::experiment;
use noonlab::experiment::{fit, poisson, presets};
use noonlab::fock;

/// Configuration and input mistakes become ValueError; numerical refusals
/// (aliasing, stationary phase, singular fits, zero norms) RuntimeError.
fn err(e: Error) -> PyErr {
    match e {
        Error::Io(_)
        | Error::Serialization(_)
        | Error::InvalidParameter(_)
        | Error::InvalidModeSet
        | Error::ModeSetMismatch(_, _)
        | Error::UnknownMode(_)
        | Error::OccupationLength { .. }
        | Error::AmplitudeRange { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Sparse bosonic state over labeled modes.
#[pyclass(name = "StateVector", from_py_object)]
#[derive(Clone)]
struct PyStateVector {
    inner: fock::StateVector,
}

#[pymethods]
impl PyStateVector {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyStateVector {
            inner: fock::StateVector::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn modes(&self) -> Vec<String> {
        self.inner.modes().names().to_vec()
    }

    fn n_max(&self) -> u32 {
        self.inner.n_max()
    }

    /// Amplitude of one occupation, zero when the term is absent.
    fn amplitude(&self, occ: Vec<u32>) -> Complex64 {
        self.inner.amplitude(&fock::Occupation::new(occ))
    }

    /// All stored terms as (occupation, amplitude) pairs.
    fn terms(&self) -> Vec<(Vec<u32>, Complex64)> {
        self.inner
            .terms()
            .map(|(occ, amp)| (occ.counts().to_vec(), amp))
            .collect()
    }

    fn term_count(&self) -> usize {
        self.inner.term_count()
    }

    fn squared_norm(&self) -> f64 {
        self.inner.squared_norm()
    }

    fn photon_number(&self) -> Option<u32> {
        self.inner.photon_number()
    }

    fn normalized(&self) -> PyResult<Self> {
        Ok(PyStateVector {
            inner: self.inner.normalized().map_err(err)?,
        })
    }

    /// |<self|other>|^2 over both norms; global phases drop out.
    fn fidelity(&self, other: &PyStateVector) -> PyResult<f64> {
        self.inner
            .fidelity_up_to_global_phase(&other.inner)
            .map_err(err)
    }

    /// <A_N> with A_N = |0,N><N,0| + |N,0><0,N| on a two-mode state.
    fn expectation_a_n(&self, n: u32) -> PyResult<f64> {
        self.inner.expectation_a_n(n).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "StateVector(modes={:?}, terms={}, norm^2={:.6})",
            self.inner.modes().names(),
            self.inner.term_count(),
            self.inner.squared_norm()
        )
    }
}

/// Construction-chain settings; omitted arguments keep the defaults that
/// target the three-photon NOON state.
#[pyclass(name = "ChainParams", from_py_object)]
#[derive(Clone)]
struct PyChainParams {
    inner: construction::ChainParams,
}

#[pymethods]
impl PyChainParams {
    #[new]
    #[pyo3(signature = (hwp_theta=None, pp_t_h=None, pp_t_v=None, inject_t_h=None,
                        inject_t_v=None, lo_angle=None, qwp_theta=None,
                        phase_origin=None, n_max=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        hwp_theta: Option<f64>,
        pp_t_h: Option<f64>,
        pp_t_v: Option<f64>,
        inject_t_h: Option<f64>,
        inject_t_v: Option<f64>,
        lo_angle: Option<f64>,
        qwp_theta: Option<f64>,
        phase_origin: Option<f64>,
        n_max: Option<u32>,
    ) -> Self {
        let mut inner = construction::ChainParams::default();
        if let Some(v) = hwp_theta {
            inner.hwp_theta = v;
        }
        if let Some(v) = pp_t_h {
            inner.pp_t_h = v;
        }
        if let Some(v) = pp_t_v {
            inner.pp_t_v = v;
        }
        if let Some(v) = inject_t_h {
            inner.inject_t_h = v;
        }
        if let Some(v) = inject_t_v {
            inner.inject_t_v = v;
        }
        if let Some(v) = lo_angle {
            inner.lo_angle = v;
        }
        if let Some(v) = qwp_theta {
            inner.qwp_theta = v;
        }
        if phase_origin.is_some() {
            inner.phase_origin = phase_origin;
        }
        if let Some(v) = n_max {
            inner.n_max = v;
        }
        PyChainParams { inner }
    }

    #[getter]
    fn hwp_theta(&self) -> f64 {
        self.inner.hwp_theta
    }

    #[getter]
    fn pp_t_v(&self) -> f64 {
        self.inner.pp_t_v
    }

    #[getter]
    fn inject_t_v(&self) -> f64 {
        self.inner.inject_t_v
    }

    #[getter]
    fn qwp_theta(&self) -> f64 {
        self.inner.qwp_theta
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Output of the chain: final state, success bookkeeping, wedge origin.
#[pyclass(name = "ChainResult")]
struct PyChainResult {
    inner: construction::ChainResult,
}

#[pymethods]
impl PyChainResult {
    #[getter]
    fn state(&self) -> PyStateVector {
        PyStateVector {
            inner: self.inner.state.clone(),
        }
    }

    #[getter]
    fn success_probability(&self) -> f64 {
        self.inner.success_probability
    }

    #[getter]
    fn phase_origin(&self) -> f64 {
        self.inner.phase_origin
    }

    #[getter]
    fn stage_log(&self) -> Vec<(String, f64)> {
        self.inner
            .stage_log
            .iter()
            .map(|s| (s.label.clone(), s.success_probability))
            .collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

/// Analyzer basis angle (radians from vertical) and per-port fanout.
#[pyclass(name = "AnalyzerConfig", from_py_object)]
#[derive(Clone)]
struct PyAnalyzerConfig {
    inner: detection::AnalyzerConfig,
}

#[pymethods]
impl PyAnalyzerConfig {
    #[new]
    #[pyo3(signature = (basis, detectors_plus=3, detectors_minus=3))]
    fn new(basis: f64, detectors_plus: u32, detectors_minus: u32) -> PyResult<Self> {
        Ok(PyAnalyzerConfig {
            inner: detection::AnalyzerConfig::new(basis, detectors_plus, detectors_minus)
                .map_err(err)?,
        })
    }

    #[staticmethod]
    fn plus_minus_45() -> Self {
        PyAnalyzerConfig {
            inner: detection::AnalyzerConfig::plus_minus_45(),
        }
    }

    #[getter]
    fn basis(&self) -> f64 {
        self.inner.basis
    }

    #[getter]
    fn detectors(&self) -> (u32, u32) {
        (self.inner.detectors_plus, self.inner.detectors_minus)
    }
}

/// Fitted fringe parameters with standard errors.
#[pyclass(name = "FringeFit")]
struct PyFringeFit {
    inner: fit::FringeFit,
}

#[pymethods]
impl PyFringeFit {
    #[getter]
    fn k(&self) -> u32 {
        self.inner.k
    }

    #[getter]
    fn a_offset(&self) -> f64 {
        self.inner.a_offset
    }

    #[getter]
    fn b_amplitude(&self) -> f64 {
        self.inner.b_amplitude
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn visibility(&self) -> f64 {
        self.inner.visibility
    }

    #[getter]
    fn visibility_err(&self) -> f64 {
        self.inner.visibility_err
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn flagged(&self) -> bool {
        self.inner.flagged
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "FringeFit(k={}, A={:.4}, B={:.4}, V={:.4}+-{:.4})",
            self.inner.k,
            self.inner.a_offset,
            self.inner.b_amplitude,
            self.inner.visibility,
            self.inner.visibility_err
        )
    }
}

/// One simulated scan record: phases, model means, samples, sigmas.
#[pyclass(name = "FringeData")]
struct PyFringeData {
    inner: experiment::FringeData,
}

#[pymethods]
impl PyFringeData {
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(PyFringeData {
            inner: experiment::FringeData::from_csv(text).map_err(err)?,
        })
    }

    #[getter]
    fn phis(&self) -> Vec<f64> {
        self.inner.phis.clone()
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.inner.mean.clone()
    }

    #[getter]
    fn sampled(&self) -> Vec<f64> {
        self.inner.sampled.clone()
    }

    #[getter]
    fn sigma(&self) -> Vec<f64> {
        self.inner.sigma.clone()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Result of the distinguishable-photon visibility search.
#[pyclass(name = "BoundResult")]
struct PyBoundResult {
    #[pyo3(get)]
    visibility: f64,
    #[pyo3(get)]
    thetas: Vec<f64>,
    #[pyo3(get)]
    constant: f64,
    #[pyo3(get)]
    third_harmonic: f64,
}

/// The NOON target (|N,0> + |0,N>)/sqrt(2), built as the factor product.
#[pyfunction]
#[pyo3(signature = (n, chi=None))]
fn build_noon_target(n: u32, chi: Option<f64>) -> PyResult<PyStateVector> {
    let mut spec = construction::NoonSpec::new(n).map_err(err)?;
    if let Some(c) = chi {
        spec = spec.with_chi(c);
    }
    Ok(PyStateVector {
        inner: construction::build_noon_target(&spec).map_err(err)?,
    })
}

/// (|N,0> + e^{iN phi}|0,N>)/sqrt(2) on (H, V).
#[pyfunction]
fn noon_with_phase(n: u32, phi: f64) -> PyResult<PyStateVector> {
    Ok(PyStateVector {
        inner: construction::noon_with_phase(n, phi).map_err(err)?,
    })
}

/// Run the full construction chain at wedge phase phi.
#[pyfunction]
#[pyo3(signature = (phi, params=None))]
fn run_paper_chain(phi: f64, params: Option<PyChainParams>) -> PyResult<PyChainResult> {
    let p = params.map(|p| p.inner).unwrap_or_default();
    Ok(PyChainResult {
        inner: construction::run_paper_chain(phi, &p).map_err(err)?,
    })
}

/// The normalized state right after LO injection.
#[pyfunction]
#[pyo3(signature = (params=None))]
fn post_injection_state(params: Option<PyChainParams>) -> PyResult<PyStateVector> {
    let p = params.map(|p| p.inner).unwrap_or_default();
    Ok(PyStateVector {
        inner: construction::post_injection_state(&p).map_err(err)?,
    })
}

/// The pair through the whole stack without the LO: (state, probability).
#[pyfunction]
#[pyo3(signature = (params=None))]
fn dc_transit(params: Option<PyChainParams>) -> PyResult<(PyStateVector, f64)> {
    let p = params.map(|p| p.inner).unwrap_or_default();
    let outcome = construction::dc_transit(&p).map_err(err)?;
    Ok((
        PyStateVector {
            inner: outcome.state,
        },
        outcome.success_probability,
    ))
}

/// Largest sixfold-forbidden circular amplitude of a three-photon state.
#[pyfunction]
fn check_sixfold_symmetry(state: &PyStateVector) -> PyResult<f64> {
    construction::check_sixfold_symmetry(&state.inner).map_err(err)
}

/// cos^4(pi/12)/3^(1/6), the quoted ideal double-post-selection figure.
#[pyfunction]
fn ideal_success_reference() -> f64 {
    construction::ideal_success_reference()
}

/// Closed form of the default chain's success, (2/3)(1 - 3^(-1/6)).
#[pyfunction]
fn default_chain_success_closed_form() -> f64 {
    construction::default_chain_success_closed_form()
}

/// Probability of the (n_plus, n_minus) port pattern; no fanout.
#[pyfunction]
fn pattern_probability(
    state: &PyStateVector,
    analyzer: &PyAnalyzerConfig,
    pattern: (u32, u32),
) -> PyResult<f64> {
    detection::pattern_probability(
        &state.inner,
        &analyzer.inner,
        detection::DetectionPattern::new(pattern.0, pattern.1),
    )
    .map_err(err)
}

/// Pattern probability times the detector-fanout acceptance.
#[pyfunction]
fn coincidence_rate(
    state: &PyStateVector,
    analyzer: &PyAnalyzerConfig,
    pattern: (u32, u32),
) -> PyResult<f64> {
    detection::coincidence_rate(
        &state.inner,
        &analyzer.inner,
        detection::DetectionPattern::new(pattern.0, pattern.1),
    )
    .map_err(err)
}

/// Phase uncertainty of the N-photon parity estimator; 1/N away from the
/// stationary points.
#[pyfunction]
fn phase_sensitivity(n: u32, phi: f64) -> PyResult<f64> {
    detection::phase_sensitivity(n, phi).map_err(err)
}

/// Maximize the distinguishable-photon three-fold visibility; lands on 1/5.
#[pyfunction]
#[pyo3(signature = (grid_step=None, purity_tol=None, refine=None))]
fn visibility_bound(
    grid_step: Option<f64>,
    purity_tol: Option<f64>,
    refine: Option<bool>,
) -> PyResult<PyBoundResult> {
    let mut options = detection::distinguishable::SearchOptions::default();
    if let Some(v) = grid_step {
        options.grid_step = v;
    }
    if let Some(v) = purity_tol {
        options.purity_tol = v;
    }
    if let Some(v) = refine {
        options.refine = v;
    }
    let bound = detection::distinguishable::visibility_bound(&options).map_err(err)?;
    Ok(PyBoundResult {
        visibility: bound.visibility,
        thetas: bound.thetas.to_vec(),
        constant: bound.constant,
        third_harmonic: bound.third_harmonic,
    })
}

/// Expected accidental triples per interval at wedge phase phi. Rates
/// default to the bundled representative set; pass a rates JSON to
/// override.
#[pyfunction]
#[pyo3(signature = (phi, pattern=(2, 1), analyzer=None, rates_json=None))]
fn accidental_triples(
    phi: f64,
    pattern: (u32, u32),
    analyzer: Option<PyAnalyzerConfig>,
    rates_json: Option<&str>,
) -> PyResult<f64> {
    let rates = match rates_json {
        Some(text) => background::SourceRates::from_json(text).map_err(err)?,
        None => background::SourceRates::paper_like(),
    };
    let analyzer = analyzer
        .map(|a| a.inner)
        .unwrap_or_else(detection::AnalyzerConfig::plus_minus_45);
    background::accidental_triples(
        &rates,
        &background::paper_channels(),
        &analyzer,
        detection::DetectionPattern::new(pattern.0, pattern.1),
        phi,
    )
    .map_err(err)
}

/// Project uniform full-period samples onto harmonics 0..=k_max; returns
/// (constant, cos_coeffs, sin_coeffs).
#[pyfunction]
fn fourier_decompose(
    phis: Vec<f64>,
    values: Vec<f64>,
    k_max: u32,
) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let d = background::fourier_decompose(&phis, &values, k_max).map_err(err)?;
    Ok((d.constant, d.cos_coeffs, d.sin_coeffs))
}

/// Least-squares fit of A + B cos(k phi + delta).
#[pyfunction]
fn fit_fringe(phis: Vec<f64>, values: Vec<f64>, k: u32) -> PyResult<PyFringeFit> {
    Ok(PyFringeFit {
        inner: fit::fit_fringe(&phis, &values, k).map_err(err)?,
    })
}

/// One Poisson draw from the (seed, stream) counter-mode generator.
#[pyfunction]
fn poisson_sample(seed: u64, stream: u64, mean: f64) -> PyResult<u64> {
    poisson::sample_streamed(seed, stream, mean).map_err(err)
}

/// Simulate a chain fringe scan over one full period (or the given span).
#[pyfunction]
#[pyo3(signature = (points, scale, seed=0, pattern=(2, 1), analyzer=None,
                    background=false, params=None, start=0.0,
                    span=std::f64::consts::TAU))]
#[allow(clippy::too_many_arguments)]
fn scan_chain(
    points: usize,
    scale: f64,
    seed: u64,
    pattern: (u32, u32),
    analyzer: Option<PyAnalyzerConfig>,
    background: bool,
    params: Option<PyChainParams>,
    start: f64,
    span: f64,
) -> PyResult<PyFringeData> {
    let config = experiment::ScanConfig {
        phases: experiment::PhaseScan::new(start, span, points).map_err(err)?,
        chain: params.map(|p| p.inner).unwrap_or_default(),
        analyzer: analyzer
            .map(|a| a.inner)
            .unwrap_or_else(detection::AnalyzerConfig::plus_minus_45),
        pattern: detection::DetectionPattern::new(pattern.0, pattern.1),
        scale,
        background: background.then(|| experiment::BackgroundModel {
            rates: background::SourceRates::paper_like(),
            channels: background::paper_channels(),
        }),
        seed,
    };
    Ok(PyFringeData {
        inner: experiment::scan(&config).map_err(err)?,
    })
}

/// Rebuild one of the bundled figure datasets; returns the bundle JSON.
#[pyfunction]
#[pyo3(signature = (preset, seed=0))]
fn reproduce(preset: &str, seed: u64) -> PyResult<String> {
    let preset: presets::Preset = preset.parse().map_err(err)?;
    Ok(presets::reproduce(preset, seed).map_err(err)?.to_json())
}

#[pymodule]
fn noonlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStateVector>()?;
    m.add_class::<PyChainParams>()?;
    m.add_class::<PyChainResult>()?;
    m.add_class::<PyAnalyzerConfig>()?;
    m.add_class::<PyFringeFit>()?;
    m.add_class::<PyFringeData>()?;
    m.add_class::<PyBoundResult>()?;
    m.add_function(wrap_pyfunction!(build_noon_target, m)?)?;
    m.add_function(wrap_pyfunction!(noon_with_phase, m)?)?;
    m.add_function(wrap_pyfunction!(run_paper_chain, m)?)?;
    m.add_function(wrap_pyfunction!(post_injection_state, m)?)?;
    m.add_function(wrap_pyfunction!(dc_transit, m)?)?;
    m.add_function(wrap_pyfunction!(check_sixfold_symmetry, m)?)?;
    m.add_function(wrap_pyfunction!(ideal_success_reference, m)?)?;
    m.add_function(wrap_pyfunction!(default_chain_success_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(pattern_probability, m)?)?;
    m.add_function(wrap_pyfunction!(coincidence_rate, m)?)?;
    m.add_function(wrap_pyfunction!(phase_sensitivity, m)?)?;
    m.add_function(wrap_pyfunction!(visibility_bound, m)?)?;
    m.add_function(wrap_pyfunction!(accidental_triples, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(fit_fringe, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_sample, m)?)?;
    m.add_function(wrap_pyfunction!(scan_chain, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}

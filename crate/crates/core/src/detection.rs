//! The polarization analyzer, coincidence patterns, phase sensitivity,
//! and the classical (distinguishable-photon) visibility bound.
//!
//! The analyzer is a rotatable basis followed by photon-number-resolving
//! detection emulated by fanout: each output port splits its photons over
//! k single-photon counters and a pattern registers only when every photon
//! lands on its own counter. The plus port of a basis at angle beta (from
//! vertical) transmits polarization beta; it is mode index 0 after the
//! basis rotation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::noon_with_phase;
use crate::elements;
use crate::error::{Error, Result};
use crate::fock::{Occupation, StateVector};
use crate::transform::apply_mode_transform;

/// Analyzer basis angle plus the detector fanout on each port.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyzerConfig {
    /// Basis angle in radians from vertical; the plus port transmits this
    /// polarization.
    pub basis: f64,
    pub detectors_plus: u32,
    pub detectors_minus: u32,
}

impl AnalyzerConfig {
    pub fn new(basis: f64, detectors_plus: u32, detectors_minus: u32) -> Result<Self> {
        if detectors_plus == 0 || detectors_minus == 0 {
            return Err(Error::InvalidParameter(
                "analyzer needs at least one detector per port".into(),
            ));
        }
        Ok(AnalyzerConfig {
            basis,
            detectors_plus,
            detectors_minus,
        })
    }

    /// The +-45 degree basis with three counters a side, the workhorse
    /// configuration for the three-photon fringes.
    pub fn plus_minus_45() -> Self {
        AnalyzerConfig {
            basis: std::f64::consts::FRAC_PI_4,
            detectors_plus: 3,
            detectors_minus: 3,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&AnalyzerJson::from(self)).expect("analyzer json")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: AnalyzerJson =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        AnalyzerConfig::new(raw.basis_deg.to_radians(), raw.detectors[0], raw.detectors[1])
    }
}

#[derive(Serialize, Deserialize)]
struct AnalyzerJson {
    basis_deg: f64,
    detectors: [u32; 2],
}

impl From<&AnalyzerConfig> for AnalyzerJson {
    fn from(a: &AnalyzerConfig) -> Self {
        AnalyzerJson {
            basis_deg: a.basis.to_degrees(),
            detectors: [a.detectors_plus, a.detectors_minus],
        }
    }
}

/// Photon counts on the analyzer's two ports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionPattern {
    pub n_plus: u32,
    pub n_minus: u32,
}

impl DetectionPattern {
    pub fn new(n_plus: u32, n_minus: u32) -> Self {
        DetectionPattern { n_plus, n_minus }
    }

    pub fn total(&self) -> u32 {
        self.n_plus + self.n_minus
    }
}

/// Rotate a two-mode polarization state into the analyzer basis. The plus
/// port comes out as mode 0.
pub fn to_analyzer_basis(state: &StateVector, analyzer: &AnalyzerConfig) -> Result<StateVector> {
    apply_mode_transform(
        state,
        &elements::rotator(std::f64::consts::FRAC_PI_2 - analyzer.basis),
    )
}

/// Probability that a normalized state delivers exactly the pattern's
/// photon counts to the analyzer ports. Ignores detector fanout.
pub fn pattern_probability(
    state: &StateVector,
    analyzer: &AnalyzerConfig,
    pattern: DetectionPattern,
) -> Result<f64> {
    state.check_normalized()?;
    let rotated = to_analyzer_basis(state, analyzer)?;
    let occ = Occupation::new(vec![pattern.n_plus, pattern.n_minus]);
    Ok(rotated.amplitude(&occ).norm_sqr())
}

/// Probability that n photons entering a balanced fanout over k counters
/// all land on distinct ones: prod_{i<n} (k - i)/k.
pub fn fanout_distinct_probability(n: u32, k: u32) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if k == 0 {
        return 0.0;
    }
    (0..n).map(|i| (k as f64 - i as f64) / k as f64).product()
}

/// Pattern probability times the fanout acceptance on both ports: the
/// fraction of trials the counters actually resolve the pattern.
pub fn coincidence_rate(
    state: &StateVector,
    analyzer: &AnalyzerConfig,
    pattern: DetectionPattern,
) -> Result<f64> {
    let p = pattern_probability(state, analyzer, pattern)?;
    Ok(p * fanout_distinct_probability(pattern.n_plus, analyzer.detectors_plus)
        * fanout_distinct_probability(pattern.n_minus, analyzer.detectors_minus))
}

/// Phase uncertainty of the N-photon parity-type estimator on the NOON
/// state at phase phi: Delta A / |d<A>/dphi| with A = |N,0><0,N| + h.c.
///
/// Both numerator and denominator vanish at multiples of pi/N; near those
/// points the estimator carries no information and the function refuses
/// with `Error::StationaryPhase` instead of returning 0/0 noise.
pub fn phase_sensitivity(n: u32, phi: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("photon number must be >= 1".into()));
    }
    let state = noon_with_phase(n, phi)?;
    let a = state.amplitude(&Occupation::new(vec![n, 0]));
    let b = state.amplitude(&Occupation::new(vec![0, n]));
    let mean = 2.0 * (a.conj() * b).re;
    let second_moment = a.norm_sqr() + b.norm_sqr();
    let variance = (second_moment - mean * mean).max(0.0);
    let derivative = -2.0 * n as f64 * (a.conj() * b).im;
    if derivative.abs() < 1e-9 {
        return Err(Error::StationaryPhase);
    }
    Ok(variance.sqrt() / derivative.abs())
}

/// Classical reference: three photons with definite, mutually
/// distinguishable linear polarizations traversing the same wave plate,
/// wedge, and analyzer.
pub mod distinguishable {
    use super::*;
    use crate::Complex;
    use nalgebra::DMatrix;

    /// Single-photon port probabilities (plus, minus) for a linear input
    /// polarization at `theta`, after the quarter-wave plate at 45
    /// degrees, a wedge phase `phi`, and the analyzer basis rotation.
    pub fn port_probabilities(theta: f64, phi: f64, analyzer: &AnalyzerConfig) -> (f64, f64) {
        let train = train_matrix(phi, analyzer);
        port_probabilities_with(&train, theta)
    }

    fn train_matrix(phi: f64, analyzer: &AnalyzerConfig) -> DMatrix<Complex> {
        let quarter = elements::qwp(std::f64::consts::FRAC_PI_4);
        let wedge = elements::phase_shift(phi);
        let basis = elements::rotator(std::f64::consts::FRAC_PI_2 - analyzer.basis);
        basis.matrix() * wedge.matrix() * quarter.matrix()
    }

    fn port_probabilities_with(train: &DMatrix<Complex>, theta: f64) -> (f64, f64) {
        let c = elements::polarization_coeffs(theta);
        let plus = train[(0, 0)] * c[0] + train[(0, 1)] * c[1];
        let minus = train[(1, 0)] * c[0] + train[(1, 1)] * c[1];
        (plus.norm_sqr(), minus.norm_sqr())
    }

    /// Sum over all ways to split the three photons between the ports so
    /// that `pattern.n_plus` land plus and `pattern.n_minus` land minus.
    /// No fanout; this is the port-count probability.
    pub fn assignment_sum(
        thetas: &[f64; 3],
        phi: f64,
        analyzer: &AnalyzerConfig,
        pattern: DetectionPattern,
    ) -> f64 {
        let train = train_matrix(phi, analyzer);
        let ports: Vec<(f64, f64)> = thetas
            .iter()
            .map(|&t| port_probabilities_with(&train, t))
            .collect();
        assignment_sum_from_ports(&ports, pattern)
    }

    fn assignment_sum_from_ports(ports: &[(f64, f64)], pattern: DetectionPattern) -> f64 {
        let n = ports.len() as u32;
        if pattern.total() != n {
            return 0.0;
        }
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() != pattern.n_plus {
                continue;
            }
            let mut p = 1.0;
            for (j, &(plus, minus)) in ports.iter().enumerate() {
                p *= if mask & (1 << j) != 0 { plus } else { minus };
            }
            total += p;
        }
        total
    }

    /// Triple-coincidence rate per trial: assignment sum times the fanout
    /// acceptance on each port.
    pub fn triple_rate(
        thetas: &[f64; 3],
        phi: f64,
        analyzer: &AnalyzerConfig,
        pattern: DetectionPattern,
    ) -> f64 {
        assignment_sum(thetas, phi, analyzer, pattern)
            * fanout_distinct_probability(pattern.n_plus, analyzer.detectors_plus)
            * fanout_distinct_probability(pattern.n_minus, analyzer.detectors_minus)
    }

    /// Knobs for the visibility-bound search.
    #[derive(Clone, Copy, Debug)]
    pub struct SearchOptions {
        /// Coarse grid step over each free polarization angle, radians.
        pub grid_step: f64,
        /// A candidate counts as a pure three-fold fringe only when its
        /// first and second harmonics are below this fraction of the
        /// constant term.
        pub purity_tol: f64,
        /// Polish the best grid point with a shrinking pattern search.
        pub refine: bool,
    }

    impl Default for SearchOptions {
        fn default() -> Self {
            SearchOptions {
                grid_step: 1f64.to_radians(),
                purity_tol: 1e-9,
                refine: true,
            }
        }
    }

    /// Outcome of the bound search.
    #[derive(Clone, Copy, Debug)]
    pub struct BoundResult {
        pub visibility: f64,
        pub thetas: [f64; 3],
        pub constant: f64,
        pub third_harmonic: f64,
    }

    const FOURIER_POINTS: usize = 12;

    /// Exact Fourier amplitudes (constant plus harmonics 1..=3) of the
    /// (2,1) assignment sum over one full wedge period. Twelve uniform
    /// samples resolve a trigonometric polynomial of degree three exactly.
    fn fringe_harmonics(ports: [&[(f64, f64)]; 3]) -> [f64; 4] {
        let pattern = DetectionPattern::new(2, 1);
        let mut sums = [(0.0f64, 0.0f64); 4];
        // The index both selects the sample in three parallel slices and
        // sets the phase, so a range loop is the honest form here.
        #[allow(clippy::needless_range_loop)]
        for m in 0..FOURIER_POINTS {
            let phi = std::f64::consts::TAU * m as f64 / FOURIER_POINTS as f64;
            let rate = assignment_sum_from_ports(
                &[ports[0][m], ports[1][m], ports[2][m]],
                pattern,
            );
            for (k, sum) in sums.iter_mut().enumerate() {
                sum.0 += rate * (k as f64 * phi).cos();
                sum.1 += rate * (k as f64 * phi).sin();
            }
        }
        let scale = 2.0 / FOURIER_POINTS as f64;
        let mut amps = [0.0f64; 4];
        amps[0] = sums[0].0 / FOURIER_POINTS as f64;
        for k in 1..4 {
            amps[k] = scale * sums[k].0.hypot(sums[k].1);
        }
        amps
    }

    /// The wedge-sample train matrices, shared by every candidate.
    fn train_matrices(analyzer: &AnalyzerConfig) -> Vec<DMatrix<Complex>> {
        (0..FOURIER_POINTS)
            .map(|m| {
                train_matrix(
                    std::f64::consts::TAU * m as f64 / FOURIER_POINTS as f64,
                    analyzer,
                )
            })
            .collect()
    }

    fn port_row(trains: &[DMatrix<Complex>], theta: f64) -> Vec<(f64, f64)> {
        trains
            .iter()
            .map(|t| port_probabilities_with(t, theta))
            .collect()
    }

    fn evaluate_rows(rows: [&[(f64, f64)]; 3], purity_tol: f64) -> (Option<f64>, [f64; 4]) {
        let amps = fringe_harmonics(rows);
        if amps[0] <= 0.0 {
            return (None, amps);
        }
        let pure = amps[1] <= purity_tol * amps[0] && amps[2] <= purity_tol * amps[0];
        (pure.then_some(amps[3] / amps[0]), amps)
    }

    fn evaluate(
        thetas: [f64; 3],
        trains: &[DMatrix<Complex>],
        purity_tol: f64,
    ) -> (Option<f64>, [f64; 4]) {
        let rows: [Vec<(f64, f64)>; 3] = std::array::from_fn(|j| port_row(trains, thetas[j]));
        evaluate_rows([&rows[0], &rows[1], &rows[2]], purity_tol)
    }

    /// Maximize the three-fold fringe visibility of the distinguishable
    /// model over the photon polarizations, keeping only configurations
    /// whose fringe is purely three-fold (no residual 1x or 2x ripple).
    /// One angle is pinned to zero; a global rotation only shifts the
    /// fringe. The optimum sits on the staggered 0/60/120 configuration.
    pub fn visibility_bound(options: &SearchOptions) -> Result<BoundResult> {
        let analyzer = AnalyzerConfig::plus_minus_45();
        let steps = (std::f64::consts::PI / options.grid_step).round() as usize;
        if steps < 4 {
            return Err(Error::InvalidParameter(
                "visibility bound grid is too coarse".into(),
            ));
        }
        let angle = |i: usize| std::f64::consts::PI * i as f64 / steps as f64;

        let trains = train_matrices(&analyzer);
        // Port probabilities per grid angle per wedge sample, computed
        // once; the grid loop is then pure arithmetic.
        let table: Vec<Vec<(f64, f64)>> =
            (0..steps).map(|i| port_row(&trains, angle(i))).collect();

        let best = (0..steps)
            .into_par_iter()
            .map(|i2| {
                let mut row_best: Option<(f64, [f64; 3])> = None;
                for i3 in 0..steps {
                    let rows = [&table[0][..], &table[i2][..], &table[i3][..]];
                    if let (Some(vis), _) = evaluate_rows(rows, options.purity_tol) {
                        let better = match row_best {
                            None => true,
                            Some((v, _)) => vis > v,
                        };
                        if better {
                            row_best = Some((vis, [0.0, angle(i2), angle(i3)]));
                        }
                    }
                }
                row_best
            })
            .reduce(
                || None,
                |a, b| match (a, b) {
                    (None, x) => x,
                    (x, None) => x,
                    (Some((va, ta)), Some((vb, tb))) => {
                        // Deterministic tie-break: prefer the smaller angles.
                        if vb > va || (vb == va && (tb[1], tb[2]) < (ta[1], ta[2])) {
                            Some((vb, tb))
                        } else {
                            Some((va, ta))
                        }
                    }
                },
            );

        let (mut vis, mut thetas) = best.ok_or_else(|| {
            Error::InvalidParameter(
                "no pure three-fold configuration found; loosen purity_tol".into(),
            )
        })?;

        if options.refine {
            let mut step = options.grid_step / 2.0;
            while step > 1e-7 {
                let mut moved = false;
                for (dj, dk) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                    let cand = [0.0, thetas[1] + dj * step, thetas[2] + dk * step];
                    if let (Some(v), _) = evaluate(cand, &trains, options.purity_tol) {
                        if v > vis {
                            vis = v;
                            thetas = cand;
                            moved = true;
                        }
                    }
                }
                if !moved {
                    step /= 2.0;
                }
            }
        }

        let (_, amps) = evaluate(thetas, &trains, options.purity_tol);
        Ok(BoundResult {
            visibility: vis,
            thetas,
            constant: amps[0],
            third_harmonic: amps[3],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{run_paper_chain, ChainParams};
    use crate::elements::polarization_coeffs;
    use crate::fock::ModeSet;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, PI, TAU};

    fn noon3(phi: f64) -> StateVector {
        noon_with_phase(3, phi).unwrap()
    }

    #[test]
    fn triple_fringe_forms_at_45() {
        let analyzer = AnalyzerConfig::plus_minus_45();
        for i in 0..24 {
            let phi = TAU * i as f64 / 24.0 + 0.013;
            let state = noon3(phi);
            let c3 = (3.0 * phi).cos();
            let p21 =
                pattern_probability(&state, &analyzer, DetectionPattern::new(2, 1)).unwrap();
            let p30 =
                pattern_probability(&state, &analyzer, DetectionPattern::new(3, 0)).unwrap();
            let p12 =
                pattern_probability(&state, &analyzer, DetectionPattern::new(1, 2)).unwrap();
            let p03 =
                pattern_probability(&state, &analyzer, DetectionPattern::new(0, 3)).unwrap();
            assert_abs_diff_eq!(p21, 3.0 * (1.0 - c3) / 8.0, epsilon = 1e-12);
            assert_abs_diff_eq!(p30, (1.0 + c3) / 8.0, epsilon = 1e-12);
            assert_abs_diff_eq!(p12, 3.0 * (1.0 + c3) / 8.0, epsilon = 1e-12);
            assert_abs_diff_eq!(p03, (1.0 - c3) / 8.0, epsilon = 1e-12);
            assert_abs_diff_eq!(p21 + p30 + p12 + p03, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn chain_output_reproduces_the_ideal_fringe() {
        let analyzer = AnalyzerConfig::plus_minus_45();
        let params = ChainParams::default();
        for i in 0..7 {
            let phi = 0.9 * i as f64;
            let state = run_paper_chain(phi, &params).unwrap().state;
            let p21 =
                pattern_probability(&state, &analyzer, DetectionPattern::new(2, 1)).unwrap();
            assert_abs_diff_eq!(p21, 3.0 * (1.0 - (3.0 * phi).cos()) / 8.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fanout_acceptance_values() {
        assert_abs_diff_eq!(fanout_distinct_probability(0, 0), 1.0);
        assert_abs_diff_eq!(fanout_distinct_probability(0, 3), 1.0);
        assert_abs_diff_eq!(fanout_distinct_probability(1, 1), 1.0);
        assert_abs_diff_eq!(fanout_distinct_probability(2, 2), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            fanout_distinct_probability(3, 3),
            2.0 / 9.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(fanout_distinct_probability(4, 3), 0.0);
        assert_abs_diff_eq!(fanout_distinct_probability(2, 0), 0.0);
    }

    #[test]
    fn coincidence_rate_applies_fanout() {
        let analyzer = AnalyzerConfig::plus_minus_45();
        let state = noon3(0.37);
        let pattern = DetectionPattern::new(2, 1);
        let p = pattern_probability(&state, &analyzer, pattern).unwrap();
        let r = coincidence_rate(&state, &analyzer, pattern).unwrap();
        // k = 3 per port: (2 distinct of 3) x (1 of 3) = 2/3.
        assert_abs_diff_eq!(r, p * (2.0 / 3.0), epsilon = 1e-14);
    }

    #[test]
    fn pattern_probability_rotation_covariance() {
        // Rotating state and analyzer together changes nothing.
        let state = noon3(1.234);
        let pattern = DetectionPattern::new(2, 1);
        let base = AnalyzerConfig::plus_minus_45();
        let p0 = pattern_probability(&state, &base, pattern).unwrap();
        for alpha in [0.3, -0.7, 1.9] {
            let rotated =
                apply_mode_transform(&state, &elements::rotator(alpha)).unwrap();
            let turned = AnalyzerConfig::new(
                base.basis + alpha,
                base.detectors_plus,
                base.detectors_minus,
            )
            .unwrap();
            let p = pattern_probability(&rotated, &turned, pattern).unwrap();
            assert_abs_diff_eq!(p, p0, epsilon = 1e-12);
        }
    }

    #[test]
    fn mismatched_pattern_has_zero_probability() {
        let analyzer = AnalyzerConfig::plus_minus_45();
        let state = noon3(0.2);
        let p = pattern_probability(&state, &analyzer, DetectionPattern::new(1, 1)).unwrap();
        assert_abs_diff_eq!(p, 0.0);
    }

    #[test]
    fn phase_sensitivity_is_one_over_n() {
        for n in 1..=4u32 {
            for i in 1..10 {
                let phi = 0.9 * PI * i as f64 / (10.0 * n as f64) + 0.02;
                let s = phase_sensitivity(n, phi).unwrap();
                assert_abs_diff_eq!(s, 1.0 / n as f64, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn phase_sensitivity_refuses_stationary_points() {
        assert!(matches!(
            phase_sensitivity(3, 0.0),
            Err(Error::StationaryPhase)
        ));
        assert!(matches!(
            phase_sensitivity(2, PI / 2.0),
            Err(Error::StationaryPhase)
        ));
    }

    #[test]
    fn analyzer_json_round_trip() {
        let a = AnalyzerConfig::new(FRAC_PI_4, 3, 2).unwrap();
        let text = a.to_json();
        let back = AnalyzerConfig::from_json(&text).unwrap();
        assert_abs_diff_eq!(back.basis, a.basis, epsilon = 1e-12);
        assert_eq!(back.detectors_plus, 3);
        assert_eq!(back.detectors_minus, 2);
    }

    #[test]
    fn distinguishable_ports_sum_to_one_and_match_fock() {
        let analyzer = AnalyzerConfig::plus_minus_45();
        for &(theta, phi) in &[(0.3, 0.9), (1.1, 2.4), (2.7, 5.5)] {
            let (p, m) = distinguishable::port_probabilities(theta, phi, &analyzer);
            assert_abs_diff_eq!(p + m, 1.0, epsilon = 1e-12);

            // Same number from the full Fock pipeline on one photon.
            let single = StateVector::vacuum(ModeSet::polarization(), 1)
                .apply_creation_superposition(&polarization_coeffs(theta))
                .unwrap();
            let through = apply_mode_transform(
                &apply_mode_transform(&single, &elements::qwp(FRAC_PI_4)).unwrap(),
                &elements::phase_shift(phi),
            )
            .unwrap();
            let p_fock =
                pattern_probability(&through, &analyzer, DetectionPattern::new(1, 0)).unwrap();
            assert_abs_diff_eq!(p, p_fock, epsilon = 1e-12);
        }
    }

    #[test]
    fn distinguishable_assignments_are_complete() {
        let analyzer = AnalyzerConfig::plus_minus_45();
        let thetas = [0.0, 0.8, 2.1];
        for &phi in &[0.0, 1.3, 4.4] {
            let total: f64 = [(3, 0), (2, 1), (1, 2), (0, 3)]
                .iter()
                .map(|&(a, b)| {
                    distinguishable::assignment_sum(
                        &thetas,
                        phi,
                        &analyzer,
                        DetectionPattern::new(a, b),
                    )
                })
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn staggered_angles_give_exactly_one_fifth() {
        // The 0/60/120 configuration is the known optimum; its (2,1)
        // fringe is purely three-fold with visibility 1/5.
        let analyzer = AnalyzerConfig::plus_minus_45();
        let thetas = [0.0, PI / 3.0, 2.0 * PI / 3.0];
        let pattern = DetectionPattern::new(2, 1);
        let samples: Vec<f64> = (0..12)
            .map(|m| {
                distinguishable::assignment_sum(
                    &thetas,
                    TAU * m as f64 / 12.0,
                    &analyzer,
                    pattern,
                )
            })
            .collect();
        let mean: f64 = samples.iter().sum::<f64>() / 12.0;
        let mut c3 = 0.0;
        let mut s3 = 0.0;
        let mut c1 = 0.0;
        let mut s1 = 0.0;
        for (m, r) in samples.iter().enumerate() {
            let phi = TAU * m as f64 / 12.0;
            c3 += r * (3.0 * phi).cos();
            s3 += r * (3.0 * phi).sin();
            c1 += r * phi.cos();
            s1 += r * phi.sin();
        }
        let amp3 = (c3.hypot(s3)) * 2.0 / 12.0;
        let amp1 = (c1.hypot(s1)) * 2.0 / 12.0;
        assert_abs_diff_eq!(amp3 / mean, 0.2, epsilon = 1e-12);
        assert!(amp1 < 1e-12 * mean);
        assert_abs_diff_eq!(mean, 15.0 / 32.0, epsilon = 1e-12);
        assert_abs_diff_eq!(amp3, 3.0 / 32.0, epsilon = 1e-12);
    }

    #[test]
    fn visibility_bound_search_lands_on_one_fifth() {
        // Coarse grid keeps this test quick; the acceptance suite runs
        // the default resolution.
        let options = distinguishable::SearchOptions {
            grid_step: 5f64.to_radians(),
            ..Default::default()
        };
        let bound = distinguishable::visibility_bound(&options).unwrap();
        assert_abs_diff_eq!(bound.visibility, 0.2, epsilon = 1e-9);
        // The winning angles are staggered by 60 degrees (mod 180).
        let d21 = (bound.thetas[1] - bound.thetas[0]).rem_euclid(PI);
        let d32 = (bound.thetas[2] - bound.thetas[1]).rem_euclid(PI);
        assert_abs_diff_eq!(d21, PI / 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(d32, PI / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn quantum_fringe_beats_the_classical_bound() {
        // Peak-to-mean modulation of the ideal (2,1) fringe is 1,
        // five times the distinguishable ceiling.
        let analyzer = AnalyzerConfig::plus_minus_45();
        let pattern = DetectionPattern::new(2, 1);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..60 {
            let p = pattern_probability(&noon3(TAU * i as f64 / 60.0), &analyzer, pattern)
                .unwrap();
            min = min.min(p);
            max = max.max(p);
        }
        let visibility = (max - min) / (max + min);
        assert_abs_diff_eq!(visibility, 1.0, epsilon = 1e-9);
    }
}

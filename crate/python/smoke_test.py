"""Smoke test for the noonlab_py extension module.

Builds nothing itself: run `cargo build -p noonlab-py` first, then
`python3 python/smoke_test.py`. The script locates the compiled cdylib,
imports it under the module name, and checks a handful of headline
numbers end to end.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_extension():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("libnoonlab_py.so", "libnoonlab_py.dylib", "noonlab_py.dll")
    ]
    for path in candidates:
        if path.exists():
            return path
    sys.exit("extension not found; run `cargo build -p noonlab-py` first")


def import_module():
    built = locate_extension()
    staging = Path(tempfile.mkdtemp(prefix="noonlab_py_"))
    target = staging / ("noonlab_py" + (".pyd" if built.suffix == ".dll" else ".so"))
    shutil.copy2(built, target)
    sys.path.insert(0, str(staging))
    import noonlab_py

    return noonlab_py


def approx(a, b, tol=1e-12):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    m = import_module()

    # Chain construction and its bookkeeping.
    chain = m.run_paper_chain(0.0)
    approx(chain.success_probability, (2.0 / 3.0) * (1.0 - 3.0 ** (-1.0 / 6.0)))
    approx(chain.phase_origin, math.pi / 6.0)
    assert [label for label, _ in chain.stage_log] == [
        "dc_pair", "pbs", "hwp", "pp", "inject_lo", "qwp", "wedge",
    ]

    target = m.build_noon_target(3)
    assert target.term_count() == 2
    approx(abs(target.amplitude([3, 0])), 1.0 / math.sqrt(2.0))
    approx(chain.state.fidelity(target), 1.0)
    approx(m.check_sixfold_symmetry(m.post_injection_state()), 0.0)

    transit_state, transit_p = m.dc_transit()
    approx(transit_p, 5.0 / 9.0)
    assert transit_state.photon_number() == 2

    # Fringe forms and the parity expectation.
    analyzer = m.AnalyzerConfig.plus_minus_45()
    for i in range(12):
        phi = 2.0 * math.pi * i / 12.0 + 0.037
        state = m.noon_with_phase(3, phi)
        approx(
            m.pattern_probability(state, analyzer, (2, 1)),
            3.0 * (1.0 - math.cos(3.0 * phi)) / 8.0,
            1e-10,
        )
        approx(state.expectation_a_n(3), math.cos(3.0 * phi), 1e-10)
    approx(
        m.coincidence_rate(m.noon_with_phase(3, 0.4), analyzer, (2, 1)),
        (2.0 / 3.0) * 3.0 * (1.0 - math.cos(1.2)) / 8.0,
        1e-10,
    )

    # Metrology numbers.
    approx(m.phase_sensitivity(3, 0.4), 1.0 / 3.0)
    approx(m.ideal_success_reference(), 0.7249, 1e-4)
    bound = m.visibility_bound(grid_step=math.radians(5.0))
    approx(bound.visibility, 0.2, 1e-9)

    # Accidental background level and decomposition.
    phis = [2.0 * math.pi * i / 16.0 for i in range(16)]
    values = [m.accidental_triples(phi) for phi in phis]
    constant, cos_coeffs, sin_coeffs = m.fourier_decompose(phis, values, 3)
    approx(constant, 33.574, 1e-2)
    amp = lambda k: math.hypot(cos_coeffs[k - 1], sin_coeffs[k - 1])
    assert amp(3) < amp(1) < amp(2) < constant

    # Fit an exact fringe, then a sampled scan end to end.
    grid = [2.0 * math.pi * i / 24.0 for i in range(24)]
    exact = [8.0 * (1.0 + 0.42 * math.cos(3.0 * p)) for p in grid]
    fit = m.fit_fringe(grid, exact, 3)
    approx(fit.visibility, 0.42, 1e-10)
    assert not fit.flagged

    data = m.scan_chain(points=24, scale=20000.0, seed=7, background=True)
    assert len(data) == 24
    sampled_fit = m.fit_fringe(data.phis, data.sampled, 3)
    assert 0.8 < sampled_fit.visibility < 1.0, sampled_fit.visibility

    # Preset reproduction is deterministic and carries a valid fit.
    bundle = json.loads(m.reproduce("fig2c", seed=7))
    assert bundle["preset"] == "fig2c"
    assert bundle["fit"]["k"] == 3
    assert m.reproduce("fig2c", seed=7) == m.reproduce("fig2c", seed=7)

    # Error taxonomy: bad input is ValueError, numerical refusal RuntimeError.
    try:
        m.fit_fringe(grid, exact, 0)
        raise AssertionError("k = 0 must be rejected")
    except ValueError:
        pass
    try:
        m.phase_sensitivity(3, 0.0)
        raise AssertionError("stationary phase must be refused")
    except RuntimeError:
        pass

    print("SMOKE PASS")


if __name__ == "__main__":
    main()

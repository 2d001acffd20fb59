import numpy as np
import pytest

from wittenlab import eigensolve, oscillator1d as osc
from wittenlab.errors import DegenerateInput, DomainTooSmall, PositivityViolation


def test_harmonic_ladder_shift_minus():
    sp = osc.spectrum(osc.Harmonic(1.0, -1), 3, tol=1e-7)
    assert abs(sp.values[0]) <= 1e-6
    assert np.allclose(sp.values[1:], [4.0, 8.0], rtol=1e-6)


def test_harmonic_ladder_shift_plus_t3():
    sp = osc.spectrum(osc.Harmonic(3.0, +1), 3, tol=1e-7)
    assert np.allclose(sp.values, [12.0, 24.0, 36.0], rtol=1e-6)


def test_anharmonic_ground_matches_oracle(consts):
    sp = osc.spectrum(osc.Anharmonic(1.0, 1.0, -1), 1, tol=1e-8)
    assert abs(sp.values[0] - consts["e"][0]) / consts["e"][0] <= 1e-7


def test_dual_route_ground_level(consts):
    # the bisection route at the oracle's own grids must reproduce the
    # cached level through the identical extrapolation
    L = consts["oracle"]["L"]
    model = osc.Anharmonic(1.0, 1.0, -1)
    vals = {}
    for n in (4095, 8191):
        t = osc.discretize(model, L, n)
        vals[n] = eigensolve.eigs_lowest(t, 1, tol=1e-11)[0].value
    extrap = (4 * vals[8191] - vals[4095]) / 3
    assert abs(extrap - consts["e"][0]) / consts["e"][0] <= 1e-8


def test_boundary_mass_small():
    sp = osc.spectrum(osc.Anharmonic(1.0, 1.0, -1), 1, tol=1e-7, L=8.0,
                      want_vectors=True)
    v = sp.vectors[:, 0]
    edge = sp.n // 20
    assert float(np.sum(v[:edge] ** 2) + np.sum(v[-edge:] ** 2)) <= 1e-10


def test_domain_too_small_detected():
    with pytest.raises(DomainTooSmall):
        osc.spectrum(osc.Anharmonic(1.0, 1.0, -1), 3, tol=1e-7, L=0.6)


def test_reflection_pairing():
    assert osc.verify_reflection(1.0, 1.0, 4, tol=1e-8) <= 1e-8
    assert osc.verify_reflection(-3.0, 2.0, 2, tol=1e-8) <= 1e-8


def test_scaling_self_comparison_exact():
    assert osc.verify_scaling([1.0], 2, tol=1e-7) == 0.0


def test_scaling_law():
    assert osc.verify_scaling([8.0, 27.0], 5, tol=1e-8) <= 1e-6


def test_scaling_large_t_domain_logic():
    assert osc.verify_scaling([1000.0], 3, tol=1e-8) <= 1e-6


def test_spectrum_scaled_against_table(consts):
    sp = osc.spectrum(osc.Anharmonic(-2.0, 5.0, -1), 4, tol=1e-7)
    target = 10.0 ** (2.0 / 3.0) * np.array(consts["e"][:4])
    assert np.max(np.abs(sp.values - target) / target) <= 1e-6


def test_ground_state_properties(consts):
    props = osc.ground_state_properties(osc.Anharmonic(1.0, 1.0, -1))
    assert props["min_entry"] > 0.0
    assert props["gap_ratio"] > 0.0
    gap_ref = (consts["e"][1] - consts["e"][0]) / consts["e"][0]
    assert abs(props["gap_ratio"] - gap_ref) / gap_ref <= 1e-4
    assert props["xi1_at_zero"] > 0.0
    assert abs(props["xi1_at_zero"] - consts["xi1_0"]) / consts["xi1_0"] <= 1e-4


def test_ground_positivity_survives_refinement():
    for n in (2047, 4095, 8191):
        props = osc.ground_state_properties(osc.Anharmonic(1.0, 1.0, -1), n=n)
        assert props["min_entry"] > 0.0
        assert props["gap_ratio"] > 0.0


def test_convergence_order():
    # eigenvalue error against the extrapolated reference fits slope 2 +- 0.3
    model = osc.Anharmonic(1.0, 1.0, -1)
    L = 8.0
    ref = osc.spectrum(model, 1, tol=1e-10, L=L).values[0]
    errs, hs = [], []
    for n in (255, 511, 1023, 2047):
        t = osc.discretize(model, L, n)
        val = eigensolve.eigs_lowest(t, 1)[0].value
        errs.append(abs(val - ref))
        hs.append(2 * L / (n + 1))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert 1.7 <= slope <= 2.3


def test_model_validation():
    with pytest.raises(DegenerateInput):
        osc.Harmonic(0.0, -1)
    with pytest.raises(DegenerateInput):
        osc.Anharmonic(0.0, 1.0, -1)
    with pytest.raises(DegenerateInput):
        osc.Anharmonic(1.0, 1.0, 2)
    with pytest.raises(DegenerateInput):
        osc.discretize(osc.Harmonic(1.0, -1), 4.0, 8)


def test_anharmonic_positivity_invariant():
    sp = osc.spectrum(osc.Anharmonic(2.0, 3.0, +1), 3, tol=1e-7)
    assert sp.values[0] > 0
    assert sp.values[0] < sp.values[1]
    with pytest.raises(PositivityViolation):
        osc.Spectrum1D(osc.Anharmonic(1.0, 1.0, -1), 8.0, 255,
                       np.array([-1.0, 2.0]))

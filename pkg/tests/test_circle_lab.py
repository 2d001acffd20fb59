import math

import numpy as np
import pytest

from wittenlab import circle_lab as cl, eigensolve
from wittenlab.errors import (AssumptionViolated, ClusterOverlap, DegenerateInput,
                              GridTooCoarse, MeanZeroUnreachable,
                              NotAffinelySelfIndexable)

SQRT3 = math.sqrt(3.0)


def test_example_a_derived_values(example_a):
    crits = example_a.critical_points
    kinds = [(p.kind, p.index) for p in crits]
    assert kinds == [("nd", 1), ("bd", 0), ("nd", 0)]
    mx, bd, mn = crits
    assert abs(mx.theta - math.pi / 3) <= 1e-12
    assert abs(bd.theta - math.pi) <= 1e-12
    assert abs(mn.theta - 5 * math.pi / 3) <= 1e-12
    assert abs(mn.f_value) <= 1e-12 and abs(mx.f_value - 1.0) <= 1e-12
    assert abs(bd.f_value - 0.5) <= 1e-12
    assert abs(bd.a + SQRT3 / 9.0) <= 1e-12
    assert example_a.self_indexed


def test_example_a_prenormalization():
    raw = cl.build_circle_function([math.pi / 3, -math.pi / 3], [math.pi])
    # f' = cos(theta) + cos(2 theta), f = sin + sin(2 theta)/2
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    assert np.allclose(raw.fprime(th), np.cos(th) + np.cos(2 * th), atol=1e-10)
    vals = {round(p.theta, 6): p for p in raw.critical_points}
    bd = [p for p in raw.critical_points if p.kind == "bd"][0]
    assert abs(bd.a + 0.5) <= 1e-10
    mx = [p for p in raw.critical_points if p.kind == "nd" and p.index == 1][0]
    assert abs(mx.f_value - 3 * SQRT3 / 4) <= 1e-10


def test_build_requires_zeros():
    with pytest.raises(DegenerateInput):
        cl.build_circle_function([], [])
    with pytest.raises(DegenerateInput):
        cl.build_circle_function([1.0], [])       # odd zero count
    with pytest.raises(MeanZeroUnreachable):
        cl.build_circle_function([], [1.0])       # one-signed derivative


def test_classification_counts(example_b):
    assert len(example_b.minima) == 2
    assert len(example_b.maxima) == 2
    assert len(example_b.bd_points) == 1


def test_affine_self_index_identity(example_a):
    again = cl.affine_self_index(example_a)
    assert abs(again.critical_points[0].f_value - 1.0) <= 1e-12
    mags = [abs(c1 - c2) for c1, c2 in zip(again.cos_coeffs, example_a.cos_coeffs)]
    assert max(mags) <= 1e-12


def test_affine_self_index_rejects_distinct_minima(example_b):
    with pytest.raises(NotAffinelySelfIndexable):
        cl.affine_self_index(example_b)


def test_distinct_a_required():
    # symmetric double zeros produce equal cubic magnitudes
    with pytest.raises(DegenerateInput):
        cl.build_circle_function([0.9, 0.9 + np.pi],
                                 [2.5, 2.5 + np.pi])


def test_assemble_zero_function_is_periodic_laplacian():
    zero = cl.CircleFunction((0.0,), (0.0,), 0.0, ())
    n = 128
    w = cl.assemble_witten(zero, 4.0, n)
    h = 2 * np.pi / n
    assert np.allclose(w.delta0.diag, 2 / h**2, rtol=1e-12)
    assert np.allclose(w.delta0.offdiag, -1 / h**2, rtol=1e-12)
    assert abs(w.delta0.corner + 1 / h**2) <= 1e-6 / h**2
    pairs = eigensolve.eigs_lowest(w.delta0, 1)
    assert abs(pairs[0].value) <= 1e-10 * w.delta0.scale


def test_grid_too_coarse(example_a):
    with pytest.raises(GridTooCoarse):
        cl.assemble_witten(example_a, 400.0, 256)


def test_discrete_kernel_is_sampled_exponential(example_a):
    t = 120.0
    w = cl.assemble_witten(example_a, t, 4096)
    u = np.exp(-t * (w.f_nodes - np.min(w.f_nodes)))
    assert np.linalg.norm(w.apply_d(u)) <= 1e-10 * np.linalg.norm(u) * w.delta0.scale ** 0.5
    pairs = eigensolve.eigs_lowest(w.delta0, 1)
    assert abs(pairs[0].value) <= 1e-10 * w.delta0.scale


def test_supersymmetric_pairing(example_a):
    t = 100.0
    p0 = cl.lowest_eigs(example_a, t, 0, 6, 4096)
    p1 = cl.lowest_eigs(example_a, t, 1, 6, 4096)
    w = cl.assemble_witten(example_a, t, 4096)
    thresh = 1e-8 * w.delta0.scale
    nz0 = [p.value for p in p0 if p.value > thresh]
    nz1 = [p.value for p in p1 if p.value > thresh]
    assert len(nz0) == len(nz1) == 5
    rel = np.max(np.abs(np.array(nz0) - np.array(nz1)) / np.array(nz1))
    assert rel <= 1e-10


def test_choose_epsilon_single_bd(example_a, consts):
    e1, e2 = consts["e"][0], consts["e"][1]
    b = abs(example_a.bd_points[0].a) ** (2.0 / 3.0)
    expected = 0.9 * min(0.5 * e1 * b, 0.5 * (e2 * b - e1 * b))
    assert abs(cl.choose_epsilon(example_a, consts) - expected) <= 1e-12


def test_choose_epsilon_two_bd_spacing_term(example_two_bd, consts):
    e1, e2 = consts["e"][0], consts["e"][1]
    mags = sorted(abs(p.a) for p in example_two_bd.bd_points)
    b = [m ** (2.0 / 3.0) for m in mags]
    cands = [0.5 * e1 * b[0], 0.5 * e1 * (b[1] - b[0]),
             0.5 * (e2 * b[0] - e1 * b[1])]
    assert abs(cl.choose_epsilon(example_two_bd, consts) - 0.9 * min(cands)) <= 1e-12


def test_choose_epsilon_assumption_violated(example_a, consts):
    from dataclasses import replace
    bad_pts = []
    for i, p in enumerate(example_a.critical_points):
        if p.kind == "bd":
            bad_pts.append(replace(p, a=p.a))
        else:
            bad_pts.append(p)
    # fabricate a second birth-death point with |a| ratio beyond (e2/e1)^{3/2}
    huge = replace(example_a.critical_points[1], theta=0.2, a=40.0 * SQRT3 / 9)
    cf = cl.CircleFunction(example_a.cos_coeffs, example_a.sin_coeffs,
                           example_a.offset, tuple(bad_pts) + (huge,))
    with pytest.raises(AssumptionViolated):
        cl.choose_epsilon(cf, consts)


def test_spectral_clusters_counts_and_pairing(example_a, consts):
    reports = cl.spectral_clusters(example_a, 200.0, constants=consts)
    for degree in (0, 1):
        r = reports[degree]
        assert r.counts["small"] == 1
        assert r.counts["bd0"] == 1
        assert len(r.small) == 1
    # the large doublet pairs across degrees (supersymmetry)
    l0, l1 = reports[0].large["bd0"], reports[1].large["bd0"]
    assert abs(l0 - l1) / l1 <= 1e-10


def test_spectral_clusters_morse(example_morse, consts):
    reports = cl.spectral_clusters(example_morse, 150.0, constants=consts)
    assert reports[0].large == {} and reports[0].very_large_floor is None
    assert reports[0].counts["small"] == 1
    # smallest nonzero eigenvalue scales like t (positive limit)
    ratios = []
    for t in (150.0, 300.0):
        pairs = cl.lowest_eigs(example_morse, t, 0, 2, 4096)
        ratios.append(pairs[1].value / t)
    assert ratios[0] > 0 and ratios[1] > 0
    assert abs(ratios[1] - ratios[0]) / ratios[0] <= 0.2


def test_cluster_overlap_at_tiny_t(example_a, consts):
    with pytest.raises(ClusterOverlap):
        cl.spectral_clusters(example_a, 3.0, n_grid=4096, constants=consts)


def test_grid_doubling_stability(example_a, consts):
    t = 100.0
    r1 = cl.spectral_clusters(example_a, t, n_grid=4096, constants=consts)
    r2 = cl.spectral_clusters(example_a, t, n_grid=8192, constants=consts)
    for degree in (0, 1):
        a = r1[degree].large["bd0"]
        b = r2[degree].large["bd0"]
        assert abs(a - b) / b <= 1e-6


def test_scaling_fit_requires_four_points(example_a):
    with pytest.raises(DegenerateInput):
        cl.scaling_fit(example_a, [100.0])


def test_cluster_bases_small_is_kernel(example_a, consts):
    t = 100.0
    bases = cl.cluster_bases(example_a, t, constants=consts)
    w = cl.assemble_witten(example_a, t, bases[0].n_grid)
    u = np.exp(-t * w.f_nodes)
    u /= np.linalg.norm(u)
    v = bases[0].small_vectors[:, 0]
    assert abs(abs(np.dot(u, v)) - 1.0) <= 1e-10


def test_cluster_bases_d_image_proportionality(example_a, consts):
    t = 100.0
    bases = cl.cluster_bases(example_a, t, constants=consts)
    w = cl.assemble_witten(example_a, t, bases[0].n_grid)
    e0 = bases[0].large_vectors["bd0"]
    e1 = bases[1].large_vectors["bd0"]
    img = w.apply_d(e0)
    lam = bases[0].large_values["bd0"]
    assert abs(np.dot(img, img) - lam) / lam <= 1e-8
    cos = abs(np.dot(img, e1)) / np.linalg.norm(img)
    assert 1.0 - cos <= 1e-10


def test_eq7(example_a, consts):
    d = cl.eq7_defect(example_a, 400.0, constants=consts)
    assert d["bd0"] <= 1e-8


def test_localized_basis_single_dim_sign(example_a, consts):
    t = 100.0
    bases = cl.cluster_bases(example_a, t, constants=consts)
    loc = cl.localized_basis(example_a, t, 0, "small", bases, constants=consts)
    v = loc["min0"]
    w = cl.assemble_witten(example_a, t, bases[0].n_grid)
    mn = example_a.minima[0]
    q = cl.quasimode(example_a, w, 0, mn)
    assert np.dot(v, q) > 0
    assert abs(abs(np.dot(v, bases[0].small_vectors[:, 0])) - 1.0) <= 1e-10


def test_localized_mass_example_b(example_b, consts):
    t = 300.0
    loc = cl.localized_basis(example_b, t, 0, "small", constants=consts,
                             strict_floor=False)
    w = cl.assemble_witten(example_b, t, cl.default_n_grid(example_b, t))
    th = np.arange(w.n_grid) * w.h
    for lab, p in zip(sorted(loc), example_b.minima):
        s = cl._arc_distance(th, p.theta)
        r = cl._chart_radius(example_b, p)
        mass = float(np.sum(loc[lab][np.abs(s) <= r] ** 2))
        assert mass >= 0.9


def test_gram_converges_to_identity(example_b, consts):
    defects = []
    for t in (150.0, 300.0):
        g = cl.localization_gram(example_b, t, 0, constants=consts,
                                 strict_floor=False)
        defects.append(np.max(np.abs(g - np.eye(len(g)))))
    assert defects[1] < defects[0]


def test_matrix_elements_cross_bd(example_two_bd, consts):
    me = cl.matrix_elements(example_two_bd, 200.0, constants=consts,
                            strict_floor=False)
    for (l1, l0), lv in me.raw.items():
        b1, b0 = l1.split(":")[0], l0.split(":")[0]
        if l1.startswith("bd") and l0.startswith("bd") and b1 != b0:
            assert abs(lv.to_float()) <= 1e-8


def test_matrix_elements_small_block_rescaled(example_a, consts):
    me = cl.matrix_elements(example_a, 400.0, constants=consts)
    val = me.rescaled_small[("max0", "min0")]
    assert abs(val) <= 0.1

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normrigid import firstorder as fo
from normrigid import generators as gen
from normrigid import secondorder as so
from normrigid.model import Framework, classify_framework
from normrigid.norms import NormSpec
from normrigid.numeric import null_space

UBAR = np.array([1, -1, 1, 1, -1, -1, -1, 1], dtype=float)
K4_POWER_STRESS = np.array([-1, -1, -1, -1, 1, 1], dtype=float)

SECOND_ORDER_FIXTURES = ["lp_k4_square", "euclid_braced_square_midpoints", "stable_grid_fig5ii",
                         "flexible_grid_fig5i", "colinear_generic", "colinear_axis_aligned"]


def flex_basis(fw):
    return fo.flex_space(fw).astype(float)


# -- H_{a,b} --

def test_H_ab_with_zero_stress_is_squared_image():
    fw = gen.lp_k4_square(4)
    rng = np.random.default_rng(0)
    r = fo.rigidity_operator(fw)
    for _ in range(5):
        u = rng.standard_normal(8)
        assert so.evaluate_H_ab(fw, np.zeros(6), np.ones(6), u) == pytest.approx(np.sum((r @ u) ** 2))
    assert so.evaluate_H_ab(fw, np.zeros(6), np.ones(6), UBAR) == pytest.approx(0, abs=1e-12)


def test_H_ab_vanishes_on_translations():
    fw = gen.stable_grid_fig5ii(4)
    a = fo.stress_space(fw).norm[:, 0]
    for t in fo.trivial_space(fw).T:
        assert so.evaluate_H_ab(fw, a, np.ones(len(fw.edges)), t) == pytest.approx(0, abs=1e-12)


def test_H_ab_on_ubar_matches_power_form():
    fw = gen.lp_k4_square(4)
    a_norm = so.power_stress_to_norm_stress(fw, K4_POWER_STRESS)
    h_ab = so.evaluate_H_ab(fw, a_norm, np.ones(6), UBAR)
    assert h_ab == pytest.approx(3 * so.evaluate_H_p(fw, K4_POWER_STRESS, UBAR))


def test_H_ab_rejects_nonpositive_b():
    fw = gen.lp_k4_square(4)
    with pytest.raises(ValueError):
        so.evaluate_H_ab(fw, np.zeros(6), np.r_[np.ones(5), 0.0], UBAR)


def test_power_form_value_on_ubar():
    # direct evaluation: only the two diagonals contribute, 8 each
    assert so.evaluate_H_p(gen.lp_k4_square(4), K4_POWER_STRESS, UBAR) == pytest.approx(16.0)


# -- restricted forms --

def test_restricted_forms_lp_k4():
    forms = so.restricted_forms(gen.lp_k4_square(4))
    assert (forms.f, forms.s) == (1, 1)
    a = forms.stresses[:, 0]
    sign = -np.sign(a[0])
    np.testing.assert_allclose(sign * a / np.abs(a).max(), K4_POWER_STRESS, atol=1e-12)
    assert sign * forms.forms[0][0, 0] > forms.threshold


def test_restricted_forms_rigid_framework_empty():
    fw = gen.gen_random_placement(gen.complete_graph(4), NormSpec.lp(4), seed=0)
    forms = so.restricted_forms(fw)
    assert forms.f == 0 and all(q.shape == (0, 0) for q in forms.forms)


def test_restricted_forms_need_second_order_well_positioned():
    fw = Framework.build(["a", "b"], [("a", "b")], {"a": (0, 0), "b": (1, 0)}, NormSpec.lp(1.5))
    with pytest.raises(so.NotApplicable):
        so.restricted_forms(fw)


def _cell_stress(fw, cells):
    a = np.zeros(len(fw.edges))
    index = {e: k for k, e in enumerate(fw.edges)}
    for i, j in cells:
        n = gen.grid_name
        for e in [(n(i, j), n(i + 1, j)), (n(i, j + 1), n(i + 1, j + 1)),
                  (n(i, j), n(i, j + 1)), (n(i + 1, j), n(i + 1, j + 1))]:
            a[index[e]] -= 1
        a[index[(n(i, j), n(i + 1, j + 1))]] += 1
        a[index[(n(i + 1, j), n(i, j + 1))]] += 1
    return a


def test_fig5ii_form_is_sum_over_braces():
    fw = gen.stable_grid_fig5ii(4)
    a = _cell_stress(fw, gen.STABLE_GRID_BRACES)
    np.testing.assert_allclose(a @ so.second_order_rows(fw), 0, atol=1e-12)
    braces = range(24, len(fw.edges))  # brace edges follow the 24 grid edges
    rng = np.random.default_rng(1)
    basis = flex_basis(fw)
    for _ in range(20):
        u = basis @ rng.standard_normal(basis.shape[1])
        expected = sum(np.sum(fw.edge_difference(u, k) ** 2) for k in braces)
        assert so.evaluate_H_p(fw, a, u) == pytest.approx(expected, rel=1e-9, abs=1e-12)


# -- prestress --

def test_prestress_lp_k4():
    v = so.prestress_decide(gen.lp_k4_square(4))
    assert v.value == so.YES
    np.testing.assert_allclose(v.witness["stress"], K4_POWER_STRESS, atol=1e-12)


def test_prestress_fig5ii():
    assert so.prestress_decide(gen.stable_grid_fig5ii(4)).value == so.YES


def test_prestress_colinear_axis_aligned_no():
    assert so.prestress_decide(gen.gen_fixture("colinear_axis_aligned")).value == so.NO


def test_prestress_colinear_generic_yes():
    assert so.prestress_decide(gen.gen_fixture("colinear_generic")).value == so.YES


def test_prestress_not_applicable():
    fw = Framework.build(["a", "b"], [("a", "b")], {"a": (0, 0), "b": (1, 0)}, NormSpec.lp(1.5))
    assert so.prestress_decide(fw).value == so.NA
    assert so.second_order_decide(fw).value == so.NA
    assert so.prestress_decide(gen.linf_single_bar()).value == so.NA


def test_polyhedral_well_positioned_routes_to_first_order():
    fw = gen.gen_random_placement(gen.complete_graph(4), NormSpec.linf(), seed=3)
    inf = fo.is_infinitesimally_rigid(fw).value
    assert so.prestress_decide(fw).value == inf
    assert so.second_order_decide(fw).value == inf


# -- second-order rigidity --

def test_second_order_colinear_axis_aligned_witness_on_new_vertex():
    fw = gen.gen_fixture("colinear_axis_aligned")
    v = so.second_order_decide(fw)
    assert v.value == so.NO
    u = v.witness["u"].reshape(-1, 2)
    up = v.witness["u_prime"].reshape(-1, 2)
    v0 = fw.graph.index("v0")
    others = [i for i in range(len(fw.vertices)) if i != v0]
    assert np.abs(u[v0]).max() > 0.5 and np.abs(u[others]).max() == 0
    assert np.abs(up[others]).max() == 0
    assert so.certify_second_order_witness(fw, v.witness["u"], v.witness["u_prime"])


def test_second_order_lp_k4_yes():
    assert so.second_order_decide(gen.lp_k4_square(4)).value == so.YES


def test_second_order_rigid_framework_yes():
    fw = gen.gen_random_placement(gen.complete_graph(5), NormSpec.lp(3), seed=0)
    assert so.second_order_decide(fw).value == so.YES


def test_certify_rejects_translation():
    fw = gen.gen_fixture("colinear_axis_aligned")
    t = fo.trivial_space(fw)[:, 0]
    assert not so.certify_second_order_witness(fw, t, np.zeros(fw.n_coords))


def test_certify_rejects_ubar():
    fw = gen.lp_k4_square(4)
    up, resid = so.acceleration_for(fw, UBAR)
    assert resid > 1e-2
    assert not so.certify_second_order_witness(fw, UBAR, up)


def test_flexible_grid_witness_is_certified():
    fw = gen.flexible_grid_fig5i(4)
    v = so.second_order_decide(fw)
    assert v.value == so.NO
    assert so.certify_second_order_witness(fw, v.witness["u"], v.witness["u_prime"])


# -- synthetic form sets --

def synthetic(forms, scale=1.0):
    f = len(forms[0])
    return so.RestrictedFormSet(np.eye(f), np.eye(len(forms)), [np.array(q, float) for q in forms],
                                [np.array(q, float) for q in forms], scale)


def test_ascent_finds_positive_combination():
    forms = synthetic([[[1, 0], [0, -2]], [[-1, 0], [0, 3]]])
    best, x = so._max_min_eigen(forms, 0)
    assert best > 0
    w, _ = np.linalg.eigh(x[0] * forms.forms[0] + x[1] * forms.forms[1])
    assert w[0] > 0


def test_dual_certificate_when_no_combination_is_definite():
    forms = synthetic([[[1, 0], [0, -1]], [[0, 1], [1, 0]]])
    best, _ = so._max_min_eigen(forms, 0)
    assert best < 0
    y = so._dual_certificate(forms, 0)
    assert y is not None
    assert np.linalg.eigvalsh(y)[0] >= -1e-12 and np.trace(y) == pytest.approx(1)
    for q in forms.forms:
        assert abs(np.sum(q * y)) < 1e-10
    # and no common zero exists on the circle
    zeros = so._binary_form_zeros(forms.forms, forms.threshold)
    assert not any(all(abs(c @ q @ c) < 1e-9 for q in forms.forms) for c in zeros)


def test_binary_form_zeros_indefinite():
    zeros = so._binary_form_zeros([np.array([[1.0, 0.0], [0.0, -4.0]])], 1e-12)
    for c in zeros:
        assert c @ np.diag([1.0, -4.0]) @ c == pytest.approx(0, abs=1e-12)
    assert len(zeros) == 2


@given(st.floats(-3, 3), st.floats(0.1, 4), st.floats(-3, 3))
def test_indefinite_zero_from_eigenpairs(a, gap, b):
    q = np.array([[a, b], [b, a - gap]])
    w, v = np.linalg.eigh(q)
    if w[0] < -1e-6 and w[-1] > 1e-6:
        c = so._indefinite_zero(w, v)
        assert abs(c @ q @ c) < 1e-9 * max(1, np.abs(q).max()) * (c @ c)


# -- invariants over fixtures --

@pytest.mark.parametrize("name", SECOND_ORDER_FIXTURES)
def test_implication_chain(name):
    fw = gen.gen_fixture(name)
    inf = fo.is_infinitesimally_rigid(fw).value
    pre = so.prestress_decide(fw).value
    sec = so.second_order_decide(fw).value
    if inf == so.YES:
        assert pre == so.YES
    if pre == so.YES:
        assert sec == so.YES


@pytest.mark.parametrize("name", ["lp_k4_square", "stable_grid_fig5ii", "colinear_generic",
                                  "euclid_braced_square_midpoints"])
def test_lambda_scaling(name):
    fw = gen.gen_fixture(name)
    v = so.prestress_decide(fw)
    assert v.value == so.YES
    a = so.power_stress_to_norm_stress(fw, v.witness["stress"])
    rng = np.random.default_rng(0)
    samples = rng.standard_normal((1000, fw.n_coords))
    lam = 1.0
    while lam <= 1e12:
        b = lam * np.ones(len(fw.edges))
        if all(so.evaluate_H_ab(fw, a, b, u) >= -1e-9 * lam for u in samples):
            break
        lam *= 2
    assert lam <= 1e12
    for t in fo.trivial_space(fw).T:
        assert so.evaluate_H_ab(fw, a, b, t) == pytest.approx(0, abs=1e-9)


@pytest.mark.parametrize("name", ["colinear_axis_aligned", "flexible_grid_fig5i"])
def test_stress_orthogonal_to_second_order_witness(name):
    fw = gen.gen_fixture(name)
    w = so.second_order_decide(fw).witness
    st_ = fo.stress_space(fw)
    for i in range(st_.dim):
        a = st_.norm[:, i]
        total = 0.0
        for k, g in enumerate(fw.edge_geometry):
            du = fw.edge_difference(w["u"], k)
            dup = fw.edge_difference(w["u_prime"], k)
            total += a[k] * (du @ g.hessian @ du + g.gradient @ dup)
        assert abs(total) < 1e-8


@pytest.mark.parametrize("name", SECOND_ORDER_FIXTURES)
def test_form_consistency_on_flexes(name):
    fw = gen.gen_fixture(name)
    st_ = fo.stress_space(fw)
    basis = flex_basis(fw)
    rng = np.random.default_rng(2)
    for i in range(st_.dim):
        a_p = st_.power[:, i] if st_.power is not None else st_.norm[:, i]
        a_n = so.power_stress_to_norm_stress(fw, a_p)
        for _ in range(10):
            u = basis @ rng.standard_normal(basis.shape[1])
            h1 = so.evaluate_H_ab(fw, a_n, np.ones(len(fw.edges)), u)
            h2 = so.evaluate_H_ab(fw, a_n, 5 * np.ones(len(fw.edges)), u)
            hp = so.evaluate_H_p(fw, a_p, u)
            assert h1 == pytest.approx(h2, rel=1e-8, abs=1e-10)
            coeff = fw.norm.p - 1 if fw.norm.kind == "lp" else 1.0
            assert h1 == pytest.approx(coeff * hp, rel=1e-8, abs=1e-10)


@settings(max_examples=25)
@given(st.floats(0.01, 100))
def test_scaling_stress_keeps_verdict(c):
    forms = so.restricted_forms(gen.lp_k4_square(4))
    q = forms.forms[0]
    assert (np.linalg.eigvalsh(-q)[0] > 0) == (np.linalg.eigvalsh(-c * q)[0] > 0)

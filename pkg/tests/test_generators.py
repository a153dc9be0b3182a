import itertools

import numpy as np
import pytest

from normrigid import firstorder as fo
from normrigid import generators as gen
from normrigid import secondorder as so
from normrigid.model import Framework
from normrigid.norms import NormSpec


def test_single_bar_fixture():
    fw = gen.gen_fixture("linf_single_bar")
    assert [list(p) for p in fw.positions] == [[0, 0], [1, 1]]


def test_lp_k4_fixture():
    fw = gen.gen_fixture("lp_k4_square", p=4)
    assert fw.norm == NormSpec.lp(4) and len(fw.edges) == 6
    assert [list(p) for p in fw.positions] == [[0, 0], [1, 0], [0, 1], [1, 1]]


def test_seven_vertex_coordinates_are_exact_decimals():
    fw = gen.gen_fixture("linf_seven_vertex")
    assert fw.mode == "exact"
    assert str(fw.position("v7")[0]) == "13/10"
    assert list(fw.position("v5")) == list(fw.position("v6"))


def test_fig5ii_fixture():
    fw = gen.gen_fixture("stable_grid_fig5ii", p=4)
    assert len(fw.vertices) == 16 and len(fw.edges) == 30


def test_unknown_fixture():
    with pytest.raises(KeyError):
        gen.gen_fixture("octahedron")


def test_params_rejected_for_fixed_fixture():
    with pytest.raises(TypeError):
        gen.gen_fixture("linf_single_bar", p=3)


def test_two_by_two_grid_is_the_k4_square():
    grid = gen.gen_grid(gen.GridSpec(2, 2, ((1, 1),), 4.0))
    k4 = gen.lp_k4_square(4)
    rename = dict(zip(grid.vertices, k4.vertices))
    assert {frozenset((rename[a], rename[b])) for a, b in grid.edges} == {frozenset(e) for e in k4.edges}
    np.testing.assert_allclose(grid.positions - 1, k4.positions)


def test_grid_counts():
    fw = gen.gen_grid(gen.GridSpec(4, 4, gen.STABLE_GRID_BRACES))
    assert len(fw.vertices) == 16 and len(fw.edges) == 30


@pytest.mark.parametrize("braces", [((0, 1),), ((1, 4),), ((1, 1), (1, 1))])
def test_grid_spec_validation(braces):
    with pytest.raises(ValueError):
        gen.GridSpec(4, 4, braces)


def test_fig5i_is_flexible():
    fw = gen.flexible_grid_fig5i(4)
    assert not gen.braces_cover(gen.GridSpec(4, 4, gen.FLEXIBLE_GRID_BRACES))
    assert fo.is_infinitesimally_rigid(fw).value == fo.NO


def test_grid_law_three_by_three():
    cells = [(1, 1), (1, 2), (2, 1), (2, 2)]
    for r in range(5):
        for braces in itertools.combinations(cells, r):
            spec = gen.GridSpec(3, 3, braces, 4.0)
            fw = gen.gen_grid(spec)
            pre = so.prestress_decide(fw).value
            assert (pre == so.YES) == gen.braces_cover(spec), braces
            inf = fo.is_infinitesimally_rigid(fw)
            if not gen.braces_cover(spec):
                assert inf.value == fo.NO and fo.certify_flex(fw, inf.witness["flex"])


def test_colinear_augmentation_adds_vertex():
    base = gen.gen_random_placement(gen.complete_graph(4), NormSpec.lp(4), seed=0)
    fw = gen.gen_colinear_augmentation(base, "v1", "v2", 1 / 3)
    assert fw.vertices[-1] == "v0" and fw.edges[-2:] == (("v1", "v0"), ("v2", "v0"))
    np.testing.assert_allclose(fw.position("v0"), (2 * base.position("v1") + base.position("v2")) / 3)


def test_colinear_augmentation_rejects_same_vertex():
    base = gen.gen_random_placement(gen.complete_graph(4), NormSpec.lp(4), seed=0)
    with pytest.raises(ValueError, match="distinct"):
        gen.gen_colinear_augmentation(base, "v1", "v1", 0.5)


def test_colinear_augmentation_rejects_flexible_base():
    with pytest.raises(ValueError, match="not infinitesimally rigid"):
        gen.gen_colinear_augmentation(gen.lp_k4_square(4), "v1", "v2", 0.5)


def test_colinear_augmentation_rejects_stressed_base():
    base = gen.gen_random_placement(gen.complete_graph(5), NormSpec.lp(4), seed=0)
    with pytest.raises(ValueError, match="stress"):
        gen.gen_colinear_augmentation(base, "v1", "v2", 0.5)


def test_colinear_augmentation_rejects_coincident_points():
    base = Framework.build(["a", "b"], [("a", "b")], {"a": (0, 0), "b": (0, 0)}, NormSpec.lp(4))
    with pytest.raises(ValueError, match="coincident"):
        gen.gen_colinear_augmentation(base, "a", "b", 0.5)


def test_random_placement_deterministic():
    g = gen.complete_graph(4)
    a = gen.gen_random_placement(g, NormSpec.lp(4), seed=7)
    b = gen.gen_random_placement(g, NormSpec.lp(4), seed=7)
    assert a == b
    assert np.all(np.abs(a.positions) <= 1)


def test_random_placement_empty_graph():
    fw = gen.gen_random_placement(gen.Graph((), ()), NormSpec.lp(4), seed=0)
    assert fw.positions.shape == (0, 2)


def test_random_placement_retries_until_well_positioned():
    # on the lattice {-1, 0, 1}^2 corner bars are common; the retry loop must skip them
    fw = gen.gen_random_placement(gen.complete_graph(3), NormSpec.linf(), seed=0, denominator=1)
    assert all(g.well_positioned for g in fw.edge_geometry)


def test_random_case_cycles_norms():
    kinds = [gen.random_case(s).norm for s in range(4)]
    assert kinds == [NormSpec.lp(4), NormSpec.lp(1.5), NormSpec.linf(), NormSpec.euclidean()]

"""Fixture frameworks and parametric families (grids, colinear augmentation,
random placements)."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import Framework, Graph, choose_mode, classify_framework
from .norms import NormSpec
from .numeric import EXACT

K4_EDGES = (("v1", "v2"), ("v1", "v3"), ("v2", "v4"), ("v3", "v4"), ("v1", "v4"), ("v2", "v3"))
UNIT_SQUARE = {"v1": (0, 0), "v2": (1, 0), "v3": (0, 1), "v4": (1, 1)}

STABLE_GRID_BRACES = ((1, 3), (2, 2), (3, 1))
FLEXIBLE_GRID_BRACES = ((1, 1), (3, 1), (1, 3), (3, 3))


def linf_single_bar() -> Framework:
    return Framework.build(["a", "b"], [("a", "b")], {"a": (0, 0), "b": (1, 1)}, NormSpec.linf())


def linf_seven_vertex() -> Framework:
    f = Fraction
    placement = {
        "v1": (0, 0), "v2": (1, 0), "v3": (f(9, 10), 1), "v4": (f(-1, 10), 1),
        "v5": (f(1, 2), f(6, 5)), "v6": (f(1, 2), f(6, 5)), "v7": (f(13, 10), 2),
    }
    pairs = ["12", "13", "23", "24", "34", "14", "15", "45", "26", "36", "57", "67"]
    edges = [(f"v{a}", f"v{b}") for a, b in pairs]
    return Framework.build([f"v{i}" for i in range(1, 8)], edges, placement, NormSpec.linf())


def linf_k4_square() -> Framework:
    placement = {"v1": (-1, -1), "v2": (1, -1), "v3": (-1, 1), "v4": (1, 1)}
    edges = [("v1", "v2"), ("v1", "v3"), ("v1", "v4"), ("v2", "v3"), ("v2", "v4"), ("v3", "v4")]
    return Framework.build(["v1", "v2", "v3", "v4"], edges, placement, NormSpec.linf())


def lp_k4_square(p: float = 4.0) -> Framework:
    return Framework.build(["v1", "v2", "v3", "v4"], K4_EDGES, UNIT_SQUARE, NormSpec.lp(p))


def euclid_braced_square_midpoints() -> Framework:
    """Braced unit square with extra vertices at the midpoints of two sides.
    Each midpoint can move perpendicular to its side."""
    f = Fraction
    placement = {"v1": (0, 0), "v2": (1, 0), "m23": (1, f(1, 2)), "v3": (1, 1),
                 "m34": (f(1, 2), 1), "v4": (0, 1)}
    edges = [("v1", "v2"), ("v1", "v3"), ("v2", "m23"), ("m23", "v3"), ("v2", "v4"),
             ("v3", "m34"), ("m34", "v4"), ("v1", "v4")]
    return Framework.build(list(placement), edges, placement, NormSpec.euclidean())


@dataclass(frozen=True)
class GridSpec:
    """An ``m x n`` unit grid with both diagonals added in each braced cell.

    Vertex ``(i, j)`` sits at ``(i, j)``; cell ``(i, j)`` has corners
    ``(i, j)`` and ``(i+1, j+1)``.
    """

    m: int
    n: int
    braces: tuple[tuple[int, int], ...] = ()
    p: float = 4.0

    def __post_init__(self):
        if self.m < 2 or self.n < 2:
            raise ValueError("grid needs m, n >= 2")
        cells = [tuple(int(c) for c in b) for b in self.braces]
        if len(set(cells)) != len(cells):
            raise ValueError("duplicate brace cell")
        for i, j in cells:
            if not (1 <= i < self.m and 1 <= j < self.n):
                raise ValueError(f"brace cell ({i},{j}) outside 1..{self.m - 1} x 1..{self.n - 1}")
        object.__setattr__(self, "braces", tuple(cells))


def grid_name(i: int, j: int) -> str:
    return f"{i},{j}"


def gen_grid(spec: GridSpec) -> Framework:
    vertices = [grid_name(i, j) for j in range(1, spec.n + 1) for i in range(1, spec.m + 1)]
    placement = {grid_name(i, j): (i, j) for j in range(1, spec.n + 1) for i in range(1, spec.m + 1)}
    edges = []
    for j in range(1, spec.n + 1):
        for i in range(1, spec.m):
            edges.append((grid_name(i, j), grid_name(i + 1, j)))
    for i in range(1, spec.m + 1):
        for j in range(1, spec.n):
            edges.append((grid_name(i, j), grid_name(i, j + 1)))
    for i, j in spec.braces:
        edges.append((grid_name(i, j), grid_name(i + 1, j + 1)))
        edges.append((grid_name(i + 1, j), grid_name(i, j + 1)))
    return Framework.build(vertices, edges, placement, NormSpec.lp(spec.p))


def flexible_grid_fig5i(p: float = 4.0) -> Framework:
    return gen_grid(GridSpec(4, 4, FLEXIBLE_GRID_BRACES, p))


def stable_grid_fig5ii(p: float = 4.0) -> Framework:
    return gen_grid(GridSpec(4, 4, STABLE_GRID_BRACES, p))


def braces_cover(spec: GridSpec) -> bool:
    """Every row index and every column index is touched by some brace."""
    rows = {i for i, _ in spec.braces}
    cols = {j for _, j in spec.braces}
    return rows == set(range(1, spec.m)) and cols == set(range(1, spec.n))


def gen_colinear_augmentation(base: Framework, v1: str, v2: str, t, name: str = "v0") -> Framework:
    """Add vertex ``name`` at ``(1-t) p_v1 + t p_v2`` joined to ``v1`` and ``v2``."""
    from .firstorder import YES, is_infinitesimally_rigid, stress_space

    if v1 == v2:
        raise ValueError("v1 and v2 must be distinct vertices")
    if not 0 < t < 1:
        raise ValueError("t must lie strictly between 0 and 1")
    if name in base.vertices:
        raise ValueError(f"vertex {name!r} already exists")
    pos = base.positions
    for a, b in itertools.combinations(range(len(base.vertices)), 2):
        if np.all(pos[a] == pos[b]):
            raise ValueError(f"base has coincident points {base.vertices[a]}, {base.vertices[b]}")
    if is_infinitesimally_rigid(base).value != YES:
        raise ValueError("base framework is not infinitesimally rigid")
    stresses = stress_space(base)
    if stresses is None or stresses.dim != 0:
        raise ValueError("base framework has a non-zero stress")
    t = Fraction(t) if base.mode == EXACT else float(t)
    new = (1 - t) * base.position(v1) + t * base.position(v2)
    placement = {v: tuple(base.position(v)) for v in base.vertices}
    placement[name] = tuple(new)
    edges = list(base.edges) + [(name, v1), (name, v2)]
    return Framework.build(list(base.vertices) + [name], edges, placement, base.norm, base.mode)


def _draw(rng: np.random.Generator, n: int, d: int, mode: str, denominator: int | None):
    if mode == EXACT:
        den = denominator or 1000
        ints = rng.integers(-den, den + 1, size=(n, d))
        return [[Fraction(int(x), den) for x in row] for row in ints]
    if denominator:
        ints = rng.integers(-denominator, denominator + 1, size=(n, d))
        return (ints / denominator).tolist()
    return rng.uniform(-1.0, 1.0, size=(n, d)).tolist()


def gen_random_placement(graph: Graph, norm: NormSpec, seed: int = 0, mode: str = "auto",
                         denominator: int | None = None, require_well_positioned: bool = True,
                         attempts: int = 100) -> Framework:
    """Coordinates uniform in ``[-1, 1]^d``, reproducible per seed.

    Exact mode (and ``denominator``) draws from the lattice ``Z / denominator``
    so coordinates stay rational. A draw that is not well-positioned is
    replaced by the draw for ``seed + 1`` and so on, up to ``attempts``.
    """
    mode = choose_mode(norm, mode)
    n, d = len(graph.vertices), norm.dim
    last = None
    for k in range(attempts):
        rng = np.random.default_rng(seed + k)
        coords = _draw(rng, n, d, mode, denominator)
        placement = dict(zip(graph.vertices, coords))
        fw = Framework.build(graph.vertices, graph.edges, placement, norm, mode)
        last = fw
        if not require_well_positioned or classify_framework(fw).well_positioned:
            return fw
    raise RuntimeError(f"no well-positioned placement in {attempts} attempts (last: {last})")


def complete_graph(n: int, prefix: str = "v") -> Graph:
    names = tuple(f"{prefix}{i}" for i in range(1, n + 1))
    return Graph(names, tuple(itertools.combinations(names, 2)))


def colinear_k4(p: float = 4.0, axis_aligned: bool = False, t=Fraction(1, 3), seed: int = 0) -> Framework:
    """Generic K4 in the l_p plane augmented by a vertex on the segment v1 v2.

    With ``axis_aligned`` the base is adjusted so that ``p_v1 - p_v2`` is
    horizontal, which leaves a zero coordinate on both new edges.
    """
    norm = NormSpec.lp(p)
    graph = complete_graph(4)
    for k in range(100):
        base = gen_random_placement(graph, norm, seed + k)
        if axis_aligned:
            pos = np.array(base.positions)
            pos[1, 1] = pos[0, 1]
            base = base.with_positions(pos)
        try:
            return gen_colinear_augmentation(base, "v1", "v2", t)
        except ValueError:
            continue
    raise RuntimeError("no admissible K4 base found")


FIXTURES = {
    "linf_single_bar": linf_single_bar,
    "linf_seven_vertex": linf_seven_vertex,
    "linf_k4_square": linf_k4_square,
    "lp_k4_square": lp_k4_square,
    "euclid_braced_square_midpoints": euclid_braced_square_midpoints,
    "flexible_grid_fig5i": flexible_grid_fig5i,
    "stable_grid_fig5ii": stable_grid_fig5ii,
    "colinear_generic": lambda p=4.0: colinear_k4(p, axis_aligned=False),
    "colinear_axis_aligned": lambda p=4.0: colinear_k4(p, axis_aligned=True, t=Fraction(1, 2)),
}

PARAMETRIC = {"lp_k4_square", "flexible_grid_fig5i", "stable_grid_fig5ii",
              "colinear_generic", "colinear_axis_aligned"}


def gen_fixture(name: str, **params) -> Framework:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}")
    if params and name not in PARAMETRIC:
        raise TypeError(f"fixture {name!r} takes no parameters")
    return FIXTURES[name](**params)


PROPERTY_NORMS = ("l4", "l1.5", "linf", "euclidean")


def random_case(seed: int) -> Framework:
    """A seeded random framework for property sweeps.

    Cycles through l_4, l_1.5, l_inf and Euclidean planes with 2 to 12
    vertices and a random edge set. Polyhedral and l_1.5 cases are drawn
    from a coarse lattice so badly positioned edges and zero coordinates
    actually occur.
    """
    rng = np.random.default_rng(seed)
    kind = PROPERTY_NORMS[seed % len(PROPERTY_NORMS)]
    n = int(rng.integers(2, 13))
    pairs = list(itertools.combinations(range(n), 2))
    n_edges = int(rng.integers(min(n - 1, len(pairs)), min(len(pairs), 2 * n + 2) + 1))
    chosen = sorted(rng.choice(len(pairs), size=n_edges, replace=False).tolist())
    names = tuple(f"v{i + 1}" for i in range(n))
    graph = Graph(names, tuple((names[pairs[k][0]], names[pairs[k][1]]) for k in chosen))
    if kind == "linf":
        norm, den = NormSpec.linf(), (2 if n <= 6 else 1000)
    elif kind == "l1.5":
        norm, den = NormSpec.lp(1.5), (4 if seed % 8 == 1 else None)
    elif kind == "l4":
        norm, den = NormSpec.lp(4.0), None
    else:
        norm, den = NormSpec.euclidean(), None
    return gen_random_placement(graph, norm, int(rng.integers(2**31)), denominator=den,
                                require_well_positioned=False)

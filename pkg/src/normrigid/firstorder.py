"""First-order rigidity: rigidity operator, trivial and flex spaces, stresses,
and the strong infinitesimal rigidity search for polyhedral norms.

The set of generalised rigidity operators is modelled as the product over
edges of the norm subdifferential at each edge vector (the "product
model"). It contains the Clarke generalised Jacobian, so a "strongly rigid"
verdict is sound; a "strongly flexible" verdict is relative to the model.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .model import Framework, UnsupportedAnalysis, classify_framework
from .norms import ACTIVE, EUCLIDEAN, LP, SMOOTH, ZERO, one_sided_directional
from .numeric import (DEFAULT_RANK_TOL, EXACT, column_basis, identity, left_null_space,
                      lp_feasible_nonzero, null_space, rank, zeros)

YES = "yes"
NO = "no"
UNDETERMINED = "undetermined"
NA = "not_applicable"

MAX_ASSIGNMENTS = 10**6
PRODUCT_MODEL = "product of per-edge subdifferentials (contains the Clarke set)"


@dataclass
class Verdict:
    prop: str
    value: str
    witness: dict = field(default_factory=dict)
    certificate: dict = field(default_factory=dict)

    @property
    def json_value(self):
        return {YES: True, NO: False, UNDETERMINED: "undetermined", NA: "n/a"}[self.value]


class EnumerationTooLarge(UnsupportedAnalysis):
    pass


# -- operators -------------------------------------------------------------

def edge_row(fw: Framework, k: int, phi) -> np.ndarray:
    """Row of length d|V| applying ``phi`` to ``u_v - u_w`` for edge ``k``."""
    row = zeros(fw.n_coords, fw.mode)
    i, j = fw.edge_indices(k)
    d = fw.dim
    phi = np.asarray(phi)
    if fw.mode != EXACT:
        phi = phi.astype(float)
    row[i * d:(i + 1) * d] = phi
    row[j * d:(j + 1) * d] = -phi
    return row


def _stack(fw: Framework, rows) -> np.ndarray:
    if not rows:
        return zeros((0, fw.n_coords), fw.mode)
    return np.vstack(rows)


def rigidity_operator(fw: Framework) -> np.ndarray:
    """The |E| x d|V| derivative of the rigidity map; needs a well-positioned framework."""
    cls = classify_framework(fw)
    if not cls.well_positioned:
        raise ValueError(f"framework is badly positioned at {list(cls.badly_positioned_edges)}")
    return _stack(fw, [edge_row(fw, k, g.row) for k, g in enumerate(fw.edge_geometry)])


def power_operator(fw: Framework) -> np.ndarray:
    """Rows ``(q_v - q_w)^(p-1)``: derivative of ``q -> (||q_v - q_w||_p^p)``."""
    if fw.norm.kind not in (LP, EUCLIDEAN):
        raise ValueError("power operator is defined for l_p and Euclidean norms")
    if any(g.kind != SMOOTH for g in fw.edge_geometry):
        raise ValueError("framework has zero-length edges")
    return _stack(fw, [edge_row(fw, k, g.power_gradient) for k, g in enumerate(fw.edge_geometry)])


def generalized_operator_at(fw: Framework, weights=None) -> np.ndarray:
    """Instantiate one member of the product model.

    ``weights`` maps an edge (index or vertex pair) to convex weights over
    that edge's active signed functionals. Well-positioned edges need no
    entry. Zero-length edges take an explicit dual-ball row, default 0.
    """
    weights = dict(weights or {})
    keyed = {}
    for key, w in weights.items():
        if isinstance(key, (int, np.integer)):
            k = int(key)
        else:
            a, b = key
            k = fw.edges.index((a, b)) if (a, b) in fw.edges else fw.edges.index((b, a))
        keyed[k] = w
    rows = []
    for k, g in enumerate(fw.edge_geometry):
        if g.kind == ZERO:
            rows.append(edge_row(fw, k, keyed.get(k, zeros(fw.dim, fw.mode))))
            continue
        if g.well_positioned and k not in keyed:
            rows.append(edge_row(fw, k, g.row))
            continue
        if k not in keyed:
            raise ValueError(f"edge {fw.edges[k]} is badly positioned and needs weights")
        if g.kind != ACTIVE:
            raise ValueError(f"edge {fw.edges[k]} is smooth; weights do not apply")
        w = list(keyed[k])
        if len(w) != len(g.active):
            raise ValueError(f"edge {fw.edges[k]} has {len(g.active)} active functionals, got {len(w)} weights")
        if any(x < 0 for x in w):
            raise ValueError(f"negative weight on edge {fw.edges[k]}")
        total = sum(w)
        if (total != 1) if fw.mode == EXACT else abs(total - 1) > 1e-12:
            raise ValueError(f"weights on edge {fw.edges[k]} sum to {total}, not 1")
        if fw.mode == EXACT:
            w = [Fraction(x) for x in w]
            phi = sum((x * a for x, a in zip(w, g.active)), zeros(fw.dim, EXACT))
        else:
            phi = sum(float(x) * np.asarray(a, dtype=float) for x, a in zip(w, g.active))
        rows.append(edge_row(fw, k, phi))
    return _stack(fw, rows)


# -- spaces ----------------------------------------------------------------

def translation_basis(fw: Framework) -> np.ndarray:
    d, n = fw.dim, len(fw.vertices)
    basis = zeros((fw.n_coords, d), fw.mode)
    one = Fraction(1) if fw.mode == EXACT else 1.0
    for v in range(n):
        for c in range(d):
            basis[v * d + c, c] = one
    return basis


def trivial_space(fw: Framework, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Basis of the trivial flexes: translations, plus infinitesimal
    rotations ``u_v = S p_v`` (S skew) for the Euclidean norm."""
    gens = translation_basis(fw)
    if fw.norm.kind == EUCLIDEAN and len(fw.vertices):
        d = fw.dim
        cols = []
        for a, b in itertools.combinations(range(d), 2):
            s = np.zeros((d, d))
            s[a, b], s[b, a] = -1.0, 1.0
            cols.append((fw.positions.astype(float) @ s.T).reshape(-1))
        if cols:
            gens = np.hstack([gens.astype(float), np.array(cols).T])
    if gens.shape[1] == 0:
        return gens
    return column_basis(gens, tol)


def flex_rows(fw: Framework) -> np.ndarray:
    """Rows whose common kernel is the space of infinitesimal flexes.

    One gradient row per smooth edge, every active signed functional for a
    polyhedral edge, and ``d`` rows forcing ``u_v = u_w`` on a zero-length
    edge (the subdifferential at 0 is the whole dual ball).
    """
    rows = []
    for k, g in enumerate(fw.edge_geometry):
        if g.kind == SMOOTH:
            rows.append(edge_row(fw, k, g.gradient))
        elif g.kind == ACTIVE:
            rows.extend(edge_row(fw, k, a) for a in g.active)
        else:
            rows.extend(edge_row(fw, k, e) for e in identity(fw.dim, fw.mode))
    return _stack(fw, rows)


def flex_space(fw: Framework, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    return null_space(flex_rows(fw), tol)


def flex_complement(fw: Framework, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Basis of the flexes orthogonal to every trivial flex."""
    t = trivial_space(fw, tol)
    return null_space(np.vstack([flex_rows(fw), t.T]), tol)


def _in_span(basis: np.ndarray, u: np.ndarray, tol: float) -> bool:
    if basis.shape[1] == 0:
        return not np.any(u != 0) if u.dtype == object else float(np.linalg.norm(u)) == 0.0
    return rank(np.column_stack([basis, u]), tol) == rank(basis, tol)


def _canonical_translate(fw: Framework, u: np.ndarray) -> np.ndarray:
    """Shift ``u`` by the translation given by the coordinate-wise median of
    its vertex vectors; this picks a sparse representative modulo translations."""
    if len(fw.vertices) == 0:
        return u
    blocks = u.reshape(len(fw.vertices), fw.dim)
    if u.dtype == object:
        med = []
        for c in range(fw.dim):
            vals = sorted(blocks[:, c])
            med.append(vals[(len(vals) - 1) // 2])
        return (blocks - np.array(med, dtype=object)).reshape(-1)
    return (blocks - np.median(blocks, axis=0)).reshape(-1)


def nontrivial_flex(fw: Framework, tol: float = DEFAULT_RANK_TOL) -> np.ndarray | None:
    """A flex outside T(p), or None when the framework is infinitesimally rigid.

    Flexes moving a single vertex are preferred (their sum is returned when
    it stays nontrivial); otherwise the first basis vector of the flex
    space orthogonal to T(p), shifted to a sparse representative.
    """
    comp = flex_complement(fw, tol)
    if comp.shape[1] == 0:
        return None
    rows = flex_rows(fw)
    t = trivial_space(fw, tol)
    d = fw.dim
    local = []
    for i in range(len(fw.vertices)):
        block = rows[:, i * d:(i + 1) * d]
        ker = null_space(block, tol)
        if ker.shape[1] == 0:
            continue
        u = zeros(fw.n_coords, fw.mode)
        u[i * d:(i + 1) * d] = ker[:, 0]
        if not _in_span(t, u, tol):
            local.append(u)
    if local:
        total = sum(local[1:], local[0].copy())
        return total if not _in_span(t, total, tol) else local[0]
    u = comp[:, 0]
    if fw.norm.kind != EUCLIDEAN:
        u = _canonical_translate(fw, u)
    if fw.mode != EXACT:
        u = u / np.max(np.abs(u))
        u[np.abs(u) < 1e-13] = 0.0
    return u


def certify_flex(fw: Framework, u, tol: float = 1e-9) -> bool:
    """Matrix-free flex check: both one-sided derivatives of every edge length
    vanish in direction ``u``."""
    u = np.asarray(u)
    scale = 1.0 if u.dtype == object else max(1.0, float(np.max(np.abs(u))) if u.size else 1.0)
    for k in range(len(fw.edges)):
        x = fw.edge_vector(k)
        du = fw.edge_difference(u, k)
        for s in (du, -du):
            val = one_sided_directional(fw.norm, x, s)
            if u.dtype == object and fw.mode == EXACT:
                if val != 0:
                    return False
            elif abs(float(val)) > tol * scale:
                return False
    return True


def vertex_map(fw: Framework, u) -> dict:
    from .model import vector_json
    d = fw.dim
    return {v: vector_json(u[i * d:(i + 1) * d]) for i, v in enumerate(fw.vertices)}


def is_infinitesimally_rigid(fw: Framework, tol: float = DEFAULT_RANK_TOL) -> Verdict:
    t = trivial_space(fw, tol)
    f = flex_space(fw, tol)
    rows = flex_rows(fw)
    if rows.shape[0] and t.shape[1]:
        resid = rows.dot(t)
        ok = all(v == 0 for v in resid.flat) if fw.mode == EXACT else float(np.abs(resid).max()) <= 1e-8
        if not ok:
            raise AssertionError("trivial flexes are not contained in the flex space")
    cert = {"flex_dim": int(f.shape[1]), "trivial_dim": int(t.shape[1]),
            "rank": int(rows.shape[1] - f.shape[1]) if rows.shape[1] else 0}
    if f.shape[1] == t.shape[1]:
        return Verdict("infinitesimally_rigid", YES, certificate=cert)
    u = nontrivial_flex(fw, tol)
    return Verdict("infinitesimally_rigid", NO, witness={"flex": u}, certificate=cert)


@dataclass
class StressSpaces:
    """Equilibrium stresses as columns (edge-indexed). ``power`` holds the
    stresses of the p-power rows ``(q_v - q_w)^(p-1)`` for l_p norms."""

    norm: np.ndarray
    power: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return int(self.norm.shape[1])


def stress_space(fw: Framework, tol: float = DEFAULT_RANK_TOL) -> StressSpaces | None:
    """Left null space of the rigidity operator; None if badly positioned."""
    if not classify_framework(fw).well_positioned:
        return None
    stresses = left_null_space(rigidity_operator(fw), tol)
    power = left_null_space(power_operator(fw), tol) if fw.norm.kind == LP else None
    return StressSpaces(stresses, power)


def edge_count_bound_check(fw: Framework, tol: float = DEFAULT_RANK_TOL) -> bool:
    """Necessary count for strong rigidity: |E| >= d|V| - dim T(p)."""
    return len(fw.edges) >= fw.n_coords - trivial_space(fw, tol).shape[1]


# -- strong rigidity -------------------------------------------------------

def _edge_weights(fw: Framework, u, k: int, lo: int, hi: int) -> list:
    """Convex weights over edge ``k``'s active set killing ``u_v - u_w``,
    supported on the assignment pair ``(lo, hi)``."""
    g = fw.edge_geometry[k]
    du = fw.edge_difference(u, k)
    a_lo = g.active[lo].dot(du)
    a_hi = g.active[hi].dot(du)
    w = [Fraction(0)] * len(g.active)
    lam = Fraction(1, 2) if a_hi == a_lo else a_hi / (a_hi - a_lo)
    w[lo] += lam
    w[hi] += 1 - lam
    return w


def strong_flex_search(fw: Framework, tol: float = DEFAULT_RANK_TOL,
                       max_assignments: int = MAX_ASSIGNMENTS) -> Verdict:
    """Decide strong infinitesimal rigidity under the product model.

    ``u`` (orthogonal to T(p), nonzero) is a strong flex iff every smooth
    row vanishes on it and, for every badly positioned polyhedral edge,
    ``min_A phi(u_v - u_w) <= 0 <= max_A phi(u_v - u_w)``. Assignments
    ``(phi-, phi+)`` are enumerated lexicographically; each gives a
    homogeneous LP solved exactly. First feasible assignment wins.
    """
    prop = "strongly_infinitesimally_rigid"
    cls = classify_framework(fw)
    if cls.well_positioned:
        inf = is_infinitesimally_rigid(fw, tol)
        cert = dict(inf.certificate, route="well-positioned: equals infinitesimal rigidity")
        if inf.value == YES and not edge_count_bound_check(fw, tol):
            raise AssertionError("strongly rigid verdict violates the edge-count bound")
        return Verdict(prop, inf.value, witness=dict(inf.witness), certificate=cert)

    bad = [k for k, g in enumerate(fw.edge_geometry) if g.kind == ACTIVE and len(g.active) > 1]
    if bad and fw.mode != EXACT:
        raise UnsupportedAnalysis("strong rigidity of badly positioned polyhedral frameworks needs exact mode")

    t = trivial_space(fw, tol)
    eq_rows = [edge_row(fw, k, g.row) for k, g in enumerate(fw.edge_geometry) if g.well_positioned]
    eq = _stack(fw, eq_rows + list(t.T))
    base = null_space(eq, tol)

    cert = {"model": PRODUCT_MODEL, "edge_count_bound": edge_count_bound_check(fw, tol)}
    if base.shape[1] == 0:
        if not cert["edge_count_bound"]:
            raise AssertionError("strongly rigid verdict violates the edge-count bound")
        return Verdict(prop, YES, certificate=dict(cert, assignments_checked=0))
    if not bad:
        u = base[:, 0]
        return Verdict(prop, NO, witness={"flex": u}, certificate=cert)

    sizes = [len(fw.edge_geometry[k].active) ** 2 for k in bad]
    if math.prod(sizes) > max_assignments:
        raise EnumerationTooLarge(f"{math.prod(sizes)} assignments exceed the limit {max_assignments}")

    per_edge = [list(itertools.product(range(len(fw.edge_geometry[k].active)), repeat=2)) for k in bad]
    checked = 0
    for assignment in itertools.product(*per_edge):
        checked += 1
        rows = []
        for k, (lo, hi) in zip(bad, assignment):
            g = fw.edge_geometry[k]
            rows.append(edge_row(fw, k, -g.active[lo]))
            rows.append(edge_row(fw, k, g.active[hi]))
        g_mat = np.vstack(rows).dot(base)
        z = lp_feasible_nonzero(g_mat, zeros((0, base.shape[1]), EXACT), dim=base.shape[1])
        if z is None:
            continue
        u = base.dot(z)
        weights = {fw.edges[k]: _edge_weights(fw, u, k, lo, hi) for k, (lo, hi) in zip(bad, assignment)}
        op = generalized_operator_at(fw, weights)
        if any(v != 0 for v in op.dot(u)):
            raise AssertionError("strong-flex witness is not killed by its operator")
        return Verdict(prop, NO, witness={
            "flex": u,
            "assignment": [{"edge": list(fw.edges[k]), "lower": lo, "upper": hi}
                           for k, (lo, hi) in zip(bad, assignment)],
            "weights": weights,
        }, certificate=dict(cert, assignments_checked=checked))
    if not cert["edge_count_bound"]:
        raise AssertionError("strongly rigid verdict violates the edge-count bound")
    return Verdict(prop, YES, certificate=dict(cert, assignments_checked=checked))

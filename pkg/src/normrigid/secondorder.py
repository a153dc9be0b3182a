"""Second-order analysis: stress-weighted quadratic forms on the flex space,
prestress stability and second-order rigidity.

For l_p norms everything is phrased with the p-th power of the edge
lengths: with ``x = q_v - q_w`` the gradient row is ``x^(p-1)`` and the
curvature is ``diag|x|^(p-2)``. A pair ``(u, u')`` is a second-order flex
iff for every edge

    (p-1) du^T diag|x|^(p-2) du + x^(p-1) . du' = 0.

Euclidean frameworks use the Hessian of the norm itself with coefficient 1.
By linear duality ``u`` extends to a second-order flex iff the quadratic
vector ``(du^T D_e du)_e`` is orthogonal to every stress, i.e. iff
``Q_i(c) = 0`` for all restricted forms ``Q_i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .firstorder import (NA, NO, UNDETERMINED, YES, Verdict, _canonical_translate, _in_span,
                         certify_flex, flex_complement, is_infinitesimally_rigid, trivial_space)
from .model import Framework, classify_framework
from .norms import EUCLIDEAN, LP
from .numeric import DEFAULT_RANK_TOL, as_float, left_null_space, sym_eigen

PD_REL_TOL = 1e-8
RESIDUAL_TOL = 1e-8
PRESTRESS_STARTS = 20
ASCENT_STEPS = 300
ZERO_SEARCH_STARTS = 100
DEFAULT_SEED = 0


class NotApplicable(ValueError):
    pass


@dataclass
class RestrictedFormSet:
    """Stress-weighted forms on the flex coordinates.

    ``flex_coords`` (U) has orthonormal columns spanning the flexes
    orthogonal to T(p); ``stresses`` has the matching stress basis as
    columns; ``forms[i] = U^T K_i U`` where ``K_i`` is the full
    ``d|V| x d|V|`` form of stress ``i``.
    """

    flex_coords: np.ndarray
    stresses: np.ndarray
    forms: list
    full_forms: list
    scale: float
    coefficients: np.ndarray = field(repr=False, default=None)

    @property
    def f(self) -> int:
        return int(self.flex_coords.shape[1])

    @property
    def s(self) -> int:
        return int(self.stresses.shape[1])

    @property
    def threshold(self) -> float:
        return PD_REL_TOL * self.scale


# -- per-edge second-order data ----------------------------------------------

def _edge_terms(fw: Framework):
    """Per edge: (first-order row, curvature matrix, coefficient) of the
    second-order flex equation ``c du^T D du + g . du' = 0``."""
    terms = []
    for g in fw.edge_geometry:
        if fw.norm.kind == LP:
            terms.append((g.power_gradient, g.power_hessian, fw.norm.p - 1.0))
        elif fw.norm.kind == EUCLIDEAN:
            terms.append((g.gradient, g.hessian, 1.0))
        else:
            row = np.asarray(g.row, dtype=float)
            terms.append((row, np.zeros((fw.dim, fw.dim)), 1.0))
    return terms


def _difference_operator(fw: Framework, k: int) -> np.ndarray:
    d = fw.dim
    i, j = fw.edge_indices(k)
    b = np.zeros((d, fw.n_coords))
    b[:, i * d:(i + 1) * d] = np.eye(d)
    b[:, j * d:(j + 1) * d] = -np.eye(d)
    return b


def _require_second_order(fw: Framework):
    if not classify_framework(fw).second_order_well_positioned:
        raise NotApplicable("framework is not second-order well-positioned")


def second_order_rows(fw: Framework) -> np.ndarray:
    """Rows of the first-order part of the second-order equations."""
    _require_second_order(fw)
    rows = np.zeros((len(fw.edges), fw.n_coords))
    for k, (g, _, _) in enumerate(_edge_terms(fw)):
        rows[k] = _difference_operator(fw, k).T @ np.asarray(g, dtype=float)
    return rows


def quadratic_vector(fw: Framework, u) -> np.ndarray:
    """``(c_e du^T D_e du)_e`` for a flat velocity ``u``."""
    u = as_float(np.asarray(u))
    out = np.zeros(len(fw.edges))
    for k, (_, dmat, c) in enumerate(_edge_terms(fw)):
        du = fw.edge_difference(u, k)
        out[k] = c * du @ dmat @ du
    return out


def stress_form(fw: Framework, a) -> np.ndarray:
    """Full symmetric matrix ``K`` with ``u^T K u = sum_e a_e du^T D_e du``.

    For l_p this is the p-power form; for Euclidean norms the norm-Hessian
    form. The coefficient ``c_e`` is left out, so it matches the forms whose
    positivity decides prestress stability.
    """
    k_mat = np.zeros((fw.n_coords, fw.n_coords))
    for k, (_, dmat, _) in enumerate(_edge_terms(fw)):
        if a[k] == 0:
            continue
        b = _difference_operator(fw, k)
        k_mat += float(a[k]) * b.T @ dmat @ b
    return k_mat


def evaluate_H_ab(fw: Framework, a, b, u) -> float:
    """``sum_e a_e Hess_e(du, du) + b_e (grad_e . du)^2`` with the Hessian and
    gradient of the norm itself."""
    _require_second_order(fw)
    b = np.asarray(b, dtype=float)
    if np.any(b <= 0):
        raise ValueError("b must be strictly positive on every edge")
    u = as_float(np.asarray(u))
    total = 0.0
    for k, g in enumerate(fw.edge_geometry):
        du = fw.edge_difference(u, k)
        row = np.asarray(g.row, dtype=float)
        hess = g.hessian if g.hessian is not None else np.zeros((fw.dim, fw.dim))
        total += float(a[k]) * du @ hess @ du + b[k] * (row @ du) ** 2
    return float(total)


def evaluate_H_p(fw: Framework, a, u) -> float:
    """``sum_e a_e du^T diag|x_e|^(p-2) du`` (p-power form) or the Euclidean
    norm-Hessian form."""
    _require_second_order(fw)
    u = as_float(np.asarray(u))
    return float(u @ stress_form(fw, a) @ u)


def power_stress_to_norm_stress(fw: Framework, a) -> np.ndarray:
    """Rescale a p-power stress to a stress of the norm rows:
    ``a_norm = a_power * ||x_e||^(p-1)``."""
    from .norms import evaluate
    if fw.norm.kind != LP:
        return np.asarray(a, dtype=float)
    lengths = np.array([evaluate(fw.norm, fw.edge_vector(k)) for k in range(len(fw.edges))])
    return np.asarray(a, dtype=float) * lengths ** (fw.norm.p - 1)


def restricted_forms(fw: Framework, tol: float = DEFAULT_RANK_TOL) -> RestrictedFormSet:
    _require_second_order(fw)
    u_basis = as_float(flex_complement(fw, tol))
    if u_basis.shape[1]:
        u_basis, _ = np.linalg.qr(u_basis)
    stresses = left_null_space(second_order_rows(fw), tol)
    full = [stress_form(fw, stresses[:, i]) for i in range(stresses.shape[1])]
    forms = [u_basis.T @ k_mat @ u_basis for k_mat in full]
    forms = [(q + q.T) / 2 for q in forms]
    scale = max([1.0] + [float(np.abs(k_mat).max()) for k_mat in full])
    coeffs = np.array([c for _, _, c in _edge_terms(fw)])
    return RestrictedFormSet(u_basis, stresses, forms, full, scale, coeffs)


# -- witnesses ---------------------------------------------------------------

def _sparse_velocity(fw: Framework, u: np.ndarray) -> np.ndarray:
    u = u / np.max(np.abs(u))
    if fw.norm.kind != EUCLIDEAN:
        u = _canonical_translate(fw, u)
        u = u / np.max(np.abs(u))
    u[np.abs(u) < 1e-13] = 0.0
    return u


def acceleration_for(fw: Framework, u) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares ``u'`` for the second-order equations at ``u``
    and the largest edge residual."""
    rows = second_order_rows(fw)
    rhs = -quadratic_vector(fw, u)
    u_prime, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    if fw.norm.kind != EUCLIDEAN and len(fw.vertices):
        u_prime = _canonical_translate(fw, u_prime)
    u_prime[np.abs(u_prime) < 1e-13] = 0.0
    resid = rows @ u_prime - rhs
    return u_prime, float(np.max(np.abs(resid))) if resid.size else 0.0


def second_order_residuals(fw: Framework, u, u_prime) -> np.ndarray:
    return second_order_rows(fw) @ np.asarray(u_prime, dtype=float) + quadratic_vector(fw, u)


def certify_second_order_witness(fw: Framework, u, u_prime, tol: float = RESIDUAL_TOL) -> bool:
    """``u`` is a nontrivial flex and every edge equation holds within ``tol``."""
    _require_second_order(fw)
    u = as_float(np.asarray(u))
    if not np.any(u):
        return False
    if not certify_flex(fw, u, tol):
        return False
    if _in_span(as_float(trivial_space(fw)), u, DEFAULT_RANK_TOL):
        return False
    res = second_order_residuals(fw, u, u_prime)
    return bool(np.all(np.abs(res) <= tol))


def _witness_from_coords(fw: Framework, forms: RestrictedFormSet, c: np.ndarray):
    u = _sparse_velocity(fw, forms.flex_coords @ c)
    u_prime, _ = acceleration_for(fw, u)
    if certify_second_order_witness(fw, u, u_prime):
        return {"u": u, "u_prime": u_prime}
    return None


def _eigen(q: np.ndarray):
    return sym_eigen(q)


def _indefinite_zero(vals, vecs) -> np.ndarray:
    """A real zero of ``c -> c^T Q c`` from the eigenpairs of an indefinite ``Q``."""
    lo, hi = vals[0], vals[-1]
    return np.sqrt(hi) * vecs[:, 0] + np.sqrt(-lo) * vecs[:, -1]


def _binary_form_zeros(forms: list, thr: float) -> list:
    """Candidate common zeros on the unit circle when the flex space is 2-dimensional.

    Each form is ``a c1^2 + 2 b c1 c2 + d c2^2``; the real roots of the first
    form that is not negligible are the only candidates.
    """
    for q in forms:
        if np.max(np.abs(q)) <= thr:
            continue
        a, b, d = q[0, 0], q[0, 1], q[1, 1]
        cands = []
        if abs(a) <= thr:
            cands.append(np.array([1.0, 0.0]))
            if abs(b) > thr:
                cands.append(np.array([-d, 2 * b]))
        else:
            disc = b * b - a * d
            if disc < -thr * max(1.0, abs(a)):
                return []
            r = np.sqrt(max(disc, 0.0))
            cands += [np.array([-b + r, a]), np.array([-b - r, a])]
        return [c / np.linalg.norm(c) for c in cands if np.linalg.norm(c) > 0]
    return [np.array([1.0, 0.0])]


def _search_common_zero(forms: RestrictedFormSet, seed: int, starts: int = ZERO_SEARCH_STARTS):
    """Seeded least-squares search for ``c`` on the unit sphere with ``Q_i(c) = 0``."""
    qs = [q / forms.scale for q in forms.forms]
    f = forms.f

    def resid(c):
        return np.array([c @ q @ c for q in qs] + [c @ c - 1.0])

    def jac(c):
        return np.array([2 * q @ c for q in qs] + [2 * c])

    rng = np.random.default_rng(seed)
    for _ in range(starts):
        c0 = rng.standard_normal(f)
        c0 /= np.linalg.norm(c0)
        sol = least_squares(resid, c0, jac=jac, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
        if np.max(np.abs(sol.fun)) < 1e-12:
            yield sol.x / np.linalg.norm(sol.x)


def _dual_certificate(forms: RestrictedFormSet, seed: int, starts: int = PRESTRESS_STARTS):
    """Look for ``Y = V V^T`` with trace 1 and ``<Q_i, Y> = 0`` for all i.

    Such a ``Y`` shows no combination of the forms is positive definite,
    since ``tr((sum x_i Q_i) Y)`` would be positive.
    """
    qs = [q / forms.scale for q in forms.forms]
    f = forms.f

    def resid(v):
        vm = v.reshape(f, f)
        y = vm @ vm.T
        return np.array([np.sum(q * y) for q in qs] + [np.trace(y) - 1.0])

    rng = np.random.default_rng(seed)
    for _ in range(starts):
        v0 = rng.standard_normal(f * f)
        v0 /= np.linalg.norm(v0)
        sol = least_squares(resid, v0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
        if np.max(np.abs(sol.fun)) < 1e-12:
            vm = sol.x.reshape(f, f)
            return vm @ vm.T
    return None


def _max_min_eigen(forms: RestrictedFormSet, seed: int):
    """Maximise ``lambda_min(sum x_i Q_i)`` over the unit sphere by supergradient
    ascent from seeded starts; returns (best value, best x)."""
    s = forms.s
    qs = np.array(forms.forms)
    if forms.f == 1:
        q = qs[:, 0, 0]
        n = np.linalg.norm(q)
        x = q / n if n > 0 else np.eye(s)[0]
        return float(n), x

    def lam(x):
        m = np.tensordot(x, qs, axes=1)
        vals, vecs = np.linalg.eigh(m)
        return vals[0], vecs[:, 0]

    rng = np.random.default_rng(seed)
    starts = [np.eye(s)[i] * sg for i in range(s) for sg in (1, -1)]
    starts += [rng.standard_normal(s) for _ in range(PRESTRESS_STARTS)]
    best_val, best_x = -np.inf, None
    step0 = forms.scale
    for x in starts:
        x = x / np.linalg.norm(x)
        for it in range(ASCENT_STEPS):
            val, v = lam(x)
            if val > best_val:
                best_val, best_x = val, x.copy()
            if best_val > forms.threshold:
                return float(best_val), best_x
            g = np.einsum("i,kij,j->k", v, qs, v)
            g -= (g @ x) * x
            gn = np.linalg.norm(g)
            if gn < 1e-14 * step0:
                break
            x = x + g / gn / np.sqrt(it + 1) / max(step0, 1e-300) * step0
            x /= np.linalg.norm(x)
    return float(best_val), best_x


# -- decisions ---------------------------------------------------------------

def _polyhedral_route(fw: Framework, prop: str, tol: float) -> Verdict:
    inf = is_infinitesimally_rigid(fw, tol)
    return Verdict(prop, inf.value, witness=dict(inf.witness),
                   certificate={"route": "polyhedral norm: Hessians vanish, equals infinitesimal rigidity"})


def _oriented_stress(forms: RestrictedFormSet, x: np.ndarray) -> np.ndarray:
    a = forms.stresses @ x
    a = a / np.max(np.abs(a))
    a[np.abs(a) < 1e-13] = 0.0
    return a


def prestress_decide(fw: Framework, seed: int = DEFAULT_SEED, tol: float = DEFAULT_RANK_TOL) -> Verdict:
    prop = "prestress_stable"
    if not classify_framework(fw).second_order_well_positioned:
        return Verdict(prop, NA, certificate={"reason": "not second-order well-positioned"})
    if fw.norm.is_polyhedral:
        return _polyhedral_route(fw, prop, tol)
    forms = restricted_forms(fw, tol)
    cert = {"f": forms.f, "s": forms.s, "threshold": forms.threshold}
    if forms.f == 0:
        return Verdict(prop, YES, witness={"stress": np.zeros(len(fw.edges))},
                       certificate=dict(cert, route="infinitesimally rigid"))
    if forms.s == 0:
        return Verdict(prop, NO, certificate=dict(cert, route="flexible with no stress"))

    if forms.s == 1:
        vals, vecs = _eigen(forms.forms[0])
        cert["eigenvalues"] = vals
        if vals[0] > forms.threshold:
            return Verdict(prop, YES, witness={"stress": _oriented_stress(forms, np.array([1.0]))},
                           certificate=dict(cert, route="single stress, positive definite"))
        if vals[-1] < -forms.threshold:
            return Verdict(prop, YES, witness={"stress": _oriented_stress(forms, np.array([-1.0]))},
                           certificate=dict(cert, route="single stress, negative definite"))
        if vals[0] < -forms.threshold and vals[-1] > forms.threshold:
            return Verdict(prop, NO, certificate=dict(cert, route="single stress, indefinite"))
        so = second_order_decide(fw, seed, tol, forms=forms, prestress=False)
        if so.value == NO:
            return Verdict(prop, NO, witness=so.witness,
                           certificate=dict(cert, route="second-order flex exists"))
        return Verdict(prop, UNDETERMINED, certificate=dict(cert, route="single stress, near-singular"))

    best, x = _max_min_eigen(forms, seed)
    cert["max_min_eigenvalue"] = best
    if best > forms.threshold:
        a = _oriented_stress(forms, x)
        vals, _ = _eigen(np.tensordot(x, np.array(forms.forms), axes=1))
        if vals[0] <= 0:
            raise AssertionError("ascent witness is not positive definite")
        return Verdict(prop, YES, witness={"stress": a}, certificate=dict(cert, route="supergradient ascent"))
    so = second_order_decide(fw, seed, tol, forms=forms, prestress=False)
    if so.value == NO:
        return Verdict(prop, NO, witness=so.witness, certificate=dict(cert, route="second-order flex exists"))
    y = _dual_certificate(forms, seed)
    if y is not None:
        return Verdict(prop, NO, certificate=dict(cert, route="dual positive semidefinite certificate",
                                                  dual=y))
    return Verdict(prop, UNDETERMINED, certificate=dict(cert, route="search exhausted"))


def second_order_decide(fw: Framework, seed: int = DEFAULT_SEED, tol: float = DEFAULT_RANK_TOL,
                        forms: RestrictedFormSet | None = None, prestress: bool = True) -> Verdict:
    prop = "second_order_rigid"
    if not classify_framework(fw).second_order_well_positioned:
        return Verdict(prop, NA, certificate={"reason": "not second-order well-positioned"})
    if fw.norm.is_polyhedral:
        return _polyhedral_route(fw, prop, tol)
    forms = forms or restricted_forms(fw, tol)
    cert = {"f": forms.f, "s": forms.s, "threshold": forms.threshold}
    if forms.f == 0:
        return Verdict(prop, YES, certificate=dict(cert, route="infinitesimally rigid"))

    def flexible(c, route):
        w = _witness_from_coords(fw, forms, c)
        if w is None:
            return None
        return Verdict(prop, NO, witness=w, certificate=dict(cert, route=route))

    if forms.s == 0:
        v = flexible(np.eye(forms.f)[0], "flexible with no stress")
        if v is None:
            raise AssertionError("unstressed flex failed to extend to second order")
        return v

    if forms.s == 1:
        vals, vecs = _eigen(forms.forms[0])
        if vals[0] > forms.threshold or vals[-1] < -forms.threshold:
            return Verdict(prop, YES, certificate=dict(cert, route="single stress, definite"))
        if vals[0] < -forms.threshold and vals[-1] > forms.threshold:
            c = _indefinite_zero(vals, vecs)
        else:
            c = vecs[:, 0] if abs(vals[0]) <= abs(vals[-1]) else vecs[:, -1]
        v = flexible(c, "single stress, zero of the form")
        return v or Verdict(prop, UNDETERMINED, certificate=dict(cert, route="witness failed to certify"))

    if prestress and prestress_decide(fw, seed, tol).value == YES:
        return Verdict(prop, YES, certificate=dict(cert, route="prestress stable"))

    if forms.f == 2:
        common = False
        for c in _binary_form_zeros(forms.forms, forms.threshold):
            if all(abs(c @ q @ c) <= forms.threshold for q in forms.forms):
                common = True
                v = flexible(c, "common zero of binary forms")
                if v is not None:
                    return v
        if not common:
            return Verdict(prop, YES, certificate=dict(cert, route="binary forms have no common zero"))
    else:
        for c in _search_common_zero(forms, seed):
            v = flexible(c, "least-squares common zero")
            if v is not None:
                return v
    return Verdict(prop, UNDETERMINED, certificate=dict(cert, route="search exhausted"))

"""Scalar modes, dense matrix kernels and an exact LP feasibility solver.

Matrices are plain numpy arrays. Exact-mode matrices have ``dtype=object``
and hold :class:`fractions.Fraction` entries; float-mode matrices are
``float64``. A subspace basis is a 2-D array whose *columns* span it.
"""
from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from numbers import Integral

import numpy as np

EXACT = "exact"
FLOAT = "float"

DEFAULT_RANK_TOL = 1e-9


class ModeError(TypeError):
    """Raised when exact and float scalars are mixed."""


def to_fraction(x) -> Fraction:
    """Convert ``x`` to an exact rational.

    Accepts ints, Fractions, Decimals and strings such as ``"3/2"`` or
    ``"0.9"``. Binary floats are refused: they would smuggle rounding
    error into an exact analysis.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (Integral, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Decimal):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise ModeError(f"cannot convert {x!r} ({type(x).__name__}) to an exact rational")


def to_scalar(x, mode: str):
    if mode == EXACT:
        return to_fraction(x)
    if isinstance(x, str):
        return float(Fraction(x.strip()))
    return float(x)


def mode_of(m) -> str:
    """Return the scalar mode of array ``m``; reject mixed-mode arrays."""
    m = np.asarray(m)
    if m.dtype == object:
        kinds = {type(v) for v in m.flat}
        if any(issubclass(k, (float, np.floating)) for k in kinds):
            raise ModeError("mixed exact/float entries")
        return EXACT
    if np.issubdtype(m.dtype, np.integer) or m.dtype == bool:
        return EXACT
    return FLOAT


def matrix(rows, mode: str | None = None, cols: int | None = None) -> np.ndarray:
    """Build a 2-D matrix in one scalar mode.

    With ``mode=None`` the mode is inferred: Fractions/ints/strings give an
    exact matrix, floats give a float matrix, a mix of Fractions and floats
    is rejected.
    """
    rows = [list(r) for r in rows]
    flat = [v for r in rows for v in r]
    if mode is None:
        has_float = any(isinstance(v, (float, np.floating)) for v in flat)
        has_exact = any(isinstance(v, (Fraction, Decimal, str)) for v in flat)
        if has_float and has_exact:
            raise ModeError("mixed exact/float entries")
        mode = FLOAT if has_float else EXACT
    if not rows:
        shape = (0, cols or 0)
        return np.zeros(shape, dtype=object if mode == EXACT else float)
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged matrix rows")
    if mode == EXACT:
        out = np.empty((len(rows), width), dtype=object)
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                out[i, j] = to_fraction(v)
        return out
    return np.array([[float(v) for v in r] for r in rows], dtype=float).reshape(len(rows), width)


def as_exact(m) -> np.ndarray:
    m = np.asarray(m)
    out = np.empty(m.shape, dtype=object)
    for idx, v in np.ndenumerate(m):
        out[idx] = to_fraction(v)
    return out


def as_float(m) -> np.ndarray:
    return np.asarray(m).astype(float)


def zeros(shape, mode: str) -> np.ndarray:
    if mode == EXACT:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def identity(n: int, mode: str) -> np.ndarray:
    out = zeros((n, n), mode)
    for i in range(n):
        out[i, i] = Fraction(1) if mode == EXACT else 1.0
    return out


# -- exact row reduction ---------------------------------------------------

def rref(m) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals.

    Returns the nonzero rows and the pivot column of each.
    """
    m = np.asarray(m)
    nrows, ncols = m.shape
    rows = [[to_fraction(v) for v in m[i]] for i in range(nrows)]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def _exact_null_space(m) -> np.ndarray:
    m = np.asarray(m)
    ncols = m.shape[1]
    if m.shape[0] == 0:
        return identity(ncols, EXACT)
    rows, pivots = rref(m)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = zeros((ncols, len(free)), EXACT)
    for k, f in enumerate(free):
        basis[f, k] = Fraction(1)
        for row, pc in zip(rows, pivots):
            basis[pc, k] = -row[f]
    return basis


# -- public kernels --------------------------------------------------------

def singular_values(m) -> np.ndarray:
    m = as_float(m)
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def rank(m, tol: float = DEFAULT_RANK_TOL) -> int:
    """Rank of ``m``.

    Exact mode uses row reduction and ignores ``tol``. Float mode counts
    singular values above ``tol`` times the largest one.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError("rank expects a 2-D matrix")
    if m.size == 0:
        return 0
    if mode_of(m) == EXACT:
        return len(rref(m)[1])
    s = singular_values(m)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def null_space(m, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Basis (as columns) of ``{x : m @ x = 0}``.

    The float basis is orthonormal; the exact basis is the free-variable
    basis read off the reduced row echelon form.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError("null_space expects a 2-D matrix")
    ncols = m.shape[1]
    if mode_of(m) == EXACT:
        return _exact_null_space(m)
    if m.shape[0] == 0 or ncols == 0:
        return np.eye(ncols)
    _, s, vt = np.linalg.svd(m.astype(float), full_matrices=True)
    r = 0 if s.size == 0 or s[0] == 0 else int(np.sum(s > tol * s[0]))
    return vt[r:].T.copy()


def left_null_space(m, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Basis (as columns) of ``{a : a @ m = 0}``."""
    m = np.asarray(m)
    return null_space(m.T, tol)


def column_basis(m, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """A basis for the column span of ``m``: pivot columns (exact) or an
    orthonormal basis (float)."""
    m = np.asarray(m)
    if m.shape[1] == 0:
        return m.copy()
    if mode_of(m) == EXACT:
        _, pivots = rref(m)
        return m[:, pivots].copy()
    u, s, _ = np.linalg.svd(m.astype(float), full_matrices=False)
    r = 0 if s.size == 0 or s[0] == 0 else int(np.sum(s > tol * s[0]))
    return u[:, :r].copy()


def sym_eigen(m, tol: float = 1e-15, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with ``w`` ascending and ``m @ V[:, k] = w[k] * V[:, k]``.
    """
    m = np.asarray(m)
    if m.dtype == object:
        raise ModeError("sym_eigen works in float mode only")
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("sym_eigen expects a square matrix")
    n = a.shape[0]
    scale = np.abs(a).max() if a.size else 0.0
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(scale, 1.0)):
        raise ValueError("sym_eigen expects a symmetric matrix")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * max(np.sqrt(np.sum(a * a)), np.finfo(float).tiny):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


# -- exact LP --------------------------------------------------------------

def _simplex_max(c: list[Fraction], a: list[list[Fraction]], b: list[Fraction]):
    """Maximise ``c.x`` subject to ``a x <= b``, ``x >= 0`` with ``b >= 0``.

    Textbook tableau simplex over the rationals with Bland's rule, started
    from the slack basis. Returns ``(value, x)``; ``None`` if unbounded.
    """
    m, n = len(a), len(c)
    tab = [list(a[i]) + [Fraction(int(i == k)) for k in range(m)] + [b[i]] for i in range(m)]
    obj = [-v for v in c] + [Fraction(0)] * m + [Fraction(0)]
    basis = list(range(n, n + m))
    while True:
        enter = next((j for j in range(n + m) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            if tab[i][enter] > 0:
                ratio = tab[i][-1] / tab[i][enter]
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return None
        row = best[1]
        piv = tab[row][enter]
        tab[row] = [v / piv for v in tab[row]]
        for i in range(m):
            if i != row and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[row])]
        f = obj[enter]
        obj = [x - f * y for x, y in zip(obj, tab[row])]
        basis[row] = enter
    x = [Fraction(0)] * (n + m)
    for i, bv in enumerate(basis):
        x[bv] = tab[i][-1]
    return obj[-1], x[:n]


def lp_feasible_nonzero(inequalities, equalities, dim: int | None = None) -> np.ndarray | None:
    """Find a nonzero rational ``u`` with ``inequalities @ u >= 0`` and
    ``equalities @ u = 0``, or return ``None`` if only ``u = 0`` qualifies.

    The equalities are eliminated first by an exact null-space
    parametrisation ``u = N z``. Then, for each coordinate ``z_i`` and sign
    ``s``, the LP ``max s * z_i`` over the cone intersected with the box
    ``-1 <= z <= 1`` is solved exactly; a positive optimum is a witness.
    """
    ineq = np.asarray(inequalities, dtype=object)
    eq = np.asarray(equalities, dtype=object)
    widths = {x.shape[1] for x in (ineq, eq) if x.ndim == 2 and x.shape[0] > 0}
    if dim is None:
        if len(widths) != 1:
            if not widths:
                raise ValueError("cannot infer dimension of an empty system")
            raise ValueError("inequality and equality widths differ")
        dim = widths.pop()
    elif widths - {dim}:
        raise ValueError("constraint width does not match dim")
    if ineq.size == 0:
        ineq = zeros((0, dim), EXACT)
    if eq.size == 0:
        eq = zeros((0, dim), EXACT)
    ineq = as_exact(ineq)
    eq = as_exact(eq)

    basis = _exact_null_space(eq) if eq.shape[0] else identity(dim, EXACT)
    k = basis.shape[1]
    if k == 0:
        return None
    g = ineq.dot(basis) if ineq.shape[0] else zeros((0, k), EXACT)
    g_rows = [list(r) for r in g if any(v != 0 for v in r)]
    if not g_rows:
        return basis[:, 0].copy()

    # z = zp - zm with 0 <= zp, zm <= 1; the cone rows become -g zp + g zm <= 0
    one, zero = Fraction(1), Fraction(0)
    a_rows = [[-v for v in r] + list(r) for r in g_rows]
    b_rows = [zero] * len(a_rows)
    for j in range(2 * k):
        a_rows.append([one if i == j else zero for i in range(2 * k)])
        b_rows.append(one)
    for i in range(k):
        for sign in (1, -1):
            c = [zero] * (2 * k)
            c[i] = Fraction(sign)
            c[k + i] = Fraction(-sign)
            res = _simplex_max(c, a_rows, b_rows)
            if res is None:
                raise RuntimeError("box-constrained LP reported unbounded")
            value, x = res
            if value > 0:
                z = np.array([x[j] - x[k + j] for j in range(k)], dtype=object)
                u = basis.dot(z)
                if ineq.shape[0] and any(v < 0 for v in ineq.dot(u)):
                    raise RuntimeError("LP witness violates its constraints")
                return u
    return None

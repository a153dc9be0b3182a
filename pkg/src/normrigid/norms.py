"""Euclidean, l_p and polyhedral norms: values, differentiability classes,
gradients, Hessians and one-sided directional derivatives."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .numeric import EXACT, FLOAT, rank, to_fraction

EUCLIDEAN = "euclidean"
LP = "lp"
POLYHEDRAL = "polyhedral"

SMOOTH = "smooth"
ACTIVE = "polyhedral_active"
ZERO = "zero_length"

ACTIVE_TOL = 1e-9


@dataclass(frozen=True)
class NormSpec:
    """Which norm measures edge lengths.

    ``functionals`` (polyhedral only) is stored closed under negation, as
    tuples of Fractions, in the order given followed by any missing
    negations.
    """

    kind: str
    dim: int
    p: float | None = None
    functionals: tuple[tuple[Fraction, ...], ...] = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.kind == EUCLIDEAN:
            return
        if self.kind == LP:
            p = float(self.p)
            if not (p > 1 and np.isfinite(p)):
                raise ValueError("l_p norms need finite p > 1; give l_1 / l_inf as polyhedral")
            if p == 2:
                object.__setattr__(self, "kind", EUCLIDEAN)
                object.__setattr__(self, "p", None)
            else:
                object.__setattr__(self, "p", p)
            return
        if self.kind != POLYHEDRAL:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        fs = [tuple(to_fraction(v) for v in f) for f in self.functionals]
        if not fs:
            raise ValueError("polyhedral norm needs at least one functional")
        if any(len(f) != self.dim for f in fs):
            raise ValueError("functional length does not match dimension")
        closed: list[tuple[Fraction, ...]] = []
        for f in fs + [tuple(-v for v in f) for f in fs]:
            if f not in closed and any(v != 0 for v in f):
                closed.append(f)
        if rank(np.array(closed, dtype=object)) < self.dim:
            raise ValueError("polyhedral functionals do not span the dual space")
        object.__setattr__(self, "functionals", tuple(closed))
        object.__setattr__(self, "p", None)

    @classmethod
    def euclidean(cls, dim: int = 2) -> "NormSpec":
        return cls(EUCLIDEAN, dim)

    @classmethod
    def lp(cls, p: float, dim: int = 2) -> "NormSpec":
        return cls(LP, dim, p=p)

    @classmethod
    def polyhedral(cls, functionals) -> "NormSpec":
        functionals = [tuple(f) for f in functionals]
        return cls(POLYHEDRAL, len(functionals[0]), functionals=tuple(functionals))

    @classmethod
    def linf(cls, dim: int = 2) -> "NormSpec":
        return cls.polyhedral([tuple(int(i == j) for j in range(dim)) for i in range(dim)])

    @classmethod
    def l1(cls, dim: int = 2) -> "NormSpec":
        signs = [s for s in itertools.product((1, -1), repeat=dim) if s[0] == 1]
        return cls.polyhedral(signs)

    @property
    def is_polyhedral(self) -> bool:
        return self.kind == POLYHEDRAL

    def functional_matrix(self, mode: str) -> np.ndarray:
        if mode == EXACT:
            return np.array(self.functionals, dtype=object).reshape(-1, self.dim)
        return np.array([[float(v) for v in f] for f in self.functionals]).reshape(-1, self.dim)


@dataclass(eq=False)
class EdgeGeometry:
    """Differential data of the norm at one edge vector.

    ``kind`` is SMOOTH (gradient, optional Hessians), ACTIVE (polyhedral
    norm; the signed active functionals ``active`` with their indices into
    ``NormSpec.functionals``) or ZERO (zero-length edge).
    """

    kind: str
    gradient: np.ndarray | None = None
    hessian: np.ndarray | None = None
    power_gradient: np.ndarray | None = None
    power_hessian: np.ndarray | None = None
    active: list[np.ndarray] = field(default_factory=list)
    active_index: list[int] = field(default_factory=list)

    @property
    def well_positioned(self) -> bool:
        if self.kind == SMOOTH:
            return True
        if self.kind == ACTIVE:
            return len(self.active) == 1
        return False

    @property
    def row(self) -> np.ndarray:
        """The unique derivative row at a well-positioned edge vector."""
        if self.kind == SMOOTH:
            return self.gradient
        if self.kind == ACTIVE and len(self.active) == 1:
            return self.active[0]
        raise ValueError("edge vector is not a differentiable point of the norm")

    @property
    def has_hessian(self) -> bool:
        if self.kind == ACTIVE:
            return len(self.active) == 1
        return self.kind == SMOOTH and self.hessian is not None


def _check_dim(spec: NormSpec, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (spec.dim,):
        raise ValueError(f"vector of shape {x.shape} does not match dimension {spec.dim}")
    return x


def _is_exact(x: np.ndarray) -> bool:
    return x.dtype == object


def evaluate(spec: NormSpec, x):
    """Norm of ``x``. Exact for polyhedral norms on rational input."""
    x = _check_dim(spec, x)
    if spec.kind == POLYHEDRAL:
        if _is_exact(x):
            return max(abs(sum(fi * xi for fi, xi in zip(f, x))) for f in spec.functionals)
        return float(np.max(np.abs(spec.functional_matrix(FLOAT) @ x.astype(float))))
    xf = x.astype(float)
    if spec.kind == EUCLIDEAN:
        return float(np.sqrt(xf @ xf))
    return float(np.sum(np.abs(xf) ** spec.p) ** (1.0 / spec.p))


def signed_power(x: np.ndarray, e: float) -> np.ndarray:
    """``(sgn(x_i) |x_i|^e)_i``; this is ``x^(p-1)`` for ``e = p - 1``."""
    return np.sign(x) * np.abs(x) ** e


def lp_gradient(x: np.ndarray, p: float) -> np.ndarray:
    # the gradient is 0-homogeneous; rescaling first avoids under/overflow
    y = x / np.max(np.abs(x))
    n = np.sum(np.abs(y) ** p) ** (1.0 / p)
    return signed_power(y, p - 1) / n ** (p - 1)


def lp_hessian(x: np.ndarray, p: float) -> np.ndarray:
    """Hessian of ``x -> ||x||_p`` at a point where it exists.

    ``(p-1)/N^(p-1) * (diag|x|^(p-2) - x^(p-1) x^(p-1)^T / N^p)`` with
    ``N = ||x||_p``.
    """
    s = np.max(np.abs(x))
    y = x / s
    n = np.sum(np.abs(y) ** p) ** (1.0 / p)
    g = signed_power(y, p - 1)
    return (p - 1) / n ** (p - 1) * (np.diag(np.abs(y) ** (p - 2)) - np.outer(g, g) / n ** p) / s


def classify_edge_vector(spec: NormSpec, x, active_tol: float = ACTIVE_TOL) -> EdgeGeometry:
    x = _check_dim(spec, x)
    if all(v == 0 for v in x):
        return EdgeGeometry(ZERO)

    if spec.kind == POLYHEDRAL:
        exact = _is_exact(x)
        fm = spec.functional_matrix(EXACT if exact else FLOAT)
        vals = fm.dot(x) if exact else fm @ x.astype(float)
        norm = max(abs(v) for v in vals)
        active, index = [], []
        for i, v in enumerate(vals):
            tight = abs(v) == norm if exact else norm - abs(v) <= active_tol * norm
            if not tight:
                continue
            signed = fm[i] if v > 0 else -fm[i]
            if not any(np.array_equal(signed, a) for a in active):
                active.append(signed)
                index.append(_row_index(fm, signed))
        return EdgeGeometry(ACTIVE, active=active, active_index=index)

    xf = x.astype(float)
    if spec.kind == EUCLIDEAN:
        s = np.max(np.abs(xf))
        y = xf / s
        n = np.sqrt(y @ y)
        return EdgeGeometry(
            SMOOTH,
            gradient=y / n,
            hessian=(np.eye(spec.dim) - np.outer(y, y) / n**2) / (n * s),
            power_gradient=xf.copy(),
            power_hessian=np.eye(spec.dim),
        )
    p = spec.p
    twice = p > 2 or bool(np.all(xf != 0))
    return EdgeGeometry(
        SMOOTH,
        gradient=lp_gradient(xf, p),
        hessian=lp_hessian(xf, p) if twice else None,
        power_gradient=signed_power(xf, p - 1),
        power_hessian=np.diag(np.abs(xf) ** (p - 2)) if twice else None,
    )


def _row_index(fm: np.ndarray, row: np.ndarray) -> int:
    return next(j for j, r in enumerate(fm) if np.array_equal(r, row))


def one_sided_directional(spec: NormSpec, x, u):
    """``lim_{t -> 0+} (||x + t u|| - ||x||) / t``, read off the subdifferential.

    Smooth points give ``gradient . u``; polyhedral points the maximum over
    the active signed functionals; ``x = 0`` gives ``||u||`` because the
    subdifferential there is the whole dual unit ball.
    """
    x = _check_dim(spec, x)
    u = _check_dim(spec, u)
    geo = classify_edge_vector(spec, x)
    if geo.kind == ZERO:
        return evaluate(spec, u)
    if geo.kind == ACTIVE:
        if _is_exact(x) and _is_exact(u):
            return max(sum(a * b for a, b in zip(f, u)) for f in geo.active)
        return float(max(np.asarray(f, dtype=float) @ u.astype(float) for f in geo.active))
    return float(geo.gradient @ u.astype(float))

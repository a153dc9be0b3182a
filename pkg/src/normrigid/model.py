"""Framework data model, JSON ingestion/serialisation and placement-level
classification."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .norms import (EUCLIDEAN, LP, POLYHEDRAL, EdgeGeometry, NormSpec,
                    classify_edge_vector, evaluate)
from .numeric import EXACT, FLOAT, ModeError, to_fraction, to_scalar


class SchemaError(ValueError):
    """A framework document does not match the schema.

    ``path`` is a JSON-path-like pointer such as ``$.edges[3]``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class UnsupportedAnalysis(ValueError):
    """The requested analysis is not available for this framework/mode."""


@dataclass(frozen=True)
class Graph:
    """A finite simple graph.

    Each edge is stored oriented ``(v, w)`` with ``v`` declared before ``w``;
    every derivative row uses ``p_v - p_w`` under this orientation.
    """

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        vertices = tuple(str(v) for v in self.vertices)
        if len(set(vertices)) != len(vertices):
            raise ValueError("duplicate vertex names")
        order = {v: i for i, v in enumerate(vertices)}
        oriented, seen = [], set()
        for k, (a, b) in enumerate(self.edges):
            a, b = str(a), str(b)
            for end in (a, b):
                if end not in order:
                    raise ValueError(f"edge {k} ({a},{b}) names undeclared vertex {end!r}")
            if a == b:
                raise ValueError(f"edge {k} ({a},{b}) is a loop")
            e = (a, b) if order[a] < order[b] else (b, a)
            if e in seen:
                raise ValueError(f"edge {k} ({a},{b}) is a duplicate")
            seen.add(e)
            oriented.append(e)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", tuple(oriented))

    def index(self, v: str) -> int:
        return self.vertices.index(v)


def choose_mode(norm: NormSpec, mode: str = "auto") -> str:
    if mode == "auto":
        return EXACT if norm.kind == POLYHEDRAL else FLOAT
    if mode == EXACT and norm.kind != POLYHEDRAL:
        raise UnsupportedAnalysis(f"exact mode needs a polyhedral norm, not {norm.kind}")
    if mode not in (EXACT, FLOAT):
        raise ValueError(f"unknown mode {mode!r}")
    return mode


@dataclass(frozen=True, eq=False)
class Framework:
    """Graph + placement + norm. Immutable; edge geometry is computed once."""

    graph: Graph
    positions: np.ndarray
    norm: NormSpec
    mode: str
    edge_geometry: tuple[EdgeGeometry, ...] = field(init=False, repr=False)

    def __post_init__(self):
        pos = self.positions
        if pos.shape != (len(self.graph.vertices), self.norm.dim):
            raise ValueError("placement shape does not match graph and norm")
        pos.setflags(write=False)
        geo = tuple(classify_edge_vector(self.norm, self.edge_vector(k))
                    for k in range(len(self.graph.edges)))
        object.__setattr__(self, "edge_geometry", geo)

    @classmethod
    def build(cls, vertices: Sequence[str], edges, placement: Mapping[str, Sequence],
              norm: NormSpec, mode: str = "auto") -> "Framework":
        graph = Graph(tuple(vertices), tuple(tuple(e) for e in edges))
        mode = choose_mode(norm, mode)
        rows = []
        for v in graph.vertices:
            if v not in placement:
                raise ValueError(f"vertex {v!r} has no coordinates")
            coords = list(placement[v])
            if len(coords) != norm.dim:
                raise ValueError(f"vertex {v!r} has {len(coords)} coordinates, expected {norm.dim}")
            rows.append([to_scalar(c, mode) for c in coords])
        dtype = object if mode == EXACT else float
        positions = np.array(rows, dtype=dtype).reshape(len(graph.vertices), norm.dim)
        return cls(graph, positions, norm, mode)

    @property
    def vertices(self) -> tuple[str, ...]:
        return self.graph.vertices

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return self.graph.edges

    @property
    def dim(self) -> int:
        return self.norm.dim

    @property
    def n_coords(self) -> int:
        return len(self.vertices) * self.dim

    def edge_indices(self, k: int) -> tuple[int, int]:
        v, w = self.graph.edges[k]
        return self.graph.index(v), self.graph.index(w)

    def edge_vector(self, k: int) -> np.ndarray:
        i, j = self.edge_indices(k)
        return self.positions[i] - self.positions[j]

    def position(self, v: str) -> np.ndarray:
        return self.positions[self.graph.index(v)]

    def with_positions(self, positions) -> "Framework":
        return Framework(self.graph, np.array(positions, dtype=self.positions.dtype), self.norm, self.mode)

    def edge_difference(self, u, k: int) -> np.ndarray:
        """``u_v - u_w`` for edge ``k`` of a flat velocity vector ``u``."""
        i, j = self.edge_indices(k)
        d = self.dim
        return u[i * d:(i + 1) * d] - u[j * d:(j + 1) * d]

    def __eq__(self, other):
        if not isinstance(other, Framework):
            return NotImplemented
        return (self.graph == other.graph and self.norm == other.norm and self.mode == other.mode
                and self.positions.shape == other.positions.shape
                and bool(np.all(self.positions == other.positions)))

    def __hash__(self):
        return hash((self.graph, self.norm, self.mode))


def rigidity_map(fw: Framework) -> list:
    """Edge lengths ``(||p_v - p_w||)_{vw}`` in edge order."""
    return [evaluate(fw.norm, fw.edge_vector(k)) for k in range(len(fw.edges))]


@dataclass(frozen=True)
class Classification:
    well_positioned: bool
    second_order_well_positioned: bool
    badly_positioned_edges: tuple[tuple[str, str], ...]

    def to_dict(self) -> dict:
        return {
            "well_positioned": self.well_positioned,
            "second_order_well_positioned": self.second_order_well_positioned,
            "badly_positioned_edges": [list(e) for e in self.badly_positioned_edges],
        }


def classify_framework(fw: Framework) -> Classification:
    bad = tuple(e for e, g in zip(fw.edges, fw.edge_geometry) if not g.well_positioned)
    wp = not bad
    second = wp and all(g.has_hessian for g in fw.edge_geometry)
    return Classification(wp, second, bad)


# -- JSON ------------------------------------------------------------------

def _scalar_json(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    return x


def vector_json(v) -> list:
    return [_scalar_json(x) for x in v]


def framework_to_dict(fw: Framework) -> dict:
    norm: dict = {"kind": fw.norm.kind, "dim": fw.norm.dim}
    if fw.norm.kind == LP:
        norm["p"] = fw.norm.p
    if fw.norm.kind == POLYHEDRAL:
        norm["functionals"] = [vector_json(f) for f in fw.norm.functionals]
    return {
        "norm": norm,
        "vertices": list(fw.vertices),
        "edges": [list(e) for e in fw.edges],
        "placement": {v: vector_json(fw.positions[i]) for i, v in enumerate(fw.vertices)},
    }


def serialize_framework(fw: Framework) -> str:
    return json.dumps(framework_to_dict(fw), indent=2)


def _rational(x, path: str):
    if isinstance(x, bool) or not isinstance(x, (int, Decimal, str, float)):
        raise SchemaError(path, f"expected a number or rational string, got {x!r}")
    try:
        return to_fraction(Decimal(repr(x)) if isinstance(x, float) else x)
    except (ValueError, ZeroDivisionError, ModeError):
        raise SchemaError(path, f"not a rational number: {x!r}") from None


def parse_framework(doc, mode: str = "auto") -> Framework:
    """Build a Framework from a JSON document (text or already-loaded dict).

    JSON numbers are read as decimals, so ``0.9`` is the rational ``9/10``.
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc, parse_float=Decimal)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("$", "document must be an object")
    for key in ("norm", "vertices", "edges", "placement"):
        if key not in doc:
            raise SchemaError(f"$.{key}", "missing required field")

    nd = doc["norm"]
    if not isinstance(nd, dict):
        raise SchemaError("$.norm", "must be an object")
    kind = nd.get("kind")
    dim = nd.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise SchemaError("$.norm.dim", "must be a positive integer")
    try:
        if kind == EUCLIDEAN:
            norm = NormSpec.euclidean(dim)
        elif kind == LP:
            if "p" not in nd:
                raise SchemaError("$.norm.p", "lp norm needs p")
            norm = NormSpec.lp(float(_rational(nd["p"], "$.norm.p")), dim)
        elif kind == POLYHEDRAL:
            fs = nd.get("functionals")
            if not isinstance(fs, list) or not fs:
                raise SchemaError("$.norm.functionals", "polyhedral norm needs a nonempty list")
            rows = []
            for i, f in enumerate(fs):
                if not isinstance(f, list) or len(f) != dim:
                    raise SchemaError(f"$.norm.functionals[{i}]", f"must be a list of {dim} numbers")
                rows.append(tuple(_rational(x, f"$.norm.functionals[{i}][{j}]") for j, x in enumerate(f)))
            norm = NormSpec(POLYHEDRAL, dim, functionals=tuple(rows))
        else:
            raise SchemaError("$.norm.kind", f"unknown norm kind {kind!r}")
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError("$.norm", str(exc)) from None

    vertices = doc["vertices"]
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise SchemaError("$.vertices", "must be a list of strings")
    if len(set(vertices)) != len(vertices):
        raise SchemaError("$.vertices", "duplicate vertex names")
    declared = set(vertices)

    edges = doc["edges"]
    if not isinstance(edges, list):
        raise SchemaError("$.edges", "must be a list")
    seen = set()
    for k, e in enumerate(edges):
        path = f"$.edges[{k}]"
        if not isinstance(e, list) or len(e) != 2 or not all(isinstance(x, str) for x in e):
            raise SchemaError(path, "edge must be a pair of vertex names")
        for x in e:
            if x not in declared:
                raise SchemaError(path, f"edge {e[0]}-{e[1]} names undeclared vertex {x!r}")
        if e[0] == e[1]:
            raise SchemaError(path, f"edge {e[0]}-{e[1]} is a loop")
        key = frozenset(e)
        if key in seen:
            raise SchemaError(path, f"edge {e[0]}-{e[1]} is a duplicate")
        seen.add(key)

    placement = doc["placement"]
    if not isinstance(placement, dict):
        raise SchemaError("$.placement", "must be an object")
    coords = {}
    for v in vertices:
        path = f"$.placement.{v}"
        if v not in placement:
            raise SchemaError(path, "vertex has no coordinates")
        c = placement[v]
        if not isinstance(c, list) or len(c) != dim:
            raise SchemaError(path, f"dimension mismatch: expected {dim} coordinates")
        coords[v] = [_rational(x, f"{path}[{j}]") for j, x in enumerate(c)]
    for v in placement:
        if v not in declared:
            raise SchemaError(f"$.placement.{v}", "coordinates for undeclared vertex")

    try:
        return Framework.build(vertices, edges, coords, norm, mode)
    except UnsupportedAnalysis:
        raise
    except ValueError as exc:
        raise SchemaError("$", str(exc)) from None


def load_framework(path, mode: str = "auto") -> Framework:
    with open(path) as fh:
        return parse_framework(fh.read(), mode)


def serialize_report(report) -> str:
    """JSON text of an analysis report (anything with ``to_dict``)."""
    data = report.to_dict() if hasattr(report, "to_dict") else report
    return json.dumps(data, indent=2) + "\n"


"""Full analysis of a framework, assembled into a JSON-ready report."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import firstorder as fo
from . import secondorder as so
from .model import Framework, classify_framework, vector_json
from .norms import ACTIVE_TOL
from .numeric import DEFAULT_RANK_TOL, EXACT

FLOAT_DIGITS = 12


class InconsistentReport(AssertionError):
    """A verdict combination contradicts a proven implication."""


@dataclass(frozen=True)
class AnalysisConfig:
    tol: float = DEFAULT_RANK_TOL
    seed: int = so.DEFAULT_SEED
    timing: bool = False


def _num(x):
    if isinstance(x, (float, np.floating)):
        v = float(f"{float(x):.{FLOAT_DIGITS}g}")
        return 0.0 if v == 0 else v
    return vector_json([x])[0]


def _vertex_map(fw: Framework, u) -> dict:
    d = fw.dim
    return {v: [_num(x) for x in u[i * d:(i + 1) * d]] for i, v in enumerate(fw.vertices)}


def _edge_values(fw: Framework, a) -> list:
    return [[v, w, _num(x)] for (v, w), x in zip(fw.edges, a)]


def _verdict_json(v: fo.Verdict):
    return v.json_value


@dataclass
class AnalysisReport:
    framework: Framework
    classification: object
    verdicts: dict
    dimensions: dict
    config: AnalysisConfig
    elapsed: float | None = None
    implications: dict = field(default_factory=dict)

    def value(self, prop: str) -> str:
        return self.verdicts[prop].value

    def witnesses_json(self) -> dict:
        fw = self.framework
        out = {}
        inf = self.verdicts["infinitesimally_rigid"]
        if "flex" in inf.witness:
            out["infinitesimal_flex"] = _vertex_map(fw, inf.witness["flex"])
        strong = self.verdicts["strongly_infinitesimally_rigid"]
        if "flex" in strong.witness:
            w = {"flex": _vertex_map(fw, strong.witness["flex"])}
            if "assignment" in strong.witness:
                w["assignment"] = strong.witness["assignment"]
                w["weights"] = [{"edge": list(e), "weights": [_num(x) for x in ws]}
                                for e, ws in strong.witness["weights"].items()]
            out["strong_flex"] = w
        pre = self.verdicts["prestress_stable"]
        if "stress" in pre.witness:
            out["prestress_stress"] = _edge_values(fw, pre.witness["stress"])
        sec = self.verdicts["second_order_rigid"]
        if "u" in sec.witness:
            out["second_order_flex"] = {"u": _vertex_map(fw, sec.witness["u"]),
                                        "u_prime": _vertex_map(fw, sec.witness["u_prime"])}
        return out

    def to_dict(self) -> dict:
        doc = {
            "classification": self.classification.to_dict(),
            "verdicts": {k: _verdict_json(v) for k, v in self.verdicts.items()},
            "implications": self.implications,
            "dimensions": self.dimensions,
            "witnesses": self.witnesses_json(),
            "routes": {k: v.certificate.get("route") for k, v in self.verdicts.items()
                       if v.certificate.get("route")},
            "strong_rigidity_model": "product",
            "mode": self.framework.mode,
            "tolerances": {"rank": self.config.tol, "active_set": ACTIVE_TOL,
                           "definiteness_relative": so.PD_REL_TOL,
                           "second_order_residual": so.RESIDUAL_TOL},
            "seed": self.config.seed,
        }
        if self.elapsed is not None:
            doc["timing_seconds"] = round(self.elapsed, 4)
        return doc


def _implications(verdicts: dict) -> dict:
    reasons = []
    if verdicts["strongly_infinitesimally_rigid"].value == fo.YES:
        reasons.append("strongly infinitesimally rigid frameworks are locally rigid")
    if verdicts["prestress_stable"].value == fo.YES:
        reasons.append("prestress stable frameworks are locally rigid")
    implied = bool(reasons)
    return {
        "locally_rigid_implied": implied,
        "continuously_rigid_implied": implied,
        "reasons": reasons + (["local rigidity implies continuous rigidity"] if implied else []),
    }


def check_consistency(classification, verdicts: dict):
    """Raise when decided verdicts break a proven implication."""
    val = {k: v.value for k, v in verdicts.items()}
    if val["strongly_infinitesimally_rigid"] == fo.YES and val["infinitesimally_rigid"] != fo.YES:
        raise InconsistentReport("strongly rigid but not infinitesimally rigid")
    if classification.well_positioned and val["strongly_infinitesimally_rigid"] != val["infinitesimally_rigid"]:
        raise InconsistentReport("well-positioned framework with differing strong and infinitesimal verdicts")
    if classification.second_order_well_positioned:
        chain = [val["infinitesimally_rigid"], val["prestress_stable"], val["second_order_rigid"]]
        for a, b in zip(chain, chain[1:]):
            if a == fo.YES and b == fo.NO:
                raise InconsistentReport(f"implication chain broken: {chain}")
    for k in ("prestress_stable", "second_order_rigid"):
        if not classification.second_order_well_positioned and val[k] != fo.NA:
            raise InconsistentReport(f"{k} decided for a framework that is not second-order well-positioned")


def analyze(fw: Framework, config: AnalysisConfig | None = None) -> AnalysisReport:
    config = config or AnalysisConfig()
    start = time.perf_counter()
    tol = config.tol
    cls = classify_framework(fw)

    inf = fo.is_infinitesimally_rigid(fw, tol)
    if inf.value == fo.NO and not fo.certify_flex(fw, inf.witness["flex"]):
        raise InconsistentReport("infinitesimal flex witness failed the directional-derivative check")
    strong = fo.strong_flex_search(fw, tol)
    if strong.value == fo.NO and "assignment" in strong.witness:
        op = fo.generalized_operator_at(fw, strong.witness["weights"])
        u = strong.witness["flex"]
        if fw.mode == EXACT and any(x != 0 for x in op.dot(u)):
            raise InconsistentReport("strong flex witness is not in the kernel of its operator")
    pre = so.prestress_decide(fw, config.seed, tol)
    sec = so.second_order_decide(fw, config.seed, tol)
    verdicts = {
        "infinitesimally_rigid": inf,
        "strongly_infinitesimally_rigid": strong,
        "prestress_stable": pre,
        "second_order_rigid": sec,
    }
    check_consistency(cls, verdicts)

    stresses = fo.stress_space(fw, tol)
    dims = {
        "flex": inf.certificate["flex_dim"],
        "trivial": inf.certificate["trivial_dim"],
        "stress": stresses.dim if stresses is not None else None,
        "rank": inf.certificate["rank"],
    }
    elapsed = time.perf_counter() - start if config.timing else None
    return AnalysisReport(fw, cls, verdicts, dims, config, elapsed, _implications(verdicts))

"""Deterministic SVG drawings of planar frameworks."""
from __future__ import annotations

import numpy as np

from . import firstorder as fo
from .model import Framework
from .norms import ACTIVE, ZERO

MARGIN = 40.0
ARROW_LENGTH = 0.35
PALETTE = ["#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#16a085", "#7f8c8d"]
ARROW_COLOUR = "#d62728"


def _fmt(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def flex_arrows(fw: Framework) -> np.ndarray | None:
    """Velocity to draw: a nontrivial infinitesimal flex, else a strong-flex witness."""
    u = fo.nontrivial_flex(fw)
    if u is None:
        strong = fo.strong_flex_search(fw)
        u = strong.witness.get("flex")
    return None if u is None else np.asarray(u, dtype=float)


def render_svg(fw: Framework, scale: float = 100.0, arrows: bool = False) -> str:
    if fw.dim != 2:
        raise ValueError("only planar frameworks can be drawn")
    pos = np.asarray(fw.positions, dtype=float).reshape(len(fw.vertices), 2)
    if len(pos):
        lo, hi = pos.min(axis=0), pos.max(axis=0)
    else:
        lo = hi = np.zeros(2)
    width = (hi[0] - lo[0]) * scale + 2 * MARGIN
    height = (hi[1] - lo[1]) * scale + 2 * MARGIN

    def xy(p):
        return MARGIN + (p[0] - lo[0]) * scale, MARGIN + (hi[1] - p[1]) * scale

    classes = sorted({tuple(g.active_index) for g in fw.edge_geometry if g.kind == ACTIVE})
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        "<defs>",
        '<marker id="head" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" '
        f'markerHeight="6" orient="auto"><polygon points="0,0 10,5 0,10" fill="{ARROW_COLOUR}"/></marker>',
        "</defs>",
    ]
    for k, (v, w) in enumerate(fw.edges):
        g = fw.edge_geometry[k]
        colour, extra = "#000000", ""
        if g.kind == ACTIVE:
            colour = PALETTE[classes.index(tuple(g.active_index)) % len(PALETTE)]
        if not g.well_positioned:
            extra = ' stroke-dasharray="6,4"'
        if g.kind == ZERO:
            colour = "#999999"
        (x1, y1), (x2, y2) = xy(pos[fw.graph.index(v)]), xy(pos[fw.graph.index(w)])
        out.append(f'<line class="edge" x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                   f'stroke="{colour}" stroke-width="2"{extra}/>')
    if arrows and len(pos):
        u = flex_arrows(fw)
        if u is not None:
            u = u.reshape(-1, 2)
            top = float(np.max(np.abs(u)))
            for i in range(len(pos)):
                if top == 0 or np.max(np.abs(u[i])) <= 1e-12 * top:
                    continue
                x1, y1 = xy(pos[i])
                x2, y2 = xy(pos[i] + ARROW_LENGTH * u[i] / top)
                out.append(f'<path class="arrow" d="M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}" '
                           f'stroke="{ARROW_COLOUR}" stroke-width="2" fill="none" marker-end="url(#head)"/>')
    for i, v in enumerate(fw.vertices):
        x, y = xy(pos[i])
        out.append(f'<circle class="vertex" cx="{_fmt(x)}" cy="{_fmt(y)}" r="5" fill="#000000"><title>{v}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

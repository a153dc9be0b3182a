"""Command line: ``normrigid analyze | generate | render``."""
from __future__ import annotations

import argparse
import sys

from . import generators as gen
from .analysis import AnalysisConfig, analyze
from .model import SchemaError, UnsupportedAnalysis, load_framework, serialize_framework, serialize_report
from .numeric import DEFAULT_RANK_TOL

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_UNSUPPORTED = 3


def _write(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def parse_braces(text: str) -> tuple[tuple[int, int], ...]:
    """``"1,3;2,2"`` -> ``((1, 3), (2, 2))``."""
    if not text.strip():
        return ()
    cells = []
    for part in text.split(";"):
        i, j = part.split(",")
        cells.append((int(i), int(j)))
    return tuple(cells)


def cmd_analyze(args) -> int:
    fw = load_framework(args.input, args.mode)
    report = analyze(fw, AnalysisConfig(tol=args.tol, seed=args.seed, timing=args.timing))
    _write(serialize_report(report), args.json)
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.name == "grid":
        fw = gen.gen_grid(gen.GridSpec(args.m, args.n, parse_braces(args.braces), args.p))
    elif args.name == "k4-square":
        fw = gen.lp_k4_square(args.p)
    else:
        params = {"p": args.p} if args.name in gen.PARAMETRIC else {}
        fw = gen.gen_fixture(args.name, **params)
    _write(serialize_framework(fw) + "\n", args.out)
    return EXIT_OK


def cmd_render(args) -> int:
    from .render import render_svg
    fw = load_framework(args.input, args.mode)
    _write(render_svg(fw, scale=args.scale, arrows=args.flex_arrows), args.svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normrigid", description="Rigidity of frameworks in normed planes and spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="decide rigidity properties and print a JSON report")
    a.add_argument("input")
    a.add_argument("--json", metavar="PATH", help="write the report here instead of stdout")
    a.add_argument("--tol", type=float, default=DEFAULT_RANK_TOL, help="relative rank tolerance (float mode)")
    a.add_argument("--mode", choices=["auto", "exact", "float"], default="auto")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--timing", action="store_true", help="include wall-clock time (breaks byte-identical reruns)")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("generate", help="print a fixture framework as JSON")
    g.add_argument("name", choices=["grid", "k4-square"] + sorted(gen.FIXTURES))
    g.add_argument("--p", type=float, default=4.0)
    g.add_argument("--m", type=int, default=3)
    g.add_argument("--n", type=int, default=3)
    g.add_argument("--braces", default="", help='brace cells, e.g. "1,3;2,2;3,1"')
    g.add_argument("--out", metavar="PATH")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("render", help="draw a planar framework as SVG")
    r.add_argument("input")
    r.add_argument("--svg", metavar="PATH")
    r.add_argument("--flex-arrows", action="store_true", help="draw a nontrivial flex as arrows")
    r.add_argument("--scale", type=float, default=100.0, help="pixels per unit length")
    r.add_argument("--mode", choices=["auto", "exact", "float"], default="auto")
    r.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except UnsupportedAnalysis as exc:
        print(f"unsupported analysis: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

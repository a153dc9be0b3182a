"""Sweep every brace subset of a small l_p grid and tabulate the verdicts.

For each subset this prints whether the braces touch every row and column
of cells, the flex dimension, and the prestress verdict.
"""
import argparse
import itertools
import time

from normrigid import firstorder as fo
from normrigid import generators as gen
from normrigid import secondorder as so


def sweep(m: int, n: int, p: float):
    cells = [(i, j) for i in range(1, m) for j in range(1, n)]
    for r in range(len(cells) + 1):
        for braces in itertools.combinations(cells, r):
            spec = gen.GridSpec(m, n, braces, p)
            fw = gen.gen_grid(spec)
            inf = fo.is_infinitesimally_rigid(fw)
            pre = so.prestress_decide(fw)
            yield braces, gen.braces_cover(spec), inf.certificate["flex_dim"] - inf.certificate["trivial_dim"], pre.value


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--m", type=int, default=3)
    parser.add_argument("--n", type=int, default=3)
    parser.add_argument("--p", type=float, default=4.0)
    args = parser.parse_args()

    start = time.perf_counter()
    mismatches = 0
    print(f"{'braces':<32} {'covers':<7} {'nontriv':<8} prestress")
    for braces, covers, extra, pre in sweep(args.m, args.n, args.p):
        mismatches += covers != (pre == so.YES)
        label = ";".join(f"{i},{j}" for i, j in braces) or "-"
        print(f"{label:<32} {str(covers):<7} {extra:<8} {pre}")
    print(f"cover law mismatches: {mismatches}  ({time.perf_counter() - start:.2f}s)")

    for name in ("stable_grid_fig5ii", "flexible_grid_fig5i"):
        fw = gen.gen_fixture(name, p=args.p)
        print(f"{name}: infinitesimal={fo.is_infinitesimally_rigid(fw).value} "
              f"prestress={so.prestress_decide(fw).value}")


if __name__ == "__main__":
    main()

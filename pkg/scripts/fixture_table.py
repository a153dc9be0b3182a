"""Analyse every fixture framework and print one verdict line per fixture."""
import argparse
import json

from normrigid import generators as gen
from normrigid.analysis import AnalysisConfig, analyze

COLUMNS = ("infinitesimally_rigid", "strongly_infinitesimally_rigid", "prestress_stable", "second_order_rigid")
SHORT = ("inf", "strong", "prestress", "second")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json", action="store_true", help="print full reports instead of the table")
    args = parser.parse_args()

    print(f"{'fixture':<32}" + "".join(f"{c:<14}" for c in SHORT) + "dims")
    for name in sorted(gen.FIXTURES):
        report = analyze(gen.gen_fixture(name), AnalysisConfig(seed=args.seed))
        if args.json:
            print(json.dumps({name: report.to_dict()}, indent=2))
            continue
        verdicts = report.to_dict()["verdicts"]
        print(f"{name:<32}" + "".join(f"{str(verdicts[c]):<14}" for c in COLUMNS) + str(report.dimensions))


if __name__ == "__main__":
    main()

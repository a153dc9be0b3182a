"""Write every fixture framework to fixtures/<name>.json."""
import argparse
from pathlib import Path

from normrigid import generators as gen
from normrigid.model import serialize_framework


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "fixtures"))
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(gen.FIXTURES):
        path = out / f"{name}.json"
        path.write_text(serialize_framework(gen.gen_fixture(name)) + "\n")
        print(path)


if __name__ == "__main__":
    main()

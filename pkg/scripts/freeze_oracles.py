"""Recompute the independent oracle values and freeze them for the test suite."""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracles import compute_all  # noqa: E402


def main():
    values = compute_all()
    out = ROOT / "tests" / "data" / "oracles.json"
    out.write_text(json.dumps(values, indent=2, sort_keys=True) + "\n")
    for key, val in sorted(values.items()):
        print(f"{key:28s} {val!r}")


if __name__ == "__main__":
    main()

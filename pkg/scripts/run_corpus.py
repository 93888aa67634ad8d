"""Run the built-in corpus (or a corpus file) and write per-entry CSVs plus summary.csv."""

import argparse
import os
import time

from sglgap.config import load_tolerances
from sglgap.corpus import counts, default_corpus, load_corpus, run_corpus, summary_table, write_outputs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="corpus file; the built-in corpus when omitted")
    ap.add_argument("--out", default="corpus_out")
    ap.add_argument("--jobs", type=int, default=min(6, os.cpu_count() or 1))
    args = ap.parse_args()

    entries = load_corpus(args.config) if args.config else default_corpus()
    t0 = time.perf_counter()
    results = run_corpus(entries, load_tolerances(), jobs=args.jobs)
    elapsed = time.perf_counter() - t0
    write_outputs(results, args.out)
    print(summary_table(results))
    print(f"{len(results)} entries in {elapsed:.1f} s, outputs in {args.out}/")
    return 1 if counts(results)["unexpected"] else 0


if __name__ == "__main__":
    raise SystemExit(main())

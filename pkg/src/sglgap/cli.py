"""Command line entry point.

Exit codes: 0 success, 1 the verdict failed (or the numerics could not
reach one), 2 bad input or an ineligible domain.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import meshgen
from .config import load_tolerances
from .corpus import CorpusEntry, report_csv, run_entry
from .gap_bound import evaluate_ball
from .mesh_domain import write_mesh

EXIT_OK, EXIT_VERDICT, EXIT_INPUT = 0, 1, 2


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def cmd_verify_ball(args, tol) -> int:
    if args.n < 2:
        _err("n must be at least 2")
        return EXIT_INPUT
    if not args.R > 0:
        _err("R must be positive")
        return EXIT_INPUT
    try:
        rep = evaluate_ball(args.n, args.k, args.R, margin=tol.verdict_margin)
    except (ValueError, AssertionError) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_INPUT
    except RuntimeError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_VERDICT
    sharp = abs(rep.relative_slack) < tol.ball_sharpness
    print(f"lambda1  {rep.lambda1:.12g}")
    print(f"lambda2  {rep.lambda2:.12g}")
    print(f"gap      {rep.gap:.12g}")
    print(f"bound    {rep.bound_rhs:.12g}")
    print(f"slack    {rep.relative_slack:.3e}")
    print(f"sharp    {'yes' if sharp else 'no'} (tolerance {tol.ball_sharpness:g})")
    return EXIT_OK if sharp else EXIT_VERDICT


def cmd_verify_domain(args, tol) -> int:
    path = Path(args.mesh)
    if not path.is_file():
        _err(f"no such mesh file: {path}")
        return EXIT_INPUT
    try:
        entry = CorpusEntry(id=path.stem.replace(" ", "_") or "mesh", source=str(path),
                            alpha=args.alpha, K_lower=args.K)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INPUT
    res = run_entry(entry, tol)
    if res.report is None:
        _err(res.message)
        return EXIT_INPUT if res.status in ("ineligible", "curvature-witness") else EXIT_VERDICT
    text = report_csv([res.report])
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
    if res.status == "error":
        _err(res.message)
        return EXIT_VERDICT
    return EXIT_OK if res.report.holds else EXIT_VERDICT


def cmd_corpus(args, tol) -> int:
    try:
        entries = corpus_mod.load_corpus(args.config) if args.config else corpus_mod.default_corpus()
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    try:
        results = corpus_mod.run_corpus(entries, tol, jobs=args.jobs)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INPUT
    if args.out:
        corpus_mod.write_outputs(results, args.out)
    print(corpus_mod.summary_table(results))
    return EXIT_VERDICT if any(r.unexpected for r in results) else EXIT_OK


def _kv(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    key, value = text.split("=", 1)
    return key, corpus_mod._number(value)


def cmd_make_mesh(args, tol) -> int:
    try:
        mesh = meshgen.GENERATORS[args.generator](**dict(args.param))
    except (TypeError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    write_mesh(mesh, args.out)
    print(f"{args.out}: {len(mesh.vertices)} vertices, {len(mesh.triangles)} triangles")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sglgap", description="Numerical checks of a fundamental-gap upper bound.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("verify-ball", help="radial pipeline on a geodesic ball (the bound is attained)")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=float, required=True)
    b.add_argument("--R", type=float, required=True)
    b.set_defaults(func=cmd_verify_ball)

    d = sub.add_parser("verify-domain", help="full pipeline on an SGLMESH file")
    d.add_argument("--mesh", required=True)
    d.add_argument("--alpha", type=float, default=1.0)
    d.add_argument("--K", type=float, required=True, help="lower curvature bound")
    d.add_argument("--out")
    d.set_defaults(func=cmd_verify_domain)

    c = sub.add_parser("corpus", help="run a corpus file (default: the built-in corpus)")
    c.add_argument("--config")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--out", help="directory for per-entry CSVs and summary.csv")
    c.set_defaults(func=cmd_corpus)

    m = sub.add_parser("make-mesh", help="write a built-in mesh as SGLMESH")
    m.add_argument("generator", choices=sorted(meshgen.GENERATORS))
    m.add_argument("--out", required=True)
    m.add_argument("-p", "--param", action="append", type=_kv, default=[], metavar="NAME=VALUE",
                   help="generator keyword argument (repeatable)")
    m.set_defaults(func=cmd_make_mesh)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        tol = load_tolerances()
    except (OSError, ValueError) as exc:
        _err(f"tolerance file: {exc}")
        return EXIT_INPUT
    return args.func(args, tol)


if __name__ == "__main__":
    sys.exit(main())

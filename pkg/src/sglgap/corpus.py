"""Corpus entries, their evaluation, and deterministic report files.

A corpus file is flat ``key = value`` text.  Keys are ``<id>.<field>``, split at the last dot;
the fields ``source``, ``alpha``, ``K``, ``k`` and ``expected`` are reserved
and every other field is passed to the generator as a keyword argument::

    square.source = square
    rect.source = rectangle
    rect.a = 1
    rect.b = 2
    mesh7.source = meshes/seven.sglmesh
    mesh7.K = -1
"""

from __future__ import annotations

import csv
import inspect
import io
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import meshgen
from .config import Tolerances, parse_key_values
from .gap_bound import GapBoundReport, evaluate_mesh, evaluate_warped
from .mesh_domain import read_mesh
from .radial_eig import CurvatureWitnessError, WarpedSurface
from .spaceform import CurvaturePair

STATUSES = ("holds", "violated", "ineligible", "curvature-witness", "error")
RESERVED = ("source", "alpha", "K", "k", "expected")
SOURCES = tuple(meshgen.GENERATORS) + ("warped-disk",)
SUMMARY_COLUMNS = ["id", "status", "expected", "unexpected", "message"]
_ID = re.compile(r"^[A-Za-z0-9_.\-]+$")


class CorpusConfigError(ValueError):
    pass


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    source: str
    alpha: float = 1.0
    K_lower: float | None = None  # None: the ambient curvature of the domain
    k_upper: float | None = None
    expected: str = "holds"
    params: tuple[tuple[str, object], ...] = ()

    def __post_init__(self):
        if not _ID.match(self.id):
            raise CorpusConfigError(f"entry id {self.id!r} may only use letters, digits, '.', '-' and '_'")
        if self.expected not in STATUSES:
            raise CorpusConfigError(f"{self.id}: expected must be one of {', '.join(STATUSES)}")
        if not 0 < self.alpha <= 1:
            raise CorpusConfigError(f"{self.id}: alpha must lie in (0, 1]")

    @property
    def kwargs(self) -> dict:
        return dict(self.params)

    @property
    def is_file(self) -> bool:
        return self.source not in SOURCES


def parse_corpus(text: str, source: str = "<corpus>", base: Path | None = None) -> list[CorpusEntry]:
    raw: dict[str, dict[str, str]] = {}
    for key, value in parse_key_values(text, source).items():
        if "." not in key:
            raise CorpusConfigError(f"{source}: key {key!r} is not of the form <id>.<field>")
        eid, fld = key.rsplit(".", 1)
        raw.setdefault(eid, {})[fld] = value
    entries = []
    for eid, kv in raw.items():
        if "source" not in kv:
            raise CorpusConfigError(f"{source}: entry {eid!r} has no source")
        src = kv["source"]
        if src not in SOURCES and base is not None and not Path(src).is_absolute():
            src = str(base / src)
        try:
            entry = CorpusEntry(
                id=eid,
                source=src,
                alpha=float(kv.get("alpha", 1.0)),
                K_lower=float(kv["K"]) if "K" in kv else None,
                k_upper=float(kv["k"]) if "k" in kv else None,
                expected=kv.get("expected", "holds"),
                params=tuple(sorted((f, _number(v)) for f, v in kv.items() if f not in RESERVED)),
            )
        except ValueError as exc:
            raise CorpusConfigError(f"{source}: {exc}") from None
        entries.append(entry)
    return sorted(entries, key=lambda e: e.id)


def load_corpus(path) -> list[CorpusEntry]:
    path = Path(path)
    return parse_corpus(path.read_text(), str(path), base=path.parent)


DEFAULT_CORPUS = """\
square.source = square
rect-1x2.source = rectangle
rect-1x2.a = 1
rect-1x2.b = 2
ellipse-1.5.source = ellipse
ellipse-1.5.a = 1.5
ellipse-1.5.b = 1
hpentagon.source = hyperbolic-polygon
hpentagon.sides = 5
hpentagon.circumradius = 1
cap-0.6.source = spherical-cap
cap-0.6.R = 0.6
cap-0.6.k = 1
warped.source = warped-disk
warped.K = -0.6
warped.k = 0
"""


def default_corpus() -> list[CorpusEntry]:
    return parse_corpus(DEFAULT_CORPUS, "<default corpus>")


@dataclass
class EntryResult:
    entry: CorpusEntry
    status: str
    report: GapBoundReport | None = None
    message: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def unexpected(self) -> bool:
        return self.status != self.entry.expected


def build_mesh(entry: CorpusEntry, target_vertices: int | None = None):
    if entry.is_file:
        return read_mesh(entry.source, name=entry.id)
    gen = meshgen.GENERATORS[entry.source]
    kw = entry.kwargs
    if target_vertices is not None and "target_vertices" in inspect.signature(gen).parameters:
        kw.setdefault("target_vertices", target_vertices)
    return gen(**kw)


def build_warped(entry: CorpusEntry):
    kw = entry.kwargs
    coeffs = [float(c) for c in str(kw.pop("coeffs", "0,1,0,0.1")).split(",")]
    R = float(kw.pop("R", 1.0))
    R_max = float(kw.pop("R_max", 2 * R))
    N = int(kw.pop("N", 1000))
    if kw:
        raise CorpusConfigError(f"{entry.id}: unknown warped-disk parameters {sorted(kw)}")
    k = 0.0 if entry.k_upper is None else entry.k_upper
    K = k if entry.K_lower is None else entry.K_lower
    # raises CurvatureWitnessError when the declared bounds fail on [0, R_max]
    return WarpedSurface.polynomial(coeffs, R_max, k, K), R, N


def run_entry(entry: CorpusEntry, tol: Tolerances | None = None) -> EntryResult:
    """Evaluate one entry; every failure becomes a status rather than an exception."""
    tol = tol or Tolerances()
    try:
        if entry.source == "warped-disk":
            ws, R, N = build_warped(entry)
            res = evaluate_warped(ws, R, entry.alpha, tol=tol, N=N)
        else:
            mesh = build_mesh(entry, tol.fem_target_vertices)
            k = mesh.k if entry.k_upper is None else entry.k_upper
            K = k if entry.K_lower is None else entry.K_lower
            if K > mesh.k:
                raise CurvatureWitnessError(
                    f"K={K:g} exceeds the curvature {mesh.k:g} of the domain's ambient space"
                )
            res = evaluate_mesh(mesh, entry.alpha, CurvaturePair(k, K), tol=tol)
            worst = max(res.extras["problem"].eig.residuals)
            if worst > tol.eigen_residual:
                return EntryResult(entry, "error", res.report,
                                   f"eigen residual {worst:.3g} above {tol.eigen_residual:g}")
    except CurvatureWitnessError as exc:
        return EntryResult(entry, "curvature-witness", None, str(exc))
    except (ValueError, AssertionError, TypeError) as exc:
        # TypeError: a generator rejected one of the entry's keyword arguments
        return EntryResult(entry, "ineligible", None, f"{type(exc).__name__}: {exc}")
    except (RuntimeError, ArithmeticError) as exc:
        return EntryResult(entry, "error", None, f"{type(exc).__name__}: {exc}")
    extras = {"balance_residual": res.balance.residual, "chiti": res.chiti.sign_pattern,
              "fk_slack": res.faber_krahn.slack, "middle_holds": res.middle.holds}
    return EntryResult(entry, res.report.verdict, res.report, "", extras)


def run_corpus(entries, tol: Tolerances | None = None, jobs: int = 1) -> list[EntryResult]:
    entries = sorted(entries, key=lambda e: e.id)
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise CorpusConfigError("duplicate entry ids")
    tol = tol or Tolerances()
    if jobs <= 1 or len(entries) <= 1:
        return [run_entry(e, tol) for e in entries]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_entry, entries, [tol] * len(entries)))


def report_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GapBoundReport.columns())
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def summary_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in results:
        w.writerow([r.entry.id, r.status, r.entry.expected, str(r.unexpected).lower(), r.message])
    return buf.getvalue()


def counts(results) -> dict[str, int]:
    out = {s: 0 for s in STATUSES}
    for r in results:
        out[r.status] += 1
    out["unexpected"] = sum(r.unexpected for r in results)
    return out


def write_outputs(results, out_dir) -> list[Path]:
    """One CSV per evaluated entry (report columns only) plus summary.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for r in results:
        if r.report is not None:
            p = out / f"{r.entry.id}.csv"
            p.write_text(report_csv([r.report]))
            written.append(p)
    p = out / "summary.csv"
    p.write_text(summary_csv(results))
    written.append(p)
    return written


def summary_table(results) -> str:
    lines = [f"{'id':<16} {'status':<18} {'gap':>12} {'bound':>12} {'slack':>10}"]
    for r in results:
        if r.report is None:
            lines.append(f"{r.entry.id:<16} {r.status:<18} {r.message}")
            continue
        rep = r.report
        flag = "  UNEXPECTED" if r.unexpected else ""
        lines.append(f"{r.entry.id:<16} {r.status:<18} {rep.gap:>12.6f} {rep.bound_rhs:>12.6f} "
                     f"{rep.relative_slack:>10.4%}{flag}")
    c = counts(results)
    lines.append(" ".join(f"{k}={v}" for k, v in c.items()))
    return "\n".join(lines)


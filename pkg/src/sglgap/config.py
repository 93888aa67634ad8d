"""Numerical tolerances shared by every stage of the pipeline.

Tolerances live in one flat ``key = value`` file so that experiments can be
rerun with different margins without touching code.  The environment variable
``SGL_TOL_OVERRIDE`` names such a file; unknown keys are rejected.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

ENV_VAR = "SGL_TOL_OVERRIDE"


@dataclass(frozen=True)
class Tolerances:
    eigen_residual: float = 1e-8
    verdict_margin: float = 0.01
    sharpness_margin: float = 0.02
    ball_sharpness: float = 1e-6
    balance_tol: float = 1e-6
    balance_max_iter: int = 500
    chiti_band: float = 1e-3
    monotone_rel: float = 1e-7
    profile_points: int = 2001
    fem_target_vertices: int = 10000

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "Tolerances":
        values = parse_key_values(Path(path).read_text(), source=str(path))
        return cls().updated(values)

    def updated(self, values: dict[str, str]) -> "Tolerances":
        known = {f.name: f.type for f in fields(self)}
        changes = {}
        for key, raw in values.items():
            if key not in known:
                raise ValueError(f"unknown tolerance key {key!r}")
            kind = int if known[key] in (int, "int") else float
            changes[key] = kind(raw)
        return replace(self, **changes)


def parse_key_values(text: str, source: str = "<string>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def load_tolerances() -> Tolerances:
    path = os.environ.get(ENV_VAR)
    if path:
        return Tolerances.from_file(path)
    return Tolerances()

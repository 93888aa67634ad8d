"""Distribution functions and radial rearrangements onto spaceform balls.

A discretized nonnegative function is a list of (value, measure) cells plus
the measure of the whole domain.  Its rearrangements are step functions of
the distance to the ball centre, stored shell by shell in the volume
coordinate v = m_k(r), so integrals against them are exact sums over shells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .radial_eig import RadialProfile
from .spaceform import Spaceform, SpaceformDomainError

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


class MisalignedCellsError(ValueError):
    pass


class NonMonotoneProfileError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedSamples:
    values: np.ndarray
    weights: np.ndarray
    total_measure: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if v.shape != w.shape:
            raise ValueError("values and weights must have the same length")
        if np.any(~np.isfinite(v)) or np.any(v < 0):
            raise ValueError("sample values must be finite and nonnegative")
        if np.any(~(w > 0)):
            raise ValueError("cell weights must be positive")
        total = float(self.total_measure)
        if not total > 0:
            raise ValueError("total measure must be positive")
        if w.sum() > total + 1e-12 * max(1.0, total):
            raise ValueError(
                f"cell weights sum to {w.sum()} > total measure {total}"
            )
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "total_measure", total)

    @classmethod
    def from_pairs(cls, pairs, total_measure: float) -> "WeightedSamples":
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1], total_measure)

    @property
    def pairs(self) -> np.ndarray:
        return np.column_stack([self.values, self.weights])

    def lp_norm(self, p: float) -> float:
        return float(np.sum(self.weights * self.values**p) ** (1.0 / p))

    def power(self, beta: float) -> "WeightedSamples":
        return WeightedSamples(self.values**beta, self.weights, self.total_measure)

    def scaled(self, c: float) -> "WeightedSamples":
        return WeightedSamples(self.values * c, self.weights, self.total_measure)

    def with_total(self, total_measure: float) -> "WeightedSamples":
        return WeightedSamples(self.values, self.weights, total_measure)


def _levels(values, weights):
    """Distinct positive values (ascending) and the measure carried by each."""
    pos = values > 0
    v, w = values[pos], weights[pos]
    order = np.argsort(v, kind="stable")
    v, w = v[order], w[order]
    if v.size == 0:
        return v, w
    starts = np.flatnonzero(np.r_[True, v[1:] != v[:-1]])
    return v[starts], np.add.reduceat(w, starts)


@dataclass(frozen=True)
class DistributionFunction:
    """mu(t) = |f > t| as a right-continuous step function.

    ``measures[i]`` is mu at ``thresholds[i]``; ``positive_measure`` is
    |f > 0|, the value of mu just below the smallest threshold.
    """

    thresholds: np.ndarray
    measures: np.ndarray
    total_measure: float
    positive_measure: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.thresholds, t, side="right")
        table = np.r_[self.positive_measure, self.measures]
        return np.where(t < 0, self.total_measure, table[idx])


def distribution(ws: WeightedSamples) -> DistributionFunction:
    u, w = _levels(ws.values, ws.weights)
    above = np.cumsum(w[::-1])[::-1] - w
    return DistributionFunction(u, above, ws.total_measure, float(w.sum()))


@dataclass(frozen=True)
class ShellProfile:
    """Radial step function: ``levels[j]`` on the shell of volumes
    (volumes[j], volumes[j+1]) around the centre of N(k); zero outside."""

    sf: Spaceform
    measures: np.ndarray
    levels: np.ndarray
    increasing: bool = False

    @property
    def volumes(self) -> np.ndarray:
        return np.r_[0.0, np.cumsum(self.measures)]

    @property
    def radii(self) -> np.ndarray:
        return np.asarray(self.sf.radius(self.volumes))

    @property
    def support_radius(self) -> float:
        return float(self.radii[-1]) if self.measures.size else 0.0

    def __call__(self, r):
        v = np.asarray(self.sf.volume(np.asarray(r, dtype=float)))
        vols = self.volumes
        idx = np.searchsorted(vols, v, side="right") - 1
        inside = (idx >= 0) & (idx < self.levels.size)
        out = np.zeros(np.shape(v))
        out[inside] = self.levels[idx[inside]]
        return out

    def shell_volumes(self) -> np.ndarray:
        """Shell volumes recomputed as m_k differences of the shell radii."""
        return np.diff(np.asarray(self.sf.volume(self.radii)))

    def lp_norm(self, p: float, geometric: bool = True) -> float:
        dv = self.shell_volumes() if geometric else self.measures
        return float(np.sum(dv * self.levels**p) ** (1.0 / p))

    def integrate(self, fn, power: float = 1.0) -> float:
        """int (profile)^power * fn(r) over N(k), fn radial and smooth per shell."""
        return float(np.sum(self.levels**power * shell_integrals(fn, self.sf, self.radii)))

    def to_samples(self) -> WeightedSamples:
        keep = self.levels > 0
        return WeightedSamples(self.levels[keep], self.measures[keep], max(self.volumes[-1], 1e-300))

    def to_radial_profile(self, points: int = 2001, r_max: float | None = None) -> RadialProfile:
        r_max = self.support_radius if r_max is None else r_max
        grid = np.linspace(0.0, r_max, points)
        return RadialProfile(grid, self(grid))

    def scaled(self, c: float) -> "ShellProfile":
        return ShellProfile(self.sf, self.measures, self.levels * c, self.increasing)


def shell_integrals(fn, sf: Spaceform, radii) -> np.ndarray:
    """int_{r_j}^{r_{j+1}} fn(r) m_k'(r) dr for consecutive radii (8-point Gauss)."""
    radii = np.asarray(radii, dtype=float)
    a, b = radii[:-1], radii[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = np.asarray(fn(nodes.ravel())).reshape(nodes.shape)
    area = np.asarray(sf.area(nodes.ravel())).reshape(nodes.shape)
    return half * ((vals * area) @ _GL_W)


def _check_capacity(ws: WeightedSamples, sf: Spaceform):
    if sf.k > 0 and ws.total_measure > 0.5 * sf.total_volume * (1 + 1e-12):
        raise SpaceformDomainError(
            f"measure {ws.total_measure} exceeds half the volume of N({sf.k})"
        )


def decreasing_sym(ws: WeightedSamples, sf: Spaceform) -> ShellProfile:
    """S^{D,N} f: nonincreasing in r, equimeasurable with f."""
    _check_capacity(ws, sf)
    u, w = _levels(ws.values, ws.weights)
    return ShellProfile(sf, w[::-1].copy(), u[::-1].copy(), increasing=False)


def increasing_sym(ws: WeightedSamples, sf: Spaceform) -> ShellProfile:
    """S_{D,N} f: nondecreasing in r on the ball of volume |D|.

    The zero set of f inside D becomes an inner ball, which is why the total
    measure of D matters here and not for the decreasing version.
    """
    _check_capacity(ws, sf)
    u, w = _levels(ws.values, ws.weights)
    gap = ws.total_measure - float(w.sum())
    if gap > 1e-15 * ws.total_measure:
        return ShellProfile(sf, np.r_[gap, w], np.r_[0.0, u], increasing=True)
    return ShellProfile(sf, w.copy(), u.copy(), increasing=True)


def _merged_product(a: ShellProfile, b: ShellProfile, geometric: bool = True) -> float:
    va, vb = a.volumes, b.volumes
    cuts = np.union1d(va, vb)
    mids = 0.5 * (cuts[1:] + cuts[:-1])

    def level_at(p, vols):
        idx = np.searchsorted(vols, mids, side="right") - 1
        out = np.zeros(mids.size)
        ok = (idx >= 0) & (idx < p.levels.size)
        out[ok] = p.levels[idx[ok]]
        return out

    if geometric:
        dv = np.diff(np.asarray(a.sf.volume(np.asarray(a.sf.radius(cuts)))))
    else:
        dv = np.diff(cuts)
    return float(np.sum(dv * level_at(a, va) * level_at(b, vb)))


@dataclass(frozen=True)
class NormReport:
    p: float
    input_norm: float
    decreasing_norm: float
    increasing_norm: float
    rel_error: float
    ok: bool


def check_norms(ws: WeightedSamples, sf: Spaceform, p_exponents, tol: float = 1e-10):
    """L^p norms of f and both rearrangements, shell volumes from m_k."""
    dec, inc = decreasing_sym(ws, sf), increasing_sym(ws, sf)
    out = []
    for p in p_exponents:
        base = ws.lp_norm(p)
        a, b = dec.lp_norm(p), inc.lp_norm(p)
        err = max(abs(a - base), abs(b - base)) / max(base, 1e-300)
        out.append(NormReport(float(p), base, a, b, err, err <= tol))
    return out


@dataclass(frozen=True)
class HardyLittlewoodReport:
    lower: float
    middle: float
    upper: float
    holds: bool


def check_hardy_littlewood(f: WeightedSamples, g: WeightedSamples, sf: Spaceform,
                           tol: float = 1e-10) -> HardyLittlewoodReport:
    """int S^f S_g <= int f g <= int S^f S^g on a shared cell decomposition."""
    if f.weights.shape != g.weights.shape or not np.array_equal(f.weights, g.weights):
        raise MisalignedCellsError("f and g must be sampled on the same cells")
    if f.total_measure != g.total_measure:
        raise MisalignedCellsError("f and g must share the domain measure")
    middle = float(np.sum(f.weights * f.values * g.values))
    df = decreasing_sym(f, sf)
    upper = _merged_product(df, decreasing_sym(g, sf))
    lower = _merged_product(df, increasing_sym(g, sf))
    scale = max(abs(upper), 1e-300)
    holds = lower <= middle + tol * scale and middle <= upper + tol * scale
    return HardyLittlewoodReport(lower, middle, upper, holds)


@dataclass(frozen=True)
class PowerReport:
    beta: float
    decreasing_error: float
    increasing_error: float
    ok: bool


def check_powers(ws: WeightedSamples, sf: Spaceform, beta: float,
                 tol: float = 1e-12) -> PowerReport:
    """S(f^beta) = (S f)^beta for both rearrangements, compared shell by shell."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    errs = []
    for sym in (decreasing_sym, increasing_sym):
        a = sym(ws.power(beta), sf)
        b = sym(ws, sf)
        cuts = np.union1d(a.volumes, b.volumes)
        probe = np.asarray(sf.radius(0.5 * (cuts[1:] + cuts[:-1])))
        lhs, rhs = a(probe), b(probe) ** beta
        errs.append(float(np.max(np.abs(lhs - rhs), initial=0.0)
                          / max(np.max(np.abs(rhs), initial=0.0), 1e-300)))
    return PowerReport(float(beta), errs[0], errs[1], max(errs) <= tol)


def _monotone_direction(values) -> str:
    d = np.diff(values)
    if np.all(d <= 0):
        return "decreasing"
    if np.all(d >= 0):
        return "increasing"
    raise NonMonotoneProfileError("profile is not monotone")


def monotone_inverse(fn, y, lo: float, hi: float, iters: int = 200):
    """Vectorized bisection for fn(x) = y with fn increasing on [lo, hi]."""
    y = np.asarray(y, dtype=float)
    a = np.full(y.shape, float(lo))
    b = np.full(y.shape, float(hi))
    for _ in range(iters):
        m = 0.5 * (a + b)
        below = np.asarray(fn(m)) < y
        a = np.where(below, m, a)
        b = np.where(below, b, m)
        if np.all(b - a <= 4e-16 * np.maximum(np.abs(b), 1e-300)):
            break
    return 0.5 * (a + b)


def radial_transfer(profile: RadialProfile, m_D, sf: Spaceform, rho_max: float | None = None,
                    points: int = 2001) -> RadialProfile:
    """f o (m_D^{-1} o m_N): rearrange a monotone radial function of r_p onto N(k).

    ``m_D(rho)`` is the measure of B_rho(p) inside the source domain; it must be
    continuous and strictly increasing on [0, rho_max].
    """
    _monotone_direction(profile.values)
    rho_max = float(profile.grid[-1]) if rho_max is None else float(rho_max)
    total = float(m_D(rho_max))
    r_top = float(sf.radius(total))
    grid = np.linspace(0.0, r_top, points)
    target = np.asarray(sf.volume(grid))
    rho = monotone_inverse(m_D, np.minimum(target, total), 0.0, rho_max)
    rho[0] = 0.0
    return RadialProfile(grid, profile(rho))

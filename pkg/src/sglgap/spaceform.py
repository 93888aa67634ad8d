"""Model geometry of the constant-curvature spaceform N^n(k).

Everything here is a closed form (or a 1-D quadrature of one) in the
generalized sine ``sn_k``.  Functions accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# below this value of |k| r^2 the three-branch formulas lose digits to
# cancellation, so truncated Taylor series are used instead
SERIES_CUTOFF = 1e-8

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


class SpaceformDomainError(ValueError):
    """An argument lies outside the range where a model function is defined."""


@dataclass(frozen=True)
class Spaceform:
    n: int
    k: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", float(self.k))

    @property
    def r_max(self) -> float:
        """Largest admissible radius (the antipodal distance for k > 0)."""
        return math.pi / math.sqrt(self.k) if self.k > 0 else math.inf

    @property
    def hemisphere_radius(self) -> float:
        return math.pi / (2 * math.sqrt(self.k)) if self.k > 0 else math.inf

    def sn(self, r):
        return sn(self.k, r)

    def cn(self, r):
        return cn(self.k, r)

    def volume(self, r):
        return ball_volume(self, r)

    def area(self, r):
        return sphere_area(self, r)

    def radius(self, volume):
        return ball_radius(self, volume)

    def profile(self, s):
        return iso_profile(self, s)

    @property
    def total_volume(self) -> float:
        return total_volume(self)


@dataclass(frozen=True)
class CurvaturePair:
    """Upper sectional bound ``k_upper`` and lower Ricci bound ``K_lower`` (per n-1)."""

    k_upper: float
    K_lower: float

    def __post_init__(self):
        if self.K_lower > self.k_upper:
            raise ValueError(
                f"K_lower={self.K_lower} exceeds k_upper={self.k_upper}"
            )


def sn(k: float, r):
    """Generalized sine: sin(sqrt(k) r)/sqrt(k), r, or sinh(sqrt(-k) r)/sqrt(-k)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise SpaceformDomainError("sn_k is only evaluated for r >= 0")
    k = float(k)
    if k == 0.0:
        return _maybe_scalar(r.copy())
    x = np.abs(k) * r * r
    series = x < SERIES_CUTOFF
    out = np.empty_like(r)
    rs, xs = r[series], np.sign(k) * x[series]
    # powers of x = k r^2 rather than of r, so huge r with tiny k cannot overflow
    out[series] = rs * (1.0 - xs / 6.0 + xs * xs / 120.0)
    rb = r[~series]
    if k > 0:
        q = math.sqrt(k)
        out[~series] = np.sin(q * rb) / q
    else:
        q = math.sqrt(-k)
        out[~series] = np.sinh(q * rb) / q
    return _maybe_scalar(out)


def cn(k: float, r):
    """Derivative of ``sn``; satisfies cn^2 + k sn^2 = 1."""
    r = np.asarray(r, dtype=float)
    k = float(k)
    if k == 0.0:
        return _maybe_scalar(np.ones_like(r))
    x = np.abs(k) * r * r
    series = x < SERIES_CUTOFF
    out = np.empty_like(r)
    xs = np.sign(k) * x[series]
    out[series] = 1.0 - xs / 2.0 + xs * xs / 24.0
    rb = r[~series]
    if k > 0:
        out[~series] = np.cos(math.sqrt(k) * rb)
    else:
        out[~series] = np.cosh(math.sqrt(-k) * rb)
    return _maybe_scalar(out)


def sn_inverse(k: float, y):
    """Inverse of ``sn`` on its increasing branch [0, pi/(2 sqrt k)]."""
    y = np.asarray(y, dtype=float)
    k = float(k)
    if k == 0.0:
        return _maybe_scalar(y.copy())
    if k > 0:
        q = math.sqrt(k)
        if np.any(q * y > 1 + 1e-15):
            raise SpaceformDomainError("sn_k^{-1} argument exceeds 1/sqrt(k)")
        return _maybe_scalar(np.arcsin(np.minimum(q * y, 1.0)) / q)
    q = math.sqrt(-k)
    return _maybe_scalar(np.arcsinh(q * y) / q)


@lru_cache(maxsize=None)
def unit_ball_volume(n: int) -> float:
    """omega_n via omega_n = (2 pi / n) omega_{n-2}, omega_0 = 1, omega_1 = 2."""
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    if n == 0:
        return 1.0
    if n == 1:
        return 2.0
    return 2.0 * math.pi / n * unit_ball_volume(n - 2)


def _check_radius(sf: Spaceform, r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise SpaceformDomainError("radius must be nonnegative")
    if sf.k > 0 and np.any(r > sf.r_max * (1 + 1e-12)):
        raise SpaceformDomainError(
            f"radius exceeds pi/sqrt(k) = {sf.r_max} for k = {sf.k}"
        )
    if sf.k > 0:
        r = np.minimum(r, sf.r_max)
    return r


def ball_volume(sf: Spaceform, r):
    """m_k(r) = n omega_n int_0^r sn_k^{n-1}."""
    r = _check_radius(sf, r)
    n, k = sf.n, sf.k
    c = n * unit_ball_volume(n)
    if k == 0.0:
        return _maybe_scalar(unit_ball_volume(n) * r**n)
    if n == 2:
        out = np.empty_like(r)
        x = k * r * r
        series = np.abs(x) < SERIES_CUTOFF
        rs, xs = r[series], x[series]
        out[series] = c * rs * rs * (0.5 - xs / 24 + xs * xs / 720)
        out[~series] = c * (1.0 - cn(k, r[~series])) / k
        return _maybe_scalar(out)
    flat = np.atleast_1d(r)
    half = 0.5 * flat[:, None]
    nodes = half * (_GL_NODES[None, :] + 1.0)
    vals = np.asarray(sn(k, nodes)) ** (n - 1)
    out = c * half[:, 0] * (vals @ _GL_WEIGHTS)
    return _maybe_scalar(out.reshape(r.shape))


def sphere_area(sf: Spaceform, r):
    """m_k'(r) = n omega_n sn_k(r)^{n-1}, the area of the geodesic sphere."""
    r = _check_radius(sf, r)
    return _maybe_scalar(
        sf.n * unit_ball_volume(sf.n) * np.asarray(sn(sf.k, r)) ** (sf.n - 1)
    )


def volume_derivatives(sf: Spaceform, r):
    """(m', m'', m''') at r; used by the profile concavity identity."""
    r = _check_radius(sf, r)
    n, k = sf.n, sf.k
    c = n * unit_ball_volume(n)
    s = np.asarray(sn(k, r))
    t = np.asarray(cn(k, r))
    d1 = c * s ** (n - 1)
    d2 = c * (n - 1) * s ** (n - 2) * t
    d3 = c * (n - 1) * ((n - 2) * s ** max(n - 3, 0) * t * t - k * s ** (n - 1))
    return d1, d2, d3


def total_volume(sf: Spaceform) -> float:
    if sf.k > 0:
        return float(ball_volume(sf, sf.r_max))
    return math.inf


def ball_radius(sf: Spaceform, volume, rtol: float = 1e-12):
    """m_k^{-1}: bisection-safeguarded Newton iteration, vectorized."""
    v = np.asarray(volume, dtype=float)
    if np.any(v < 0) or np.any(np.isnan(v)):
        raise SpaceformDomainError("volume must be nonnegative")
    tot = total_volume(sf)
    if np.any(v > tot * (1 + 1e-12)):
        raise SpaceformDomainError(f"volume exceeds |N(k)| = {tot}")
    n, k = sf.n, sf.k
    flat_r = (v / unit_ball_volume(n)) ** (1.0 / n)
    if k == 0.0:
        return _maybe_scalar(flat_r)
    v = np.minimum(v, tot)
    lo = np.zeros_like(v)
    if k > 0:
        hi = np.full_like(v, sf.r_max)
        x = np.minimum(flat_r, sf.r_max)
    else:
        # hyperbolic balls are larger than flat ones of equal radius
        hi = flat_r * (1 + 1e-9) + 1e-300
        x = flat_r.copy()
    x = np.atleast_1d(x).astype(float)
    lo, hi, vv = np.atleast_1d(lo), np.atleast_1d(hi), np.atleast_1d(v)
    done = vv == 0
    x[done] = 0.0
    for _ in range(200):
        f = np.asarray(ball_volume(sf, x)) - vv
        lo = np.where(f <= 0, np.maximum(lo, x), lo)
        hi = np.where(f >= 0, np.minimum(hi, x), hi)
        d = np.asarray(sphere_area(sf, x))
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(d > 0, f / d, np.nan)
        # a Newton step below the tolerance means x is already the root; testing it
        # before the bracket safeguard keeps a rounded-away step from bisecting
        tiny = np.isfinite(step) & (np.abs(step) <= rtol * 1e-2 * np.maximum(np.abs(x), 1e-300))
        xn = x - step
        bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
        xn = np.where(tiny, x, np.where(bad, 0.5 * (lo + hi), xn))
        conv = tiny | (np.abs(xn - x) <= rtol * 1e-2 * np.maximum(np.abs(xn), 1e-300))
        conv |= (hi - lo) <= rtol * 1e-2 * np.maximum(hi, 1e-300)
        x = np.where(done, x, xn)
        done |= conv
        if np.all(done):
            break
    return _maybe_scalar(x.reshape(np.shape(volume)))


def iso_profile(sf: Spaceform, s):
    """A_{n,k}(s) = m_k'(m_k^{-1}(s)): boundary area of the ball of volume s."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise SpaceformDomainError("volume must be nonnegative")
    if np.any(s > total_volume(sf) * (1 + 1e-12)):
        raise SpaceformDomainError("volume exceeds the total volume of N(k)")
    return sphere_area(sf, ball_radius(sf, s))


def sphere_area_ratio(n: int, pair: CurvaturePair, d: float) -> float:
    """|dB_d|_{N(K)} / |dB_d|_{N(k)} = (sn_K(d)/sn_k(d))^{n-1}."""
    if d <= 0:
        raise SpaceformDomainError("diameter must be positive")
    if pair.K_lower == pair.k_upper:
        return 1.0
    if pair.k_upper > 0 and d >= math.pi / math.sqrt(pair.k_upper):
        raise SpaceformDomainError("diameter reaches the conjugate radius of N(k)")
    num = float(sn(pair.K_lower, d))
    den = float(sn(pair.k_upper, d))
    if den <= 0:
        raise SpaceformDomainError("sn_k(d) vanishes")
    return (num / den) ** (n - 1)


def curvature_constant(n: int, pair: CurvaturePair, d: float) -> float:
    """(sn_K(d)/sn_k(d))^{2n-2}; equal to 1 when the curvature bounds agree."""
    return sphere_area_ratio(n, pair, d) ** 2


def _maybe_scalar(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a

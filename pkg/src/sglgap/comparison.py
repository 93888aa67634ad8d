"""Faber-Krahn and Chiti type comparisons between a domain and model balls."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .radial_eig import BallSpectrum, _radial_integral, ball_spectrum, radial_eigenvalue, radius_for_lambda1
from .spaceform import Spaceform, SpaceformDomainError
from .symmetrize import NonMonotoneProfileError, ShellProfile


class NormalizationError(ValueError):
    pass


class ContainmentError(AssertionError):
    pass


def _check_alpha(alpha):
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")


@dataclass(frozen=True)
class FaberKrahn:
    holds: bool
    slack: float
    ball_lambda1: float
    ball_radius: float


def faber_krahn_check(lambda1_omega: float, omega_volume: float, sf: Spaceform, alpha: float = 1.0,
                      tol: float = 1e-9) -> FaberKrahn:
    """lambda_1(Omega) >= alpha^2 lambda_1 of the ball with |Omega|'s volume."""
    _check_alpha(alpha)
    if sf.k > 0 and omega_volume > sf.total_volume / 2 * (1 + 1e-12):
        raise SpaceformDomainError("volume exceeds the hemisphere")
    R = float(sf.radius(omega_volume))
    lam_ball = radial_eigenvalue(sf, R, 0)
    slack = lambda1_omega - alpha**2 * lam_ball
    return FaberKrahn(bool(slack >= -tol * lam_ball), float(slack), float(lam_ball), R)


def comparison_ball(lambda1_omega: float, alpha: float, sf: Spaceform,
                    omega_volume: float | None = None, rtol: float = 1e-9) -> BallSpectrum:
    """The ball with lambda_1 = lambda_1(Omega)/alpha^2; must fit inside the symmetrized domain."""
    _check_alpha(alpha)
    R = radius_for_lambda1(sf, lambda1_omega / alpha**2)
    if omega_volume is not None:
        R_sym = float(sf.radius(omega_volume))
        if R > R_sym * (1 + rtol):
            raise ContainmentError(
                f"comparison ball radius {R} exceeds the symmetrized radius {R_sym}"
            )
    return ball_spectrum(sf, R)


@dataclass(frozen=True)
class ChitiReport:
    r0: float
    sign_pattern: str
    normalization: float
    max_violation: float
    holds: bool
    vacuous: bool
    band: float

    def csv_row(self, domain_id: str) -> str:
        return f"{domain_id},{float(self.r0)!r},{str(self.holds).lower()},{float(self.max_violation)!r}"


def _profile_l2(u1_sym: ShellProfile) -> float:
    return u1_sym.lp_norm(2.0) ** 2


def normalize_to(u1_sym: ShellProfile, ball: BallSpectrum) -> ShellProfile:
    """Rescale so that int (S u1)^2 equals int z^2 over the ball."""
    target = ball.z_mode.norm_squared()
    return u1_sym.scaled(math.sqrt(target / _profile_l2(u1_sym)))


def chiti_crossing(u1_sym: ShellProfile, ball: BallSpectrum, band_rel: float = 1e-3,
                   points: int = 8001, norm_tol: float = 1e-6) -> ChitiReport:
    """Sign structure of z - S u1 on [0, max(R, support)].

    Differences inside +-band_rel * max z count as zero.  ``holds`` means the
    pattern is + then - with a single crossing band.
    """
    zz = ball.z_mode.norm_squared()
    uu = _profile_l2(u1_sym)
    ratio = uu / zz
    if abs(ratio - 1) > norm_tol:
        raise NormalizationError(f"||S u1||^2 / ||z||^2 = {ratio:.9g}; normalize first")
    R = ball.R
    top = max(R, u1_sym.support_radius)
    r = np.linspace(0.0, top, points)
    zv = np.where(r < R, ball.z_mode(np.minimum(r, R)), 0.0)
    zmax = float(np.max(np.abs(zv)))
    band = band_rel * zmax
    diff = zv - u1_sym(r)
    sig = np.where(diff > band, 1, np.where(diff < -band, -1, 0))
    nz = sig[sig != 0]
    if nz.size == 0:
        return ChitiReport(float("nan"), "0", ratio, 0.0, True, True, band)
    changes = np.flatnonzero(np.diff(nz) != 0)
    pattern = "".join("+" if s > 0 else "-" for s in np.r_[nz[0], nz[changes + 1]])
    holds = pattern == "+-"
    # crossing: between the last + sample and the first - sample after it
    r0 = float("nan")
    if "+" in pattern and "-" in pattern:
        i_plus = np.flatnonzero(sig > 0)
        i_minus = np.flatnonzero(sig < 0)
        last_plus = i_plus[i_plus < i_minus.max()].max() if np.any(i_plus < i_minus.max()) else i_plus[0]
        first_minus = i_minus[i_minus > last_plus].min()
        a, b = r[last_plus], r[first_minus]

        def f(x):
            xv = np.array([x])
            zx = ball.z_mode(np.minimum(xv, R))[0] if x < R else 0.0
            return zx - u1_sym(xv)[0]

        for _ in range(80):
            m = 0.5 * (a + b)
            if f(m) > 0:
                a = m
            else:
                b = m
        r0 = float(0.5 * (a + b))
    if holds:
        before = r <= r0
        viol = np.r_[np.clip(-diff[before], 0, None), np.clip(diff[~before], 0, None)]
        max_violation = float(np.max(viol)) / zmax if viol.size else 0.0
    else:
        max_violation = float(np.max(np.abs(diff))) / zmax
    return ChitiReport(r0, pattern, ratio, max_violation, bool(holds), False, band)


@dataclass(frozen=True)
class WeightedComparison:
    lhs: float  # int (S u1)^2 F
    rhs: float  # int z^2 F
    holds: bool
    direction: str


def _check_monotone(F, top: float, direction: str, rel: float, points: int = 4001):
    r = np.linspace(0.0, top, points)
    v = np.asarray(F(r), dtype=float)
    d = np.diff(v)
    scale = max(float(np.max(np.abs(v))), 1e-300)
    if direction == "decreasing" and np.max(d) > rel * scale:
        raise NonMonotoneProfileError("F is not decreasing")
    if direction == "increasing" and np.min(d) < -rel * scale:
        raise NonMonotoneProfileError("F is not increasing")


def chiti_weighted(u1_sym: ShellProfile, ball: BallSpectrum, F, monotone: str,
                   rel_tol: float = 1e-6, mono_rel: float = 1e-7) -> WeightedComparison:
    """int (S u1)^2 F versus int z^2 F for radial monotone F (z vanishes beyond R)."""
    if monotone not in ("decreasing", "increasing"):
        raise ValueError("monotone must be 'decreasing' or 'increasing'")
    top = max(ball.R, u1_sym.support_radius)
    _check_monotone(F, top, monotone, mono_rel)
    lhs = u1_sym.integrate(F, power=2.0)
    rhs = float(_radial_integral(lambda r: ball.z_mode(r) ** 2 * np.asarray(F(r)), ball.sf, ball.R))
    scale = max(abs(lhs), abs(rhs), 1e-300)
    if monotone == "decreasing":
        ok = lhs <= rhs + rel_tol * scale
    else:
        ok = lhs >= rhs - rel_tol * scale
    return WeightedComparison(lhs, rhs, bool(ok), monotone)


# ---------------------------------------------------------------------------
# the differential relations behind the comparison, in the volume coordinate s


@dataclass(frozen=True)
class DifferentialCheck:
    s: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    max_error: float
    holds: bool


def model_identity(ball: BallSpectrum, alpha: float = 1.0, points: int = 401, trim: float = 0.05,
                   step_rel: float = 1e-4, rel_tol: float = 1e-4) -> DifferentialCheck:
    """(nu^{-1})'(s) = -(lambda/alpha^2) A^{-2}(s) int_0^s nu^{-1} for nu the distribution of z.

    nu^{-1}(s) = z(m_k^{-1}(s)); the left side is a central difference in s,
    the integral is quadrature of z over B_{m^{-1}(s)}.  Here lambda/alpha^2
    is the ball's own first eigenvalue.
    """
    sf, R, lam = ball.sf, ball.R, ball.lambda1
    V = float(sf.volume(R))
    s = np.linspace(trim * V, (1 - trim) * V, points)
    ds = step_rel * V

    def nu_inv(x):
        return ball.z_mode(np.asarray(sf.radius(x)))

    lhs = (nu_inv(s + ds) - nu_inv(s - ds)) / (2 * ds)
    radii = np.asarray(sf.radius(s))
    integral = np.array([_radial_integral(ball.z_mode, sf, rr, panels=8) for rr in radii])
    A = np.asarray(sf.profile(s))
    rhs = -lam * integral / A**2
    err = np.abs(lhs - rhs) / np.abs(rhs)
    return DifferentialCheck(s, lhs, rhs, float(err.max()), bool(err.max() <= rel_tol))


def domain_inequality(u1_sym: ShellProfile, lambda1_omega: float, alpha: float = 1.0,
                      points: int = 201, trim: float = 0.05, band: float | None = None) -> DifferentialCheck:
    """Integrated one-sided relation for mu^{-1}(s) = (S u1)(m^{-1}(s)):

    mu^{-1}(s2) - mu^{-1}(s1) >= -(lambda/alpha^2) int_{s1}^{s2} A^{-2}(s) int_0^s mu^{-1}

    on consecutive points of an interior s-grid (a step function has no
    pointwise derivative, so the relation is checked between grid points).
    """
    sf = u1_sym.sf
    vols = u1_sym.volumes
    V = float(vols[-1])
    lev = u1_sym.levels
    cum = np.r_[0.0, np.cumsum(lev * np.diff(vols))]

    def mu_inv(s):
        idx = np.clip(np.searchsorted(vols, s, side="right") - 1, 0, lev.size - 1)
        return lev[idx]

    def primitive(s):
        idx = np.clip(np.searchsorted(vols, s, side="right") - 1, 0, lev.size - 1)
        return cum[idx] + lev[idx] * (s - vols[idx])

    s = np.linspace(trim * V, (1 - trim) * V, points)
    lhs = mu_inv(s[1:]) - mu_inv(s[:-1])
    x, w = np.polynomial.legendre.leggauss(16)
    a, b = s[:-1], s[1:]
    nodes = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * x[None, :]
    A = np.asarray(sf.profile(nodes.ravel())).reshape(nodes.shape)
    integrand = primitive(nodes.ravel()).reshape(nodes.shape) / A**2
    rhs = -(lambda1_omega / alpha**2) * 0.5 * (b - a) * (integrand @ w)
    band = 1e-3 * float(lev.max()) if band is None else band
    viol = np.clip(rhs - lhs, 0, None)
    return DifferentialCheck(0.5 * (a + b), lhs, rhs, float(viol.max()), bool(viol.max() <= band))

"""Radial Dirichlet spectra of geodesic balls and of warped-product disks.

Ball eigenvalues come from shooting on the radial ODE

    u'' + (n-1) (cn_k/sn_k) u' + (lam - L / sn_k^2) u = 0,   L = l (l + n - 2),

started from a Frobenius series at the regular-singular origin.  Mode l = 0
gives lambda_1 and its eigenfunction z; mode l = 1 gives lambda_2 and the
radial factor J of the second eigenfunction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import solve_ivp
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .spaceform import Spaceform, SpaceformDomainError, unit_ball_volume

SERIES_START = 1e-6  # Frobenius start, as a fraction of the ball radius
ODE_RTOL = 1e-12
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


class ShootingError(RuntimeError):
    """Shooting failed to bracket or converge; carries the bracket state."""

    def __init__(self, message, bracket=None):
        super().__init__(message if bracket is None else f"{message} (bracket={bracket})")
        self.bracket = bracket


class CertificationError(RuntimeError):
    pass


class NonConvexDiskError(ValueError):
    pass


class CurvatureWitnessError(ValueError):
    """Declared curvature bounds are not satisfied by the surface."""


@dataclass(frozen=True)
class RadialProfile:
    grid: np.ndarray
    values: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape or g.ndim != 1:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        if g.size > 1 and np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(np.isnan(v)):
            raise ValueError("profile values contain NaN")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def __call__(self, r):
        return np.interp(r, self.grid, self.values)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["radius", "value"])
            for r, v in zip(self.grid, self.values):
                writer.writerow([repr(float(r)), repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "RadialProfile":
        data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1])


def _sn_cn_scalar(k: float) -> Callable[[float], tuple[float, float]]:
    if k == 0.0:
        return lambda r: (r, 1.0)
    q = math.sqrt(abs(k))

    def f(r):
        if abs(k) * r * r < 1e-8:
            r2 = r * r
            return r * (1 - k * r2 / 6 + k * k * r2 * r2 / 120), 1 - k * r2 / 2 + k * k * r2 * r2 / 24
        if k > 0:
            return math.sin(q * r) / q, math.cos(q * r)
        return math.sinh(q * r) / q, math.cosh(q * r)

    return f


class RadialMode:
    """Solution of the l-th radial equation for a fixed lam, started at the pole.

    Evaluation is exact-series below the start radius, dense ODE output up to
    ``r_end`` and zero beyond the Dirichlet radius ``R`` once one is set.
    """

    def __init__(self, sf: Spaceform, ell: int, lam: float, r_end: float, *,
                 dense: bool = False, events: bool = False, stop_at_zero: bool = False,
                 rtol: float = ODE_RTOL, eps: float | None = None):
        self.sf, self.ell, self.lam, self.r_end = sf, ell, lam, r_end
        n, k = sf.n, sf.k
        self.L = ell * (ell + n - 2)
        self.eps = SERIES_START * r_end if eps is None else eps
        self.c2 = ((n - 1) * k * ell / 3 + self.L * k / 3 - lam) / (2 * (2 * ell + n))
        self.scale = 1.0
        self.R = math.inf
        e = self.eps
        y0 = [e**ell * (1 + self.c2 * e * e),
              (ell * e ** (ell - 1) if ell else 0.0) + (ell + 2) * self.c2 * e ** (ell + 1)]
        snc = _sn_cn_scalar(k)
        L, m1 = self.L, n - 1

        def rhs(r, y):
            s, c = snc(r)
            return [y[1], -m1 * c / s * y[1] - (lam - L / (s * s)) * y[0]]

        def crossing(r, y):
            return y[0]

        crossing.terminal = stop_at_zero
        crossing.direction = -1
        self.sol = solve_ivp(rhs, (e, r_end), y0, method="DOP853", rtol=rtol,
                             atol=1e-15 * max(1.0, abs(y0[1])) * max(e**ell, 1e-300),
                             dense_output=dense, events=crossing if (events or stop_at_zero) else None)
        if self.sol.status < 0:
            raise ShootingError(f"ODE integration failed: {self.sol.message}")
        self.end_value = float(self.sol.y[0, -1])
        self.zeros = (np.asarray(self.sol.t_events[0]) if (events or stop_at_zero)
                      else np.empty(0))

    def values(self, r, derivative: bool = False):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        ell, c2 = self.ell, self.c2
        small = r < self.eps
        rs = r[small]
        if derivative:
            out[small] = (ell * rs ** (ell - 1) if ell else 0.0) + (ell + 2) * c2 * rs ** (ell + 1)
        else:
            out[small] = rs**ell * (1 + c2 * rs * rs)
        mid = (~small) & (r <= min(self.R, self.r_end))
        if np.any(mid):
            out[mid] = self.sol.sol(r[mid])[1 if derivative else 0]
        return self.scale * out

    def __call__(self, r):
        return self.values(r)

    def derivative(self, r):
        return self.values(r, derivative=True)

    def norm_squared(self) -> float:
        """int_0^R u^2 m_k'(r) dr, Gauss-Legendre on 40 panels."""
        return float(_radial_integral(lambda r: self(r) ** 2, self.sf, self.R))


def _radial_integral(fn, sf: Spaceform, R: float, panels: int = 40, a: float = 0.0):
    """int_a^R fn(r) m_k'(r) dr for a smooth fn (composite Gauss-Legendre)."""
    edges = np.linspace(a, R, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return np.sum(w * fn(nodes) * sf.area(nodes))


def _zero_count(sf, ell, lam, R) -> tuple[int, float]:
    mode = RadialMode(sf, ell, lam, R, events=True)
    zeros = mode.zeros[mode.zeros < R * (1 - 1e-13)]
    return len(zeros), mode.end_value


def _first_eigenvalue(sf: Spaceform, ell: int, R: float, xtol_rel: float = 1e-14) -> float:
    """Smallest lam for which mode ``ell`` vanishes at R.

    The bracket is set by Sturm oscillation counting: below the eigenvalue
    the solution has no zero in (0, R), just above it exactly one.
    """
    n = sf.n
    # flat guess j^2/R^2 with j ~ zero of the Bessel function of order l+n/2-1
    nu = ell + n / 2 - 1
    guess = ((nu + 1.86 * (nu + 1) ** (1 / 3) + 0.5) / R) ** 2 + max(0.0, -sf.k) * (n - 1) ** 2 / 4
    lo, hi = 0.0, guess
    cnt, _ = _zero_count(sf, ell, hi, R)
    doublings = 0
    while cnt == 0:
        lo, hi = hi, 2 * hi
        cnt, _ = _zero_count(sf, ell, hi, R)
        doublings += 1
        if doublings > 60:
            raise ShootingError("could not bracket the first eigenvalue", (lo, hi))
    for _ in range(200):
        if cnt == 1:
            break
        mid = 0.5 * (lo + hi)
        c, _ = _zero_count(sf, ell, mid, R)
        if c == 0:
            lo = mid
        else:
            hi, cnt = mid, c
    else:
        raise ShootingError("oscillation bisection did not isolate one zero", (lo, hi))

    def f(lam):
        return RadialMode(sf, ell, lam, R).end_value

    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ShootingError("endpoint values do not change sign", (lo, hi))
    try:
        return brentq(f, lo, hi, xtol=xtol_rel * hi, rtol=4 * np.finfo(float).eps, maxiter=200)
    except RuntimeError as exc:
        raise ShootingError(str(exc), (lo, hi)) from exc


@dataclass(frozen=True)
class BallSpectrum:
    sf: Spaceform
    R: float
    lambda1: float
    lambda2: float
    z: RadialProfile
    J: RadialProfile
    z_mode: RadialMode = field(repr=False, compare=False)
    J_mode: RadialMode = field(repr=False, compare=False)
    residuals: tuple[float, float] = (0.0, 0.0)

    @property
    def gap(self) -> float:
        return self.lambda2 - self.lambda1

    @property
    def volume(self) -> float:
        return float(self.sf.volume(self.R))


def _normalize_mode(mode: RadialMode, R: float):
    # the series start makes z(0) > 0 and J'(0) > 0, so only the size changes
    mode.R = R
    mode.scale = 1.0
    mode.scale = 1.0 / math.sqrt(mode.norm_squared())


def rayleigh_residual(mode: RadialMode) -> float:
    """|RQ(u) - lam| / lam with the radial Dirichlet energy of the mode."""
    sf, R = mode.sf, mode.R
    snc = mode.sf.sn

    def energy(r):
        du = mode.derivative(r)
        u = mode(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            pot = np.where(r > 0, mode.L / np.asarray(snc(r)) ** 2 * u * u, 0.0)
        return du * du + pot

    num = _radial_integral(energy, sf, R)
    den = _radial_integral(lambda r: mode(r) ** 2, sf, R)
    return abs(num / den - mode.lam) / mode.lam


def ball_spectrum(sf: Spaceform, R: float, points: int = 2001) -> BallSpectrum:
    """lambda_1, lambda_2 and radial profiles of the geodesic ball B_R in N^n(k)."""
    if not R > 0:
        raise SpaceformDomainError("ball radius must be positive")
    if sf.k > 0 and R > sf.hemisphere_radius * (1 + 1e-12):
        raise SpaceformDomainError(
            f"radius {R} exceeds the hemisphere radius {sf.hemisphere_radius}"
        )
    lam1 = _first_eigenvalue(sf, 0, R)
    lam2 = _first_eigenvalue(sf, 1, R)
    z_mode = RadialMode(sf, 0, lam1, R, dense=True)
    J_mode = RadialMode(sf, 1, lam2, R, dense=True)
    _normalize_mode(z_mode, R)
    _normalize_mode(J_mode, R)
    grid = np.linspace(0.0, R, points)
    zv, Jv = z_mode(grid), J_mode(grid)
    zv[-1] = Jv[-1] = 0.0
    res = (rayleigh_residual(z_mode), rayleigh_residual(J_mode))
    return BallSpectrum(sf, float(R), float(lam1), float(lam2),
                        RadialProfile(grid, zv), RadialProfile(grid, Jv),
                        z_mode, J_mode, res)


def radial_eigenvalue(sf: Spaceform, R: float, ell: int) -> float:
    """First Dirichlet eigenvalue of angular mode ``ell`` on B_R."""
    return _first_eigenvalue(sf, ell, R)


def radius_for_lambda1(sf: Spaceform, lambda_target: float) -> float:
    """Radius R with lambda_1(B_R) = lambda_target.

    The first zero of the l = 0 solution at fixed lam is exactly the radius
    of the ball having lam as first eigenvalue, so no nested root search is
    needed.
    """
    if not lambda_target > 0:
        raise ValueError("target eigenvalue must be positive")
    n = sf.n
    if sf.k == 0:
        base = _first_eigenvalue(sf, 0, 1.0)
        return math.sqrt(base / lambda_target)
    cap = sf.hemisphere_radius if sf.k > 0 else math.inf
    if sf.k > 0:
        floor = n * sf.k  # lambda_1 of the hemisphere, z = cos(sqrt(k) r)
        if lambda_target < floor * (1 - 1e-12):
            raise SpaceformDomainError(
                f"lambda_1 = {lambda_target} is below the hemisphere value {floor}"
            )
    if sf.k < 0 and lambda_target <= (n - 1) ** 2 * -sf.k / 4:
        # every ball has lambda_1 above the bottom of the spectrum of N(k)
        raise SpaceformDomainError(
            f"lambda_1 = {lambda_target} is not attained by any ball "
            f"(bottom of spectrum {(n - 1) ** 2 * -sf.k / 4})"
        )
    # bound on the first zero: flat radius for lam - (n-1)^2 |k|/4 (k<0) or lam (k>0)
    eff = lambda_target - (max(0.0, -sf.k) * (n - 1) ** 2 / 4)
    j = _first_eigenvalue(Spaceform(n, 0.0), 0, 1.0) ** 0.5
    r_end = j / math.sqrt(eff) * 1.5 if eff > 0 else 10.0
    while True:
        limit = min(r_end, cap * (1 + 1e-9)) if sf.k > 0 else r_end
        mode = RadialMode(sf, 0, lambda_target, limit, stop_at_zero=True)
        if len(mode.zeros):
            r = float(mode.zeros[0])
            break
        if sf.k > 0 and limit >= cap:
            if abs(lambda_target - n * sf.k) <= 1e-10 * lambda_target:
                return cap
            raise SpaceformDomainError("no Dirichlet ball below the hemisphere radius")
        r_end *= 2
        if r_end > 1e6:
            raise SpaceformDomainError(
                f"lambda_1 = {lambda_target} is not attained by any ball "
                f"(bottom of spectrum {(n - 1) ** 2 * -sf.k / 4})"
            )
    return r


# --------------------------------------------------------------------------
# the test-function profile h = J/z and the energy density F


def _series_mul(a, b, deg):
    return np.convolve(a, b)[: deg + 1]


def _series_div(a, b, deg):
    out = np.zeros(deg + 1)
    for j in range(deg + 1):
        acc = a[j] if j < len(a) else 0.0
        for i in range(1, min(j, len(b) - 1) + 1):
            acc -= b[i] * out[j - i]
        out[j] = acc / b[0]
    return out


def _sn_cn_series(k, deg):
    sn_s = np.zeros(deg + 1)
    cn_s = np.zeros(deg + 1)
    for j in range(deg + 1):
        if 2 * j + 1 <= deg:
            sn_s[2 * j + 1] = (-k) ** j / math.factorial(2 * j + 1)
        if 2 * j <= deg:
            cn_s[2 * j] = (-k) ** j / math.factorial(2 * j)
    return sn_s, cn_s


def _boundary_series(sf: Spaceform, R: float, lam: float, ell: int, slope: float, deg: int = 24):
    """Taylor coefficients in s = r - R of the mode that vanishes at R."""
    n, k = sf.n, sf.k
    s_s, c_s = _sn_cn_series(k, deg)
    snR, cnR = float(sf.sn(R)), float(sf.cn(R))
    SN = snR * c_s + cnR * s_s
    CN = cnR * c_s - k * snR * s_s
    p = (n - 1) * _series_div(CN, SN, deg)
    q = -ell * (ell + n - 2) * _series_div(np.eye(1, deg + 1, 0)[0], _series_mul(SN, SN, deg), deg)
    q[0] += lam
    a = np.zeros(deg + 3)
    a[1] = slope
    for j in range(deg + 1):
        acc = 0.0
        for i in range(j + 1):
            acc += p[i] * (j - i + 1) * a[j - i + 1] + q[i] * a[j - i]
        a[j + 2] = -acc / ((j + 2) * (j + 1))
    return a


class RatioProfile:
    """h = J/z on [0, R], its left limit beyond R, h' and F = h'^2 + (n-1) h^2/sn^2.

    ``normalize`` rescales h so that its limit value h(R) equals 1; the gap
    inequalities are homogeneous of degree two in h.
    """

    BAND = 0.05  # width of the series band at r = R, fraction of R

    def __init__(self, spec: BallSpectrum, normalize: bool = True):
        self.spec = spec
        self.sf, self.R = spec.sf, spec.R
        z, J = spec.z_mode, spec.J_mode
        R = self.R
        deg = 24
        za = _boundary_series(self.sf, R, spec.lambda1, 0, float(z.derivative(R)), deg)
        Ja = _boundary_series(self.sf, R, spec.lambda2, 1, float(J.derivative(R)), deg)
        self._hser = Polynomial(_series_div(Ja[1:], za[1:], deg))
        self._dhser = self._hser.deriv()
        self.unit = 1.0
        if normalize:
            self.unit = 1.0 / float(self._hser(0.0))

    def h(self, t):
        return self._eval(t)[0]

    def dh(self, t):
        return self._eval(t)[1]

    def F(self, t):
        t = np.asarray(t, dtype=float)
        h, dh, h_over_sn = self._eval(t, with_ratio=True)
        return dh * dh + (self.sf.n - 1) * h_over_sn**2

    def _eval(self, t, with_ratio: bool = False):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        z, J, R = self.spec.z_mode, self.spec.J_mode, self.R
        h = np.empty_like(t)
        dh = np.empty_like(t)
        band = t >= R * (1 - self.BAND)
        beyond = t >= R
        inner = ~band
        zi, Ji = z(t[inner]), J(t[inner])
        dzi, dJi = z.derivative(t[inner]), J.derivative(t[inner])
        h[inner] = Ji / zi
        dh[inner] = (dJi * zi - Ji * dzi) / (zi * zi)
        sb = t[band & ~beyond] - R
        h[band & ~beyond] = self._hser(sb)
        dh[band & ~beyond] = self._dhser(sb)
        h[beyond] = self._hser(0.0)
        dh[beyond] = 0.0
        h *= self.unit
        dh *= self.unit
        out = [h, dh]
        if with_ratio:
            ratio = np.empty_like(t)
            pos = t > 0
            ratio[pos] = h[pos] / np.asarray(self.sf.sn(t[pos]))
            ratio[~pos] = dh[~pos]
            out.append(ratio)
        if scalar:
            return [float(x[0]) for x in out]
        return out


@dataclass(frozen=True)
class HF:
    h: RadialProfile
    F: RadialProfile
    certified: bool
    dh: RadialProfile
    profile: RatioProfile = field(repr=False, compare=False)
    max_h_drop: float = 0.0
    max_F_rise: float = 0.0

    def __iter__(self):
        # unpacks as (h, F, certified)
        return iter((self.h, self.F, self.certified))


def h_and_F(spec: BallSpectrum, points: int = 2001, rel_tol: float = 1e-7,
            normalize: bool = True, strict: bool = False) -> HF:
    """Sample h = J/z and F on [0, R] and certify h increasing, F decreasing."""
    prof = RatioProfile(spec, normalize=normalize)
    grid = np.linspace(0.0, spec.R, points)
    h, dh, ratio = prof._eval(grid, with_ratio=True)
    F = dh * dh + (spec.sf.n - 1) * ratio**2
    h_drop = max(0.0, float(np.max(-np.diff(h)))) / max(np.max(np.abs(h)), 1e-300)
    F_rise = max(0.0, float(np.max(np.diff(F)))) / max(np.max(np.abs(F)), 1e-300)
    ok = h_drop <= rel_tol and F_rise <= rel_tol and abs(h[0]) <= rel_tol * np.max(np.abs(h))
    if strict and not ok:
        raise CertificationError(
            f"monotonicity not certified: h drop {h_drop:.3e}, F rise {F_rise:.3e}"
        )
    return HF(RadialProfile(grid, h), RadialProfile(grid, F), bool(ok),
              RadialProfile(grid, dh), prof, h_drop, F_rise)


# --------------------------------------------------------------------------
# warped-product surfaces dr^2 + phi(r)^2 dtheta^2


@dataclass(frozen=True)
class WarpedSurface:
    phi: Callable
    dphi: Callable
    ddphi: Callable
    Phi: Callable  # antiderivative of phi with Phi(0) = 0
    R_max: float
    k_upper: float
    K_lower: float
    name: str = "warped"
    check: bool = True

    def __post_init__(self):
        if not self.check:
            return
        if abs(float(self.phi(0.0))) > 1e-12 or abs(float(self.dphi(0.0)) - 1) > 1e-12:
            raise ValueError("warping function needs phi(0) = 0 and phi'(0) = 1")
        r = np.linspace(self.R_max * 1e-4, self.R_max, 4001)
        if np.any(self.phi(r) <= 0):
            raise ValueError("warping function must be positive on (0, R_max]")
        lo, hi = self.curvature_range()
        slack = 1e-10 * max(1.0, abs(lo), abs(hi))
        if lo < self.K_lower - slack or hi > self.k_upper + slack:
            raise CurvatureWitnessError(
                f"curvature range [{lo:.6g}, {hi:.6g}] not inside declared "
                f"[{self.K_lower}, {self.k_upper}]"
            )

    def curvature(self, r):
        r = np.asarray(r, dtype=float)
        return -self.ddphi(r) / self.phi(r)

    def curvature_range(self, points: int = 4001) -> tuple[float, float]:
        r = np.linspace(self.R_max * 1e-4, self.R_max, points)
        c = self.curvature(r)
        return float(np.min(c)), float(np.max(c))

    def area(self, R: float) -> float:
        return 2 * math.pi * float(self.Phi(R))

    @classmethod
    def spaceform(cls, k: float, R_max: float) -> "WarpedSurface":
        sf2 = Spaceform(2, k)

        def phi(r):
            return np.asarray(sf2.sn(np.asarray(r, dtype=float)))

        def dphi(r):
            return np.asarray(sf2.cn(np.asarray(r, dtype=float)))

        def ddphi(r):
            return -k * phi(r)

        def Phi(r):
            return np.asarray(sf2.volume(np.asarray(r, dtype=float))) / (2 * math.pi)

        return cls(phi, dphi, ddphi, Phi, R_max, k, k, name=f"sn[{k:g}]")

    @classmethod
    def polynomial(cls, coeffs, R_max: float, k_upper: float, K_lower: float,
                   name: str | None = None, check: bool = True) -> "WarpedSurface":
        """phi given by power-series coefficients [0, 1, c2, c3, ...]."""
        p = Polynomial(coeffs)
        d1, d2, P = p.deriv(), p.deriv(2), p.integ(lbnd=0)
        vec = lambda poly: (lambda r: poly(np.asarray(r, dtype=float)))  # noqa: E731
        return cls(vec(p), vec(d1), vec(d2), vec(P), R_max, k_upper, K_lower,
                   name=name or "poly" + str(list(coeffs)), check=check)


@dataclass(frozen=True)
class WarpedSpectrum:
    lambda1: float
    lambda2: float
    u1: RadialProfile
    mode0: tuple[float, float]
    mode1: float
    residual: float
    R: float


def _warped_pencil(ws: WarpedSurface, R: float, N: int, m: int):
    h = R / N
    r = np.arange(N + 1) * h
    half = (np.arange(N) + 0.5) * h
    flux = ws.phi(half) / h
    edges = np.concatenate([[0.0], half, [R]])
    w = ws.Phi(edges[1:]) - ws.Phi(edges[:-1])
    diag = np.zeros(N + 1)
    diag[:N] += flux
    diag[1:] += flux
    if m:
        diag[1:] += m * m * w[1:] / ws.phi(r[1:]) ** 2
        idx = np.arange(1, N)
    else:
        idx = np.arange(0, N)
    wi = w[idx]
    d = diag[idx] / wi
    e = -flux[idx[:-1]] / np.sqrt(wi[:-1] * wi[1:])
    return r, idx, wi, d, e


def warped_mode_eigenvalues(ws: WarpedSurface, R: float, m: int, count: int, N: int):
    """Lowest ``count`` eigenvalues of Fourier mode m on a uniform N-cell grid.

    Symmetric three-point finite volumes weighted by phi; eigenvalues by
    Sturm-sequence bisection of the symmetrized tridiagonal pencil.
    """
    _, _, _, d, e = _warped_pencil(ws, R, N, m)
    return eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1),
                            eigvals_only=True, tol=1e-13)


def warped_disk_spectrum(ws: WarpedSurface, R: float, N: int = 1000) -> WarpedSpectrum:
    """Dirichlet lambda_1, lambda_2 of the geodesic disk B_R(pole).

    Eigenvalues on N and 2N cells are combined by Richardson extrapolation
    (the scheme is second order).
    """
    if R > ws.R_max * (1 + 1e-12):
        raise ValueError(f"radius {R} exceeds R_max = {ws.R_max}")
    r = np.linspace(R * 1e-4, R, 4001)
    if np.any(ws.dphi(r) <= 0):
        raise NonConvexDiskError("disk radius reaches a zero of phi' (disk not convex)")
    if np.any(ws.phi(r) <= 0):
        raise ValueError("phi must be positive on (0, R]")

    def extrap(m, count):
        a = warped_mode_eigenvalues(ws, R, m, count, N)
        b = warped_mode_eigenvalues(ws, R, m, count, 2 * N)
        return (4 * b - a) / 3

    m0 = extrap(0, 2)
    m1 = float(extrap(1, 1)[0])
    lam1 = float(m0[0])
    lam2 = min(float(m0[1]), m1)
    # first eigenvector on the fine grid
    rr, idx, wi, d, e = _warped_pencil(ws, R, 2 * N, 0)
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, 0), tol=1e-13)
    y = vecs[:, 0]
    T_y = d * y
    T_y[:-1] += e * y[1:]
    T_y[1:] += e * y[:-1]
    residual = float(np.linalg.norm(T_y - vals[0] * y) / (vals[0] * np.linalg.norm(y)))
    u = np.zeros(rr.size)
    u[idx] = y / np.sqrt(wi)
    u /= math.sqrt(2 * math.pi * np.sum(wi * u[idx] ** 2))
    if u[0] < 0:
        u = -u
    return WarpedSpectrum(lam1, lam2, RadialProfile(rr, u), (float(m0[0]), float(m0[1])),
                          m1, residual, float(R))

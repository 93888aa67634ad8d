"""End-to-end evaluation of the fundamental-gap bound.

The test functions are P_i = <P_p, e_i> with P_p(x) = h(sigma(r_p(x))) times
the unit initial velocity of the geodesic from p to x, h = J/z the ratio of
the comparison ball's second and first eigenfunctions.  Everything on the
domain side is computed in the conformal chart with the edge-midpoint rule
the FEM mass matrix uses.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .comparison import chiti_crossing, comparison_ball, faber_krahn_check, normalize_to
from .config import Tolerances
from .fem_eig import EigenResult, p1_samples, rayleigh_quotient, solve
from .mesh_domain import (
    Hull,
    IneligibleDomainError,
    MeshDomain,
    SigmaProfile,
    affine_chart,
    c1_constant,
    conformal_chart,
    conformal_factor,
    convert,
    convex_hull,
    diameter,
    distance_range,
    exp_map,
    log_map,
    sigma_profile,
    warped_sigma_profile,
)
from .radial_eig import (
    BallSpectrum,
    CurvatureWitnessError,
    RatioProfile,
    WarpedSurface,
    _radial_integral,
    ball_spectrum,
    h_and_F,
    radial_eigenvalue,
    warped_disk_spectrum,
)
from .spaceform import CurvaturePair, Spaceform, curvature_constant
from .symmetrize import WeightedSamples, decreasing_sym


class BalanceError(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


class CurvatureRegimeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# test field


def test_field(k: float, p, x, g):
    """P_p(x) in the chart-axis frame at p: g(r_p(x)) * unit direction of exp_p^{-1}(x).

    ``g`` is the composed radial profile r -> h(sigma(r)); p and x are
    conformal-chart points.
    """
    v, d = log_map(k, np.asarray(p, dtype=float), np.asarray(x, dtype=float))
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(d[..., None] > 0, v / d[..., None], 0.0)
    return unit * np.asarray(g(d))[..., None], d


test_field.__test__ = False  # not a pytest test


@dataclass
class DomainProblem:
    """A meshed domain with its first eigenfunction sampled at quadrature points."""

    mesh: MeshDomain  # conformal chart
    eig: EigenResult
    hull: Hull
    qpts: np.ndarray
    qw: np.ndarray
    u1q: np.ndarray

    @classmethod
    def build(cls, mesh: MeshDomain, eig: EigenResult | None = None, hull: Hull | None = None,
              injectivity_radius: float | None = None) -> "DomainProblem":
        mesh = mesh.conformal()
        eig = eig or solve(mesh)
        hull = hull or convex_hull(mesh, injectivity_radius)
        pts, bary, w = mesh.quadrature()
        u1q = np.einsum("qa,ta->tq", bary, eig.u1[mesh.triangles])
        return cls(mesh, eig, hull, pts.reshape(-1, 2), w.ravel(), u1q.ravel())

    @property
    def k(self) -> float:
        return self.mesh.k

    @property
    def mass(self) -> float:
        return float(np.sum(self.qw * self.u1q**2))

    def integrate(self, values) -> float:
        """int_Omega u1^2 * values (values at quadrature points)."""
        return float(np.sum(self.qw * self.u1q**2 * values))

    def start_point(self) -> np.ndarray:
        """Centroid of the hull polygon in the affine chart, as a conformal point."""
        c = self.hull.polygon.mean(axis=0)
        return convert(c[None, :], self.k, affine_chart(self.k), conformal_chart(self.k))[0]


def composed_profile(profile: RatioProfile, sigma: SigmaProfile):
    return lambda r: profile.h(sigma(r))


def balance_vector(problem: DomainProblem, p, profile: RatioProfile, sigma: SigmaProfile | None = None):
    """X(p) / int u1^2 in the frame at p, plus the sigma profile used."""
    p = np.asarray(p, dtype=float)
    sigma = sigma or sigma_profile(problem.hull, p, Spaceform(2, profile.sf.k), chart=problem.mesh.chart)
    P, _ = test_field(problem.k, p, problem.qpts, composed_profile(profile, sigma))
    X = np.sum((problem.qw * problem.u1q**2)[:, None] * P, axis=0) / problem.mass
    return X, sigma


@dataclass(frozen=True)
class BalancePoint:
    p: np.ndarray  # conformal chart
    residual: float
    iterations: int
    trace: tuple[float, ...] = ()
    sigma: SigmaProfile | None = field(default=None, repr=False, compare=False)

    def p_in(self, chart: str, k: float) -> np.ndarray:
        return convert(self.p[None, :], k, conformal_chart(k), chart)[0]


def _inside_or_project(problem: DomainProblem, p_conf):
    k = problem.k
    aff = convert(p_conf[None, :], k, conformal_chart(k), affine_chart(k))[0]
    if problem.hull.contains_affine(aff)[0]:
        return p_conf
    aff = problem.hull.project_affine(aff)
    return convert(aff[None, :], k, affine_chart(k), conformal_chart(k))[0]


def balance_point(problem: DomainProblem, profile: RatioProfile, tol: float = 1e-6,
                  max_iter: int = 500, p0=None) -> BalancePoint:
    """Zero of X(p) = int P_p u1^2 by damped Newton steps along geodesics.

    The Jacobian is a forward difference in normal coordinates at p; a step
    is halved until the residual decreases, and iterates leaving the hull are
    projected back onto it in the affine chart.  sigma is rebuilt at each p.
    """
    k = problem.k
    p = np.asarray(problem.start_point() if p0 is None else p0, dtype=float)
    p = _inside_or_project(problem, p)
    X, sigma = balance_vector(problem, p, profile)
    res = float(np.linalg.norm(X))
    trace = [res]
    scale = max(problem.hull.diameter(), 1e-12)
    it = 0
    while res > tol:
        if it >= max_iter:
            raise BalanceError(f"balance iteration cap {max_iter} reached (residual {res:.3e})", trace)
        it += 1
        delta = 1e-6 * scale
        J = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = delta
            Xj, _ = balance_vector(problem, exp_map(k, p, e[None, :])[0], profile)
            J[:, j] = (Xj - X) / delta
        try:
            step = -np.linalg.solve(J, X)
        except np.linalg.LinAlgError:
            step = X * scale
        if not np.all(np.isfinite(step)):
            step = X * scale
        tau = 1.0
        while True:
            q = _inside_or_project(problem, exp_map(k, p, (tau * step)[None, :])[0])
            Xq, sq = balance_vector(problem, q, profile)
            rq = float(np.linalg.norm(Xq))
            if rq < res or tau < 1e-10:
                break
            tau *= 0.5
        if rq >= res:
            raise BalanceError(f"balance iteration stalled at residual {res:.3e}", trace)
        p, X, sigma, res = q, Xq, sq, rq
        trace.append(res)
    return BalancePoint(p, res, it, tuple(trace), sigma)


# ---------------------------------------------------------------------------
# middle inequality and its symmetrized chain


@dataclass(frozen=True)
class MiddleReport:
    gap: float
    C1: float
    A_h: float  # int_Omega u1^2 h(sigma)^2
    A_F: float  # int_Omega u1^2 F(sigma)
    B_h: float  # int (S u1)^2 h^2 over the symmetrized hull
    B_F: float
    C_h: float  # int z^2 h^2 over the comparison ball
    C_F: float
    lhs: float
    rhs: float
    holds: bool
    chain_h: bool
    chain_F: bool
    certified: bool

    @property
    def implied_bound(self) -> float:
        return self.C1**2 * self.C_F / self.C_h


def _chain(A_h, A_F, B_h, B_F, C_h, C_F, gap, C1, certified, rel):
    lhs, rhs = gap * A_h, C1**2 * A_F
    holds = lhs <= rhs * (1 + rel)
    chain_h = A_h >= B_h * (1 - rel) and B_h >= C_h * (1 - rel)
    chain_F = A_F <= B_F * (1 + rel) and B_F <= C_F * (1 + rel)
    if not certified:
        chain_h = chain_F = False
    return MiddleReport(gap, C1, A_h, A_F, B_h, B_F, C_h, C_F, lhs, rhs, bool(holds),
                        bool(chain_h), bool(chain_F), bool(certified))


def _ball_side(ball: BallSpectrum, profile: RatioProfile):
    z = ball.z_mode
    C_h = float(_radial_integral(lambda r: z(r) ** 2 * profile.h(r) ** 2, ball.sf, ball.R))
    C_F = float(_radial_integral(lambda r: z(r) ** 2 * profile.F(r), ball.sf, ball.R))
    return C_h, C_F


def middle_inequality(problem: DomainProblem, bp: BalancePoint, ball: BallSpectrum, profile: RatioProfile,
                      C1: float, certified: bool = True, rel: float = 1e-3,
                      samples: WeightedSamples | None = None) -> MiddleReport:
    sigma = bp.sigma
    _, d = log_map(problem.k, bp.p, problem.qpts)
    s = sigma(d)
    mass = problem.mass
    A_h = problem.integrate(profile.h(s) ** 2) / mass
    A_F = problem.integrate(profile.F(s)) / mass
    sf = ball.sf
    samples = samples or p1_samples(problem.eig, problem.mesh, total_measure=sigma.hull_measure)
    Su = normalize_to(decreasing_sym(samples, sf), ball)
    B_h = Su.integrate(lambda r: profile.h(r) ** 2, power=2.0)
    B_F = Su.integrate(profile.F, power=2.0)
    C_h, C_F = _ball_side(ball, profile)
    gap = problem.eig.lambda2 - problem.eig.lambda1
    return _chain(A_h, A_F, B_h, B_F, C_h, C_F, gap, C1, certified, rel)


# ---------------------------------------------------------------------------
# sanity checks on the test functions


def minmax_sanity(problem: DomainProblem, bp: BalancePoint, profile: RatioProfile):
    """Discrete Rayleigh quotients of P_i u1 after removing the u1 component.

    The discrete min-max principle makes each projected quotient >= lambda_2
    of the discretization.  Returns (raw quotients, projected quotients, ok).
    """
    mesh, eig = problem.mesh, problem.eig
    pen = eig.pencil
    P, _ = test_field(problem.k, bp.p, mesh.vertices, composed_profile(profile, bp.sigma))
    raw, proj = [], []
    u = eig.u1[pen.interior]
    for i in range(2):
        v = P[:, i] * eig.u1
        raw.append(rayleigh_quotient(pen, v))
        vi = v[pen.interior]
        vi = vi - (u @ (pen.mass @ vi)) * u
        proj.append(float(vi @ (pen.stiffness @ vi) / (vi @ (pen.mass @ vi))))
    ok = all(q >= eig.lambda2 * (1 - 1e-9) for q in proj)
    return raw, proj, ok


def gradient_sum(k: float, p, x, g, step: float = 1e-6):
    """sum_i |grad P_i|^2 at conformal points x by central differences of the closed form."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    total = np.zeros(len(x))
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        Pp, _ = test_field(k, p, x + e, g)
        Pm, _ = test_field(k, p, x - e, g)
        total += np.sum(((Pp - Pm) / (2 * step)) ** 2, axis=1)
    return total / conformal_factor(k, x) ** 2


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class GapBoundReport:
    lambda1: float
    lambda2: float
    gap: float
    alpha: float
    R: float
    ball_gap: float
    C1: float
    curvature_const: float
    bound_rhs: float
    verdict: str
    relative_slack: float
    d: float
    K_lower: float
    k_upper: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"

    def csv_row(self) -> list[str]:
        return [v if isinstance(v, str) else repr(float(v)) for v in dataclasses.astuple(self)]

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self))


def make_report(lambda1, lambda2, alpha, ball: BallSpectrum, C1, pair: CurvaturePair, d, n=2,
                margin: float = 0.01) -> GapBoundReport:
    gap = lambda2 - lambda1
    if not gap > 0:
        raise ValueError(f"lambda2 - lambda1 = {gap:g}; the first Dirichlet eigenvalue must be simple")
    const = curvature_constant(n, pair, d)
    bound = const * ball.gap
    verdict = "holds" if gap <= bound * (1 + margin) else "violated"
    return GapBoundReport(float(lambda1), float(lambda2), float(gap), float(alpha), float(ball.R),
                          float(ball.gap), float(C1), float(const), float(bound), verdict,
                          float((bound - gap) / gap), float(d), float(pair.K_lower), float(pair.k_upper))


def hadamard_ratio(report: GapBoundReport, n: int = 2, margin: float = 0.01):
    """lambda2/lambda1 - 1 <= alpha^-2 (sn_K(d)/d)^(2n-2) (lambda2(B1)/lambda1(B1) - 1), flat k only."""
    if report.k_upper != 0:
        raise CurvatureRegimeError("the ratio form needs k_upper = 0")
    unit = Spaceform(n, 0.0)
    ppw = radial_eigenvalue(unit, 1.0, 1) / radial_eigenvalue(unit, 1.0, 0)
    const = curvature_constant(n, CurvaturePair(0.0, report.K_lower), report.d)
    bound = const / report.alpha**2 * (ppw - 1)
    ratio = report.lambda2 / report.lambda1 - 1
    return float(bound), bool(ratio <= bound * (1 + margin))


@dataclass
class PipelineResult:
    report: GapBoundReport
    balance: BalancePoint
    middle: MiddleReport
    chiti: object
    faber_krahn: object
    ball: BallSpectrum = field(repr=False)
    volume: float = 0.0
    hull_volume: float = 0.0
    extras: dict = field(default_factory=dict)


def _check_pair(pair: CurvaturePair, k_model: float):
    if pair.k_upper != k_model:
        raise CurvatureRegimeError(f"k_upper={pair.k_upper} differs from the model curvature {k_model}")


def evaluate_mesh(mesh: MeshDomain, alpha: float, pair: CurvaturePair, tol: Tolerances | None = None,
                  use_hull_range: bool = False, injectivity_radius: float | None = None,
                  p0=None) -> PipelineResult:
    """Full pipeline on a meshed domain of the spaceform N^2(k), k = mesh.k."""
    tol = tol or Tolerances()
    if pair.K_lower > mesh.k:
        raise CurvatureWitnessError(
            f"K_lower={pair.K_lower} exceeds the curvature {mesh.k} of the ambient spaceform"
        )
    sf = Spaceform(2, pair.k_upper)
    _check_pair(pair, mesh.k)
    problem = DomainProblem.build(mesh, injectivity_radius=injectivity_radius)
    eig = problem.eig
    vol = problem.mesh.area
    fk = faber_krahn_check(eig.lambda1, vol, sf, alpha)
    ball = comparison_ball(eig.lambda1, alpha, sf, omega_volume=vol)
    hf = h_and_F(ball, points=tol.profile_points, rel_tol=tol.monotone_rel)
    prof = hf.profile
    bp = balance_point(problem, prof, tol=tol.balance_tol, max_iter=tol.balance_max_iter, p0=p0)
    r_range = distance_range(problem.mesh, bp.p, use_hull=use_hull_range, hull=problem.hull)
    C1 = c1_constant(bp.sigma, sf, r_range)
    samples = p1_samples(eig, problem.mesh, total_measure=bp.sigma.hull_measure)
    middle = middle_inequality(problem, bp, ball, prof, C1, hf.certified, samples=samples)
    Su = normalize_to(decreasing_sym(samples, sf), ball)
    chiti = chiti_crossing(Su, ball, band_rel=tol.chiti_band)
    d = diameter(mesh)
    report = make_report(eig.lambda1, eig.lambda2, alpha, ball, C1, pair, d, margin=tol.verdict_margin)
    return PipelineResult(report, bp, middle, chiti, fk, ball, vol, bp.sigma.hull_measure,
                          {"problem": problem, "hf": hf, "Su": Su})


def _warped_samples(spec, ws: WarpedSurface):
    r = spec.u1.grid
    u = np.clip(spec.u1.values, 0.0, None)
    mid = 0.5 * (u[1:] + u[:-1])
    w = 2 * math.pi * np.diff(np.asarray(ws.Phi(r)))
    keep = w > 0
    total = float(w.sum())
    return WeightedSamples(mid[keep], w[keep], total), r, u


def evaluate_warped(ws: WarpedSurface, R: float, alpha: float = 1.0, tol: Tolerances | None = None,
                    N: int = 1000) -> PipelineResult:
    """Pipeline on the geodesic disk B_R(pole) of a warped surface; p is the pole."""
    tol = tol or Tolerances()
    pair = CurvaturePair(ws.k_upper, ws.K_lower)
    sf = Spaceform(2, pair.k_upper)
    spec = warped_disk_spectrum(ws, R, N=N)
    vol = ws.area(R)
    fk = faber_krahn_check(spec.lambda1, vol, sf, alpha)
    ball = comparison_ball(spec.lambda1, alpha, sf, omega_volume=vol)
    hf = h_and_F(ball, points=tol.profile_points, rel_tol=tol.monotone_rel)
    prof = hf.profile
    sigma = warped_sigma_profile(ws, R, sf)
    # rotational symmetry: the balance vector vanishes at the pole
    bp = BalancePoint(np.zeros(2), 0.0, 0, (0.0,), sigma)
    C1 = c1_constant(sigma, sf, (0.0, R))
    samples, r, u = _warped_samples(spec, ws)
    dens = 2 * math.pi * np.asarray(ws.phi(r)) * u**2
    s = sigma(r)

    def trap(f):
        return float(np.trapezoid(f * dens, r))

    mass = trap(np.ones_like(r))
    A_h = trap(prof.h(s) ** 2) / mass
    A_F = trap(prof.F(s)) / mass
    Su = normalize_to(decreasing_sym(samples, sf), ball)
    B_h = Su.integrate(lambda x: prof.h(x) ** 2, power=2.0)
    B_F = Su.integrate(prof.F, power=2.0)
    C_h, C_F = _ball_side(ball, prof)
    middle = _chain(A_h, A_F, B_h, B_F, C_h, C_F, spec.lambda2 - spec.lambda1, C1, hf.certified, 1e-3)
    chiti = chiti_crossing(Su, ball, band_rel=tol.chiti_band)
    d = 2 * R
    report = make_report(spec.lambda1, spec.lambda2, alpha, ball, C1, pair, d, margin=tol.verdict_margin)
    return PipelineResult(report, bp, middle, chiti, fk, ball, vol, vol, {"spectrum": spec, "hf": hf, "Su": Su})


def evaluate_ball(n: int, k: float, R: float, margin: float = 0.01) -> GapBoundReport:
    """Radial pipeline for the geodesic ball B_R in N^n(k): the bound is attained."""
    sf = Spaceform(n, k)
    if k > 0 and not 2 * R < sf.hemisphere_radius:
        raise IneligibleDomainError(
            f"ball diameter {2 * R:.6g} is not below pi/(2 sqrt k) = {sf.hemisphere_radius:.6g}"
        )
    own = ball_spectrum(sf, R)
    comp = comparison_ball(own.lambda1, 1.0, sf, omega_volume=own.volume)
    d = 2 * R
    return make_report(own.lambda1, own.lambda2, 1.0, comp, 1.0, CurvaturePair(k, k), d, n=n, margin=margin)

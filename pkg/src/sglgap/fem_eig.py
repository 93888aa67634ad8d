"""Dirichlet eigenpairs of 2-D domains by linear finite elements.

In a conformal chart the Dirichlet energy is the flat one, so only the mass
matrix sees the metric (through the conformal factor squared).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .mesh_domain import CONFORMAL, MeshDomain
from .symmetrize import WeightedSamples

SEED = 20240607


class EigenSolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class Pencil:
    stiffness: sp.csr_matrix  # interior rows/columns only
    mass: sp.csr_matrix
    interior: np.ndarray
    n_vertices: int

    def extend(self, x):
        """Zero-extend interior values to all vertices."""
        out = np.zeros(self.n_vertices)
        out[self.interior] = x
        return out


@dataclass(frozen=True)
class EigenResult:
    lambda1: float
    lambda2: float
    u1: np.ndarray
    mass_norm: float
    u2: np.ndarray = field(repr=False)
    lambda3: float = float("nan")
    residuals: tuple[float, float] = (0.0, 0.0)
    orthogonality: float = 0.0
    degenerate: bool = False
    pencil: Pencil | None = field(default=None, repr=False, compare=False)

    @property
    def gap(self) -> float:
        return self.lambda2 - self.lambda1


def element_matrices(mesh: MeshDomain):
    """Per-triangle P1 stiffness (flat) and mass (metric) blocks, shape (nt, 3, 3)."""
    if mesh.chart not in CONFORMAL:
        raise ValueError(f"assembly needs a conformal chart, got {mesh.chart}")
    v, t = mesh.vertices, mesh.triangles
    area = mesh.chart_areas
    if np.any(area <= 1e-14):
        raise ValueError("degenerate triangle")
    # edge vectors opposite each vertex; grad phi_i is the rotated edge / (2 area)
    g = np.stack([v[t[:, 1]] - v[t[:, 2]], v[t[:, 2]] - v[t[:, 0]], v[t[:, 0]] - v[t[:, 1]]], axis=1)
    Ke = np.einsum("tid,tjd->tij", g, g) / (4 * area[:, None, None])
    _, bary, w = mesh.quadrature()
    Me = np.einsum("tq,qi,qj->tij", w, bary, bary)
    return Ke, Me


def assemble(mesh: MeshDomain, eliminate: bool = True):
    """Global stiffness and mass; Dirichlet vertices removed when ``eliminate``."""
    Ke, Me = element_matrices(mesh)
    t = mesh.triangles
    nv = len(mesh.vertices)
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    K = sp.csr_matrix((Ke.ravel(), (rows, cols)), shape=(nv, nv))
    M = sp.csr_matrix((Me.ravel(), (rows, cols)), shape=(nv, nv))
    if not eliminate:
        return K, M
    inner = mesh.interior_nodes
    return Pencil(K[inner][:, inner].tocsr(), M[inner][:, inner].tocsr(), inner, nv)


def solve_two(pencil: Pencil, count: int = 3, seed: int = SEED, degeneracy_rel: float = 1e-6) -> EigenResult:
    """Lowest eigenpairs by shift-invert Lanczos about 0 (the pencil is positive definite)."""
    K, M = pencil.stiffness, pencil.mass
    n = K.shape[0]
    if n < count + 1:
        raise EigenSolveError("too few interior vertices for the requested eigenpairs")
    v0 = np.random.default_rng(seed).standard_normal(n)
    try:
        vals, vecs = eigsh(K, k=count, M=M, sigma=0.0, which="LM", v0=v0, tol=0,
                           ncv=max(2 * count + 1, 20), maxiter=5000)
    except (RuntimeError, ValueError) as exc:
        raise EigenSolveError(f"eigensolver failed: {exc}") from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    u1, u2 = vecs[:, 0], vecs[:, 1]
    if u1.sum() < 0:
        u1 = -u1
    u1 = u1 / np.sqrt(u1 @ (M @ u1))
    u2 = u2 / np.sqrt(u2 @ (M @ u2))

    def resid(lam, u):
        Mu = M @ u
        return float(np.linalg.norm(K @ u - lam * Mu) / (lam * np.linalg.norm(Mu)))

    lam3 = float(vals[2]) if count >= 3 else float("nan")
    return EigenResult(
        lambda1=float(vals[0]),
        lambda2=float(vals[1]),
        u1=pencil.extend(u1),
        mass_norm=float(u1 @ (M @ u1)),
        u2=pencil.extend(u2),
        lambda3=lam3,
        residuals=(resid(vals[0], u1), resid(vals[1], u2)),
        orthogonality=float(abs(u1 @ (M @ u2))),
        degenerate=bool(count >= 3 and lam3 - vals[1] < degeneracy_rel * vals[1]),
        pencil=pencil,
    )


def solve(mesh: MeshDomain, **kw) -> EigenResult:
    return solve_two(assemble(mesh.conformal()), **kw)


def rayleigh_quotient(pencil: Pencil, u_full) -> float:
    u = np.asarray(u_full, dtype=float)[pencil.interior]
    return float(u @ (pencil.stiffness @ u) / (u @ (pencil.mass @ u)))


def u1_samples(res: EigenResult, mesh: MeshDomain, total_measure: float | None = None,
               rule: str = "midpoint") -> WeightedSamples:
    """Cells of |u1| for symmetrization.

    ``rule="midpoint"`` gives three cells per triangle at the edge midpoints,
    the same rule the mass matrix uses, so sum w u^2 equals the mass norm;
    ``rule="vertex"`` gives one cell per triangle carrying the vertex average.
    ``total_measure`` defaults to |Omega|; pass |hull| for the zero extension.
    """
    mesh = mesh.conformal()
    u = np.clip(res.u1, 0.0, None)
    t = mesh.triangles
    if rule == "midpoint":
        _, bary, w = mesh.quadrature()
        vals = np.einsum("qa,ta->tq", bary, u[t]).ravel()
        wts = w.ravel()
    elif rule == "vertex":
        vals = u[t].mean(axis=1)
        wts = mesh.metric_areas
    else:
        raise ValueError(f"unknown rule {rule!r}")
    total = float(wts.sum()) if total_measure is None else float(total_measure)
    return WeightedSamples(vals, wts, max(total, float(wts.sum())))


def _distribution_on_levels(vals, areas, t):
    """mu(t_j) = sum_T |T| * fraction of T where the linear interpolant exceeds t_j.

    Each triangle only touches the levels inside its value range [a, c];
    levels below a receive its full area through a reversed cumulative sum.
    """
    s = np.sort(vals, axis=1)
    a, b, c = s[:, 0], s[:, 1], s[:, 2]
    L = t.size
    ia = np.searchsorted(t, a, side="left")
    ic = np.searchsorted(t, c, side="left")
    full = np.bincount(ia, weights=areas, minlength=L + 1)
    mu = np.cumsum(full[::-1])[::-1][1:L + 1].copy()
    count = ic - ia
    tri = np.repeat(np.arange(len(a)), count)
    start = np.repeat(np.cumsum(count) - count, count)
    j = np.repeat(ia, count) + (np.arange(tri.size) - start)
    tj, at, bt, ct = t[j], a[tri], b[tri], c[tri]
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(tj < bt, 1.0 - (tj - at) ** 2 / ((bt - at) * (ct - at)),
                        (ct - tj) ** 2 / ((ct - at) * (ct - bt)))
    frac = np.nan_to_num(np.clip(frac, 0.0, 1.0), nan=0.0)
    mu += np.bincount(j, weights=areas[tri] * frac, minlength=L)
    return mu


def p1_samples(res: EigenResult, mesh: MeshDomain, total_measure: float | None = None,
               levels: int = 8000) -> WeightedSamples:
    """Cells from the exact distribution function of the P1 interpolant of |u1|.

    Within a triangle the image of the area measure under a linear function
    has a piecewise-linear density, so mu(t) is piecewise quadratic; it is
    tabulated on a uniform level grid and each level band becomes one cell
    carrying the band's mid value.  Metric density is frozen per triangle.
    """
    mesh = mesh.conformal()
    u = np.clip(res.u1, 0.0, None)
    vals = u[mesh.triangles]
    areas = mesh.metric_areas
    top = float(u.max())
    t = np.linspace(0.0, top, levels + 1)
    mu = _distribution_on_levels(vals, areas, t)
    w = mu[:-1] - mu[1:]
    mid = 0.5 * (t[:-1] + t[1:])
    keep = w > 0
    total = float(areas.sum()) if total_measure is None else float(total_measure)
    return WeightedSamples(mid[keep], w[keep], max(total, float(w[keep].sum())))


def save_u1_csv(res: EigenResult, mesh: MeshDomain, path):
    data = np.column_stack([mesh.vertices, res.u1])
    np.savetxt(path, data, delimiter=",", header="x,y,u1", comments="", fmt="%.17g")

"""Planar domains in charts of the 2-D spaceforms.

Conformal charts (flat, Poincare disk, stereographic) carry the FEM; the
geodesic-affine charts (Klein for k < 0, gnomonic for k > 0) make geodesics
straight, so convex hulls are Euclidean hulls there.  Curvature k is kept
general: coordinates are scaled so that the chart disk has radius 1/sqrt|k|.

Mesh file format (text, 0-based indices)::

    SGLMESH 1 <chart> <k>
    <nv> <nt>
    x y            (nv lines)
    i j k          (nt lines)
    B <count>
    <boundary indices, whitespace separated, any number of lines>
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .spaceform import Spaceform, SpaceformDomainError

CONFORMAL = ("flat", "poincare_disk", "stereographic")
AFFINE = ("flat", "klein", "gnomonic")
CHARTS = ("flat", "poincare_disk", "stereographic", "klein", "gnomonic")


class MeshFormatError(ValueError):
    def __init__(self, message, lineno=None):
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(f"SGLMESH parse error: {where}{message}")
        self.lineno = lineno


class ChartError(ValueError):
    pass


class IneligibleDomainError(ValueError):
    """The domain violates the hull/hemisphere hypotheses of the gap bound."""


def _kappa(k: float) -> float:
    return math.sqrt(abs(k))


def check_chart(chart: str, k: float):
    if chart not in CHARTS:
        raise ChartError(f"unknown chart {chart!r}")
    if chart == "flat" and k != 0:
        raise ChartError("flat chart needs k = 0")
    if chart in ("poincare_disk", "klein") and not k < 0:
        raise ChartError(f"{chart} chart needs k < 0")
    if chart in ("stereographic", "gnomonic") and not k > 0:
        raise ChartError(f"{chart} chart needs k > 0")


def conformal_chart(k: float) -> str:
    return "flat" if k == 0 else ("poincare_disk" if k < 0 else "stereographic")


def affine_chart(k: float) -> str:
    return "flat" if k == 0 else ("klein" if k < 0 else "gnomonic")


def _sq(pts):
    return np.sum(pts * pts, axis=-1)


def to_conformal(chart: str, k: float, pts):
    pts = np.asarray(pts, dtype=float)
    c2 = abs(k)
    if chart in CONFORMAL:
        return pts.copy()
    if chart == "klein":
        s = np.clip(1.0 - c2 * _sq(pts), 0.0, None)
        return pts / (1.0 + np.sqrt(s))[..., None]
    if chart == "gnomonic":
        return pts / (1.0 + np.sqrt(1.0 + c2 * _sq(pts)))[..., None]
    raise ChartError(f"unknown chart {chart!r}")


def from_conformal(chart: str, k: float, pts):
    pts = np.asarray(pts, dtype=float)
    c2 = abs(k)
    if chart in CONFORMAL:
        return pts.copy()
    if chart == "klein":
        return 2 * pts / (1.0 + c2 * _sq(pts))[..., None]
    if chart == "gnomonic":
        return 2 * pts / (1.0 - c2 * _sq(pts))[..., None]
    raise ChartError(f"unknown chart {chart!r}")


def convert(pts, k: float, src: str, dst: str):
    return from_conformal(dst, k, to_conformal(src, k, pts))


def conformal_factor(k: float, pts):
    """Metric factor lambda with g = lambda^2 |dx|^2 in the conformal chart."""
    pts = np.asarray(pts, dtype=float)
    if k == 0:
        return np.ones(pts.shape[:-1])
    return 2.0 / (1.0 + k * _sq(pts))


def _check_in_chart(chart, k, pts):
    if chart in ("poincare_disk", "klein"):
        if np.any(abs(k) * _sq(np.asarray(pts, dtype=float)) >= 1.0):
            raise ChartError("point outside the hyperbolic chart disk")


def _conformal_distance(k, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = np.sqrt(_sq(a - b))
    if k == 0:
        return d
    c = _kappa(k)
    if k < 0:
        den = np.sqrt((1 - c * c * _sq(a)) * (1 - c * c * _sq(b)))
        return 2.0 / c * np.arcsinh(c * d / den)
    den = np.sqrt((1 + c * c * _sq(a)) * (1 + c * c * _sq(b)))
    return 2.0 / c * np.arcsin(np.clip(c * d / den, 0.0, 1.0))


def geodesic_distance(chart: str, k: float, a, b):
    """Model-space distance between chart points (broadcasts over leading axes)."""
    check_chart(chart, k)
    _check_in_chart(chart, k, a)
    _check_in_chart(chart, k, b)
    out = _conformal_distance(k, to_conformal(chart, k, a), to_conformal(chart, k, b))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# isometries moving a point to the chart centre; their differential at the
# point is a positive multiple of the identity, so chart-axis frames at p
# map to chart-axis frames at the origin


def _c(pts):
    pts = np.asarray(pts, dtype=float)
    return pts[..., 0] + 1j * pts[..., 1]


def _r(z):
    return np.stack([z.real, z.imag], axis=-1)


def recenter(k: float, p, pts):
    """Conformal-chart image of ``pts`` under the isometry taking p to 0."""
    if k == 0:
        return np.asarray(pts, dtype=float) - np.asarray(p, dtype=float)
    c = _kappa(k)
    w, P = c * _c(pts), c * complex(*np.asarray(p, dtype=float))
    if k < 0:
        u = (w - P) / (1 - np.conj(P) * w)
    else:
        u = (w - P) / (1 + np.conj(P) * w)
    return _r(u) / c


def uncenter(k: float, p, pts):
    """Inverse of :func:`recenter`."""
    if k == 0:
        return np.asarray(pts, dtype=float) + np.asarray(p, dtype=float)
    c = _kappa(k)
    u, P = c * _c(pts), c * complex(*np.asarray(p, dtype=float))
    if k < 0:
        w = (u + P) / (1 + np.conj(P) * u)
    else:
        w = (u + P) / (1 - np.conj(P) * u)
    return _r(w) / c


def _radius_from_center(k, u):
    """Distance from the origin of conformal points u (and |u|)."""
    t = np.sqrt(_sq(u))
    if k == 0:
        return t, t
    c = _kappa(k)
    if k < 0:
        return 2.0 / c * np.arctanh(np.clip(c * t, 0.0, 1 - 1e-16)), t
    return 2.0 / c * np.arctan(c * t), t


def log_map(k: float, p, x):
    """exp_p^{-1}(x) in the chart-axis orthonormal frame at p (conformal chart)."""
    u = recenter(k, p, x)
    d, t = _radius_from_center(k, u)
    with np.errstate(invalid="ignore", divide="ignore"):
        direction = np.where(t[..., None] > 0, u / t[..., None], 0.0)
    return direction * d[..., None], d


def exp_map(k: float, p, v):
    """exp_p(v) for v in the chart-axis orthonormal frame at p (conformal chart)."""
    v = np.asarray(v, dtype=float)
    d = np.sqrt(_sq(v))
    if k == 0:
        t = d
    else:
        c = _kappa(k)
        t = (np.tanh(c * d / 2) if k < 0 else np.tan(c * d / 2)) / c
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(d[..., None] > 0, v / d[..., None] * t[..., None], 0.0)
    return uncenter(k, p, u)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeshDomain:
    chart: str
    k: float
    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    name: str = ""

    def __post_init__(self):
        check_chart(self.chart, self.k)
        v = np.asarray(self.vertices, dtype=float)
        t = np.asarray(self.triangles, dtype=np.int64)
        b = np.asarray(self.boundary, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must be an (nv, 2) array")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError("triangles must be an (nt, 3) array")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle index out of range")
        if b.size and (b.min() < 0 or b.max() >= len(v)):
            raise ValueError("boundary index out of range")
        area = _signed_areas(v, t)
        if np.all(area < 0):
            t = t[:, [0, 2, 1]]
            area = -area
        if np.any(area <= 1e-14):
            raise ValueError("degenerate or inconsistently oriented triangles")
        _check_in_chart(self.chart, self.k, v)
        if self.k > 0 and np.any(self.k * _sq(to_conformal(self.chart, self.k, v)) >= 1.0):
            raise ChartError("k > 0 domain must lie in the open hemisphere about the chart centre")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "boundary", b)

    @property
    def sf(self) -> Spaceform:
        return Spaceform(2, self.k)

    def to_chart(self, chart: str) -> "MeshDomain":
        if chart == self.chart:
            return self
        pts = convert(self.vertices, self.k, self.chart, chart)
        return MeshDomain(chart, self.k, pts, self.triangles, self.boundary, self.name)

    def conformal(self) -> "MeshDomain":
        return self.to_chart(conformal_chart(self.k))

    def affine(self) -> "MeshDomain":
        return self.to_chart(affine_chart(self.k))

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        """Vertices on edges that belong to exactly one triangle."""
        t = self.triangles
        edges = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        uniq, counts = np.unique(edges, axis=0, return_counts=True)
        return np.unique(uniq[counts == 1].ravel())

    @cached_property
    def interior_nodes(self) -> np.ndarray:
        mask = np.ones(len(self.vertices), dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    @cached_property
    def chart_areas(self) -> np.ndarray:
        return _signed_areas(self.vertices, self.triangles)

    def quadrature(self):
        """Edge-midpoint rule: points (nt, 3, 2), barycentric weights (3, 3), metric weights (nt, 3).

        Exact for quadratics in chart coordinates; metric weights carry the
        conformal factor squared.
        """
        if self.chart not in CONFORMAL:
            raise ChartError("quadrature needs a conformal chart")
        v, t = self.vertices, self.triangles
        bary = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
        pts = np.einsum("qa,tad->tqd", bary, v[t])
        w = self.chart_areas[:, None] / 3.0 * conformal_factor(self.k, pts) ** 2
        return pts, bary, w

    @cached_property
    def metric_areas(self) -> np.ndarray:
        return self.conformal().quadrature()[2].sum(axis=1)

    @property
    def area(self) -> float:
        return float(self.metric_areas.sum())

    @cached_property
    def mesh_size(self) -> float:
        v, t = self.vertices, self.triangles
        e = np.concatenate([v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 1]], v[t[:, 0]] - v[t[:, 2]]])
        return float(np.sqrt(_sq(e)).max())

    def contains(self, pts) -> np.ndarray:
        """Point-in-mesh test (chart coordinates of this mesh)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        v = self.vertices[self.triangles]
        a, b, c = v[:, 0], v[:, 1], v[:, 2]
        out = np.zeros(len(pts), dtype=bool)
        for i, x in enumerate(pts):
            d1 = _cross(b - a, x - a)
            d2 = _cross(c - b, x - b)
            d3 = _cross(a - c, x - c)
            out[i] = np.any((d1 >= -1e-14) & (d2 >= -1e-14) & (d3 >= -1e-14))
        return out


def _cross(u, w):
    return u[..., 0] * w[..., 1] - u[..., 1] * w[..., 0]


def _signed_areas(v, t):
    a = v[t[:, 1]] - v[t[:, 0]]
    b = v[t[:, 2]] - v[t[:, 0]]
    return 0.5 * _cross(a, b)


# ---------------------------------------------------------------------------
# file format


def write_mesh(mesh: MeshDomain, path):
    lines = [f"SGLMESH 1 {mesh.chart} {mesh.k!r}", f"{len(mesh.vertices)} {len(mesh.triangles)}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    lines.append(f"B {len(mesh.boundary)}")
    b = mesh.boundary.tolist()
    for s in range(0, len(b), 20):
        lines.append(" ".join(str(i) for i in b[s:s + 20]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path, name: str | None = None) -> MeshDomain:
    text = Path(path).read_text()
    return parse_mesh(text, name=name if name is not None else Path(path).stem)


def parse_mesh(text: str, name: str = "") -> MeshDomain:
    lines = text.splitlines()
    pos = 0

    def next_line():
        nonlocal pos
        while pos < len(lines):
            pos += 1
            s = lines[pos - 1].strip()
            if s:
                return pos, s.split()
        raise MeshFormatError("unexpected end of file", pos)

    lineno, head = next_line()
    if len(head) != 4 or head[0] != "SGLMESH":
        raise MeshFormatError("header must read 'SGLMESH 1 <chart> <k>'", lineno)
    if head[1] != "1":
        raise MeshFormatError(f"unsupported version {head[1]!r}", lineno)
    chart = head[2]
    try:
        k = float(head[3])
    except ValueError:
        raise MeshFormatError(f"curvature {head[3]!r} is not a number", lineno) from None
    try:
        check_chart(chart, k)
    except ChartError as exc:
        raise MeshFormatError(str(exc), lineno) from None
    lineno, counts = next_line()
    try:
        nv, nt = (int(x) for x in counts)
    except ValueError:
        raise MeshFormatError("expected '<nv> <nt>'", lineno) from None
    verts = np.empty((nv, 2))
    for i in range(nv):
        lineno, tok = next_line()
        try:
            if len(tok) != 2:
                raise ValueError
            verts[i] = [float(tok[0]), float(tok[1])]
        except ValueError:
            raise MeshFormatError("expected vertex 'x y'", lineno) from None
    tris = np.empty((nt, 3), dtype=np.int64)
    for i in range(nt):
        lineno, tok = next_line()
        try:
            if len(tok) != 3:
                raise ValueError
            tris[i] = [int(x) for x in tok]
        except ValueError:
            raise MeshFormatError("expected triangle 'i j k'", lineno) from None
        if tris[i].min() < 0 or tris[i].max() >= nv:
            raise MeshFormatError("triangle index out of range", lineno)
    lineno, tok = next_line()
    if tok[0] != "B" or len(tok) < 2:
        raise MeshFormatError("expected 'B <count>'", lineno)
    try:
        nb = int(tok[1])
        bnd = [int(x) for x in tok[2:]]
        while len(bnd) < nb:
            lineno, tok = next_line()
            bnd.extend(int(x) for x in tok)
    except MeshFormatError:
        raise
    except ValueError:
        raise MeshFormatError("boundary indices must be integers", lineno) from None
    if len(bnd) != nb:
        raise MeshFormatError(f"expected {nb} boundary indices, got {len(bnd)}", lineno)
    try:
        return MeshDomain(chart, k, verts, tris, np.array(bnd, dtype=np.int64), name)
    except (ValueError, ChartError) as exc:
        raise MeshFormatError(str(exc)) from None


# ---------------------------------------------------------------------------
# hull and diameter


def _monotone_chain(pts: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Indices of the strict convex hull, counter-clockwise (Andrew's algorithm)."""
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    scale = max(float(np.abs(pts).max()), 1e-300)

    def build(seq):
        out = []
        for i in seq:
            while len(out) >= 2:
                o, a = pts[out[-2]], pts[out[-1]]
                if _cross(a - o, pts[i] - o) <= tol * scale * scale:
                    out.pop()
                else:
                    break
            out.append(i)
        return out

    lower = build(order)
    upper = build(order[::-1])
    return np.array(lower[:-1] + upper[:-1], dtype=np.int64)


@dataclass(frozen=True)
class Hull:
    """Geodesic convex hull: a convex polygon in the geodesic-affine chart."""

    k: float
    polygon: np.ndarray  # affine-chart vertices, counter-clockwise
    source_chart: str
    mesh: MeshDomain = field(repr=False)

    @property
    def affine_chart(self) -> str:
        return affine_chart(self.k)

    def vertices_in(self, chart: str) -> np.ndarray:
        return convert(self.polygon, self.k, self.affine_chart, chart)

    def contains_affine(self, x, tol: float = 1e-12) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        P = self.polygon
        e = np.roll(P, -1, axis=0) - P
        rel = x[:, None, :] - P[None, :, :]
        s = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
        scale = max(float(np.abs(P).max()), 1e-300)
        return np.all(s >= -tol * scale * scale, axis=1)

    def contains(self, x, chart: str | None = None, tol: float = 1e-12) -> np.ndarray:
        chart = chart or self.source_chart
        return self.contains_affine(convert(np.atleast_2d(x), self.k, chart, self.affine_chart), tol)

    def project_affine(self, x) -> np.ndarray:
        """Euclidean nearest point of the polygon (affine chart)."""
        x = np.asarray(x, dtype=float)
        if self.contains_affine(x)[0]:
            return x.copy()
        P = self.polygon
        Q = np.roll(P, -1, axis=0)
        e = Q - P
        t = np.clip(np.sum((x - P) * e, axis=1) / np.sum(e * e, axis=1), 0.0, 1.0)
        cand = P + t[:, None] * e
        return cand[np.argmin(_sq(cand - x))]

    def diameter(self) -> float:
        return _pairwise_max(self.k, self.vertices_in(conformal_chart(self.k)))

    def area(self) -> float:
        centre = self.polygon.mean(axis=0)
        p = convert(centre[None, :], self.k, self.affine_chart, conformal_chart(self.k))[0]
        r = self.max_distance(p) * (1 + 1e-9)
        return float(polar_measure(self, p, np.array([r]))[0][0])

    def max_distance(self, p) -> float:
        """Largest distance from conformal-chart point p to the hull."""
        verts = self.vertices_in(conformal_chart(self.k))
        return float(np.max(_conformal_distance(self.k, verts, np.asarray(p, dtype=float)[None, :])))

    def as_mesh(self) -> MeshDomain:
        """Fan triangulation of the hull polygon, in the source chart."""
        centre = self.polygon.mean(axis=0)
        pts = np.vstack([self.polygon, centre])
        m = len(self.polygon)
        tris = np.array([[i, (i + 1) % m, m] for i in range(m)])
        mesh = MeshDomain(self.affine_chart, self.k, pts, tris, np.arange(m), name="hull")
        return mesh.to_chart(self.source_chart)


def _pairwise_max(k, pts) -> float:
    best = 0.0
    for i in range(len(pts)):
        d = _conformal_distance(k, pts[i][None, :], pts[i + 1:])
        if d.size:
            best = max(best, float(d.max()))
    return best


def convex_hull(mesh: MeshDomain, injectivity_radius: float | None = None) -> Hull:
    """Geodesic convex hull; k > 0 hulls are checked against the hemisphere hypotheses."""
    aff = convert(mesh.vertices, mesh.k, mesh.chart, affine_chart(mesh.k))
    idx = _monotone_chain(aff)
    hull = Hull(mesh.k, aff[idx], mesh.chart, mesh)
    if mesh.k > 0:
        check_hemisphere_conditions(hull, injectivity_radius)
    return hull


def check_hemisphere_conditions(hull: Hull, injectivity_radius: float | None = None):
    k = hull.k
    cap = math.pi / (2 * math.sqrt(k))
    inj = math.pi / math.sqrt(k) if injectivity_radius is None else injectivity_radius
    d = hull.diameter()
    if not d < min(cap, inj):
        raise IneligibleDomainError(
            f"hull diameter {d:.6g} violates diam < min(pi/(2 sqrt k), inj) = {min(cap, inj):.6g}"
        )
    half = Spaceform(2, k).total_volume / 2
    a = hull.area()
    if not a < half:
        raise IneligibleDomainError(f"hull area {a:.6g} is not below half the sphere {half:.6g}")


def diameter(mesh: MeshDomain) -> float:
    """Max geodesic distance between mesh points, attained at hull vertices."""
    aff = convert(mesh.vertices, mesh.k, mesh.chart, affine_chart(mesh.k))
    idx = _monotone_chain(aff)
    pts = to_conformal(mesh.chart, mesh.k, mesh.vertices[idx])
    return _pairwise_max(mesh.k, pts)


# ---------------------------------------------------------------------------
# volume transfer sigma(r): |B_sigma(q)|_N = |B_r(p) cap hull|


def _geodesic_to_affine(k, r):
    r = np.asarray(r, dtype=float)
    if k == 0:
        return r
    c = _kappa(k)
    if k < 0:
        return np.tanh(c * r) / c
    return np.where(c * r < math.pi / 2, np.tan(np.minimum(c * r, math.pi / 2 - 1e-15)) / c, np.inf)


def _sector_primitive(k, delta, psi):
    """Metric area of the geodesic triangle (0, foot, point at angle psi) on a line at distance delta."""
    if k == 0:
        return 0.5 * delta * delta * np.tan(psi)
    c2 = abs(k)
    if k < 0:
        return (np.arcsin(np.clip(np.sin(psi) / np.sqrt(1 - c2 * delta * delta), -1, 1)) - psi) / c2
    return (psi - np.arcsin(np.sin(psi) / np.sqrt(1 + c2 * delta * delta))) / c2


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def polar_measure(hull: Hull, p, radii):
    """|B_r(p) cap hull| and the angular measure of directions leaving B_r inside the hull.

    Exact: in the affine chart recentred at p the hull is a convex polygon
    around the origin, and each edge sector has a closed-form area.
    """
    k = hull.k
    conf = conformal_chart(k)
    poly_c = hull.vertices_in(conf)
    p = np.asarray(p, dtype=float)
    centred = from_conformal(affine_chart(k), k, recenter(k, p, poly_c))
    a = centred
    b = np.roll(centred, -1, axis=0)
    e = b - a
    len2 = _sq(e)
    cr = _cross(a, b)  # > 0 for an edge seen counter-clockwise from the origin
    delta = np.abs(cr) / np.sqrt(len2)
    scale = max(float(np.abs(centred).max()), 1e-300)
    if np.any(cr < -1e-12 * scale * scale):
        raise ValueError("point lies outside the hull")
    keep = delta > 1e-14 * scale
    a, b, e, delta, len2 = a[keep], b[keep], e[keep], delta[keep], len2[keep]
    t = -np.sum(a * e, axis=1) / len2
    foot = a + t[:, None] * e
    phi = np.arctan2(foot[:, 1], foot[:, 0])
    psi_a = _wrap(np.arctan2(a[:, 1], a[:, 0]) - phi)
    span = _wrap(np.arctan2(b[:, 1], b[:, 0]) - np.arctan2(a[:, 1], a[:, 0]))
    span = np.where(span <= 0, span + 2 * np.pi, span)
    psi_b = psi_a + span

    radii = np.asarray(radii, dtype=float)
    tr = _geodesic_to_affine(k, radii)[:, None]
    sf = Spaceform(2, k)
    G = np.where(np.isfinite(radii), np.asarray(sf.volume(np.minimum(radii, sf.r_max))) / (2 * np.pi), 0.0)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(tr > delta[None, :], np.arccos(np.clip(delta[None, :] / tr, -1, 1)), 0.0)
    lo = np.maximum(psi_a[None, :], -c)
    hi = np.minimum(psi_b[None, :], c)
    inner = np.clip(hi - lo, 0.0, None)
    has = inner > 0
    area_in = np.where(has, _sector_primitive(k, delta[None, :], np.where(has, hi, 0))
                       - _sector_primitive(k, delta[None, :], np.where(has, lo, 0)), 0.0)
    outside_angle = span[None, :] - inner
    G = np.where(np.isfinite(G), G, 0.0)
    measure = np.sum(area_in + G * outside_angle, axis=1)
    theta = np.sum(outside_angle, axis=1)
    return measure, theta


@dataclass(frozen=True)
class SigmaProfile:
    """sigma(r) with sigma'(r); evaluated exactly from the enclosed-measure function.

    ``measure(r)`` returns (|B_r(p) cap hull|, its r-derivative); the grid
    samples are kept for reporting and export.
    """

    grid: np.ndarray
    sigma: np.ndarray
    dsigma: np.ndarray
    sf: Spaceform
    hull_measure: float
    measure: object = field(repr=False, compare=False)
    slope0: float = 1.0
    p: np.ndarray | None = None
    table_points: int = 8001

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    @cached_property
    def _table(self):
        # m is C^1 in r (m' = sn_k * angular measure is continuous), so a
        # Hermite table with exact slopes is accurate even at polygon kinks
        t = np.linspace(0.0, self.r_max, self.table_points)
        m, dm = self.measure(t)
        return CubicHermiteSpline(t, m, dm)

    def evaluate(self, r, exact: bool = False):
        r = np.asarray(r, dtype=float)
        rc = np.clip(r, 0.0, self.r_max)
        if exact or self.r_max == 0:
            m, dm = self.measure(rc.ravel())
        else:
            tab = self._table
            m, dm = tab(rc.ravel()), tab(rc.ravel(), 1)
        s = np.asarray(self.sf.radius(np.minimum(m, self.sf.total_volume)), dtype=float).reshape(r.shape)
        area = np.asarray(self.sf.area(s), dtype=float).reshape(r.shape)
        dm = np.asarray(dm, dtype=float).reshape(r.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            ds = np.where(area > 0, dm / area, self.slope0)
        ds = np.where(r >= self.r_max, 0.0, ds)
        s = np.where(r <= 0, 0.0, s)
        return s, ds

    def __call__(self, r):
        return self.evaluate(r)[0]

    def derivative(self, r):
        return self.evaluate(r)[1]


def _make_profile(sf, measure, r_max, points, slope0, p=None):
    grid = np.linspace(0.0, r_max, points)
    total = float(measure(np.array([r_max]))[0][0])
    prof = SigmaProfile(grid, grid, grid, sf, total, measure, slope0, p)
    s, ds = prof.evaluate(grid, exact=True)
    ds[-1] = prof.evaluate(grid[-1:] * (1 - 1e-12), exact=True)[1][0]
    return SigmaProfile(grid, s, ds, sf, total, measure, slope0, p)


def sigma_profile(hull: Hull, p, sf: Spaceform | None = None, points: int = 2001,
                  chart: str | None = None) -> SigmaProfile:
    """sigma(r) = m_k^{-1}(|B_r(p) cap hull|) on [0, max_r], p in ``chart`` coordinates."""
    k = hull.k
    sf = Spaceform(2, k) if sf is None else sf
    if sf.n != 2:
        raise ValueError("mesh domains are two-dimensional")
    chart = chart or hull.source_chart
    p = np.asarray(p, dtype=float)
    if not hull.contains(p[None, :], chart, tol=1e-10)[0]:
        raise ValueError("base point lies outside the hull")
    pc = to_conformal(chart, k, p[None, :])[0]
    ambient = Spaceform(2, k)

    def measure(r):
        m, theta = polar_measure(hull, pc, r)
        return m, np.asarray(ambient.sn(r)) * theta

    theta0 = polar_measure(hull, pc, np.array([0.0]))[1][0]
    # near r = 0 the enclosed measure is theta0 r^2 / 2
    slope0 = math.sqrt(theta0 / (2 * math.pi))
    return _make_profile(sf, measure, hull.max_distance(pc), points, slope0, pc)


def warped_sigma_profile(ws, R: float, sf: Spaceform, points: int = 2001) -> SigmaProfile:
    """sigma for the geodesic disk B_R(pole) of a warped surface, base point at the pole."""

    def measure(r):
        r = np.minimum(r, R)
        return 2 * math.pi * np.asarray(ws.Phi(r)), 2 * math.pi * np.asarray(ws.phi(r))

    return _make_profile(sf, measure, R, points, 1.0)


def c1_constant(sigma: SigmaProfile, sf: Spaceform, r_range, points: int = 4001) -> float:
    """max over r in r_range of max(sigma'(r), sn_k(sigma(r))/sn_k(r)); r = 0 uses the limit sigma'(0)."""
    lo, hi = (float(x) for x in r_range)
    if not hi >= lo or hi <= 0:
        raise ValueError("empty radius range")
    hi = min(hi, sigma.r_max * (1 - 1e-12))
    r = np.linspace(lo, hi, points)
    s, ds = sigma.evaluate(r, exact=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(r > 0, np.asarray(sf.sn(s)) / np.asarray(sf.sn(np.maximum(r, 1e-300))), ds)
    return float(max(np.max(ds), np.max(ratio)))


def distance_range(mesh: MeshDomain, p, use_hull: bool = False, hull: Hull | None = None):
    """[min, max] of r_p over the mesh (or over its hull); p in mesh chart coordinates."""
    p = np.asarray(p, dtype=float)
    pc = to_conformal(mesh.chart, mesh.k, p[None, :])[0]
    if use_hull:
        hull = hull or convex_hull(mesh)
        return 0.0, hull.max_distance(pc)
    verts = to_conformal(mesh.chart, mesh.k, mesh.vertices)
    d = _conformal_distance(mesh.k, verts, pc[None, :])
    lo = 0.0 if mesh.contains(p[None, :])[0] else float(d.min())
    return lo, float(d.max())

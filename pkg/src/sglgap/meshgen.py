"""Built-in structured meshes for the test corpus.

Ring meshes put 6i vertices on ring i, so they keep the 6-fold rotational
symmetry of the hexagonal pattern exactly; grids use one diagonal direction,
which is centrally symmetric.
"""

from __future__ import annotations

import math

import numpy as np

from .mesh_domain import MeshDomain, convert


def rings_for(target_vertices: int) -> int:
    """Ring count N with 1 + 3N(N+1) closest to the target."""
    return max(1, int(round((-3 + math.sqrt(9 + 12 * (target_vertices - 1))) / 6)))


def _ring_topology(N: int):
    radii_idx = [0]
    angles = [0.0]
    start = [0]
    for i in range(1, N + 1):
        start.append(len(angles))
        for j in range(6 * i):
            radii_idx.append(i)
            angles.append(2 * math.pi * j / (6 * i))
    tris = []
    for i in range(1, N + 1):
        outer = start[i]
        inner = start[i - 1]
        n_out, n_in = 6 * i, max(6 * (i - 1), 1)
        for s in range(6):
            for t in range(i):
                o0 = outer + (s * i + t) % n_out
                o1 = outer + (s * i + t + 1) % n_out
                i0 = inner + ((s * (i - 1) + t) % n_in if i > 1 else 0)
                tris.append((o0, o1, i0))
            for t in range(i - 1):
                i0 = inner + (s * (i - 1) + t) % n_in
                i1 = inner + (s * (i - 1) + t + 1) % n_in
                o1 = outer + (s * i + t + 1) % n_out
                tris.append((i0, o1, i1))
    boundary = np.arange(start[N], start[N] + 6 * N)
    return np.array(radii_idx) / N, np.array(angles), np.array(tris), boundary


def _ring_mesh(chart, k, radial_map, N, name, scale=(1.0, 1.0)):
    frac, ang, tris, bnd = _ring_topology(N)
    rho = radial_map(frac)
    pts = np.stack([scale[0] * rho * np.cos(ang), scale[1] * rho * np.sin(ang)], axis=1)
    return MeshDomain(chart, k, pts, tris, bnd, name)


def disk(R: float = 1.0, target_vertices: int = 10000, rings: int | None = None) -> MeshDomain:
    """Flat disk of radius R."""
    N = rings or rings_for(target_vertices)
    return _ring_mesh("flat", 0.0, lambda f: R * f, N, f"disk-R{R:g}")


def ellipse(a: float = 1.5, b: float = 1.0, target_vertices: int = 10000,
            rings: int | None = None) -> MeshDomain:
    N = rings or rings_for(target_vertices)
    return _ring_mesh("flat", 0.0, lambda f: f, N, f"ellipse-{a:g}x{b:g}", scale=(a, b))


def geodesic_disk(k: float, R: float, target_vertices: int = 10000,
                  rings: int | None = None) -> MeshDomain:
    """Geodesic disk of radius R about the chart centre, in the conformal chart."""
    N = rings or rings_for(target_vertices)
    if k == 0:
        return disk(R, rings=N)
    c = math.sqrt(abs(k))
    if k < 0:
        return _ring_mesh("poincare_disk", k, lambda f: np.tanh(c * R * f / 2) / c, N,
                          f"hdisk-k{k:g}-R{R:g}")
    if not R < math.pi / (2 * c):
        raise ValueError("spherical cap must lie in the open hemisphere")
    return _ring_mesh("stereographic", k, lambda f: np.tan(c * R * f / 2) / c, N,
                      f"cap-k{k:g}-R{R:g}")


def rectangle(a: float = 1.0, b: float = 1.0, target_vertices: int = 10000,
              nx: int | None = None, ny: int | None = None) -> MeshDomain:
    """Flat rectangle [-a/2, a/2] x [-b/2, b/2] on a structured grid."""
    if nx is None or ny is None:
        # cells roughly square: (nx+1)(ny+1) ~ target
        nx = max(1, int(round(math.sqrt(target_vertices * a / b))) - 1)
        ny = max(1, int(round(nx * b / a)))
    xs = np.linspace(-a / 2, a / 2, nx + 1)
    ys = np.linspace(-b / 2, b / 2, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    idx = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    v00, v10 = idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel()
    v01, v11 = idx[1:, :-1].ravel(), idx[1:, 1:].ravel()
    tris = np.concatenate([np.stack([v00, v10, v11], 1), np.stack([v00, v11, v01], 1)])
    bnd = np.concatenate([idx[0, :-1], idx[:-1, -1], idx[-1, :0:-1], idx[:0:-1, 0]])
    name = "square" if a == b else f"rect-{a:g}x{b:g}"
    return MeshDomain("flat", 0.0, pts, tris, bnd, name)


def square(side: float = 1.0, target_vertices: int = 10000, n: int | None = None) -> MeshDomain:
    return rectangle(side, side, target_vertices, n, n)


def _subdivided_fan(poly: np.ndarray, m: int, centre=(0.0, 0.0)):
    """Triangulate the fan (centre, poly[j], poly[j+1]) with m subdivisions per edge."""
    keys: dict[tuple[int, int], int] = {}
    pts = []
    tris = []
    c = np.asarray(centre, dtype=float)
    scale = 10 ** 10

    def vid(x):
        key = (int(round(x[0] * scale)), int(round(x[1] * scale)))
        if key not in keys:
            keys[key] = len(pts)
            pts.append(x)
        return keys[key]

    P = len(poly)
    for j in range(P):
        a, b = poly[j], poly[(j + 1) % P]
        grid = {}
        for s in range(m + 1):
            for t in range(m + 1 - s):
                grid[s, t] = vid(c + (s * (a - c) + t * (b - c)) / m)
        for s in range(m):
            for t in range(m - s):
                tris.append((grid[s, t], grid[s + 1, t], grid[s, t + 1]))
                if s + t < m - 1:
                    tris.append((grid[s + 1, t], grid[s + 1, t + 1], grid[s, t + 1]))
    pts = np.array(pts)
    bnd = []
    for j in range(P):
        a, b = poly[j], poly[(j + 1) % P]
        for t in range(m):
            bnd.append(vid(a + (b - a) * t / m))
    return pts, np.array(tris), np.array(bnd)


def hyperbolic_polygon(sides: int = 5, circumradius: float = 1.0, k: float = -1.0,
                       target_vertices: int = 10000, m: int | None = None) -> MeshDomain:
    """Regular geodesic polygon centred at the origin, built in the Klein chart
    (geodesic edges are straight there) and returned in the Poincare chart."""
    c = math.sqrt(-k)
    if m is None:
        m = max(2, int(round(math.sqrt(2 * target_vertices / sides))))
    rho = math.tanh(c * circumradius) / c
    ang = math.pi / 2 + 2 * math.pi * np.arange(sides) / sides
    poly = np.stack([rho * np.cos(ang), rho * np.sin(ang)], axis=1)
    pts, tris, bnd = _subdivided_fan(poly, m)
    pts = convert(pts, k, "klein", "poincare_disk")
    return MeshDomain("poincare_disk", k, pts, tris, bnd, f"hpoly{sides}-k{k:g}-R{circumradius:g}")


def polygon(vertices, chart: str = "flat", k: float = 0.0, m: int = 8,
            centre=(0.0, 0.0), name: str = "polygon") -> MeshDomain:
    """Polygon star-shaped about ``centre`` (fan triangulation, refined m times per edge)."""
    poly = np.asarray(vertices, dtype=float)
    pts, tris, bnd = _subdivided_fan(poly, m, centre)
    return MeshDomain(chart, k, pts, tris, bnd, name)


def star(points: int = 5, outer: float = 0.6, inner: float = 0.25, chart: str = "klein",
         k: float = -1.0, m: int = 6) -> MeshDomain:
    ang = math.pi / 2 + math.pi * np.arange(2 * points) / points
    rad = np.where(np.arange(2 * points) % 2 == 0, outer, inner)
    poly = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)
    return polygon(poly, chart, k, m, name=f"star{points}")


def l_shape(m: int = 10) -> MeshDomain:
    """Union of three unit squares: [0,2]x[0,1] and [0,1]x[1,2]."""
    poly = np.array([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]], dtype=float)
    # star-shaped about (0.5, 0.5)
    return polygon(poly, m=m, centre=(0.5, 0.5), name="l-shape")


GENERATORS = {
    "disk": disk,
    "square": square,
    "rectangle": rectangle,
    "ellipse": ellipse,
    "hyperbolic-polygon": hyperbolic_polygon,
    "spherical-cap": lambda R=0.6, k=1.0, **kw: geodesic_disk(k, R, **kw),
    "geodesic-disk": geodesic_disk,
}

"""Escape/visibility experiment on surfaces of revolution and Gauss-Bonnet checks on graph surfaces."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..curvature import GraphSurfaceMetric
from .flow import Trajectory, connect_geodesic, integrate_geodesic, trapped_ray_check
from .surfaces import GeodesicState, GraphSurface, RevolutionSurface, angle_between

MINZ_TOL = 1e-6

# ---------------------------------------------------------------------------
# escape experiment
# ---------------------------------------------------------------------------


@dataclass
class VisibilityRow:
    n: int
    a: float
    b: float
    z1: float
    z2: float
    min_z: float
    max_z: float
    s_max_fraction: float
    endpoint_error: float

    @property
    def above_endpoints(self) -> bool:
        return self.min_z >= min(self.z1, self.z2) - MINZ_TOL


@dataclass
class VisibilityReport:
    rows: list[VisibilityRow]
    alpha0: float
    clairaut: float

    @property
    def min_z(self) -> list[float]:
        return [r.min_z for r in self.rows]

    @property
    def strictly_increasing(self) -> bool:
        m = self.min_z
        return all(b > a for a, b in zip(m, m[1:]))

    @property
    def passes(self) -> bool:
        return self.strictly_increasing and all(r.above_endpoints for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "a_n", "b_n", "z_gamma1", "z_gamma2", "min_z", "max_z", "argmax_fraction", "endpoint_error"])
        for r in self.rows:
            w.writerow([r.n, repr(r.a), repr(r.b), repr(r.z1), repr(r.z2), repr(r.min_z), repr(r.max_z),
                        repr(r.s_max_fraction), repr(r.endpoint_error)])
        return buf.getvalue()


def visibility_experiment(
    surface: RevolutionSurface,
    p: tuple[float, float],
    alpha0: float,
    arcs: Sequence[tuple[float, float]],
    *,
    tol: float = 1e-8,
    samples: int = 4001,
) -> VisibilityReport:
    """Connect ``gamma1(a_n)`` to ``gamma2(b_n)`` and record how low each connection dips.

    ``gamma1`` and ``gamma2`` leave ``p`` at angles ``+alpha0`` and
    ``-alpha0`` to the meridian. Both must pass :func:`trapped_ray_check`.
    The lowest point of a connecting segment is taken over ``samples`` dense
    points plus every accepted step end.
    """
    L = max(max(a, b) for a, b in arcs)
    for sgn in (1.0, -1.0):
        rep = trapped_ray_check(surface, p[0], sgn * alpha0, length=L)
        if not rep.escapes:
            raise ValueError(f"ray at angle {sgn * alpha0!r} does not escape")
    g1 = integrate_geodesic(surface, GeodesicState(p[0], p[1], alpha0), L, 1e-11)
    g2 = integrate_geodesic(surface, GeodesicState(p[0], p[1], -alpha0), L, 1e-11)
    rows = []
    for n, (a, b) in enumerate(arcs, start=1):
        x = surface.coords(g1(a))
        y = surface.coords(g2(b))
        seg = connect_geodesic(surface, x, y, tol)
        traj = seg.trajectory
        ss, pts = traj.coords(samples)
        zs = [pt[0] for pt in pts] + [st.u for st in traj.states]
        ss_all = list(ss) + [st.s for st in traj.states]
        i_max = max(range(len(zs)), key=lambda i: zs[i])
        rows.append(
            VisibilityRow(n, a, b, x[0], y[0], min(zs), zs[i_max], ss_all[i_max] / traj.length, seg.endpoint_error)
        )
    return VisibilityReport(rows, alpha0, surface.phi.jet(p[0])[0] * math.sin(alpha0))


# ---------------------------------------------------------------------------
# Gauss-Bonnet on graph surfaces
# ---------------------------------------------------------------------------


@dataclass
class Side:
    """A polygonal sample of a triangle side with its end tangents (chart components)."""

    points: np.ndarray
    v_start: tuple[float, float]
    v_end: tuple[float, float]

    @classmethod
    def from_trajectory(cls, traj: Trajectory, samples: int = 4001) -> "Side":
        _, pts = traj.coords(samples)
        return cls(np.array(pts), traj.velocity_start(), traj.velocity_end())

    def reversed(self) -> "Side":
        a, b = self.v_start, self.v_end
        return Side(self.points[::-1].copy(), (-b[0], -b[1]), (-a[0], -a[1]))


GL_X, GL_W = np.polynomial.legendre.leggauss(5)


def _row_integral(metric: GraphSurfaceMetric, y: float, intervals, dx: float) -> float:
    total = 0.0
    g = metric.generator
    gy, gyy = g.d1(y), g.d2(y)
    for x0, x1 in intervals:
        m = max(1, math.ceil((x1 - x0) / dx))
        edges = np.linspace(x0, x1, m + 1)
        half = 0.5 * np.diff(edges)
        xs = (edges[:-1, None] + half[:, None] * (1.0 + GL_X[None, :])).ravel()
        ws = (half[:, None] * GL_W[None, :]).ravel()
        gx, gxx = g.d1(xs), g.d2(xs)
        w = np.sqrt(1.0 + gx * gx + gy * gy)
        # kappa dA = -g''(x) g''(y) / W^4 * W dx dy
        total += float(np.sum(ws * (-gxx * gyy / w**3)))
    return total


def _crossings(poly: np.ndarray, y: float) -> list[tuple[float, int]]:
    y0, y1 = poly[:-1, 1], poly[1:, 1]
    up = (y0 <= y) & (y < y1)
    down = (y1 <= y) & (y < y0)
    hit = up | down
    x0, x1 = poly[:-1, 0][hit], poly[1:, 0][hit]
    a, b = y0[hit], y1[hit]
    xs = x0 + (y - a) * (x1 - x0) / (b - a)
    dirs = np.where(up[hit], 1, -1)
    order = np.argsort(xs, kind="stable")
    return [(float(xs[i]), int(dirs[i])) for i in order]


def region_integral(metric: GraphSurfaceMetric, poly: np.ndarray, cells: float, breaks: Sequence[float] = ()) -> float:
    """Integral of ``kappa dA`` over the region enclosed by the closed polygon ``poly``.

    Scanline quadrature: rows at midpoints of a grid in ``y`` (split at
    ``breaks`` and at the polygon's extreme ``y``), and on each row the
    nonzero-winding intervals are integrated in ``x`` by 5-point
    Gauss-Legendre panels of the same grid width. ``cells`` is the number
    of grid cells of the square grid over the bounding box.
    """
    if not np.array_equal(poly[0], poly[-1]):
        poly = np.vstack([poly, poly[:1]])
    n = max(4, int(round(math.sqrt(cells))))
    ylo, yhi = float(poly[:, 1].min()), float(poly[:, 1].max())
    xlo, xhi = float(poly[:, 0].min()), float(poly[:, 0].max())
    dx = (xhi - xlo) / n
    cuts = sorted({ylo, yhi, *[b for b in breaks if ylo < b < yhi]})
    total = []
    for ya, yb in zip(cuts, cuts[1:]):
        rows = max(1, int(round(n * (yb - ya) / (yhi - ylo))))
        hy = (yb - ya) / rows
        for j in range(rows):
            y = ya + (j + 0.5) * hy
            wind = 0
            intervals = []
            prev = None
            for x, d in _crossings(poly, y):
                if wind != 0 and prev is not None and x > prev:
                    intervals.append((prev, x))
                wind += d
                prev = x
            total.append(hy * _row_integral(metric, y, intervals, dx))
    return math.fsum(total)


@dataclass
class TriangleResult:
    angles: tuple[float, float, float]
    angle_excess: float
    integral: float
    residual: float
    sides: list[Side] = field(repr=False, default_factory=list)

    @property
    def angle_sum(self) -> float:
        return math.fsum(self.angles)


def triangle_from_sides(surface: GraphSurface, sides: Sequence[Side], cells: float) -> TriangleResult:
    """Angles and curvature integral of the geodesic triangle bounded by three consecutive sides."""
    angles = []
    for k in range(3):
        prev, nxt = sides[k - 1], sides[k]
        u, v = (float(c) for c in nxt.points[0])
        vin = (-prev.v_end[0], -prev.v_end[1])
        angles.append(angle_between(surface, u, v, vin, nxt.v_start))
    # rotate so the vertex sits first: angle k is at the start of side k
    poly = np.vstack([s.points[:-1] for s in sides] + [sides[0].points[:1]])
    breaks = [float(s.points[0, 1]) for s in sides]
    integral = region_integral(surface.metric, poly, cells, breaks)
    excess = math.fsum(angles) - math.pi
    return TriangleResult(tuple(angles), excess, integral, abs(excess - integral), list(sides))


def gauss_bonnet_triangle(
    surface: GraphSurface,
    vertices: Sequence[tuple[float, float]],
    *,
    cells: float = 1e6,
    tol: float = 1e-10,
    samples: int = 4001,
) -> TriangleResult:
    """``(angle sum - pi, integral of kappa dA, residual)`` for a geodesic triangle.

    Sides are built with :func:`connect_geodesic`; interior angles are
    measured with the surface metric at each vertex.
    """
    if len(vertices) != 3:
        raise ValueError("a triangle needs three vertices")
    sides = []
    for k in range(3):
        seg = connect_geodesic(surface, tuple(vertices[k]), tuple(vertices[(k + 1) % 3]), tol)
        sides.append(Side.from_trajectory(seg.trajectory, samples))
    return triangle_from_sides(surface, sides, cells)


@dataclass
class WitnessRow:
    T: float
    base_angle: float
    far_angle_sum: float
    integral: float
    residual: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.far_angle_sum >= self.bound - 1e-3


@dataclass
class InvisibilityReport:
    rows: list[WitnessRow]
    separation: float
    slope_budget: float

    @property
    def curvature_budget(self) -> float:
        return self.slope_budget**2

    @property
    def max_abs_integral(self) -> float:
        return max(abs(r.integral) for r in self.rows)

    @property
    def passes(self) -> bool:
        return all(r.ok for r in self.rows) and self.max_abs_integral <= self.curvature_budget

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["T", "base_angle", "far_angle_sum", "integral_kappa", "residual", "bound"])
        for r in self.rows:
            w.writerow([repr(r.T), repr(r.base_angle), repr(r.far_angle_sum), repr(r.integral),
                        repr(r.residual), repr(r.bound)])
        return buf.getvalue()


def invisibility_witness(
    metric: GraphSurfaceMetric | None = None,
    separation: float = math.pi / 100,
    horizons: Sequence[float] = (5.0, 10.0, 20.0, 40.0),
    *,
    p: tuple[float, float] = (0.0, 0.0),
    direction: float = math.pi / 4,
    cells: float = 2.5e5,
    tol: float = 1e-10,
    samples: int = 4001,
) -> InvisibilityReport:
    """Far-angle sums of the triangles spanned by two rays from ``p``.

    The rays leave ``p`` at angles ``direction -+ separation/2``. For each
    horizon ``T`` their time-``T`` points are joined by a geodesic and the
    resulting triangle is measured. Gauss-Bonnet and the curvature budget
    ``(slope budget)^2`` force the far angles to sum to at least
    ``pi - separation - budget^2``.
    """
    metric = GraphSurfaceMetric() if metric is None else metric
    surface = GraphSurface(metric)
    budget = metric.slope_budget
    bound = math.pi - separation - budget**2
    rows = []
    for T in horizons:
        t1 = integrate_geodesic(surface, GeodesicState(p[0], p[1], direction - separation / 2), T, tol)
        t2 = integrate_geodesic(surface, GeodesicState(p[0], p[1], direction + separation / 2), T, tol)
        x, y = surface.coords(t1.y_end), surface.coords(t2.y_end)
        seg = connect_geodesic(surface, x, y, 1e-9)
        sides = [Side.from_trajectory(t1, samples), Side.from_trajectory(seg.trajectory, samples),
                 Side.from_trajectory(t2, samples).reversed()]
        tri = triangle_from_sides(surface, sides, cells)
        base, far1, far2 = tri.angles
        rows.append(WitnessRow(T, base, far1 + far2, tri.integral, tri.residual, bound))
    return InvisibilityReport(rows, separation, budget)

"""Sectional and Gaussian curvature for the three metric families.

* Warped cusp metrics ``dt^2 + 4 f(t)^2 / (1 - r^2)^2 * sum dx_i^2``.
* Diagonal metrics ``a(r)^2 du^2 + b(r)^2 dtheta^2 + c(r)^2 dr^2``.
* Graph surfaces ``z = g(x) - g(y)`` immersed in Euclidean 3-space.

Every closed form here has a finite-difference counterpart in
:mod:`cuspforge.fdcheck` that only sees the metric coefficients.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .errors import AxisError, DomainError, QuadratureFailure
from .profiles import ProfileFunction

AXIS_CLEARANCE = 1e-8
QUAD_TOL = 1e-8
QUAD_MAX_CELLS = 1_000_000


class Generator(Protocol):
    """One-dimensional function with exact first and second derivatives."""

    def __call__(self, t): ...
    def d1(self, t): ...
    def d2(self, t): ...


# ---------------------------------------------------------------------------
# warped cusp metric
# ---------------------------------------------------------------------------


def cusp_sectional_curvatures(f: ProfileFunction, t):
    """Radial and tangential sectional curvature of the warped cusp metric.

    Returns
    -------
    (K_radial, K_tangential)
        ``-f''/f`` and ``-(1 + f'^2)/f^2``; arrays if ``t`` is an array.
    """
    if np.ndim(t) == 0:
        v, d1, d2 = f.jet(float(t))
        return -d2 / v, -(1.0 + d1 * d1) / (v * v)
    v, d1, d2 = f._eval(t)
    return -d2 / v, -(1.0 + d1**2) / v**2


@dataclass(frozen=True)
class WarpedCuspMetric:
    """``dt^2 + 4 f(t)^2 / (1 - r^2)^2 * sum_{i<n} dx_i^2`` on ``domain x disc``."""

    n: int
    profile: ProfileFunction

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be at least 2")

    @property
    def families(self) -> tuple[str, ...]:
        # with a one-dimensional cross-section there are no tangential planes
        return ("radial",) if self.n == 2 else ("radial", "tangential")

    def curvatures(self, t):
        return cusp_sectional_curvatures(self.profile, t)

    def metric_tensor(self, p: np.ndarray) -> np.ndarray:
        """Coordinate metric at ``p = (t, x_1, ..., x_{n-1})``."""
        t, x = p[0], np.asarray(p[1:])
        r2 = float(np.dot(x, x))
        if r2 >= 1:
            raise DomainError("cross-section coordinates must lie in the open unit disc")
        fv = self.profile.jet_extended(float(t))[0]
        g = np.zeros((self.n, self.n))
        g[0, 0] = 1.0
        conf = 4.0 * fv * fv / (1.0 - r2) ** 2
        for i in range(1, self.n):
            g[i, i] = conf
        return g

    def scaled(self, s: float) -> "WarpedCuspMetric":
        """Metric multiplied by ``s**2`` written in its own arc-length coordinate."""
        from .profiles import scale_profile

        return WarpedCuspMetric(self.n, scale_profile(self.profile, 1.0 / s, 0.0))


@dataclass
class FamilyStats:
    min: float
    max: float
    argmin: float | tuple[float, float]
    argmax: float | tuple[float, float]


@dataclass
class CurvatureReport:
    """Extremes of sectional curvature per plane family over a sampled region."""

    region: str
    resolution: int
    families: dict[str, FamilyStats] = field(default_factory=dict)
    samples: list[tuple[object, str, float]] = field(default_factory=list)

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")

    @property
    def min(self) -> float:
        return min(s.min for s in self.families.values())

    @property
    def max(self) -> float:
        return max(s.max for s in self.families.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_or_xy", "K_family", "value"])
        for loc, fam, val in self.samples:
            w.writerow([_fmt_loc(loc), fam, repr(float(val))])
        w.writerow(["min", "all", repr(self.min)])
        w.writerow(["max", "all", repr(self.max)])
        return buf.getvalue()


def _fmt_loc(loc) -> str:
    if isinstance(loc, tuple):
        return " ".join(repr(float(v)) for v in loc)
    return repr(float(loc))


def _stats(xs: np.ndarray, vals: np.ndarray) -> FamilyStats:
    i, j = int(np.argmin(vals)), int(np.argmax(vals))
    return FamilyStats(float(vals[i]), float(vals[j]), float(xs[i]), float(xs[j]))


def plane_curvature_bounds(
    m: WarpedCuspMetric, t_interval: tuple[float, float], resolution: int, *, keep_samples: bool = True
) -> CurvatureReport:
    """Min/max of the coordinate-plane curvatures over a uniform grid.

    Mixed curvature-tensor terms of the warped metric vanish, so every
    2-plane curvature is a convex combination of the radial and tangential
    values and the report bounds all planes at the sampled radii.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    lo, hi = t_interval
    dlo, dhi = m.profile.domain
    if not (dlo <= lo < hi <= dhi):
        raise DomainError(f"interval [{lo}, {hi}] not inside profile domain [{dlo}, {dhi}]")
    ts = np.linspace(lo, hi, resolution)
    k_rad, k_tan = m.curvatures(ts)
    rep = CurvatureReport(f"t in [{lo!r}, {hi!r}]", resolution)
    rep.families["radial"] = _stats(ts, k_rad)
    if "tangential" in m.families:
        rep.families["tangential"] = _stats(ts, k_tan)
    if keep_samples:
        for t, kr, kt in zip(ts, k_rad, k_tan):
            rep.samples.append((float(t), "radial", float(kr)))
            if "tangential" in m.families:
                rep.samples.append((float(t), "tangential", float(kt)))
    return rep


# ---------------------------------------------------------------------------
# diagonal 3-D metric
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagonalMetric3D:
    """``a(r)^2 du^2 + b(r)^2 dtheta^2 + c(r)^2 dr^2``.

    ``axis`` marks a boundary radius where ``b`` vanishes (polar axis).
    """

    a: ProfileFunction
    b: ProfileFunction
    c: ProfileFunction
    axis: float | None = None

    @classmethod
    def fermi(cls) -> "DiagonalMetric3D":
        """Hyperbolic space in Fermi coordinates about a geodesic."""
        from .profiles import Cosh, Segment, Sinh

        a = ProfileFunction((Segment(0.0, math.inf, Cosh(1.0)),))
        b = ProfileFunction((Segment(0.0, math.inf, Sinh(1.0)),), allow_boundary_zero=True)
        c = ProfileFunction.constant(1.0, 0.0, math.inf)
        return cls(a, b, c, axis=0.0)

    def metric_tensor(self, p: np.ndarray) -> np.ndarray:
        """Coordinate metric at ``p = (u, theta, r)``."""
        r = float(p[2])
        a, b, c = (f.jet_extended(r)[0] for f in (self.a, self.b, self.c))
        return np.diag([a * a, b * b, c * c])

    def scaled(self, s: float) -> "DiagonalMetric3D":
        """Metric multiplied by ``s**2`` (every coefficient times ``s``)."""
        from .profiles import Segment

        def mul(f: ProfileFunction) -> ProfileFunction:
            segs = tuple(Segment(seg.lo, seg.hi, _Scaled(seg.form, s)) for seg in f.segments)
            return ProfileFunction(segs, f.allow_boundary_zero, check=False, signed=f.signed)

        return DiagonalMetric3D(mul(self.a), mul(self.b), mul(self.c), self.axis)


class _Scaled:
    """Constant multiple of a segment form (used for homothetic metrics)."""

    tag = "scaled"

    def __init__(self, form, s):
        self.form, self.s = form, s

    def jet(self, t):
        v, d1, d2 = self.form.jet(t)
        return self.s * v, self.s * d1, self.s * d2

    def values(self, t):
        v, d1, d2 = self.form.values(t)
        return self.s * v, self.s * d1, self.s * d2

    def min_on(self, lo, hi):
        return self.s * self.form.min_on(lo, hi)


def diagonal_curvatures(m: DiagonalMetric3D, r: float) -> tuple[float, float, float]:
    """Coordinate-plane curvatures ``(K_utheta, K_ur, K_thetar)`` at radius ``r``.

    With ``D = (1/c) d/dr`` the closed forms are ``K_ur = -D^2 a / a``,
    ``K_thetar = -D^2 b / b`` and ``K_utheta = -(D a)(D b) / (a b)``.
    """
    if m.axis is not None and abs(r - m.axis) < AXIS_CLEARANCE:
        raise AxisError(f"r={r} is within {AXIS_CLEARANCE} of the axis at r={m.axis}")
    a, a1, a2 = m.a.jet(r)
    b, b1, b2 = m.b.jet(r)
    c, c1, _ = m.c.jet(r)
    if b == 0 or a == 0:
        raise AxisError(f"a warping coefficient vanishes at r={r}")
    if c <= 0:
        raise DomainError(f"c(r) must be positive, got {c} at r={r}")
    Da, Db = a1 / c, b1 / c
    DDa = a2 / (c * c) - a1 * c1 / c**3
    DDb = b2 / (c * c) - b1 * c1 / c**3
    return -Da * Db / (a * b), -DDa / a, -DDb / b


# ---------------------------------------------------------------------------
# graph surfaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TanhGenerator:
    """Generator with ``g'(t) = (budget/2)(1 + tanh(t/width))``.

    ``g'' = (budget / (2 width)) sech^2(t/width) > 0`` and the slope budget
    ``g'(inf) - g'(-inf)`` is exactly ``budget``.
    """

    budget: float = math.pi / 10
    width: float = 1.0

    @property
    def slope_budget(self) -> float:
        return self.budget

    def __call__(self, t):
        u = np.asarray(t, dtype=float) / self.width
        # log cosh(u) = |u| + log1p(exp(-2|u|)) - log 2, stable for large |u|
        au = np.abs(u)
        lc = au + np.log1p(np.exp(-2 * au)) - math.log(2.0)
        out = 0.5 * self.budget * (np.asarray(t, dtype=float) + self.width * lc)
        return float(out) if np.ndim(t) == 0 else out

    def d1(self, t):
        out = 0.5 * self.budget * (1.0 + np.tanh(np.asarray(t, dtype=float) / self.width))
        return float(out) if np.ndim(t) == 0 else out

    def d2(self, t):
        out = 0.5 * self.budget / self.width / np.cosh(np.asarray(t, dtype=float) / self.width) ** 2
        return float(out) if np.ndim(t) == 0 else out

    def jet(self, t: float) -> tuple[float, float, float]:
        u = t / self.width
        au = abs(u)
        lc = au + math.log1p(math.exp(-2 * au)) - math.log(2.0)
        th = math.tanh(u)
        sech2 = 1.0 - th * th if au < 20 else 4.0 * math.exp(-2 * au)
        half = 0.5 * self.budget
        return half * (t + self.width * lc), half * (1.0 + th), half / self.width * sech2


@dataclass(frozen=True)
class GraphSurfaceMetric:
    """Induced metric of the graph ``z = g(x) - g(y)``."""

    generator: object = field(default_factory=TanhGenerator)

    @property
    def slope_budget(self) -> float:
        gen = self.generator
        if hasattr(gen, "slope_budget"):
            return gen.slope_budget
        if isinstance(gen, ProfileFunction):
            lo, hi = gen.domain
            return float(gen.d1(hi) if math.isfinite(hi) else _limit_d1(gen, +1)) - float(
                gen.d1(lo) if math.isfinite(lo) else _limit_d1(gen, -1)
            )
        raise TypeError("generator does not expose a slope budget")

    def jets(self, x, y):
        g = self.generator
        return g.d1(x), g.d2(x), g.d1(y), g.d2(y)

    def first_fundamental_form(self, x, y):
        """``(E, F, G)`` with ``E = 1 + g'(x)^2``, ``F = -g'(x) g'(y)``, ``G = 1 + g'(y)^2``."""
        gx, _, gy, _ = self.jets(x, y)
        return 1.0 + gx * gx, -gx * gy, 1.0 + gy * gy

    def metric_tensor(self, p: np.ndarray) -> np.ndarray:
        E, F, G = self.first_fundamental_form(float(p[0]), float(p[1]))
        return np.array([[E, F], [F, G]])

    def area_element(self, x, y):
        gx, _, gy, _ = self.jets(x, y)
        return np.sqrt(1.0 + gx * gx + gy * gy)

    def height(self, x, y):
        return self.generator(x) - self.generator(y)


def _limit_d1(f: ProfileFunction, side: int) -> float:
    seg = f.segments[-1] if side > 0 else f.segments[0]
    form = seg.form
    from .profiles import Constant, Quintic

    if isinstance(form, Constant):
        return 0.0
    if isinstance(form, Quintic) and all(c == 0 for c in form.coeffs[2:]):
        return form.coeffs[1]
    raise ValueError("slope budget is infinite for this generator")


def graph_surface_gaussian(m: GraphSurfaceMetric, x, y):
    """Gaussian curvature ``-g''(x) g''(y) / (1 + g'(x)^2 + g'(y)^2)^2``."""
    gx, gxx, gy, gyy = m.jets(x, y)
    w2 = 1.0 + gx * gx + gy * gy
    return -gxx * gyy / (w2 * w2)


def graph_christoffel(m: GraphSurfaceMetric, x: float, y: float):
    """Christoffel symbols of the graph ``z = h(x, y)``: ``Gamma^k_ij = h_k h_ij / W^2``.

    Returns ``(G1_11, G1_22, G2_11, G2_22)``; mixed terms vanish because
    ``h_xy = 0``.
    """
    g = m.generator
    gx, gxx = g.d1(x), g.d2(x)
    gy, gyy = g.d1(y), g.d2(y)
    # h = g(x) - g(y): h_x = gx, h_y = -gy, h_xx = gxx, h_yy = -gyy
    w2 = 1.0 + gx * gx + gy * gy
    return gx * gxx / w2, -gx * gyy / w2, -gy * gxx / w2, gy * gyy / w2


def _simpson_cells(m: GraphSurfaceMetric, x0, x1, y0, y1):
    """Coarse (3x3) and fine (5x5) tensor Simpson estimates per cell."""
    t5 = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    xs = x0[:, None] + (x1 - x0)[:, None] * t5[None, :]
    ys = y0[:, None] + (y1 - y0)[:, None] * t5[None, :]
    gen = m.generator
    gx, gxx = gen.d1(xs), gen.d2(xs)
    gy, gyy = gen.d1(ys), gen.d2(ys)
    w2 = 1.0 + gx[:, :, None] ** 2 + gy[:, None, :] ** 2
    # kappa * dA = -g''(x) g''(y) / W^3
    vals = -gxx[:, :, None] * gyy[:, None, :] / (w2 * np.sqrt(w2))
    area = (x1 - x0) * (y1 - y0)
    wc = np.array([1.0, 4.0, 1.0]) / 6.0
    wf = np.array([1.0, 4.0, 2.0, 4.0, 1.0]) / 12.0
    coarse = area * np.einsum("i,j,nij->n", wc, wc, vals[:, ::2, ::2])
    fine = area * np.einsum("i,j,nij->n", wf, wf, vals)
    return coarse, fine


def adaptive_graph_integral(
    m: GraphSurfaceMetric,
    box: tuple[float, float, float, float],
    tol: float = QUAD_TOL,
    max_cells: int = QUAD_MAX_CELLS,
    initial: int = 8,
    mask=None,
) -> tuple[float, int]:
    """Adaptive tensor-product Simpson quadrature of ``kappa dA`` over a box.

    Cells are accepted when the fine/coarse discrepancy is within their
    share (by area) of ``tol``; accepted contributions are summed with
    ``math.fsum`` so the result does not depend on processing order.

    Returns
    -------
    (value, cells)
        Integral estimate and number of cells evaluated.
    """
    xa, xb, ya, yb = box
    total_area = (xb - xa) * (yb - ya)
    edges_x = np.linspace(xa, xb, initial + 1)
    edges_y = np.linspace(ya, yb, initial + 1)
    X0, Y0 = np.meshgrid(edges_x[:-1], edges_y[:-1], indexing="ij")
    X1, Y1 = np.meshgrid(edges_x[1:], edges_y[1:], indexing="ij")
    x0, x1, y0, y1 = X0.ravel(), X1.ravel(), Y0.ravel(), Y1.ravel()
    accepted: list[float] = []
    cells = 0
    while x0.size:
        cells += x0.size
        if cells > max_cells:
            raise QuadratureFailure(
                f"adaptive quadrature exceeded {max_cells} cells without meeting tolerance {tol}"
            )
        coarse, fine = _simpson_cells(m, x0, x1, y0, y1)
        err = np.abs(fine - coarse) / 15.0
        share = tol * (x1 - x0) * (y1 - y0) / total_area
        ok = err <= share
        accepted.extend((fine[ok] + (fine[ok] - coarse[ok]) / 15.0).tolist())
        bad = ~ok
        if not np.any(bad):
            break
        bx0, bx1, by0, by1 = x0[bad], x1[bad], y0[bad], y1[bad]
        mx, my = 0.5 * (bx0 + bx1), 0.5 * (by0 + by1)
        x0 = np.concatenate([bx0, mx, bx0, mx])
        x1 = np.concatenate([mx, bx1, mx, bx1])
        y0 = np.concatenate([by0, by0, my, my])
        y1 = np.concatenate([my, my, by1, by1])
    return math.fsum(sorted(accepted)), cells


def total_gaussian_curvature(m: GraphSurfaceMetric, R: float, tol: float = QUAD_TOL) -> float:
    """Integral of ``kappa dA`` over ``[-R, R]^2`` (adaptive Simpson, abs tol 1e-8)."""
    if not R > 0:
        raise ValueError("half-width R must be positive")
    value, _ = adaptive_graph_integral(m, (-R, R, -R, R), tol)
    return value

"""Surfaces carrying geodesic flows: surfaces of revolution and graph surfaces.

Both expose the same small interface used by the integrator and the
shooting solver: an ODE right-hand side in arc length, conversion between
:class:`GeodesicState` and the ODE state, chart coordinates and velocity,
and the first fundamental form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..curvature import GraphSurfaceMetric
from ..errors import DomainExit
from ..profiles import Exp, ProfileFunction

State = tuple[float, ...]


@dataclass(frozen=True)
class GeodesicState:
    """Point, unit direction and arc length.

    ``u, v`` are ``(z, theta)`` on a surface of revolution and ``(x, y)`` on
    a graph surface. ``alpha`` is the direction angle measured in an
    orthonormal frame: from the meridian ``d/dz`` towards ``d/dtheta`` on a
    surface of revolution; from ``d/dx`` towards the orthonormalised
    ``d/dy`` on a graph surface.
    """

    u: float
    v: float
    alpha: float
    s: float = 0.0


@dataclass(frozen=True)
class RevolutionSurface:
    """Surface swept by rotating the radius profile ``phi`` about the z-axis.

    Metric ``(1 + phi'(z)^2) dz^2 + phi(z)^2 dtheta^2``; ``theta`` is
    unwrapped, so the chart is the universal cover of the surface. ``h`` is
    the asymptotic width ``inf phi`` (``None`` when not applicable).
    """

    phi: ProfileFunction
    h: float | None = None

    @classmethod
    def default(cls, h: float = 1.0, z_min: float = -20.0) -> "RevolutionSurface":
        """``phi(z) = h + exp(-z)`` on ``[z_min, inf)``."""
        return cls(ProfileFunction.single(Exp(1.0, 1.0, 0.0, h), z_min, math.inf), h)

    @classmethod
    def cylinder(cls, radius: float = 1.0) -> "RevolutionSurface":
        return cls(ProfileFunction.constant(radius), radius)

    @property
    def domain(self) -> tuple[float, float]:
        return self.phi.domain

    def in_domain(self, u: float, v: float) -> bool:
        lo, hi = self.phi.domain
        return lo <= u <= hi

    def _jet(self, z: float) -> tuple[float, float, float]:
        lo, hi = self.phi.domain
        if not lo <= z <= hi:
            raise DomainExit(f"trajectory left the chart at z={z!r} (domain [{lo}, {hi}])")
        return self.phi.jet(z)

    def rhs(self, s: float, y: State) -> State:
        z, _, a = y
        p, dp, _ = self._jet(z)
        w = math.sqrt(1.0 + dp * dp)
        sa, ca = math.sin(a), math.cos(a)
        return ca / w, sa / p, -dp * sa / (p * w)

    def initial(self, st: GeodesicState) -> State:
        return (st.u, st.v, st.alpha)

    def state(self, y: State, s: float) -> GeodesicState:
        return GeodesicState(y[0], y[1], y[2], s)

    def coords(self, y: State) -> tuple[float, float]:
        return y[0], y[1]

    def velocity(self, y: State) -> tuple[float, float]:
        return self.rhs(0.0, y)[:2]

    def alpha(self, y: State) -> float:
        return y[2]

    def first_fundamental_form(self, u: float, v: float) -> tuple[float, float, float]:
        p, dp, _ = self._jet(u)
        return 1.0 + dp * dp, 0.0, p * p

    def clairaut(self, y: State) -> float | None:
        return self.phi.jet(y[0])[0] * math.sin(y[2])

    def frame(self, u: float, v: float) -> tuple[tuple[float, float], tuple[float, float]]:
        """Orthonormal frame ``(e1, e2)`` in chart components."""
        E, _, G = self.first_fundamental_form(u, v)
        return (1.0 / math.sqrt(E), 0.0), (0.0, 1.0 / math.sqrt(G))

    def reversed_state(self, y: State) -> State:
        return (y[0], y[1], y[2] + math.pi)


@dataclass(frozen=True)
class GraphSurface:
    """The graph ``z = g(x) - g(y)`` with its induced metric.

    The ODE state is ``(x, y, x', y')`` and the geodesic equations are
    ``x_k'' = -Gamma^k_ij x_i' x_j'`` with ``Gamma^k_ij = h_k h_ij / W^2``.
    """

    metric: GraphSurfaceMetric = field(default_factory=GraphSurfaceMetric)
    bound: float = 1e6

    @property
    def generator(self):
        return self.metric.generator

    def in_domain(self, u: float, v: float) -> bool:
        return abs(u) <= self.bound and abs(v) <= self.bound

    def _jets(self, x: float, y: float):
        if not self.in_domain(x, y):
            raise DomainExit(f"trajectory left the chart at ({x!r}, {y!r})")
        g = self.metric.generator
        _, gx, gxx = g.jet(x)
        _, gy, gyy = g.jet(y)
        return gx, gxx, gy, gyy

    def rhs(self, s: float, y: State) -> State:
        x, yy, vx, vy = y
        gx, gxx, gy, gyy = self._jets(x, yy)
        # h = g(x) - g(y): h_x = gx, h_y = -gy, h_xx = gxx, h_yy = -gyy
        q = (gxx * vx * vx - gyy * vy * vy) / (1.0 + gx * gx + gy * gy)
        return vx, vy, -gx * q, gy * q

    def first_fundamental_form(self, u: float, v: float) -> tuple[float, float, float]:
        gx, _, gy, _ = self._jets(u, v)
        return 1.0 + gx * gx, -gx * gy, 1.0 + gy * gy

    def frame(self, u: float, v: float) -> tuple[tuple[float, float], tuple[float, float]]:
        """Gram-Schmidt orthonormal frame from ``d/dx, d/dy`` in chart components."""
        E, F, G = self.first_fundamental_form(u, v)
        e1 = (1.0 / math.sqrt(E), 0.0)
        # d/dy minus its projection on e1, then normalised
        w = (-F / E, 1.0)
        nw = math.sqrt(G - F * F / E)
        return e1, (w[0] / nw, w[1] / nw)

    def initial(self, st: GeodesicState) -> State:
        e1, e2 = self.frame(st.u, st.v)
        c, s = math.cos(st.alpha), math.sin(st.alpha)
        return (st.u, st.v, c * e1[0] + s * e2[0], c * e1[1] + s * e2[1])

    def alpha(self, y: State) -> float:
        return direction_angle(self, y[0], y[1], y[2], y[3])

    def state(self, y: State, s: float) -> GeodesicState:
        return GeodesicState(y[0], y[1], self.alpha(y), s)

    def coords(self, y: State) -> tuple[float, float]:
        return y[0], y[1]

    def velocity(self, y: State) -> tuple[float, float]:
        return y[2], y[3]

    def clairaut(self, y: State) -> float | None:
        return None

    def reversed_state(self, y: State) -> State:
        return (y[0], y[1], -y[2], -y[3])


def inner(surface, u: float, v: float, a: tuple[float, float], b: tuple[float, float]) -> float:
    """Metric inner product of chart vectors ``a`` and ``b`` at ``(u, v)``."""
    E, F, G = surface.first_fundamental_form(u, v)
    return E * a[0] * b[0] + F * (a[0] * b[1] + a[1] * b[0]) + G * a[1] * b[1]


def direction_angle(surface, u: float, v: float, du: float, dv: float) -> float:
    """Angle of the chart vector ``(du, dv)`` in the surface's orthonormal frame."""
    e1, e2 = surface.frame(u, v)
    return math.atan2(inner(surface, u, v, (du, dv), e2), inner(surface, u, v, (du, dv), e1))


def angle_between(surface, u: float, v: float, a: tuple[float, float], b: tuple[float, float]) -> float:
    """Unoriented angle in ``[0, pi]`` between two tangent vectors at ``(u, v)``."""
    ab = inner(surface, u, v, a, b)
    na = math.sqrt(inner(surface, u, v, a, a))
    nb = math.sqrt(inner(surface, u, v, b, b))
    cross = math.sqrt(max(0.0, (na * nb) ** 2 - ab * ab))
    return math.atan2(cross, ab)

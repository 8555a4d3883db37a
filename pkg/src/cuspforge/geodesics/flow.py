"""Geodesic integration, trapped-ray checks and the shooting solver."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from ..errors import NoBracket, ToleranceFailure
from .ode import Solution, Step, find_root, integrate
from .surfaces import GeodesicState, RevolutionSurface, direction_angle

TOL_RANGE = (1e-12, 1e-4)


def _check_tol(tol: float) -> None:
    lo, hi = TOL_RANGE
    if not lo <= tol <= hi:
        raise ValueError(f"tol={tol!r} outside the allowed interval [{lo}, {hi}]")


@dataclass
class Trajectory:
    """Arc-length parametrised geodesic with step statistics.

    ``states`` holds the state at the start and at every accepted step
    end, ordered by arc length. ``clairaut0`` and ``drift`` are ``None``
    on surfaces without a Clairaut invariant.
    """

    surface: object
    solution: Solution
    states: list[GeodesicState]
    clairaut0: float | None
    drift: float | None
    y0: tuple[float, ...]

    @property
    def steps(self) -> int:
        return len(self.solution.steps)

    @property
    def rejected(self) -> int:
        return self.solution.rejected

    @property
    def nfev(self) -> int:
        return self.solution.nfev

    @property
    def length(self) -> float:
        return self.solution.s_end - self.solution.steps[0].s0

    @property
    def y_end(self) -> tuple[float, ...]:
        return self.solution.y_end

    @property
    def end(self) -> GeodesicState:
        return self.states[-1]

    def __call__(self, s: float) -> tuple[float, ...]:
        """Raw ODE state at arc length ``s`` from the dense output."""
        return self.solution(s)

    def state_at(self, s: float) -> GeodesicState:
        return self.surface.state(self.solution(s), s)

    def coords(self, n: int = 2001) -> tuple[list[float], list[tuple[float, float]]]:
        """``n`` equally spaced samples of the chart position."""
        ss, ys = self.solution.sample(n)
        return ss, [self.surface.coords(y) for y in ys]

    def velocity_start(self) -> tuple[float, float]:
        return self.surface.velocity(self.y0)

    def velocity_end(self) -> tuple[float, float]:
        return self.surface.velocity(self.y_end)

    def to_csv(self, n: int | None = None) -> str:
        """Columns ``s, u, v, alpha, clairaut_value`` (``u, v`` are ``z, theta`` or ``x, y``)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "u", "v", "alpha", "clairaut_value"])
        if n is None:
            states = self.states
        else:
            ss, ys = self.solution.sample(n)
            states = [self.surface.state(y, s) for s, y in zip(ss, ys)]
        for st in states:
            c = self.surface.clairaut(self.surface.initial(st))
            w.writerow([repr(st.s), repr(st.u), repr(st.v), repr(st.alpha), "" if c is None else repr(c)])
        return buf.getvalue()


def integrate_geodesic(
    surface,
    start: GeodesicState,
    length: float,
    tol: float = 1e-10,
    *,
    event=None,
    max_step: float = math.inf,
) -> Trajectory:
    """Integrate the unit-speed geodesic from ``start`` for arc length ``length``.

    Parameters
    ----------
    surface
        A :class:`RevolutionSurface` or :class:`GraphSurface`.
    length
        Arc length to integrate; negative values run backwards.
    tol
        Accuracy target in ``[1e-12, 1e-4]``.

    Raises
    ------
    StepFailure
        If the step size underflows.
    DomainExit
        If the trajectory leaves the chart.
    """
    _check_tol(tol)
    y0 = surface.initial(start)
    if not surface.in_domain(y0[0], y0[1]):
        raise ValueError("start point is not on the surface chart")
    c0 = surface.clairaut(y0)
    states = [surface.state(y0, start.s)]
    drift = [0.0]

    def on_step(step: Step) -> None:
        states.append(surface.state(step.y1, step.s1))
        if c0 is not None:
            drift[0] = max(drift[0], abs(surface.clairaut(step.y1) - c0))

    sol = integrate(surface.rhs, start.s, y0, start.s + length, tol, event=event, on_step=on_step, max_step=max_step)
    return Trajectory(surface, sol, states, c0, drift[0] if c0 is not None else None, y0)


def reverse_trajectory_start(traj: Trajectory) -> GeodesicState:
    """State at the end of ``traj`` pointing back along it."""
    y = traj.surface.reversed_state(traj.y_end)
    return traj.surface.state(y, 0.0)


# ---------------------------------------------------------------------------
# trapped rays on surfaces of revolution
# ---------------------------------------------------------------------------


@dataclass
class TrapReport:
    escapes: bool
    clairaut: float
    alpha_sup: float
    z_reached: float
    epsilon: float | None = None
    bound_ok: bool | None = None
    turning_radius: float | None = None
    trajectory: Trajectory | None = None


def trapped_ray_check(
    surface: RevolutionSurface,
    z0: float,
    alpha0: float,
    *,
    length: float = 200.0,
    tol: float = 1e-10,
) -> TrapReport:
    """Follow the ray from ``(z0, 0)`` at angle ``alpha0`` to the meridian.

    When ``rho0 sin(alpha0) < h`` the ray must escape with
    ``|alpha| <= pi/2 - eps``, ``eps = pi/2 - arcsin(rho0 sin(alpha0) / h)``,
    and ``z`` increasing; both are checked along the integrated path. When
    ``rho0 sin(alpha0) > h`` the ray turns where ``alpha`` reaches ``pi/2``
    and the turning radius ``phi(z_turn)`` is reported.
    """
    if surface.h is None or not surface.h > 0:
        raise ValueError("surface needs a positive asymptotic width h")
    if not abs(alpha0) < math.pi / 2:
        raise ValueError("the ray must start heading up the surface (|alpha0| < pi/2)")
    rho0 = surface.phi.jet(z0)[0]
    c = rho0 * math.sin(alpha0)
    h = surface.h
    start = GeodesicState(z0, 0.0, alpha0)
    if abs(c) < h:
        traj = integrate_geodesic(surface, start, length, tol)
        zs = [st.u for st in traj.states]
        increasing = all(b > a for a, b in zip(zs, zs[1:]))
        sup = max(abs(st.alpha) for st in traj.states)
        eps = math.pi / 2 - math.asin(abs(c) / h)
        ok = sup <= math.pi / 2 - eps + 1e-9
        return TrapReport(increasing and ok, c, sup, zs[-1], eps, ok, None, traj)

    def turning(step: Step) -> float | None:
        g0 = math.cos(step.y0[2])
        g1 = math.cos(step.y1[2])
        if g0 > 0 >= g1:
            return find_root(step, lambda y: math.cos(y[2]), g0, g1)
        return None

    traj = integrate_geodesic(surface, start, length, tol, event=turning)
    sup = max(abs(st.alpha) for st in traj.states)
    turn = surface.phi.jet(traj.y_end[0])[0] if traj.solution.terminated_by_event else None
    return TrapReport(False, c, sup, traj.y_end[0], None, None, turn, traj)


# ---------------------------------------------------------------------------
# shooting
# ---------------------------------------------------------------------------


@dataclass
class Shot:
    beta: float
    miss: float
    error: float
    s_star: float
    reached: bool
    trajectory: Trajectory | None


@dataclass
class GeodesicSegment:
    """Connecting geodesic found by shooting."""

    trajectory: Trajectory
    alpha0: float
    length: float
    endpoint_error: float
    iterations: int
    shots: list[Shot] = field(default_factory=list)


def _metric_at(surface, q):
    E, F, G = surface.first_fundamental_form(q[0], q[1])
    return E, F, G


def _shoot(surface, p, q, beta, L_max, tol, Gq) -> Shot:
    E, F, G = Gq
    det = math.sqrt(E * G - F * F)

    def gfun(y):
        x, v = surface.coords(y), surface.velocity(y)
        d0, d1 = x[0] - q[0], x[1] - q[1]
        return E * d0 * v[0] + F * (d0 * v[1] + d1 * v[0]) + G * d1 * v[1]

    def miss_of(y):
        x, v = surface.coords(y), surface.velocity(y)
        d0, d1 = q[0] - x[0], q[1] - x[1]
        nv = math.sqrt(E * v[0] * v[0] + 2 * F * v[0] * v[1] + G * v[1] * v[1])
        cross = (v[0] * d1 - v[1] * d0) * det / nv
        err = math.sqrt(max(0.0, E * d0 * d0 + 2 * F * d0 * d1 + G * d1 * d1))
        return cross, err

    start = GeodesicState(p[0], p[1], beta)
    y0 = surface.initial(start)
    if gfun(y0) >= 0:
        m, e = miss_of(y0)
        return Shot(beta, m, e, 0.0, False, None)

    def closest(step: Step) -> float | None:
        g0, g1 = gfun(step.y0), gfun(step.y1)
        if g0 < 0 <= g1:
            return find_root(step, gfun, g0, g1)
        return None

    traj = integrate_geodesic(surface, start, L_max, tol, event=closest)
    m, e = miss_of(traj.y_end)
    return Shot(beta, m, e, traj.length, traj.solution.terminated_by_event, traj)


SWEEP = (0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6, math.pi / 2 + 0.5, math.pi)


def connect_geodesic(
    surface,
    p: tuple[float, float],
    q: tuple[float, float],
    tol: float = 1e-8,
    *,
    int_tol: float | None = None,
    max_iter: int = 100,
) -> GeodesicSegment:
    """Geodesic from ``p`` to ``q`` by shooting on the initial angle.

    Each shot runs until its closest approach to ``q`` (in the metric
    frozen at ``q``); the signed miss is the oriented distance of ``q`` from
    the trajectory there. Angles are swept outward from the chart direction
    of ``q - p`` until the miss changes sign (the smaller-angle side is
    tried first), then the bracket is refined by Illinois-guarded bisection
    until the closest-approach distance is below ``tol``.

    Raises
    ------
    NoBracket
        If no sign change is found over the sweep.
    ToleranceFailure
        If the refinement does not reach ``tol`` within ``max_iter`` shots.
    """
    if p == q:
        raise ValueError("endpoints must differ")
    if int_tol is None:
        int_tol = min(1e-10, max(1e-12, tol * 1e-2))
    Gq = _metric_at(surface, q)
    mid = (0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]))
    Em, Fm, Gm = surface.first_fundamental_form(*mid)
    d = (q[0] - p[0], q[1] - p[1])
    d0 = math.sqrt(Em * d[0] ** 2 + 2 * Fm * d[0] * d[1] + Gm * d[1] ** 2)
    L_max = 1.5 * d0 + 1.0
    beta0 = direction_angle(surface, p[0], p[1], d[0], d[1])
    shots: list[Shot] = []

    def shoot(beta: float) -> Shot:
        s = _shoot(surface, p, q, beta, L_max, int_tol, Gq)
        shots.append(s)
        return s

    first = shoot(beta0)
    if first.reached and first.error < tol:
        return GeodesicSegment(first.trajectory, beta0, first.s_star, first.error, 0, shots)
    bracket = None
    left = right = first
    for delta in SWEEP:
        cand_l = shoot(beta0 - delta)
        if cand_l.reached and left.reached and (cand_l.miss > 0) != (left.miss > 0):
            bracket = (cand_l, left)
            break
        left = cand_l
        cand_r = shoot(beta0 + delta)
        if cand_r.reached and right.reached and (cand_r.miss > 0) != (right.miss > 0):
            bracket = (right, cand_r)
            break
        right = cand_r
    if bracket is None:
        raise NoBracket(f"no sign change of the shooting miss around angle {beta0!r}")
    a, b = bracket
    fa, fb = a.miss, b.miss
    best = min((a, b), key=lambda s: s.error)
    for it in range(1, max_iter + 1):
        if best.reached and best.error < tol:
            return GeodesicSegment(best.trajectory, best.beta, best.s_star, best.error, it, shots)
        m = b.beta - fb * (b.beta - a.beta) / (fb - fa) if fb != fa else 0.5 * (a.beta + b.beta)
        if not min(a.beta, b.beta) < m < max(a.beta, b.beta):
            m = 0.5 * (a.beta + b.beta)
        c = shoot(m)
        if c.reached and c.error < best.error:
            best = c
        if (c.miss > 0) == (fa > 0):
            a, fa = c, c.miss
            fb *= 0.5
        else:
            b, fb = c, c.miss
            fa *= 0.5
        if abs(b.beta - a.beta) < 1e-15 and not (best.error < tol):
            break
    raise ToleranceFailure(f"shooting reached endpoint error {best.error!r}, above tol {tol!r}")

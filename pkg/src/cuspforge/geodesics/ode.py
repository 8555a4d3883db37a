"""Dormand-Prince 5(4) integrator with PI step control and dense output.

Written for the small (3 or 4 component) geodesic systems used in this
package, so the state is a tuple of floats and every stage is evaluated
with plain Python arithmetic. That keeps a single trajectory bitwise
reproducible: the evaluation order never depends on array layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..errors import StepFailure

State = tuple[float, ...]
RHS = Callable[[float, State], State]

# Butcher tableau (Hairer, Norsett & Wanner, DOPRI5)
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)
D1, D3, D4, D5, D6, D7 = (
    -12715105075 / 11282082432,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)

MIN_STEP = 1e-12
TOL_REF = 1e-4
TOL_EXPONENT = 0.2
MAX_STEPS = 2_000_000


@dataclass(frozen=True)
class Step:
    """One accepted step with its continuous extension."""

    s0: float
    h: float
    y0: State
    y1: State
    coeffs: tuple[State, State, State, State]

    @property
    def s1(self) -> float:
        return self.s0 + self.h

    def __call__(self, s: float) -> State:
        th = (s - self.s0) / self.h
        th1 = 1.0 - th
        r2, r3, r4, r5 = self.coeffs
        return tuple(
            y + th * (b + th1 * (c + th * (d + th1 * e)))
            for y, b, c, d, e in zip(self.y0, r2, r3, r4, r5)
        )


@dataclass
class Solution:
    steps: list[Step] = field(default_factory=list)
    rejected: int = 0
    nfev: int = 0
    terminated_by_event: bool = False

    @property
    def s_end(self) -> float:
        return self.steps[-1].s1 if self.steps else 0.0

    @property
    def y_end(self) -> State:
        return self.steps[-1].y1

    def __call__(self, s: float) -> State:
        # binary search over step boundaries
        steps = self.steps
        lo, hi = 0, len(steps) - 1
        if (steps[0].h > 0 and s <= steps[0].s0) or (steps[0].h < 0 and s >= steps[0].s0):
            return steps[0].y0
        forward = steps[0].h > 0
        while lo < hi:
            mid = (lo + hi) // 2
            if (steps[mid].s1 < s) if forward else (steps[mid].s1 > s):
                lo = mid + 1
            else:
                hi = mid
        return steps[lo](s)

    def sample(self, n: int) -> tuple[list[float], list[State]]:
        """Evaluate the dense output at ``n`` equally spaced parameters."""
        s0 = self.steps[0].s0
        s1 = self.s_end
        ss = [s0 + (s1 - s0) * i / (n - 1) for i in range(n)]
        out = []
        j = 0
        steps = self.steps
        forward = steps[0].h > 0
        for s in ss:
            while j < len(steps) - 1 and ((steps[j].s1 < s) if forward else (steps[j].s1 > s)):
                j += 1
            out.append(steps[j](s))
        out[-1] = self.y_end
        return ss, out


def _norm(err: Sequence[float], tol: float) -> float:
    acc = 0.0
    for e in err:
        acc += (e / tol) ** 2
    return math.sqrt(acc / len(err))


def integrate(
    fun: RHS,
    s0: float,
    y0: Sequence[float],
    s_end: float,
    tol: float,
    *,
    h0: float | None = None,
    event: Callable[[Step], float | None] | None = None,
    on_step: Callable[[Step], None] | None = None,
    max_step: float = math.inf,
) -> Solution:
    """Integrate ``y' = fun(s, y)`` from ``s0`` to ``s_end``.

    The local error per unit step is held below an internal tolerance
    ``tol * (tol / 1e-4) ** 0.2`` in absolute terms, with the fifth-order
    solution propagated. The exponent mapping makes the global error
    shrink at least proportionally to ``tol`` across [1e-12, 1e-4].

    ``event`` is called after each accepted step and may return a
    location inside that step at which to stop; the last step is then
    truncated there by re-evaluating the dense output.
    """
    y = tuple(float(v) for v in y0)
    tol = tol * (tol / TOL_REF) ** TOL_EXPONENT
    span = s_end - s0
    if span == 0:
        raise ValueError("empty integration interval")
    direction = 1.0 if span > 0 else -1.0
    sol = Solution()
    k1 = fun(s0, y)
    sol.nfev += 1
    h = abs(h0) if h0 else min(0.01, abs(span), max_step)
    s = s0
    err_prev = 1e-4
    safety, beta = 0.9, 0.04
    expo = 0.25 - 0.75 * beta
    n_steps = 0
    while direction * (s_end - s) > 0:
        n_steps += 1
        if n_steps > MAX_STEPS:
            raise StepFailure(f"step budget exhausted at s={s}")
        if h > abs(s_end - s):
            h = abs(s_end - s)
        hs = direction * h
        yy = y
        k2 = fun(s + C2 * hs, tuple(a + hs * A21 * b for a, b in zip(yy, k1)))
        k3 = fun(
            s + C3 * hs,
            tuple(a + hs * (A31 * b + A32 * c) for a, b, c in zip(yy, k1, k2)),
        )
        k4 = fun(
            s + C4 * hs,
            tuple(a + hs * (A41 * b + A42 * c + A43 * d) for a, b, c, d in zip(yy, k1, k2, k3)),
        )
        k5 = fun(
            s + C5 * hs,
            tuple(
                a + hs * (A51 * b + A52 * c + A53 * d + A54 * e)
                for a, b, c, d, e in zip(yy, k1, k2, k3, k4)
            ),
        )
        k6 = fun(
            s + hs,
            tuple(
                a + hs * (A61 * b + A62 * c + A63 * d + A64 * e + A65 * f)
                for a, b, c, d, e, f in zip(yy, k1, k2, k3, k4, k5)
            ),
        )
        y1 = tuple(
            a + hs * (A71 * b + A73 * d + A74 * e + A75 * f + A76 * g)
            for a, b, d, e, f, g in zip(yy, k1, k3, k4, k5, k6)
        )
        k7 = fun(s + hs, y1)
        sol.nfev += 6
        err = tuple(
            hs * (E1 * b + E3 * d + E4 * e + E5 * f + E6 * g + E7 * q)
            for b, d, e, f, g, q in zip(k1, k3, k4, k5, k6, k7)
        )
        # error per unit step
        en = _norm(err, tol) / max(h, 1e-300)
        if not math.isfinite(en):
            en = 1e10
        if en <= 1.0:
            r2 = tuple(b - a for a, b in zip(yy, y1))
            r3 = tuple(hs * a - b for a, b in zip(k1, r2))
            r4 = tuple(b - hs * a - c for a, b, c in zip(k7, r2, r3))
            r5 = tuple(
                hs * (D1 * a + D3 * c + D4 * d + D5 * e + D6 * f + D7 * g)
                for a, c, d, e, f, g in zip(k1, k3, k4, k5, k6, k7)
            )
            step = Step(s, hs, yy, y1, (r2, r3, r4, r5))
            if event is not None:
                hit = event(step)
                if hit is not None:
                    y_hit = step(hit)
                    step = _truncate(step, hit, y_hit, fun)
                    sol.steps.append(step)
                    sol.terminated_by_event = True
                    if on_step is not None:
                        on_step(step)
                    return sol
            sol.steps.append(step)
            if on_step is not None:
                on_step(step)
            s = s + hs
            y = y1
            k1 = k7
            fac = en ** expo / err_prev ** beta / safety if en > 0 else 0.1
            fac = min(5.0, max(0.2, fac))
            h = min(h / fac, max_step)
            err_prev = max(en, 1e-4)
        else:
            fac = min(5.0, en ** expo / safety)
            h = h / max(fac, 1.5)
            sol.rejected += 1
        if h < MIN_STEP:
            raise StepFailure(f"step size underflow at s={s}")
    return sol


def _truncate(step: Step, s_hit: float, y_hit: State, fun: RHS) -> Step:
    # Rebuild a cubic Hermite continuous extension on the shortened step;
    # the dense output of the original step is what located the event.
    h = s_hit - step.s0
    if h == 0:
        return Step(step.s0, step.h * 1e-300, step.y0, step.y0, (
            tuple(0.0 for _ in step.y0),) * 4)
    f0 = fun(step.s0, step.y0)
    f1 = fun(s_hit, y_hit)
    r2 = tuple(b - a for a, b in zip(step.y0, y_hit))
    r3 = tuple(h * a - b for a, b in zip(f0, r2))
    r4 = tuple(b - h * a - c for a, b, c in zip(f1, r2, r3))
    r5 = tuple(0.0 for _ in step.y0)
    return Step(step.s0, h, step.y0, y_hit, (r2, r3, r4, r5))


def find_root(step: Step, g: Callable[[State], float], g0: float, g1: float, xtol: float = 1e-14) -> float:
    """Locate a sign change of ``g`` on the dense output of ``step``."""
    a, b = step.s0, step.s1
    fa, fb = g0, g1
    for _ in range(200):
        # Illinois-style regula falsi guarded by bisection
        m = b - fb * (b - a) / (fb - fa) if fb != fa else 0.5 * (a + b)
        lo, hi = min(a, b), max(a, b)
        if not (lo < m < hi):
            m = 0.5 * (a + b)
        fm = g(step(m))
        if fm == 0 or abs(b - a) < xtol * (1.0 + abs(m)):
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
            fb *= 0.5
        else:
            b, fb = m, fm
            fa *= 0.5
    return 0.5 * (a + b)

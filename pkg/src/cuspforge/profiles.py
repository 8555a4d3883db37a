"""Piecewise warping profiles with exact derivatives.

A :class:`ProfileFunction` is an ordered list of segments, each carrying one
closed form (cosh, sinh, exponential, power, quintic polynomial, constant).
Values and the first two derivatives are evaluated analytically per segment;
nothing in here differentiates numerically.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import linprog

from .errors import DomainError, PatchFailure

KNOT_RTOL = 1e-9


# ---------------------------------------------------------------------------
# segment forms
# ---------------------------------------------------------------------------


class Form:
    """Closed-form piece of a profile."""

    tag = ""

    def jet(self, t: float) -> tuple[float, float, float]:
        raise NotImplementedError

    def values(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def scaled(self, A: float, c: float) -> "Form":
        """Form of ``tau -> f(A*tau + c) / A``."""
        raise NotImplementedError

    def params(self) -> dict[str, float]:
        raise NotImplementedError

    def min_on(self, lo: float, hi: float) -> float:
        """Infimum of the value over ``[lo, hi]`` (closed form where possible)."""
        raise NotImplementedError


@dataclass(frozen=True)
class Cosh(Form):
    c: float
    k: float = 1.0
    t0: float = 0.0
    tag = "cosh"

    def jet(self, t):
        u = self.k * (t - self.t0)
        ch, sh = math.cosh(u), math.sinh(u)
        return self.c * ch, self.c * self.k * sh, self.c * self.k * self.k * ch

    def values(self, t):
        u = self.k * (t - self.t0)
        ch, sh = np.cosh(u), np.sinh(u)
        return self.c * ch, self.c * self.k * sh, self.c * self.k**2 * ch

    def scaled(self, A, c):
        return Cosh(self.c / A, self.k * A, (self.t0 - c) / A)

    def params(self):
        return {"c": self.c, "k": self.k, "t0": self.t0}

    def min_on(self, lo, hi):
        if lo <= self.t0 <= hi:
            return self.c
        return min(self.jet(lo)[0], self.jet(hi)[0]) if math.isfinite(hi) else self.jet(lo)[0]


@dataclass(frozen=True)
class Sinh(Form):
    c: float
    k: float = 1.0
    t0: float = 0.0
    tag = "sinh"

    def jet(self, t):
        u = self.k * (t - self.t0)
        ch, sh = math.cosh(u), math.sinh(u)
        return self.c * sh, self.c * self.k * ch, self.c * self.k * self.k * sh

    def values(self, t):
        u = self.k * (t - self.t0)
        ch, sh = np.cosh(u), np.sinh(u)
        return self.c * sh, self.c * self.k * ch, self.c * self.k**2 * sh

    def scaled(self, A, c):
        return Sinh(self.c / A, self.k * A, (self.t0 - c) / A)

    def params(self):
        return {"c": self.c, "k": self.k, "t0": self.t0}

    def min_on(self, lo, hi):
        # monotone
        a = self.jet(lo)[0]
        b = self.jet(hi)[0] if math.isfinite(hi) else math.copysign(math.inf, self.c * self.k)
        return min(a, b)


@dataclass(frozen=True)
class Exp(Form):
    """``c * exp(-k (t - t0)) + b``."""

    c: float
    k: float = 1.0
    t0: float = 0.0
    b: float = 0.0
    tag = "exp"

    def jet(self, t):
        e = self.c * math.exp(-self.k * (t - self.t0))
        return e + self.b, -self.k * e, self.k * self.k * e

    def values(self, t):
        e = self.c * np.exp(-self.k * (t - self.t0))
        return e + self.b, -self.k * e, self.k**2 * e

    def scaled(self, A, c):
        return Exp(self.c / A, self.k * A, (self.t0 - c) / A, self.b / A)

    def params(self):
        return {"c": self.c, "k": self.k, "t0": self.t0, "b": self.b}

    def min_on(self, lo, hi):
        # monotone in t, so the infimum is at an end (or its limit)
        if self.c == 0 or self.k == 0:
            return self.c + self.b
        cands = []
        for t, sign in ((lo, -1.0), (hi, 1.0)):
            if math.isfinite(t):
                cands.append(self.jet(t)[0])
            elif sign * self.k > 0:
                cands.append(self.b)
            else:
                cands.append(math.copysign(math.inf, self.c))
        return min(cands)


@dataclass(frozen=True)
class Power(Form):
    """``c * (t - t0) ** (-s)`` for ``t > t0``."""

    c: float
    s: float
    t0: float = 0.0
    tag = "power"

    def jet(self, t):
        d = t - self.t0
        if d <= 0:
            raise DomainError(f"power segment evaluated at or before its pole t0={self.t0}")
        v = self.c * d ** (-self.s)
        return v, -self.s * v / d, self.s * (self.s + 1) * v / (d * d)

    def values(self, t):
        d = t - self.t0
        v = self.c * d ** (-self.s)
        return v, -self.s * v / d, self.s * (self.s + 1) * v / d**2

    def scaled(self, A, c):
        return Power(self.c * A ** (-self.s) / A, self.s, (self.t0 - c) / A)

    def params(self):
        return {"c": self.c, "s": self.s, "t0": self.t0}

    def min_on(self, lo, hi):
        if lo <= self.t0:
            return -math.inf
        return 0.0 if not math.isfinite(hi) else min(self.jet(lo)[0], self.jet(hi)[0])


@dataclass(frozen=True)
class Quintic(Form):
    """Polynomial ``sum coeffs[i] * (t - t_ref) ** i`` of degree at most five."""

    coeffs: tuple[float, ...]
    t_ref: float = 0.0
    tag = "quintic"

    def __post_init__(self):
        if len(self.coeffs) != 6:
            object.__setattr__(self, "coeffs", tuple(self.coeffs) + (0.0,) * (6 - len(self.coeffs)))

    def jet(self, t):
        u = t - self.t_ref
        a0, a1, a2, a3, a4, a5 = self.coeffs
        v = a0 + u * (a1 + u * (a2 + u * (a3 + u * (a4 + u * a5))))
        d1 = a1 + u * (2 * a2 + u * (3 * a3 + u * (4 * a4 + u * 5 * a5)))
        d2 = 2 * a2 + u * (6 * a3 + u * (12 * a4 + u * 20 * a5))
        return v, d1, d2

    def values(self, t):
        u = np.asarray(t, dtype=float) - self.t_ref
        a0, a1, a2, a3, a4, a5 = self.coeffs
        v = a0 + u * (a1 + u * (a2 + u * (a3 + u * (a4 + u * a5))))
        d1 = a1 + u * (2 * a2 + u * (3 * a3 + u * (4 * a4 + u * 5 * a5)))
        d2 = 2 * a2 + u * (6 * a3 + u * (12 * a4 + u * 20 * a5))
        return v, d1, d2

    def scaled(self, A, c):
        return Quintic(tuple(a * A ** (i - 1) for i, a in enumerate(self.coeffs)), (self.t_ref - c) / A)

    def params(self):
        out = {f"a{i}": a for i, a in enumerate(self.coeffs)}
        out["t_ref"] = self.t_ref
        return out

    def polynomial(self) -> Polynomial:
        return Polynomial(self.coeffs)

    def min_on(self, lo, hi):
        p = self.polynomial()
        u0, u1 = lo - self.t_ref, hi - self.t_ref
        crit = [r.real for r in p.deriv().roots() if abs(r.imag) < 1e-12 and u0 <= r.real <= u1]
        return float(min(p(u) for u in [u0, u1, *crit]))


@dataclass(frozen=True)
class Constant(Form):
    c: float
    tag = "constant"

    def jet(self, t):
        return self.c, 0.0, 0.0

    def values(self, t):
        t = np.asarray(t, dtype=float)
        return np.full_like(t, self.c), np.zeros_like(t), np.zeros_like(t)

    def scaled(self, A, c):
        return Constant(self.c / A)

    def params(self):
        return {"c": self.c}

    def min_on(self, lo, hi):
        return self.c


FORMS = {cls.tag: cls for cls in (Cosh, Sinh, Exp, Power, Quintic, Constant)}


@dataclass(frozen=True)
class Segment:
    lo: float
    hi: float
    form: Form


# ---------------------------------------------------------------------------
# profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileFunction:
    """Positive, C^2, piecewise closed-form function of one variable.

    Segments are half-open ``[lo, hi)``; the last one is closed when its
    right end is finite. At interior knots the right-hand segment is used,
    so derivatives there are one-sided from the right.

    Parameters
    ----------
    segments
        Ordered segments partitioning the domain.
    allow_boundary_zero
        Permit the value to vanish at the left end of the domain (an axis,
        e.g. ``sinh`` at 0). Interior values must still be positive.
    check
        Run the positivity and knot-continuity checks.
    signed
        The function is a generator rather than a warping factor and may
        take any sign; only the knot-continuity check runs.
    """

    segments: tuple[Segment, ...]
    allow_boundary_zero: bool = False
    check: bool = field(default=True, compare=False)
    signed: bool = False

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("a profile needs at least one segment")
        for s in segs:
            if not s.lo < s.hi:
                raise ValueError(f"empty segment [{s.lo}, {s.hi})")
        for left, right in zip(segs, segs[1:]):
            if left.hi != right.lo:
                raise ValueError(f"segments do not partition the domain: gap/overlap at {left.hi} vs {right.lo}")
        object.__setattr__(self, "_los", [s.lo for s in segs])
        if self.check:
            self._check_knots()
            if not self.signed:
                self._check_positive()

    # -- construction helpers -------------------------------------------------

    @classmethod
    def single(cls, form: Form, lo: float = -math.inf, hi: float = math.inf, **kw) -> "ProfileFunction":
        return cls((Segment(lo, hi, form),), **kw)

    @classmethod
    def cosh(cls, lo: float = -math.inf, hi: float = math.inf) -> "ProfileFunction":
        return cls.single(Cosh(1.0), lo, hi)

    @classmethod
    def exponential(cls, lo: float = -math.inf, hi: float = math.inf, c: float = 1.0) -> "ProfileFunction":
        return cls.single(Exp(c, 1.0, 0.0), lo, hi)

    @classmethod
    def constant(cls, c: float, lo: float = -math.inf, hi: float = math.inf) -> "ProfileFunction":
        return cls.single(Constant(c), lo, hi)

    # -- checks -----------------------------------------------------------------

    def _check_knots(self):
        for left, right in zip(self.segments, self.segments[1:]):
            t = left.hi
            jl = left.form.jet(t)
            jr = right.form.jet(t)
            scale = max(abs(jl[0]), abs(jr[0]))
            for order, (x, y) in enumerate(zip(jl, jr)):
                ref = max(abs(x), abs(y), scale, 1e-300)
                if abs(x - y) > KNOT_RTOL * ref:
                    raise ValueError(
                        f"profile is not C^2 at knot t={t}: derivative {order} "
                        f"differs ({x!r} vs {y!r})"
                    )

    def _check_positive(self):
        for i, s in enumerate(self.segments):
            m = s.form.min_on(s.lo, s.hi)
            if m > 0:
                continue
            at_axis = i == 0 and self.allow_boundary_zero and m == 0 and s.form.jet(s.lo)[0] == 0
            if at_axis:
                continue
            if m == 0 and not math.isfinite(s.hi):
                # decaying to zero at infinity is fine
                continue
            raise ValueError(f"profile is not positive on segment [{s.lo}, {s.hi}) (min {m})")

    # -- evaluation ---------------------------------------------------------------

    @property
    def domain(self) -> tuple[float, float]:
        return self.segments[0].lo, self.segments[-1].hi

    @property
    def knots(self) -> list[float]:
        return [s.hi for s in self.segments[:-1]]

    def contains(self, t: float) -> bool:
        lo, hi = self.domain
        return lo <= t <= hi and math.isfinite(t) or (t == lo == -math.inf)

    def segment_index(self, t: float) -> int:
        lo, hi = self.domain
        if not (lo <= t <= hi) or math.isnan(t):
            raise DomainError(f"t={t} outside profile domain [{lo}, {hi}]")
        i = bisect.bisect_right(self._los, t) - 1
        return max(0, min(i, len(self.segments) - 1))

    def jet(self, t: float) -> tuple[float, float, float]:
        """Value, first and second derivative at a scalar ``t``."""
        return self.segments[self.segment_index(t)].form.jet(t)

    def jet_extended(self, t: float) -> tuple[float, float, float]:
        """Like :meth:`jet`, continuing the end segments' closed forms past the domain.

        Finite-difference stencils centred at a domain endpoint need this.
        """
        i = bisect.bisect_right(self._los, t) - 1
        return self.segments[max(0, min(i, len(self.segments) - 1))].form.jet(t)

    def _eval(self, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        arr = np.asarray(t, dtype=float)
        flat = arr.ravel()
        lo, hi = self.domain
        if flat.size and (np.any(flat < lo) or np.any(flat > hi) or np.any(np.isnan(flat))):
            raise DomainError(f"points outside profile domain [{lo}, {hi}]")
        idx = np.clip(np.searchsorted(self._los, flat, side="right") - 1, 0, len(self.segments) - 1)
        v = np.empty_like(flat)
        d1 = np.empty_like(flat)
        d2 = np.empty_like(flat)
        for i, s in enumerate(self.segments):
            m = idx == i
            if np.any(m):
                a, b, c = s.form.values(flat[m])
                v[m], d1[m], d2[m] = a, b, c
        return v.reshape(arr.shape), d1.reshape(arr.shape), d2.reshape(arr.shape)

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.jet(float(t))[0]
        return self._eval(t)[0]

    def d1(self, t):
        if np.ndim(t) == 0:
            return self.jet(float(t))[1]
        return self._eval(t)[1]

    def d2(self, t):
        if np.ndim(t) == 0:
            return self.jet(float(t))[2]
        return self._eval(t)[2]

    # -- transformations ----------------------------------------------------------

    def scaled(self, A: float, c: float = 0.0) -> "ProfileFunction":
        return scale_profile(self, A, c)

    def restricted(self, lo: float, hi: float) -> "ProfileFunction":
        """The same function on the sub-domain ``[lo, hi]``."""
        dlo, dhi = self.domain
        if lo < dlo or hi > dhi or not lo < hi:
            raise DomainError(f"[{lo}, {hi}] is not inside the domain [{dlo}, {dhi}]")
        segs = []
        for s in self.segments:
            a, b = max(s.lo, lo), min(s.hi, hi)
            if a < b:
                segs.append(Segment(a, b, s.form))
        return ProfileFunction(tuple(segs), self.allow_boundary_zero and lo == dlo, check=False, signed=self.signed)

    @property
    def tail(self) -> Segment | None:
        """The right-unbounded segment, if any."""
        last = self.segments[-1]
        return last if not math.isfinite(last.hi) else None

    def exp_tail_start(self) -> float | None:
        """Knot where a decaying exponential tail begins (``None`` if absent)."""
        start = None
        for s in reversed(self.segments):
            if isinstance(s.form, Exp) and s.form.k > 0 and s.form.b == 0:
                start = s.lo
            else:
                break
        return start

    # -- serialization -----------------------------------------------------------

    def to_text(self) -> str:
        lines = ["# cuspforge profile v1"]
        if self.allow_boundary_zero:
            lines.append("axis = true")
        if self.signed:
            lines.append("signed = true")
        for s in self.segments:
            parts = [f"segment lo={s.lo:.17g} hi={s.hi:.17g} form={s.form.tag}"]
            parts += [f"{k}={v:.17g}" for k, v in s.form.params().items()]
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ProfileFunction":
        segs = []
        axis = False
        signed = False
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.replace(" ", "") == "axis=true":
                axis = True
                continue
            if line.replace(" ", "") == "signed=true":
                signed = True
                continue
            head, *rest = line.split()
            if head != "segment":
                raise ValueError(f"unrecognised profile record: {line!r}")
            kv = dict(tok.split("=", 1) for tok in rest)
            tag = kv.pop("form")
            lo, hi = float(kv.pop("lo")), float(kv.pop("hi"))
            vals = {k: float(v) for k, v in kv.items()}
            if tag == "quintic":
                form: Form = Quintic(tuple(vals[f"a{i}"] for i in range(6)), vals["t_ref"])
            else:
                form = FORMS[tag](**vals)
            segs.append(Segment(lo, hi, form))
        return cls(tuple(segs), allow_boundary_zero=axis, signed=signed)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def scale_profile(f: ProfileFunction, A: float, c: float = 0.0) -> ProfileFunction:
    """Return ``tau -> f(A*tau + c) / A``.

    This is the warping function of the metric ``g / A**2`` written in the
    rescaled radial coordinate ``tau = (t - c) / A``; curvatures get
    multiplied by ``A**2``.
    """
    if not A > 0:
        raise ValueError("scale factor A must be positive")
    segs = tuple(
        Segment((s.lo - c) / A, (s.hi - c) / A, s.form.scaled(A, c)) for s in f.segments
    )
    return ProfileFunction(segs, f.allow_boundary_zero, check=False, signed=f.signed)


def hermite_quintic(t0: float, jet0: Sequence[float], t1: float, jet1: Sequence[float]) -> Quintic:
    """Quintic matching value/first/second derivative at both ends."""
    w = t1 - t0
    f0, d0, s0 = jet0
    f1, d1, s1 = jet1
    a0, a1, a2 = f0, d0, 0.5 * s0
    # remaining coefficients from the three right-end conditions
    r0 = f1 - (a0 + a1 * w + a2 * w * w)
    r1 = d1 - (a1 + 2 * a2 * w)
    r2 = s1 - 2 * a2
    M = np.array(
        [[w**3, w**4, w**5], [3 * w**2, 4 * w**3, 5 * w**4], [6 * w, 12 * w**2, 20 * w**3]]
    )
    a3, a4, a5 = np.linalg.solve(M, [r0, r1, r2])
    return Quintic((a0, a1, a2, float(a3), float(a4), float(a5)), t0)


def _bernstein_cubic(w: float) -> list[Polynomial]:
    x = Polynomial([0.0, 1.0 / w])
    one = Polynomial([1.0])
    return [math.comb(3, i) * x**i * (one - x) ** (3 - i) for i in range(4)]


def _tail_unit_jet(mode: str, t1: float, power: float, pole_gap: float):
    if mode == "exponential":
        return (1.0, -1.0, 1.0)
    d = pole_gap
    return (d ** (-power), -power * d ** (-power - 1), power * (power + 1) * d ** (-power - 2))


def _blend_lp(a: float, knots: Sequence[float], tail_jet: Sequence[float], end_scale: float):
    """Solve for Bernstein coefficients of a nonnegative piecewise-cubic f''.

    Returns ``(pieces, F)`` where ``pieces[j]`` is the 4-vector of Bernstein
    coefficients on ``[knots[j], knots[j+1]]`` and ``F`` the tail amplitude,
    or ``None`` when no strictly convex blend exists on these knots.
    """
    m = len(knots) - 1
    t1 = knots[-1]
    L = t1 - a
    widths = [knots[j + 1] - knots[j] for j in range(m)]
    q0 = math.cosh(a)
    u0, u1, u2 = tail_jet
    # variables: beta_{j,1}, beta_{j,2} (2m), q_1..q_{m-1} (m-1), F, margin
    nb = 2 * m
    nq = m - 1
    iF = nb + nq
    im = iF + 1
    nv = im + 1

    def q_index(j):  # knot value j (0..m); returns ('const', v) or ('var', idx) or ('F', coef)
        if j == 0:
            return ("const", q0)
        if j == m:
            return ("F", u2)
        return ("var", nb + j - 1)

    A_eq = np.zeros((2, nv))
    b_eq = np.zeros(2)
    # slope: sum_j w_j/4 * (q_j + b1 + b2 + q_{j+1}) = F*u1 - sinh(a)
    # value: cosh a + L sinh a + sum_j [(t1 - k_{j+1}) w_j/4 (..) + w_j^2/20 (4q_j + 3b1 + 2b2 + q_{j+1})] = F*u0
    b_eq[0] = -math.sinh(a)
    b_eq[1] = -(math.cosh(a) + L * math.sinh(a))
    A_eq[0, iF] -= u1
    A_eq[1, iF] -= u0
    for j, w in enumerate(widths):
        lever = t1 - knots[j + 1]
        mass = w / 4.0
        mom = w * w / 20.0
        weights = {0: (mass, lever * mass + 4 * mom), 1: (mass, lever * mass + 3 * mom),
                   2: (mass, lever * mass + 2 * mom), 3: (mass, lever * mass + mom)}
        for i in range(4):
            wm, wv = weights[i]
            if i in (1, 2):
                col = 2 * j + (i - 1)
                A_eq[0, col] += wm
                A_eq[1, col] += wv
                continue
            kind, ref = q_index(j if i == 0 else j + 1)
            if kind == "const":
                b_eq[0] -= wm * ref
                b_eq[1] -= wv * ref
            elif kind == "var":
                A_eq[0, ref] += wm
                A_eq[1, ref] += wv
            else:
                A_eq[0, iF] += wm * ref
                A_eq[1, iF] += wv * ref
    # margin constraints, relative to a reference decay envelope so tiny
    # coefficients far down the blend are not forced to the same size as q0
    A_ub = []
    b_ub = []
    # geometric in the knot index, from cosh(a) down to the expected tail size
    def envelope(pos):
        return q0 * (end_scale / q0) ** (pos / m)

    ref_vals = []
    for j in range(m):
        ref_vals += [envelope(j + 1 / 3), envelope(j + 2 / 3)]
    ref_knots = [envelope(j) for j in range(1, m)]
    for col, ref in enumerate(ref_vals):
        row = np.zeros(nv)
        row[col] = -1.0
        row[im] = ref
        A_ub.append(row)
        b_ub.append(0.0)
    for j, ref in enumerate(ref_knots):
        row = np.zeros(nv)
        row[nb + j] = -1.0
        row[im] = ref
        A_ub.append(row)
        b_ub.append(0.0)
    row = np.zeros(nv)
    row[iF] = -u2
    row[im] = end_scale
    A_ub.append(row)
    b_ub.append(0.0)
    c = np.zeros(nv)
    c[im] = -1.0
    bounds = [(0, None)] * (nb + nq) + [(0, None), (None, 1.0)]
    res = linprog(c, A_ub=np.array(A_ub), b_ub=np.array(b_ub), A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if res.status != 0 or res.x[im] <= 1e-9:
        return None
    x = res.x.copy()
    # The LP meets the equalities only to solver tolerance. Remove the
    # residual with the smallest correction relative to each coefficient's
    # size (F stays fixed so the tail is untouched), then re-check signs.
    free = np.arange(nb + nq)
    Af = A_eq[:, free]
    for _ in range(3):
        r = b_eq - A_eq @ x
        wts = x[free] ** 2
        G = (Af * wts) @ Af.T
        x[free] += wts * (Af.T @ np.linalg.solve(G, r))
    if np.any(x[free] <= 0):
        return None
    F = float(x[iF])
    qs = [q0] + [float(x[nb + j]) for j in range(nq)] + [F * u2]
    pieces = [[qs[j], float(x[2 * j]), float(x[2 * j + 1]), qs[j + 1]] for j in range(m)]
    return pieces, F


def _piece_poly(w: float, beta: Sequence[float], f0: float, fp0: float) -> Polynomial:
    basis = _bernstein_cubic(w)
    q = sum((b * B for b, B in zip(beta, basis)), Polynomial([0.0]))
    p = q.integ(2)
    return p + Polynomial([f0, fp0])


def make_decay_profile(
    a: float,
    mode: str = "exponential",
    *,
    power: float = 4.0,
    pole_gap: float = 4.0,
) -> ProfileFunction:
    """Convex profile on ``[a, inf)`` starting with the 2-jet of ``cosh`` at ``a``.

    The blend region is a chain of quintic segments whose second derivative
    is a nonnegative cubic (Bernstein coefficients found by a small linear
    program maximising the convexity margin). A single quintic on
    ``[a, a + 1]`` is used whenever it is feasible; otherwise the blend is
    lengthened. Beyond the last knot the profile is ``C * exp(-t)``
    (``mode="exponential"``) or ``C * (t - t0) ** (-power)``
    (``mode="cubic-decay"``, requires ``power > 3``).

    A convex function with ``f'(a) = sinh(a) >= 0`` cannot decay, so ``a``
    must be negative.
    """
    if not math.isfinite(a):
        raise ValueError("a must be finite")
    if mode not in ("exponential", "cubic-decay"):
        raise ValueError(f"unknown decay mode {mode!r}")
    if a >= 0:
        raise ValueError(
            f"no convex decaying profile matches cosh at a={a} >= 0 (the slope sinh(a) is not negative)"
        )
    if mode == "cubic-decay" and power <= 3:
        raise ValueError("cubic-decay mode needs power > 3 so that t^3 f(t) -> 0")

    candidates: list[list[float]] = [[a, a + 1.0]]
    # Longer blends: the first piece carries at least w0*cosh(a)/4 of curvature
    # mass, which must stay below the available slope |sinh a|, so the widths
    # start small and double until the requested length is covered.
    w0 = min(0.25, abs(math.sinh(a))) / 4.0
    L = 2.0
    while L < max(1e5, 100.0 / abs(math.sinh(a))):
        knots = [a]
        w = w0
        while knots[-1] - a < L:
            knots.append(knots[-1] + w)
            w *= 2.0
        candidates.append(knots)
        L *= 2.0
    for knots in candidates:
        t1 = knots[-1]
        tail_jet = _tail_unit_jet(mode, t1, power, pole_gap)
        # the margin envelope needs a guess of the final curvature size;
        # refine it once from the first solution found
        guess = min(math.cosh(a), abs(math.sinh(a))) / (t1 - a)
        sol = None
        for g in (guess, guess * 1e-3, guess * 1e3):
            sol = _blend_lp(a, knots, tail_jet, g)
            if sol is not None:
                better = _blend_lp(a, knots, tail_jet, sol[1] * tail_jet[2])
                sol = better or sol
                break
        if sol is None:
            continue
        pieces, F = sol
        segs = []
        f, fp = math.cosh(a), math.sinh(a)
        for j, beta in enumerate(pieces):
            w = knots[j + 1] - knots[j]
            p = _piece_poly(w, beta, f, fp)
            coeffs = tuple(float(x) for x in p.coef) + (0.0,) * (6 - len(p.coef))
            segs.append(Segment(knots[j], knots[j + 1], Quintic(coeffs[:6], knots[j])))
            f, fp = float(p(w)), float(p.deriv()(w))
        if mode == "exponential":
            tail: Form = Exp(F, 1.0, t1)
        else:
            tail = Power(F, power, t1 - pole_gap)
        segs.append(Segment(t1, math.inf, tail))
        return ProfileFunction(tuple(segs))
    raise PatchFailure(f"could not build a convex blend from cosh at a={a}")


def _kink_patch(A: float, a: float, w: float) -> tuple[Quintic, Exp, Exp]:
    left = Exp(1.0, A, -2.0 * a)
    right = Exp(1.0, -2.0 * A, a)
    return hermite_quintic(-w, left.jet(-w), w, right.jet(w)), left, right


def smooth_kink(A: float, a: float, *, grid: int = 10_000, margin: float = 1e-10) -> ProfileFunction:
    """C^2 smoothing of ``exp(-A(t+2a))`` (t <= 0) glued to ``exp(2A(t-a))`` (t >= 0).

    The kink is replaced by a quintic Hermite patch on ``(-w, w)``, starting
    from ``w = 1/A`` and halving until ``h''/h > margin`` holds on a dense
    grid of the patch.
    """
    if A < 2:
        raise ValueError("smoothing requires A >= 2")
    if not a > 0:
        raise ValueError("smoothing requires a > 0")
    w = 1.0 / A
    while w >= 1e-6 / A:
        patch, left, right = _kink_patch(A, a, w)
        ts = np.linspace(-w, w, grid)
        v, _, d2 = patch.values(ts)
        if np.all(v > 0) and np.all(d2 / v > margin):
            segs = (
                Segment(-math.inf, -w, left),
                Segment(-w, w, patch),
                Segment(w, math.inf, right),
            )
            return ProfileFunction(segs)
        w *= 0.5
    raise PatchFailure(f"no smoothing window down to 1e-6/A satisfies h''/h > {margin}")


def kink_inflation(A: float, a: float) -> float:
    """Largest |curvature|-type ratio inside the smoothing patch relative to its ends.

    Uses ``max(h''/h, (1 + h'^2)/h^2)`` on the patch divided by the same
    quantity maximised over the two patch endpoints.
    """
    h = smooth_kink(A, a)
    patch = h.segments[1]
    ts = np.linspace(patch.lo, patch.hi, 4001)
    v, d1, d2 = patch.form.values(ts)
    inside = np.maximum(d2 / v, (1 + d1**2) / v**2).max()
    ends = max(
        max(d2e / ve, (1 + d1e**2) / ve**2)
        for ve, d1e, d2e in (patch.form.jet(patch.lo), patch.form.jet(patch.hi))
    )
    return float(max(1.0, inside / ends))


def iter_segments(f: ProfileFunction, lo: float, hi: float) -> Iterable[tuple[float, float, Form]]:
    """Yield ``(a, b, form)`` for each segment piece intersecting ``[lo, hi]``."""
    for s in f.segments:
        a, b = max(s.lo, lo), min(s.hi, hi)
        if a < b:
            yield a, b, s.form

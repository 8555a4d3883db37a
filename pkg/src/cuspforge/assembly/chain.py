"""Radial skeletons of line assemblies, the CGVD diagnostic and the growth planner.

A :class:`ChainModel` follows a ray from a basepoint ``p`` outward through
a sequence of blocks: each block contributes its core (a segment of length
``s * D``), then its outgoing cusp from ``a`` to the truncation depth, and
the next block is entered through its incoming cusp from the matched depth
back to ``a``. Distance from ``p`` is the arc length along this skeleton,
which is exact inside the warped segments and off by at most the core
diameters elsewhere.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ..cusps import _power_integral
from ..curvature import cusp_sectional_curvatures
from ..errors import BudgetInfeasible, ConfigError, HorizonError
from ..profiles import Exp, ProfileFunction, kink_inflation, make_decay_profile
from .schedules import ScaleSchedule

CUSP_SAMPLES = 400


@dataclass(frozen=True)
class ChainSegment:
    """One piece of the skeleton.

    ``kind`` is ``"core"`` or ``"cusp"``. Cusp segments run over the
    profile parameter from ``t_from`` to ``t_to`` (either direction);
    their metric length is ``scale * |t_to - t_from|``.
    """

    kind: str
    scale: float
    length: float
    profile: ProfileFunction | None = None
    t_from: float = 0.0
    t_to: float = 0.0
    core_volume: float = 0.0
    core_curvature: float = 1.0

    def t_at(self, u: np.ndarray) -> np.ndarray:
        """Profile parameter at metric distance ``u`` into the segment."""
        direction = 1.0 if self.t_to >= self.t_from else -1.0
        lo, hi = sorted((self.t_from, self.t_to))
        return np.clip(self.t_from + direction * np.asarray(u) / self.scale, lo, hi)


@dataclass
class ChainModel:
    """Piecewise radial skeleton with curvature spikes at the necks."""

    n: int
    segments: list[ChainSegment]
    cross_section_volume: float = 1.0
    necks: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        if any(s.length <= 0 or s.scale <= 0 for s in self.segments):
            raise ValueError("segment lengths and scales must be positive")
        self._starts = np.concatenate([[0.0], np.cumsum([s.length for s in self.segments])])

    @property
    def horizon(self) -> float:
        return float(self._starts[-1])

    @classmethod
    def single_cusp(
        cls, profile: ProfileFunction, n: int, a: float, horizon: float, cross_section_volume: float = 1.0
    ) -> "ChainModel":
        seg = ChainSegment("cusp", 1.0, horizon, profile, a, a + horizon)
        return cls(n, [seg], cross_section_volume)

    def scaled(self, s: float) -> "ChainModel":
        """Whole model with metric multiplied by ``s**2``."""
        segs = [replace(seg, scale=seg.scale * s, length=seg.length * s) for seg in self.segments]
        necks = [(r * s, k / (s * s)) for r, k in self.necks]
        return ChainModel(self.n, segs, self.cross_section_volume, necks)

    # -- curvature --------------------------------------------------------------

    def _segment_curvature(self, seg: ChainSegment, u: np.ndarray) -> np.ndarray:
        if seg.kind == "core":
            return np.full_like(u, seg.core_curvature / seg.scale**2)
        kr, kt = cusp_sectional_curvatures(seg.profile, seg.t_at(u))
        mag = np.abs(kr) if self.n == 2 else np.maximum(np.abs(kr), np.abs(kt))
        return mag / seg.scale**2

    def curvature_samples(self) -> tuple[np.ndarray, np.ndarray]:
        """Radii and ``|K|`` sampled along the skeleton, including neck spikes."""
        rs, ks = [], []
        for start, seg in zip(self._starts, self.segments):
            m = 2 if seg.kind == "core" else CUSP_SAMPLES
            u = np.linspace(0.0, seg.length, m)
            rs.append(start + u)
            ks.append(self._segment_curvature(seg, u))
        for r, k in self.necks:
            rs.append(np.array([r]))
            ks.append(np.array([k]))
        r = np.concatenate(rs)
        k = np.concatenate(ks)
        order = np.argsort(r, kind="stable")
        return r[order], k[order]

    def b_p(self, r) -> np.ndarray:
        """Running maximum of ``|K|`` over radii at most ``r``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        self._check_radius(r, 0.0)
        rr, kk = self.curvature_samples()
        run = np.maximum.accumulate(kk)
        idx = np.searchsorted(rr, r, side="right") - 1
        return run[np.clip(idx, 0, None)]

    # -- volume -----------------------------------------------------------------

    def _segment_volume(self, seg: ChainSegment, u0: float, u1: float) -> float:
        """Volume of the part of ``seg`` between distances ``u0 < u1`` into it."""
        u0, u1 = max(u0, 0.0), min(u1, seg.length)
        if u1 <= u0:
            return 0.0
        if seg.kind == "core":
            return seg.scale**self.n * seg.core_volume * (u1 - u0) / seg.length
        lo, hi = sorted((float(seg.t_at(u0)), float(seg.t_at(u1))))
        parts = []
        for s in seg.profile.segments:
            x, y = max(s.lo, lo), min(s.hi, hi)
            if x < y:
                parts.append(_power_integral(s.form, x, y, self.n - 1)[0])
        # warping s f(t) and dr = s dt give s^n f^(n-1)
        return seg.scale**self.n * self.cross_section_volume * math.fsum(parts)

    def volume_between(self, r0: float, r1: float) -> float:
        """Volume of the shell ``r0 < dist(p, .) <= r1``, integrated directly."""
        parts = []
        for start, seg in zip(self._starts, self.segments):
            if start >= r1:
                break
            parts.append(self._segment_volume(seg, r0 - start, r1 - start))
        return math.fsum(parts)

    def cumulative_volume(self, r: float) -> float:
        return self.volume_between(0.0, r)

    def annulus_volume(self, r: float, width: float = 1.0) -> float:
        """Volume of ``B_p(r) minus B_p(r - width)``."""
        self._check_radius(np.array([r]), width)
        return self.volume_between(r - width, r)

    def _check_radius(self, r: np.ndarray, lower: float) -> None:
        if np.any(r < lower) or np.any(r > self.horizon * (1 + 1e-12)):
            raise HorizonError(f"radii must lie in [{lower}, {self.horizon}]")


@dataclass
class CGVDResult:
    r: np.ndarray
    b: np.ndarray
    volume: np.ndarray
    product: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "b_p", "vol_annulus", "product"])
        for row in zip(self.r, self.b, self.volume, self.product):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def cgvd_diagnostic(model: ChainModel, r_grid, width: float = 1.0) -> CGVDResult:
    """``b_p(r)**n * Vol(A_p(r))**2`` along ``r_grid``.

    ``A_p(r)`` is the annulus of the given width (1 by default) ending at
    radius ``r``; pass ``width = s`` when comparing against a model scaled
    by ``s``.

    Raises
    ------
    HorizonError
        If a radius is not in ``(width, horizon]``.
    """
    r = np.asarray(r_grid, dtype=float)
    if np.any(r <= width) or np.any(r > model.horizon * (1 + 1e-12)):
        raise HorizonError(f"r_grid must lie in ({width}, {model.horizon}]")
    b = model.b_p(r)
    vol = np.array([model.annulus_volume(float(x), width) for x in r])
    return CGVDResult(r, b, vol, b**model.n * vol**2)


# ---------------------------------------------------------------------------
# growth planner
# ---------------------------------------------------------------------------


@dataclass
class GrowthPlan:
    """Planned outgoing depths ``T_out[i]`` and matched incoming depths ``T_in[i]``."""

    T_out: list[float]
    T_in: list[float]
    scales: list[float]
    neck_radii: list[float]
    chain: ChainModel
    grid: np.ndarray
    b: np.ndarray
    budget: np.ndarray

    @property
    def verified(self) -> bool:
        return bool(np.all(self.b < self.budget))


def _exp_tail(profile: ProfileFunction) -> tuple[float, float]:
    """``(t1, C)`` with ``f(t) = C e^{-t}`` for ``t >= t1``."""
    t1 = profile.exp_tail_start()
    form = profile.segments[-1].form
    if t1 is None or not isinstance(form, Exp) or form.k != 1.0:
        raise ValueError("the planner needs a profile ending in C*exp(-t)")
    return t1, form.c * math.exp(form.t0)


def growth_truncation_planner(
    budget: Callable[[float], float],
    *,
    n: int = 3,
    a: float = -1.0,
    schedule: ScaleSchedule | None = None,
    core_diameter: float = 1.0,
    core_volume: float = 1.0,
    horizon: float = 40.0,
    T_cap: float = 8.0,
    T_step: float = 0.01,
    inflation: float | None = None,
    grid: int = 2000,
) -> GrowthPlan:
    """Greedy truncation depths for a line assembly under a curvature budget.

    Walking outward, block ``i`` (scale ``s_i = 1/lambda(i)``) gets the
    largest depth ``T_i <= T_cap`` whose neck curvature, inflated by the
    smoothing-patch factor, stays below ``budget`` at the neck radius. The
    next block is matched at ``T_i - ln(s_i/s_(i+1))``. The finished chain
    is then checked on a grid over ``(1, horizon]``.

    Raises
    ------
    BudgetInfeasible
        If no admissible depth exists for some block, or the grid check finds
        ``b_p(r) >= budget(r)``; ``radius`` carries the violating radius.
    """
    if schedule is None:
        schedule = ScaleSchedule.power(1.0, 1.0, 1.0)
    if core_diameter < 1:
        raise ValueError("block cores must have diameter at least 1")
    probe = np.linspace(1.0, horizon, 200)
    bvals = np.array([budget(float(x)) for x in probe])
    if np.any(np.diff(bvals) < 0):
        raise ValueError("budget must be non-decreasing")
    profile = make_decay_profile(a, "exponential")
    t1, _ = _exp_tail(profile)
    if inflation is None:
        inflation = kink_inflation(2.0, 1.0)

    def neck_k(T: np.ndarray, s: float) -> np.ndarray:
        kr, kt = cusp_sectional_curvatures(profile, T)
        mag = np.abs(kr) if n == 2 else np.maximum(np.abs(kr), np.abs(kt))
        return mag / (s * s)

    segments: list[ChainSegment] = []
    necks: list[tuple[float, float]] = []
    T_out, T_in, scales, neck_radii = [], [], [], []
    s0 = schedule.length_factor(0)
    segments.append(ChainSegment("core", s0, s0 * core_diameter, core_volume=core_volume))
    R = s0 * core_diameter
    i = 0
    while R < horizon:
        s, s_next = schedule.length_factor(i), schedule.length_factor(i + 1)
        shift = math.log(s / s_next)
        T_min = t1 + max(shift, 0.0)
        if T_min > T_cap:
            raise BudgetInfeasible(f"block {i}: tail constraint needs T >= {T_min} > T_cap", radius=R)
        Ts = np.arange(T_cap, T_min - 1e-12, -T_step)
        Ts = np.append(Ts, T_min) if Ts[-1] > T_min else Ts
        r_neck = R + s * (Ts - a)
        lhs = inflation * np.maximum(neck_k(Ts, s), neck_k(Ts - shift, s_next))
        ok = np.array([lv < budget(float(rv)) for lv, rv in zip(lhs, r_neck)])
        if not ok.any():
            raise BudgetInfeasible(
                f"block {i}: no depth in [{T_min}, {T_cap}] keeps the neck curvature below the budget",
                radius=float(r_neck[-1]),
            )
        j = int(np.argmax(ok))  # first feasible from the top, i.e. the largest depth
        T = float(Ts[j])
        Tn = T - shift
        segments.append(ChainSegment("cusp", s, s * (T - a), profile, a, T))
        R += s * (T - a)
        necks.append((R, float(lhs[j])))
        neck_radii.append(R)
        segments.append(ChainSegment("cusp", s_next, s_next * (Tn - a), profile, Tn, a))
        R += s_next * (Tn - a)
        segments.append(ChainSegment("core", s_next, s_next * core_diameter, core_volume=core_volume))
        R += s_next * core_diameter
        T_out.append(T)
        T_in.append(Tn)
        scales.append(s)
        i += 1
    scales.append(schedule.length_factor(i))
    chain = ChainModel(n, segments, 1.0, necks)
    rg = np.linspace(1.0, horizon, grid + 1)[1:]
    b = chain.b_p(rg)
    fb = np.array([budget(float(x)) for x in rg])
    bad = np.nonzero(b >= fb)[0]
    if bad.size:
        r_bad = float(rg[bad[0]])
        raise BudgetInfeasible(
            f"grid check failed: b_p({r_bad!r}) = {b[bad[0]]!r} >= budget {fb[bad[0]]!r}", radius=r_bad
        )
    return GrowthPlan(T_out, T_in, scales, neck_radii, chain, rg, b, fb)


# ---------------------------------------------------------------------------
# displacement growth and Margulis threshold
# ---------------------------------------------------------------------------


@dataclass
class DisplacementReport:
    rho: np.ndarray
    values: np.ndarray
    increasing: bool
    first_above_1e6: float | None

    @property
    def verdict(self) -> bool:
        return self.increasing and self.first_above_1e6 is not None


def displacement(rho):
    """``D(rho) = e^rho / rho``, the displacement lower bound along a harmonic-tail ray."""
    rho = np.asarray(rho, dtype=float)
    return np.exp(rho) / rho


def displacement_growth_check(rho_min: float = 2.0, rho_max: float = 100.0, samples: int = 9801) -> DisplacementReport:
    """Check that ``D(rho) = e^rho / rho`` increases and passes 1e6 on ``[rho_min, rho_max]``.

    Monotonicity is tested with central differences of ``log D`` so the
    check does not lose precision where ``D`` is huge.
    """
    rho = np.linspace(rho_min, rho_max, samples)
    h = 1e-6
    dlog = ((rho + h) - np.log(rho + h) - (rho - h) + np.log(rho - h)) / (2 * h)
    vals = displacement(rho)
    above = np.nonzero(vals > 1e6)[0]
    return DisplacementReport(rho, vals, bool(np.all(dlog > 0)), float(rho[above[0]]) if above.size else None)


MU1_ENV = "CUSPFORGE_MU1"


def margulis_threshold(b: float, mu1: float | None = None) -> float:
    """``mu_b = mu_1 / b``.

    ``mu_1`` comes from the argument or the ``CUSPFORGE_MU1`` environment
    variable; no default is assumed.
    """
    if not b > 0:
        raise ValueError("curvature bound b must be positive")
    if mu1 is None:
        raw = os.environ.get(MU1_ENV)
        if raw is None or not raw.strip():
            raise ConfigError(f"the Margulis constant is not configured; set {MU1_ENV} or pass mu1")
        try:
            mu1 = float(raw)
        except ValueError as exc:
            raise ConfigError(f"{MU1_ENV}={raw!r} is not a number") from exc
    if not mu1 > 0:
        raise ConfigError("the Margulis constant must be positive")
    return mu1 / b

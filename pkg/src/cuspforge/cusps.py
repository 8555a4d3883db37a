"""Single-cusp models: volume, completeness and curvature asymptotics.

The volume element of ``dt^2 + f(t)^2 g_N`` on ``[a, T) x N`` is
``f(t)^(n-1) dt dvol_N``, so a cusp has volume ``V_N * int_a^T f^(n-1) dt``.
Exponential, power and polynomial segments are integrated in closed form;
only cosh-type segments on bounded intervals go through adaptive quadrature.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .curvature import cusp_sectional_curvatures
from .errors import DomainError, QuadratureFailure
from .profiles import Constant, Cosh, Exp, Form, Power, ProfileFunction, Quintic, Sinh

VOLUME_RTOL = 1e-10
UNBOUNDED = math.inf


@dataclass(frozen=True)
class CuspModel:
    """Cusp ``[a, T) x N`` with warped metric ``dt^2 + f(t)^2 g_N``.

    Parameters
    ----------
    n
        Total dimension (the cross-section ``N`` has dimension ``n - 1``).
    cross_section_volume
        Volume ``V_N`` of the cross-section in its own metric.
    profile
        Warping function ``f``.
    a, T
        Radial start and truncation; ``T = inf`` marks an unbounded cusp.
    """

    n: int
    cross_section_volume: float
    profile: ProfileFunction
    a: float
    T: float = UNBOUNDED

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be at least 2")
        if not self.cross_section_volume > 0:
            raise ValueError("cross-section volume must be positive")
        if not self.a < self.T:
            raise ValueError(f"need a < T, got a={self.a}, T={self.T}")
        lo, hi = self.profile.domain
        if self.a < lo or self.T > hi:
            raise DomainError(f"profile domain [{lo}, {hi}] does not contain [{self.a}, {self.T})")

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.T)

    def truncated(self, T: float) -> "CuspModel":
        return CuspModel(self.n, self.cross_section_volume, self.profile, self.a, T)

    def scaled(self, A: float, c: float = 0.0) -> "CuspModel":
        """The cusp with metric divided by ``A**2``, in its own radial coordinate."""
        return CuspModel(
            self.n,
            self.cross_section_volume,
            self.profile.scaled(A, c),
            (self.a - c) / A,
            (self.T - c) / A,
        )


@dataclass(frozen=True)
class ManifoldDescriptor:
    """A compact part plus finitely many cusps."""

    compact_volume: float
    cusps: tuple[CuspModel, ...] = ()
    label: str = ""

    def __post_init__(self):
        if self.compact_volume < 0:
            raise ValueError("compact volume must be nonnegative")
        if not self.cusps and self.compact_volume == 0:
            raise ValueError("a manifold needs a cusp or a positive compact volume")

    def volume(self) -> float:
        parts = [self.compact_volume] + [cusp_volume(c).value for c in self.cusps]
        return math.fsum(parts)


@dataclass
class VolumeResult:
    """Cusp volume with its per-segment breakdown.

    ``value`` is ``inf`` and ``divergent`` is set when the integral provably
    diverges; ``reason`` then names the offending segment.
    """

    value: float
    divergent: bool = False
    reason: str = ""
    pieces: list[tuple[float, float, float]] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["segment", "contribution", "cumulative"])
        run: list[float] = []
        for lo, hi, v in self.pieces:
            run.append(v)
            w.writerow([f"[{lo!r}, {hi!r})", repr(v), repr(math.fsum(run))])
        return buf.getvalue()


def _power_integral(form: Form, lo: float, hi: float, p: int) -> tuple[float, str]:
    """``int_lo^hi form(t)^p dt``; returns ``(value, divergence_reason)``."""
    finite = math.isfinite(hi)
    if isinstance(form, Exp) and form.b == 0:
        rate = p * form.k
        if rate == 0:
            if finite:
                return form.c**p * (hi - lo), ""
            return math.inf, "constant exponential segment on an unbounded interval"
        if not finite and rate < 0:
            return math.inf, "growing exponential segment on an unbounded interval"
        e_lo = math.exp(-rate * (lo - form.t0))
        e_hi = math.exp(-rate * (hi - form.t0)) if finite else 0.0
        return form.c**p * (e_lo - e_hi) / rate, ""
    if isinstance(form, Power):
        q = form.s * p
        d_lo = lo - form.t0
        if q == 1:
            if not finite:
                return math.inf, "power tail with exponent (n-1)s = 1"
            return form.c**p * math.log((hi - form.t0) / d_lo), ""
        if not finite and q < 1:
            return math.inf, "power tail with exponent (n-1)s <= 1"
        hi_term = (hi - form.t0) ** (1 - q) if finite else 0.0
        return form.c**p * (hi_term - d_lo ** (1 - q)) / (1 - q), ""
    if isinstance(form, Constant):
        if not finite:
            return math.inf, "profile bounded below on an unbounded interval"
        return form.c**p * (hi - lo), ""
    if isinstance(form, Quintic):
        if not finite:
            return math.inf, "polynomial segment on an unbounded interval"
        P = form.polynomial() ** p
        F = P.integ()
        return float(F(hi - form.t_ref) - F(lo - form.t_ref)), ""
    if isinstance(form, (Cosh, Sinh, Exp)):
        if not finite:
            # cosh/sinh grow, and an exponential with offset b > 0 stays above b
            return math.inf, f"{form.tag} segment does not decay on an unbounded interval"
        val, err = quad(lambda t: form.jet(t)[0] ** p, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
        if err > VOLUME_RTOL * abs(val):
            raise QuadratureFailure(f"quadrature error {err} on [{lo}, {hi}] exceeds tolerance")
        return val, ""
    raise TypeError(f"unsupported segment form {form!r}")


def cusp_volume(c: CuspModel) -> VolumeResult:
    """``V_N * int_a^T f(t)^(n-1) dt`` with closed-form tails.

    Returns
    -------
    VolumeResult
        The value, or a divergence flag with the reason.
    """
    p = c.n - 1
    pieces = []
    for s in c.profile.segments:
        lo, hi = max(s.lo, c.a), min(s.hi, c.T)
        if not lo < hi:
            continue
        val, why = _power_integral(s.form, lo, hi, p)
        if why:
            return VolumeResult(math.inf, True, why, pieces)
        pieces.append((lo, hi, c.cross_section_volume * val))
    return VolumeResult(math.fsum(v for _, _, v in pieces), False, "", pieces)


def cumulative_volume(c: CuspModel, ts) -> np.ndarray:
    """Volume of ``[a, t] x N`` for each ``t`` in ``ts`` (``ts`` ascending)."""
    out = np.empty(len(ts))
    for i, t in enumerate(ts):
        out[i] = 0.0 if t <= c.a else cusp_volume(c.truncated(min(float(t), c.T))).value
    return out


@dataclass(frozen=True)
class Certificate:
    complete: bool
    criterion: str


def completeness_check(c: CuspModel) -> Certificate:
    """A cusp is complete on its own iff its radial length is infinite."""
    if c.unbounded:
        return Certificate(True, "radial length int_a^inf dt diverges")
    return Certificate(False, f"finite radial length {c.T - c.a!r}: boundary at t={c.T!r}")


@dataclass
class AsymptoticsReport:
    blows_down: bool
    sup_curvature: float
    sup_after_blend: float
    tail: str
    t: np.ndarray
    k_radial: np.ndarray
    k_tangential: np.ndarray
    growth_exponent: float | None = None


def curvature_asymptotics(c: CuspModel, samples: int = 2001) -> AsymptoticsReport:
    """Classify the curvature of an unbounded cusp far out.

    The tangential curvature tends to ``-inf`` exactly when ``f -> 0``,
    which is decided from the closed form of the last segment. Samples
    cover the head of the profile and 20 units (or up to ``t = 100`` for
    power tails) into the tail.
    """
    if not c.unbounded:
        raise ValueError("curvature asymptotics need an unbounded cusp")
    tail = c.profile.segments[-1]
    form = tail.form
    start = max(tail.lo, c.a)
    if isinstance(form, Exp):
        blows = form.k > 0 and form.b == 0
    elif isinstance(form, Power):
        blows = form.s > 0
    else:
        blows = False
    end = start + 20.0
    if isinstance(form, Power):
        end = max(end, 100.0)
    ts = np.linspace(c.a, end, samples)
    kr, kt = cusp_sectional_curvatures(c.profile, ts)
    families = np.concatenate([kr, kt]) if c.n > 2 else kr
    after = ts >= start
    fam_after = np.concatenate([kr[after], kt[after]]) if c.n > 2 else kr[after]
    exponent = None
    if isinstance(form, Power) and start <= 10.0:
        fit_t = np.linspace(10.0, 100.0, 200)
        _, kt_fit = cusp_sectional_curvatures(c.profile, fit_t)
        exponent = float(np.polyfit(np.log(fit_t), np.log(np.abs(kt_fit)), 1)[0])
    return AsymptoticsReport(
        blows_down=blows,
        sup_curvature=float(families.max()),
        sup_after_blend=float(fam_after.max()),
        tail=form.tag,
        t=ts,
        k_radial=kr,
        k_tangential=kt,
        growth_exponent=exponent,
    )

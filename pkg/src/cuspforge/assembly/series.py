"""Convergence verdicts for block-volume and block-diameter series.

A verdict is never read off partial sums. Each series comes with an
eventual closed form ``a_k = A * rho**k * (k + b)**(-p)`` (checked against
the actual terms on a window), and the decision is the matching comparison:
ratio test against a geometric series when ``rho != 1``, the p-test when
``rho == 1``. Convergent values are a partial sum plus a tail that is either
exact (Hurwitz zeta) or bounded by a geometric majorant below the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import zeta

from ..errors import Inconclusive
from .graphs import GraphPlan, shell_count_log
from .schedules import ScaleSchedule

SERIES_TOL = 1e-10
MAX_TERMS = 1_000_000
MODEL_RTOL = 1e-9
RHO_SNAP = 1e-12


@dataclass(frozen=True)
class TermModel:
    """``a_k = A * rho**k * (k + b)**(-p)`` for ``k >= k0`` (in log form)."""

    logA: float
    rho: float
    b: float
    p: float
    k0: int

    def log_term(self, k: int) -> float:
        power = self.p * math.log(k + self.b) if self.p != 0 else 0.0
        return self.logA + k * math.log(self.rho) - power


@dataclass
class SeriesVerdict:
    convergent: bool
    value: float
    witness: str
    terms: int
    error_bound: float = 0.0

    @property
    def divergent(self) -> bool:
        return not self.convergent


def _check_model(log_term: Callable[[int], float], model: TermModel) -> None:
    probes = list(range(model.k0, model.k0 + 50)) + [model.k0 + 10**j for j in range(2, 7)]
    for k in probes:
        got, want = log_term(k), model.log_term(k)
        if abs(got - want) > MODEL_RTOL * max(1.0, abs(want)):
            raise ValueError(f"series terms disagree with their closed form at k={k}: {got} vs {want}")


def classify_series(
    log_term: Callable[[int], float],
    model: TermModel,
    tol: float = SERIES_TOL,
    max_terms: int = MAX_TERMS,
) -> SeriesVerdict:
    """Decide convergence of ``sum_{k>=0} exp(log_term(k))`` by comparison.

    Parameters
    ----------
    log_term
        Logarithm of the k-th (positive) term.
    model
        Eventual closed form of the terms, verified on a probe window.
    """
    if model.rho != 1.0 and abs(model.rho - 1.0) <= RHO_SNAP:
        # rates such as 2 * sqrt(2)**-2 are 1 only up to rounding
        model = TermModel(model.logA, 1.0, model.b, model.p, model.k0)
    _check_model(log_term, model)
    rho, p = model.rho, model.p
    if rho > 1 or (rho == 1 and p <= 0):
        what = "ratio test: a_(k+1)/a_k -> rho = %r > 1" % rho if rho > 1 else (
            "terms bounded below by a positive constant times (k+b)^%r, not tending to 0" % (-p)
        )
        return SeriesVerdict(False, math.inf, what, model.k0)
    if rho == 1 and p <= 1:
        return SeriesVerdict(
            False,
            math.inf,
            f"p-test comparison: a_k = A (k+b)^(-{p!r}) with p <= 1 dominates a divergent p-series",
            model.k0,
        )
    head = [math.exp(log_term(k)) for k in range(model.k0)]
    if rho == 1:
        # exact tail: A * sum_{k>=k0} (k+b)^(-p) = A * zeta(p, k0 + b)
        tail = math.exp(model.logA) * float(zeta(p, model.k0 + model.b))
        value = math.fsum(head + [tail])
        return SeriesVerdict(
            True,
            value,
            f"p-test comparison with p = {p!r} > 1; tail summed exactly as a Hurwitz zeta value",
            model.k0,
        )
    # geometric majorant: for k >= K the ratio a_(k+1)/a_k is at most r_K < 1
    terms = list(head)
    running = math.fsum(terms)
    K = model.k0
    while True:
        if K - model.k0 > max_terms:
            raise Inconclusive(f"geometric tail bound did not reach {tol} within {max_terms} terms")
        aK = math.exp(model.log_term(K))
        shift = (K + 1 + model.b) / (K + model.b)
        r = rho * (shift ** (-p) if p < 0 else 1.0)
        if r < 1:
            bound = aK / (1 - r)
            if bound <= tol * max(1.0, running):
                partial = math.fsum(terms)
                return SeriesVerdict(
                    True,
                    partial,
                    f"ratio test: terms eventually dominated by a geometric series with ratio {r!r} < 1",
                    K,
                    bound,
                )
        terms.append(math.exp(log_term(K)))
        running += terms[-1]
        K += 1


def classify_numeric(term: Callable[[int], float], max_terms: int = MAX_TERMS) -> SeriesVerdict:
    """Verdict for a series given only by its terms.

    Estimates a geometric ratio and a power-law exponent from terms out to
    ``max_terms`` and decides only when the estimate sits clearly away from
    the borderline (``rho = 1``, ``p = 1``).

    Raises
    ------
    Inconclusive
        When neither comparison applies within ``max_terms`` terms.
    """
    k1, k2 = max_terms // 10, max_terms
    a1, a2 = term(k1), term(k2)
    ra = term(k2 + 1) / a2 if a2 > 0 else 0.0
    if a2 == 0 or ra < 1 - 1e-3:
        return SeriesVerdict(True, math.nan, f"ratio estimate {ra!r} < 1", k2)
    if ra > 1 + 1e-3:
        return SeriesVerdict(False, math.inf, f"ratio estimate {ra!r} > 1", k2)
    p_est = -math.log(a2 / a1) / math.log(k2 / k1)
    if p_est > 1.05:
        return SeriesVerdict(True, math.nan, f"power-law estimate p = {p_est:.4f} > 1", k2)
    if p_est < 0.95:
        return SeriesVerdict(False, math.inf, f"power-law estimate p = {p_est:.4f} < 1", k2)
    raise Inconclusive(f"borderline power-law estimate p = {p_est:.4f} within {max_terms} terms")


def volume_term_model(graph: GraphPlan, schedule: ScaleSchedule, block_volume: float, n: int) -> TermModel:
    C_g, rho_g = graph.growth
    ev = schedule.eventual
    return TermModel(
        logA=math.log(block_volume) + math.log(C_g) - n * math.log(ev.C),
        rho=rho_g * ev.beta ** (-n),
        b=ev.b,
        p=ev.q * n,
        k0=max(1, ev.k0),
    )


def total_volume(
    graph: GraphPlan,
    schedule: ScaleSchedule,
    block_volume: float,
    n: int,
    tol: float = SERIES_TOL,
) -> SeriesVerdict:
    """``sum_k count(k) * lambda(k)**(-n) * V`` with a comparison verdict."""
    if block_volume <= 0:
        raise ValueError("block volume must be positive")

    def log_term(k: int) -> float:
        return shell_count_log(graph, k) - n * schedule.log_divisor(k) + math.log(block_volume)

    return classify_series(log_term, volume_term_model(graph, schedule, block_volume, n), tol)


def completeness_series(
    schedule: ScaleSchedule,
    base_diameter: float = 1.0,
    *,
    enforce_min_diameter: bool = False,
) -> SeriesVerdict:
    """Sum of block diameters along a ray; the assembly is complete iff it diverges.

    With ``enforce_min_diameter`` every block is truncated so its diameter
    is at least 1, and the series diverges by comparison with a constant.
    The returned verdict is about the series: ``divergent`` means complete.
    """
    if enforce_min_diameter:
        return SeriesVerdict(False, math.inf, "every block has diameter >= 1: terms bounded below by 1", 0)
    ev = schedule.eventual

    def log_term(k: int) -> float:
        return math.log(base_diameter) - schedule.log_divisor(k)

    model = TermModel(math.log(base_diameter) - math.log(ev.C), 1.0 / ev.beta, ev.b, ev.q, ev.k0)
    return classify_series(log_term, model)


def is_complete(verdict: SeriesVerdict) -> bool:
    return verdict.divergent


def harmonic_tail_reference(K: int, b: float = 0.0) -> float:
    """``sum_{k=1}^{K} 1/(k+b)`` (reference for documentation and tests)."""
    return float(np.sum(1.0 / (np.arange(1, K + 1) + b)))

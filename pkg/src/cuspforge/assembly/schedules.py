"""Scale schedules: how much the block at graph distance ``k`` is shrunk.

A schedule returns the divisor ``lambda(k) >= 1``; the block at level ``k``
carries the metric ``g / lambda(k)**2``, so its lengths scale by
``1/lambda(k)`` and its volume by ``lambda(k)**(-n)``. Every schedule has
an eventual closed form ``lambda(k) = C * beta**k * (k + b)**q`` for
``k >= k0``, which the series tests use for their comparison arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import SideConditionError


@dataclass(frozen=True)
class Eventual:
    """``C * beta**k * (k + b)**q`` for ``k >= k0``."""

    C: float
    beta: float
    b: float
    q: float
    k0: int = 0

    def __call__(self, k: int) -> float:
        return self.C * self.beta**k * ((k + self.b) ** self.q if self.q != 0 else 1.0)

    def log(self, k: int) -> float:
        power = self.q * math.log(k + self.b) if self.q != 0 else 0.0
        return math.log(self.C) + k * math.log(self.beta) + power


@dataclass(frozen=True)
class ScaleSchedule:
    """Divisor schedule ``k -> lambda(k)``.

    ``head`` holds explicit values for ``k < eventual.k0``.
    """

    kind: str
    eventual: Eventual
    head: tuple[float, ...] = ()
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.head) != self.eventual.k0:
            raise ValueError("head length must equal the eventual-form start index")
        vals = [self.divisor(k) for k in range(self.eventual.k0 + 3)]
        if any(v <= 0 for v in vals):
            raise ValueError("schedule values must be positive")
        if any(b < a * (1 - 1e-15) for a, b in zip(vals, vals[1:])):
            raise ValueError("schedule must be non-decreasing")

    # constructors ---------------------------------------------------------------

    @classmethod
    def constant(cls, C: float = 1.0) -> "ScaleSchedule":
        return cls("constant", Eventual(C, 1.0, 0.0, 0.0))

    @classmethod
    def power(cls, C: float, b: float, q: float) -> "ScaleSchedule":
        """``lambda(k) = C (k + b)**q``."""
        if b <= 0:
            raise ValueError("shift b must be positive so that lambda(0) is defined")
        return cls("power", Eventual(C, 1.0, b, q))

    @classmethod
    def exponential(cls, C: float, beta: float) -> "ScaleSchedule":
        """``lambda(k) = C beta**k``."""
        return cls("exponential", Eventual(C, beta, 1.0, 0.0))

    @classmethod
    def mixed(cls, C: float, beta: float, b: float, q: float) -> "ScaleSchedule":
        """``lambda(k) = C beta**k (k + b)**q``."""
        return cls("mixed", Eventual(C, beta, b, q))

    # evaluation -----------------------------------------------------------------

    def divisor(self, k: int) -> float:
        """``lambda(k)``; the level-``k`` block has lengths multiplied by ``1/lambda(k)``."""
        if k < 0:
            raise ValueError("level must be nonnegative")
        if k < self.eventual.k0:
            return self.head[k]
        return self.eventual(k)

    def log_divisor(self, k: int) -> float:
        """``log lambda(k)``, safe for levels where ``lambda`` overflows."""
        if k < self.eventual.k0:
            return math.log(self.divisor(k))
        return self.eventual.log(k)

    def length_factor(self, k: int) -> float:
        """``c_k = 1 / lambda(k)``."""
        return 1.0 / self.divisor(k)

    __call__ = divisor


def cyclic_cover_schedule(d: int, m: int, *, enforce_side_condition: bool = True) -> ScaleSchedule:
    """Scale factors ``c_k`` of the cyclic-cover construction.

    ``1 - eps = m**(-1/d)``; ``c_k = (1 - eps)**(k+1)`` for ``k < d`` and
    ``c_k = 1 / (k - d + m + 1)`` for ``k >= d``. The returned schedule's
    divisor is ``1 / c_k``.

    The side condition ``(m-1)/m < 1 - eps`` is equivalent to the integer
    inequality ``(m-1)**d < m**(d-1)``, which is checked exactly. It never
    holds for ``d = 1``; pass ``enforce_side_condition=False`` to build the
    schedule anyway.

    Raises
    ------
    SideConditionError
        When enforcing and the side condition fails.
    """
    if not (isinstance(d, int) and d >= 1):
        raise ValueError("d must be a positive integer")
    if not (isinstance(m, int) and m >= 2):
        raise ValueError("m must be an integer >= 2")
    holds = (m - 1) ** d < m ** (d - 1)
    if enforce_side_condition and not holds:
        lhs = Fraction(m - 1, m)
        raise SideConditionError(
            f"side condition (m-1)/m < 1-eps fails for d={d}, m={m}: "
            f"(m-1)/m = {lhs} and 1-eps = m^(-1/d) = {m ** (-1.0 / d)!r}; "
            f"equivalently (m-1)^d = {(m - 1) ** d} >= m^(d-1) = {m ** (d - 1)}"
        )
    one_minus_eps = m ** (-1.0 / d)
    # the last head value uses (1 - eps)^d = 1/m exactly
    head = tuple(one_minus_eps ** (-(k + 1)) for k in range(d - 1)) + (float(m),)
    ev = Eventual(1.0, 1.0, float(m + 1 - d), 1.0, k0=d)
    return ScaleSchedule(
        "cyclic-cover",
        ev,
        head,
        {"d": d, "m": m, "eps": 1.0 - one_minus_eps, "side_condition": holds},
    )

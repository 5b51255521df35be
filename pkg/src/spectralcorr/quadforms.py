"""Quadratic orders through binary quadratic forms.

An order is identified by its discriminant D = D_K * f**2 (D_K fundamental,
f the conductor). Class numbers count SL2(Z)-classes of primitive forms:
reduced forms for D < 0, rho-cycles of reduced indefinite forms for D > 0.
The latter is the narrow class number h+; the wide class number halves it
when the order has no unit of norm -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from . import _kernels
from .arith import INT64_MAX, divisors, factorize
from .errors import ArithmeticOverflowError, ExceptionalTraceError, InvalidOrderError, ResourceError

#: Maximum continued-fraction period explored before giving up.
CF_STEP_BOUND = 10**7


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def fundamental_part(D: int) -> tuple[int, int]:
    """Split D = D_K * f**2 with D_K a fundamental discriminant."""
    if D == 0 or D % 4 not in (0, 1) or is_square(D):
        raise InvalidOrderError(f"{D} is not the discriminant of a quadratic order")
    sign = -1 if D < 0 else 1
    core, k = 1, 1
    for p, e in factorize(abs(D)):
        core *= p ** (e % 2)
        k *= p ** (e // 2)
    core *= sign
    if core % 4 == 1:
        return core, k
    # core = 2, 3 mod 4: D_K = 4 core, and k must be even
    return 4 * core, k // 2


def is_fundamental(D: int) -> bool:
    try:
        return fundamental_part(D)[1] == 1
    except InvalidOrderError:
        return False


@dataclass(frozen=True, order=True)
class QuadOrder:
    disc: int
    fund_disc: int
    conductor: int

    def __post_init__(self):
        if self.fund_disc * self.conductor**2 != self.disc:
            raise InvalidOrderError(f"{self.disc} != {self.fund_disc} * {self.conductor}^2")
        if fundamental_part(self.disc) != (self.fund_disc, self.conductor):
            raise InvalidOrderError(f"{self.fund_disc} is not fundamental")

    @classmethod
    def from_disc(cls, D: int) -> QuadOrder:
        if abs(D) > INT64_MAX // 4:
            raise ArithmeticOverflowError(f"discriminant {D} too large")
        dk, f = fundamental_part(D)
        return cls(D, dk, f)

    @property
    def is_imaginary(self) -> bool:
        return self.disc < 0

    @property
    def is_maximal(self) -> bool:
        return self.conductor == 1


def as_order(order: Union[QuadOrder, int]) -> QuadOrder:
    return order if isinstance(order, QuadOrder) else QuadOrder.from_disc(order)


@dataclass(frozen=True)
class Imaginary:
    torsion_order: int


@dataclass(frozen=True)
class Real:
    """Smallest norm-one unit (x + y sqrt(D)) / 2 > 1 of the order."""

    log_eps: float
    norm_one_x: int
    norm_one_y: int


UnitData = Union[Imaginary, Real]


@lru_cache(maxsize=None)
def _fundamental_unit(D: int) -> tuple[int, int, int]:
    """(x, y, period) for the fundamental unit (x + y sqrt D)/2 of the order, D > 0.

    Runs the continued fraction of (s + sqrt D)/2 once around its period and
    reads the unit off the last convergent; its norm is (-1)**period.
    """
    s = D % 2
    r = math.isqrt(D)
    P, Q = s, 2
    p0, p1 = 0, 1
    q0, q1 = 1, 0
    k = 0
    while True:
        a = (P + r) // Q
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        P = a * Q - P
        Q = (D - P * P) // Q
        k += 1
        if Q == 2:
            break
        if k >= CF_STEP_BOUND:
            raise ResourceError(f"continued fraction period of {D} exceeds {CF_STEP_BOUND}", CF_STEP_BOUND)
    x, y = 2 * p1 - q1 * s, q1
    assert x * x - D * y * y == 4 * (-1) ** k
    return x, y, k


def _log_unit(x: int, y: int, D: int) -> float:
    # (x + y sqrt D)/2 = eps, and eps + 1/eps = x for norm +1
    if x < 2**52:
        return math.log((x + y * math.sqrt(D)) / 2)
    # eps = x - 1/eps to double precision once x is huge
    return math.log(x)


@lru_cache(maxsize=None)
def unit_data(order: Union[QuadOrder, int]) -> UnitData:
    order = as_order(order)
    D = order.disc
    if D < 0:
        return Imaginary(6 if D == -3 else 4 if D == -4 else 2)
    x, y, k = _fundamental_unit(D)
    if k % 2:
        # square the norm -1 unit: ((x^2 + D y^2)/2 + x y sqrt D)/2
        x, y = (x * x + D * y * y) // 2, x * y
    return Real(_log_unit(x, y, D), x, y)


def log_norm_one_unit(D: int) -> float:
    """log of the smallest norm-one unit > 1, in floating point.

    Uses the log-sum of complete quotients along the period, so it never
    forms the (possibly enormous) integers.
    """
    k, total = _kernels.cf_unit_log(D, CF_STEP_BOUND)
    if k < 0:
        raise ResourceError(f"continued fraction period of {D} exceeds {CF_STEP_BOUND}", CF_STEP_BOUND)
    return 2.0 * total if k % 2 else total


@lru_cache(maxsize=None)
def has_norm_minus_one_unit(order: Union[QuadOrder, int]) -> bool:
    order = as_order(order)
    if order.disc < 0:
        raise InvalidOrderError("norm -1 units only exist in real orders")
    k, _ = _kernels.cf_unit_log(order.disc, CF_STEP_BOUND)
    if k < 0:
        raise ResourceError(f"continued fraction period of {order.disc} exceeds {CF_STEP_BOUND}", CF_STEP_BOUND)
    return k % 2 == 1


@lru_cache(maxsize=None)
def narrow_class_number(order: Union[QuadOrder, int]) -> int:
    order = as_order(order)
    D = order.disc
    if D < 0:
        return int(_kernels.definite_class_number(D))
    h = int(_kernels.narrow_class_number_indefinite(D))
    if h < 0:  # pragma: no cover - would mean rho left the reduced set
        raise RuntimeError(f"reduction cycle broke for D={D}")
    return h


@lru_cache(maxsize=None)
def class_number(order: Union[QuadOrder, int]) -> int:
    """Wide class number of the order."""
    order = as_order(order)
    h = narrow_class_number(order)
    if order.disc > 0 and not has_norm_minus_one_unit(order):
        assert h % 2 == 0
        return h // 2
    return h


def superorders_of_element(t: int, n: int) -> list[QuadOrder]:
    """Orders containing Z[gamma] for gamma of trace t and norm n, largest conductor first."""
    D = t * t - 4 * n
    if is_square(D):
        raise ExceptionalTraceError(t, n)
    dk, f0 = fundamental_part(D)
    return [QuadOrder(dk * f * f, dk, f) for f in reversed(divisors(f0))]

"""Geometric sides of the Selberg trace formula, with and without a Hecke operator.

Four sides are assembled here: the plain trace formula for the cocompact
unit group and for Gamma_0(m), and the versions twisted by T_p for a prime p
coprime to the level. Every series is cut off by a :class:`TruncationBudget`
and reported together with an upper bound for what was dropped.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .arith import is_prime, omega, prime_divisors, x_product_log
from .embeddings import (
    CocompactUnits,
    GroupDescriptor,
    HeckeCongruence,
    elliptic_count,
    embedding_count_order,
    primitive_counts,
)
from .errors import BudgetTooSmallError, DomainError
from .quadforms import as_order, log_norm_one_unit, superorders_of_element, unit_data
from .quadrature import digamma, integrate_segments
from .selberg_transform import TestFunction
from .serialize import csv_text, dumps

#: Default projective orders of the elliptic elements of trace 0 and 1.
DEFAULT_ELLIPTIC_ORDERS = (2, 3)

# terms of the t-majorant below this are treated as the end of the tail sum
_NEGLIGIBLE = 1e-300
_T_SEARCH_LIMIT = 1_000_000


class FactorMode(str, Enum):
    AS_PRINTED = "AsPrinted"
    STANDARD_LOG_EPS = "StandardLogEps"

    @classmethod
    def parse(cls, value) -> FactorMode:
        if isinstance(value, cls):
            return value
        for mode in cls:
            if str(value).lower() in (mode.value.lower(), mode.name.lower()):
                return mode
        raise DomainError(f"unknown factor mode {value!r}")


@dataclass(frozen=True)
class Area:
    """coeff * pi with coeff an exact rational."""

    coeff: Fraction

    @property
    def value(self) -> float:
        return float(self.coeff) * math.pi

    def __str__(self):
        return f"{self.coeff}*pi"


@dataclass(frozen=True)
class TruncationBudget:
    """Cut-offs for the infinite sums; ``None`` asks for an automatic choice.

    Automatic cut-offs are the smallest ones whose tail bound is below
    ``tail_target``. A report whose tail exceeds ``tail_cap`` is rejected.
    """

    t_max: Optional[int] = None
    k_max: int = 20
    n_max: Optional[int] = None
    quad_tol: float = 1e-13
    tail_target: float = 1e-12
    tail_cap: float = 1e-9

    def __post_init__(self):
        for name in ("t_max", "n_max"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise DomainError(f"{name} must be positive")
        if self.k_max < 1:
            raise DomainError("k_max must be positive")
        if not (self.quad_tol > 0 and self.tail_target > 0 and self.tail_cap > 0):
            raise DomainError("tolerances must be positive")

    @classmethod
    def for_tolerance(cls, tolerance: float, **kw) -> TruncationBudget:
        kw.setdefault("tail_cap", tolerance / 10)
        kw.setdefault("tail_target", min(1e-12, tolerance / 1e4))
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "t_max": self.t_max,
            "k_max": self.k_max,
            "n_max": self.n_max,
            "quad_tol": self.quad_tol,
            "tail_target": self.tail_target,
            "tail_cap": self.tail_cap,
        }


class TermEntry(NamedTuple):
    t: Optional[int]
    block: str
    value: float
    imag: float = 0.0


class BlockValue(NamedTuple):
    """A truncated series or integral: value, truncation bound, quadrature error."""

    value: float
    tail: float
    quad_error: float = 0.0


@dataclass
class GeometricSideReport:
    group: str
    test_function: str
    identity_term: float
    elliptic_total: float
    hyperbolic_total: float
    parabolic_or_exceptional_total: float
    grand_total: float
    tail_estimate: float
    quad_error: float
    imag_total: float = 0.0
    hecke_prime: Optional[int] = None
    factor_mode: Optional[str] = None
    budget: dict = field(default_factory=dict)
    term_log: list = field(default_factory=list)

    @property
    def error_bound(self) -> float:
        return self.tail_estimate + self.quad_error

    def to_dict(self, include_terms: bool = True) -> dict:
        out = {
            "group": self.group,
            "test_function": self.test_function,
            "hecke_prime": self.hecke_prime,
            "factor_mode": self.factor_mode,
            "identity_term": self.identity_term,
            "elliptic_total": self.elliptic_total,
            "hyperbolic_total": self.hyperbolic_total,
            "parabolic_or_exceptional_total": self.parabolic_or_exceptional_total,
            "grand_total": self.grand_total,
            "imag_total": self.imag_total,
            "tail_estimate": self.tail_estimate,
            "quad_error": self.quad_error,
            "budget": self.budget,
        }
        if include_terms:
            out["term_log"] = [
                {"t": e.t, "block": e.block, "value": e.value, "imag": e.imag} for e in self.term_log
            ]
        return out

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        rows = [("" if e.t is None else e.t, e.block, e.value, e.imag) for e in self.term_log]
        return csv_text(["t", "block", "value", "imag"], rows)


def _assemble(group, f, identity, ell, hyp, par, tail, quad, imag, log, limits, **extra) -> GeometricSideReport:
    if tail > limits.tail_cap:
        raise BudgetTooSmallError(
            f"tail estimate {tail:.3e} for {group} exceeds the cap {limits.tail_cap:.3e}; raise t_max/n_max/k_max"
        )
    grand = identity + ell + hyp + par
    return GeometricSideReport(
        group=str(group),
        test_function=f.spec,
        identity_term=identity,
        elliptic_total=ell,
        hyperbolic_total=hyp,
        parabolic_or_exceptional_total=par,
        grand_total=grand,
        tail_estimate=tail,
        quad_error=quad,
        imag_total=imag,
        term_log=log,
        **extra,
    )


# -- areas and the identity term ----------------------------------------------------


def area(group: GroupDescriptor) -> Area:
    coeff = Fraction(1, 3)
    if isinstance(group, CocompactUnits):
        for p in group.ramified_primes:
            coeff *= p - 1
    elif isinstance(group, HeckeCongruence):
        for p in group.level_primes:
            coeff *= p + 1
    else:
        raise DomainError(f"unknown group {group!r}")
    return Area(coeff)


def _r_limit(f: TestFunction) -> float:
    return f.r_cutoff(1e-24)


def _r_breaks(R: float, symmetric: bool) -> list[float]:
    pos = [0.0] + [x for x in (1.0, 2.0, 4.0, 8.0, 16.0) if x < R] + [R]
    return [-x for x in reversed(pos[1:])] + pos if symmetric else pos


@lru_cache(maxsize=256)
def _identity_integral(f: TestFunction, quad_tol: float) -> BlockValue:
    # the integrand is even: 2 * integral_0^R h(r) r tanh(pi r) dr
    R = _r_limit(f)
    res = integrate_segments(lambda r: f.h(r) * r * np.tanh(np.pi * r), _r_breaks(R, False), tol=quad_tol / 2)
    return BlockValue(2 * res.value, 2 * f.h_moment_tail(R), 2 * res.error)


def identity_term(a: Area, f: TestFunction, quad_tol: float = 1e-13) -> float:
    return identity_block(a, f, quad_tol).value


def identity_block(a: Area, f: TestFunction, quad_tol: float = 1e-13) -> BlockValue:
    if a.coeff == 0:
        return BlockValue(0.0, 0.0, 0.0)
    I = _identity_integral(f, quad_tol)
    scale = float(a.coeff) / 4.0  # A / (4 pi) with A = coeff * pi
    return BlockValue(scale * I.value, abs(scale) * I.tail, abs(scale) * I.quad_error)


# -- elliptic terms --------------------------------------------------------------------


@lru_cache(maxsize=1024)
def _weighted_h_integral(f: TestFunction, alpha: float, quad_tol: float) -> BlockValue:
    """integral over R of h(r) exp(-alpha r) / (1 + exp(-2 pi r)), 0 <= alpha <= 2 pi.

    The weight is bounded by 1 on the whole line, so the cut at |r| = R costs
    at most 2 * integral_R^inf |h|.
    """
    R = _r_limit(f)

    def g(r):
        return f.h(r) * np.exp(-alpha * r - np.logaddexp(0.0, -2 * np.pi * r))

    res = integrate_segments(g, _r_breaks(R, True), tol=quad_tol)
    return BlockValue(res.value, 2 * f.h_tail(R), res.error)


def elliptic_block_laplace(t: int, count: int, f: TestFunction, m_t: Optional[int] = None, quad_tol: float = 1e-13) -> BlockValue:
    if t not in (0, 1):
        raise DomainError("elliptic traces of norm one are 0 and 1")
    m = DEFAULT_ELLIPTIC_ORDERS[t] if m_t is None else int(m_t)
    if m < 2:
        raise DomainError("elliptic order must be at least 2")
    if count == 0:
        return BlockValue(0.0, 0.0, 0.0)
    val = tail = err = 0.0
    for k in range(1, m):
        I = _weighted_h_integral(f, 2 * k * math.pi / m, quad_tol)
        w = 1.0 / math.sin(k * math.pi / m)
        val += w * I.value
        tail += w * I.tail
        err += w * I.quad_error
    scale = count / (2 * m)
    return BlockValue(scale * val, scale * tail, scale * err)


def elliptic_term_laplace(t: int, count: int, f: TestFunction, m_t: Optional[int] = None, quad_tol: float = 1e-13) -> float:
    return elliptic_block_laplace(t, count, f, m_t, quad_tol).value


# -- hyperbolic terms, Laplace version -----------------------------------------------


def _k_series(f: TestFunction, ell: float, k_max: int) -> tuple[float, float]:
    """sum_{k <= k_max} h_hat(2 k ell) / sinh(k ell) and a bound for the rest.

    Each term is at most e^{-ell} times the previous one (h_hat decreasing on
    u >= 0, sinh((k+1) ell) >= e^ell sinh(k ell)), so the rest is bounded by
    the first omitted term over 1 - e^{-ell}.
    """
    k = np.arange(1, k_max + 2, dtype=float)
    terms = f.h_hat(2 * k * ell) / np.sinh(k * ell)
    value = math.fsum(terms[:-1])
    tail = float(terms[-1]) / (-math.expm1(-ell))
    return value, tail


def hyperbolic_term_laplace(t: int, count: int, f: TestFunction, k_max: int = 20) -> tuple[float, float]:
    if t < 3:
        raise DomainError("hyperbolic traces of norm one satisfy t >= 3")
    if count == 0:
        return 0.0, 0.0
    ell = math.acosh(t / 2)
    s, tail = _k_series(f, ell, k_max)
    return count * ell * s, abs(count) * ell * tail


def count_majorant(D: float, n_local: int, narrow: bool = False) -> float:
    """Upper bound for sum over superorders B of Z[gamma] of E(B) * max(1, log eps_B).

    Rests on h(B) log eps_B <= sqrt(D_B) (log D_B + 2)^2, log eps_B >= log((3 + sqrt 5)/2),
    at most 2 D^(1/4) superorders and a local factor <= 2 per prime.
    """
    logD = math.log(max(D, 3.0))
    c = 2.0 ** (n_local + 2) * D**0.75 * (logD + 2) ** 2
    return 2 * c if narrow else c


def _t_tail(term_bound, t_start: int) -> float:
    """Sum of a super-exponentially decaying majorant over t >= t_start."""
    total = 0.0
    t = t_start
    while True:
        b = term_bound(t)
        total += b
        if b < _NEGLIGIBLE or (t > 4 * t_start + 100 and b < 1e-30 * total):
            return total
        t += 1
        if t > _T_SEARCH_LIMIT:
            return math.inf


def _auto_cut(term_bound, t_lo: int, target: float) -> int:
    """Smallest T >= t_lo - 1 with sum_{t > T} term_bound(t) <= target."""
    bounds = []
    t = t_lo
    while True:
        b = term_bound(t)
        bounds.append(b)
        if b < _NEGLIGIBLE or (t > 200 and b < 1e-40):
            break
        t += 1
        if t > _T_SEARCH_LIMIT:
            raise BudgetTooSmallError("could not find a truncation point for the t-sum")
    suffix = 0.0
    T = t
    for i in range(len(bounds) - 1, -1, -1):
        if suffix + bounds[i] > target:
            break
        suffix += bounds[i]
        T = t_lo + i - 1
    return max(T, t_lo)


def _laplace_t_bound(f: TestFunction, n_local: int, narrow: bool):
    def bound(t):
        ell = math.acosh(t / 2)
        head = float(f.h_hat(2 * ell)) / math.sinh(ell) / (-math.expm1(-ell))
        return count_majorant(t * t - 4.0, n_local, narrow) * ell * head

    return bound


def _n_local(group: GroupDescriptor) -> int:
    return len(group.ramified_primes) + len(group.level_primes)


def resolve_t_max_laplace(group: GroupDescriptor, f: TestFunction, budget: TruncationBudget, narrow: bool = False) -> int:
    if budget.t_max is not None:
        return budget.t_max
    return _auto_cut(_laplace_t_bound(f, _n_local(group), narrow), 3, budget.tail_target / 2)


# -- parabolic block ---------------------------------------------------------------------


def _digamma_bound_tail(f: TestFunction, R: float) -> float:
    # |psi(1/2 + ir)| + |psi(1 + ir)| <= 2 (log(1 + r) + 3) <= 2 (r + 3) for r >= 0
    return 2 * (f.h_moment_tail(R) + 3 * f.h_tail(R))


@lru_cache(maxsize=64)
def _digamma_integral(f: TestFunction, quad_tol: float) -> BlockValue:
    """integral over R of h(r) [psi(1/2 + ir) + psi(1 + ir)] dr (the imaginary part cancels)."""
    R = _r_limit(f)

    def g(r):
        z = 1j * r
        return f.h(r) * (digamma(0.5 + z) + digamma(1.0 + z)).real

    res = integrate_segments(g, _r_breaks(R, False), tol=quad_tol / 2)
    return BlockValue(2 * res.value, 2 * _digamma_bound_tail(f, R), 2 * res.error)


@lru_cache(maxsize=64)
def _lambda_table(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    lam = _kernels.von_mangoldt_sieve(n_max)
    idx = np.nonzero(lam)[0]
    return idx.astype(float), lam[idx]


def _lambda_sum(f: TestFunction, n_max: int, shift: float) -> float:
    """sum_{n <= n_max} Lambda(n)/n * [h_hat(2 log n - shift) + h_hat(2 log n + shift)] / (2 if shift == 0 else 1)."""
    n, lam = _lambda_table(n_max)
    logn = np.log(n)
    if shift == 0.0:
        vals = lam / n * f.h_hat(2 * logn)
    else:
        vals = lam / n * (f.h_hat(2 * logn - shift) + f.h_hat(2 * logn + shift))
    return math.fsum(vals)


def _lambda_tail(f: TestFunction, n_max: int, shift: float) -> float:
    """Bound for the Lambda-sum over n > n_max, compared against an integral.

    With v = log x the summand is at most v e^{-v} h_hat(2v -+ shift), which
    is decreasing once 2v - shift exceeds sqrt(2a)-ish; beyond that point the sum over n > N is
    below the integral from log(N - 1), i.e. (1/4)[M(W) + shift*T(W)], W = 2 log(N - 1) - shift.
    """
    W = 2 * math.log(max(n_max - 1, 2)) - shift
    if W <= 2 * math.sqrt(f.a) + 1:
        return math.inf
    one = 0.25 * (f.h_hat_moment_tail(W) + shift * f.h_hat_tail(W))
    if shift == 0.0:
        return one
    W2 = W + 2 * shift
    return one + 0.25 * (f.h_hat_moment_tail(W2) - shift * f.h_hat_tail(W2))


def resolve_n_max(f: TestFunction, budget: TruncationBudget, shift: float = 0.0) -> int:
    if budget.n_max is not None:
        return budget.n_max
    N = 8
    while _lambda_tail(f, N, shift) > budget.tail_target / 8:
        N = int(N * 1.25) + 1
    return N


def _q_sum(f: TestFunction, q: int, k_max: int, shift: float) -> tuple[float, float]:
    """sum_{k=0}^{k_max} log q / q^k * [h_hat(2k log q - shift) + h_hat(2k log q + shift)] (halved at shift 0)."""
    lq = math.log(q)
    k = np.arange(0, k_max + 2, dtype=float)
    if shift == 0.0:
        hh = f.h_hat(2 * k * lq)
    else:
        hh = f.h_hat(2 * k * lq - shift) + f.h_hat(2 * k * lq + shift)
    terms = lq * q ** (-k) * hh
    value = math.fsum(terms[:-1])
    # beyond k_max + 1: geometric in q^{-k}; h_hat factor bounded by its value
    # at the first omitted k once 2k log q >= shift, else by 2 h_hat(0)
    kk = k_max + 1
    if 2 * kk * lq >= shift:
        cap = float(hh[-1])
    else:
        cap = 2 * float(f.h_hat(0.0))
    tail = lq * q ** (-kk) * cap / (1 - 1 / q)
    return value, tail


def q_sum_block(m: int, f: TestFunction, k_max: int = 20, shift: float = 0.0) -> tuple[float, float]:
    """The inner sum over primes q | m of the parabolic or exceptional brace."""
    val = []
    tail = 0.0
    for q in prime_divisors(m) if m > 1 else []:
        v, t = _q_sum(f, q, k_max, shift)
        val.append(v)
        tail += t
    return math.fsum(val), tail


def parabolic_brace(f: TestFunction, budget: TruncationBudget) -> BlockValue:
    """The m-independent part of the parabolic brace."""
    n_max = resolve_n_max(f, budget)
    D = _digamma_integral(f, budget.quad_tol)
    parts = [
        float(f.h_hat(0.0)) * math.log(math.pi / 2),
        -D.value / (2 * math.pi),
        2 * _lambda_sum(f, n_max, 0.0),
    ]
    tail = D.tail / (2 * math.pi) + 2 * _lambda_tail(f, n_max, 0.0)
    return BlockValue(math.fsum(parts), tail, D.quad_error / (2 * math.pi))


def parabolic_block(m: int, f: TestFunction, budget: TruncationBudget = TruncationBudget()) -> BlockValue:
    group = HeckeCongruence(m)
    base = parabolic_brace(f, budget)
    qv, qt = q_sum_block(group.m, f, budget.k_max)
    w = 2 ** omega(group.m) if group.m > 1 else 1
    return BlockValue(w * (base.value - qv), w * (base.tail + qt), w * base.quad_error)


# -- Laplace assembly --------------------------------------------------------------------


def geometric_side_laplace(
    group: GroupDescriptor,
    f: TestFunction,
    budget: TruncationBudget = TruncationBudget(),
    elliptic_orders: tuple[int, int] = DEFAULT_ELLIPTIC_ORDERS,
    narrow: bool = False,
) -> GeometricSideReport:
    log: list[TermEntry] = []
    tail = quad = 0.0

    idb = identity_block(area(group), f, budget.quad_tol)
    log.append(TermEntry(None, "identity", idb.value))
    tail += idb.tail
    quad += idb.quad_error

    ell_vals = []
    for t in (0, 1):
        eb = elliptic_block_laplace(t, elliptic_count(t, group, narrow), f, elliptic_orders[t], budget.quad_tol)
        log.append(TermEntry(t, "elliptic", eb.value))
        ell_vals.append(eb.value)
        tail += eb.tail
        quad += eb.quad_error

    t_max = resolve_t_max_laplace(group, f, budget, narrow)
    counts = primitive_counts(group, t_max, narrow)
    hyp_vals = []
    for t in range(3, t_max + 1):
        v, kt = hyperbolic_term_laplace(t, counts[t], f, budget.k_max)
        if counts[t]:
            log.append(TermEntry(t, "hyperbolic", v))
        hyp_vals.append(v)
        tail += kt
    tail += _t_tail(_laplace_t_bound(f, _n_local(group), narrow), t_max + 1)

    par = 0.0
    if isinstance(group, HeckeCongruence):
        pb = parabolic_block(group.m, f, budget)
        log.append(TermEntry(None, "parabolic", pb.value))
        par = pb.value
        tail += pb.tail
        quad += pb.quad_error

    used = replace(budget, t_max=t_max, n_max=resolve_n_max(f, budget) if isinstance(group, HeckeCongruence) else budget.n_max)
    return _assemble(
        group, f, idb.value, math.fsum(ell_vals), math.fsum(hyp_vals), par, tail, quad, 0.0, log, budget,
        budget=used.to_dict(),
    )


# -- Hecke terms -----------------------------------------------------------------------


def _check_prime_level(group: GroupDescriptor, p: int):
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    level = group.d if isinstance(group, CocompactUnits) else group.m
    if level % p == 0:
        raise DomainError(f"p={p} divides the level {level}")


def hecke_elliptic_block(
    t: int, p: int, order, count: int, f: TestFunction, quad_tol: float = 1e-13, projective_centralizer: bool = False
) -> BlockValue:
    """Elliptic Hecke term; m_gamma is the unit-group torsion, halved when ``projective_centralizer``."""
    if t * t >= 4 * p:
        raise DomainError("elliptic Hecke terms need t^2 < 4p")
    order = as_order(order)
    if count == 0:
        return BlockValue(0.0, 0.0, 0.0)
    m_gamma = unit_data(order).torsion_order
    if projective_centralizer:
        m_gamma //= 2
    theta = math.asin(math.sqrt(1 - t * t / (4 * p)))
    I = _weighted_h_integral(f, 2 * theta, quad_tol)
    scale = count / (m_gamma * math.sqrt(4 * p - t * t))
    return BlockValue(scale * I.value, abs(scale) * I.tail, abs(scale) * I.quad_error)


def hecke_elliptic_term(
    t: int, p: int, order, count: int, f: TestFunction, quad_tol: float = 1e-13, projective_centralizer: bool = False
) -> float:
    return hecke_elliptic_block(t, p, order, count, f, quad_tol, projective_centralizer).value


def unit_factor(D: int, mode: FactorMode, allow_complex: bool = False) -> complex | float:
    """The class-dependent factor: log eps, or arcosh(|log eps|) as printed.

    arcosh is undefined below 1; with ``allow_complex`` the principal branch
    i * arccos(x) is used there instead of raising.
    """
    log_eps = log_norm_one_unit(D)
    mode = FactorMode.parse(mode)
    if mode is FactorMode.STANDARD_LOG_EPS:
        return log_eps
    x = abs(log_eps)
    if x >= 1:
        return math.acosh(x)
    if not allow_complex:
        raise DomainError(f"arcosh(|log eps|) undefined: log eps = {log_eps:.6g} < 1 for discriminant {D}")
    return complex(cmath.acosh(x))


def hecke_hyperbolic_term(
    t: int,
    p: int,
    order,
    count: int,
    f: TestFunction,
    factor_mode: FactorMode = FactorMode.STANDARD_LOG_EPS,
    allow_complex: bool = False,
):
    if t * t <= 4 * p:
        raise DomainError("hyperbolic Hecke terms need t^2 > 4p")
    if abs(t) == p + 1:
        raise DomainError("t = p + 1 is the exceptional trace")
    order = as_order(order)
    if count == 0:
        return 0.0
    ell = math.acosh(abs(t) / (2 * math.sqrt(p)))
    F = unit_factor(order.disc, factor_mode, allow_complex)
    return count / math.sqrt(p) * F * float(f.h_hat(2 * ell)) / (2 * math.sinh(ell))


def _hecke_t_bound(f: TestFunction, p: int, n_local: int, narrow: bool):
    sp = math.sqrt(p)

    def bound(t):
        ell = math.acosh(t / (2 * sp))
        # both signs of t, factor 2 covers |arcosh| <= 1.64 log eps in the printed mode
        head = 2 * 2 * float(f.h_hat(2 * ell)) / (2 * math.sinh(ell)) / sp
        return count_majorant(t * t - 4.0 * p, n_local, narrow) * head

    return bound


def resolve_t_max_hecke(group: GroupDescriptor, p: int, f: TestFunction, budget: TruncationBudget, narrow: bool = False) -> int:
    if budget.t_max is not None:
        return budget.t_max
    t_lo = math.isqrt(4 * p) + 1
    return _auto_cut(_hecke_t_bound(f, p, _n_local(group), narrow), t_lo, budget.tail_target / 2)


def _hecke_common(group, p, f, budget, factor_mode, narrow, projective_centralizer):
    """Elliptic and non-exceptional hyperbolic parts, shared by both Hecke sides."""
    _check_prime_level(group, p)
    mode = FactorMode.parse(factor_mode)
    log: list[TermEntry] = []
    tail = quad = 0.0
    ell_vals = []
    r = math.isqrt(4 * p - 1)
    for t in range(-r, r + 1):
        v = 0.0
        for B in superorders_of_element(t, p):
            c = embedding_count_order(B, group, narrow)
            eb = hecke_elliptic_block(t, p, B, c, f, budget.quad_tol, projective_centralizer)
            v += eb.value
            tail += eb.tail
            quad += eb.quad_error
        log.append(TermEntry(t, "elliptic", v))
        ell_vals.append(v)

    t_max = resolve_t_max_hecke(group, p, f, budget, narrow)
    per_abs: dict[int, complex] = {}
    for s in range(r + 1, t_max + 1):
        if s == p + 1:
            continue
        v = 0j
        for B in superorders_of_element(s, p):
            c = embedding_count_order(B, group, narrow)
            v += hecke_hyperbolic_term(s, p, B, c, f, mode, allow_complex=True)
        per_abs[s] = v
    hyp_re, hyp_im = [], []
    for t in sorted([-s for s in per_abs] + list(per_abs)):
        v = per_abs[abs(t)]
        if v != 0:
            log.append(TermEntry(t, "hyperbolic", v.real, v.imag))
        hyp_re.append(v.real)
        hyp_im.append(v.imag)
    tail += _t_tail(_hecke_t_bound(f, p, _n_local(group), narrow), t_max + 1)
    return mode, log, tail, quad, math.fsum(ell_vals), math.fsum(hyp_re), math.fsum(hyp_im), t_max


def geometric_side_hecke_cocompact(
    d: int,
    p: int,
    f: TestFunction,
    budget: TruncationBudget = TruncationBudget(),
    factor_mode: FactorMode = FactorMode.STANDARD_LOG_EPS,
    narrow: bool = False,
    projective_centralizer: bool = False,
) -> GeometricSideReport:
    group = d if isinstance(d, CocompactUnits) else CocompactUnits(d)
    mode, log, tail, quad, ell, hyp, imag, t_max = _hecke_common(group, p, f, budget, factor_mode, narrow, projective_centralizer)
    return _assemble(
        group, f, 0.0, ell, hyp, 0.0, tail, quad, imag, log, budget,
        hecke_prime=p, factor_mode=mode.value, budget=replace(budget, t_max=t_max).to_dict(),
    )


def exceptional_brace(p: int, f: TestFunction, budget: TruncationBudget) -> BlockValue:
    """The m-independent part of the exceptional brace for T_p."""
    lp = math.log(p)
    sp = math.sqrt(p)
    parts = [
        2 * float(f.h_hat(lp)) * (math.log(math.pi) + math.log(p - 1) - x_product_log(p - 1) / (p - 1)),
        -0.5 * float(f.h(0.0)),
    ]
    tail = quad = 0.0

    # integral_{log p}^inf h_hat(u) (e^{u/2} + e^{-u/2}) / (e^{u/2} - e^{-u/2} + sqrt p - 1/sqrt p) du
    c = sp - 1 / sp
    U = max(lp, f.u_cutoff(1e-24))

    def g(u):
        e = np.exp(u / 2)
        return f.h_hat(u) * (e + 1 / e) / (e - 1 / e + c)

    if U > lp:
        res = integrate_segments(g, list(np.linspace(lp, U, 5)), tol=budget.quad_tol / 4)
        parts.append(res.value)
        quad += res.error
    # the weight is below coth(u/2) <= coth(log p / 2) on [log p, inf)
    tail += f.h_hat_tail(U) / math.tanh(lp / 2)

    # -(1/2pi) integral h(r) 2 cos(r log p) psi(1/2 + ir) dr, even real part only
    R = _r_limit(f)

    def gpsi(r):
        return f.h(r) * 2 * np.cos(r * lp) * digamma(0.5 + 1j * r).real

    res = integrate_segments(gpsi, _r_breaks(R, False), tol=budget.quad_tol / 4)
    parts.append(-2 * res.value / (2 * math.pi))
    quad += 2 * res.error / (2 * math.pi)
    tail += 2 * 2 * (f.h_moment_tail(R) + 3 * f.h_tail(R)) / (2 * math.pi)

    n_max = resolve_n_max(f, budget, lp)
    parts.append(2 * _lambda_sum(f, n_max, lp))
    tail += 2 * _lambda_tail(f, n_max, lp)
    return BlockValue(math.fsum(parts), tail, quad)


def hecke_exceptional_block(m: int, p: int, f: TestFunction, budget: TruncationBudget = TruncationBudget()) -> BlockValue:
    group = HeckeCongruence(m)
    _check_prime_level(group, p)
    base = exceptional_brace(p, f, budget)
    qv, qt = q_sum_block(group.m, f, budget.k_max, math.log(p))
    w = 2 ** omega(group.m) if group.m > 1 else 1
    return BlockValue(w * (base.value - qv), w * (base.tail + qt), w * base.quad_error)


def geometric_side_hecke_gamma0(
    m: int,
    p: int,
    f: TestFunction,
    budget: TruncationBudget = TruncationBudget(),
    factor_mode: FactorMode = FactorMode.STANDARD_LOG_EPS,
    narrow: bool = False,
    projective_centralizer: bool = False,
) -> GeometricSideReport:
    group = m if isinstance(m, HeckeCongruence) else HeckeCongruence(m)
    mode, log, tail, quad, ell, hyp, imag, t_max = _hecke_common(group, p, f, budget, factor_mode, narrow, projective_centralizer)
    xb = hecke_exceptional_block(group.m, p, f, budget)
    log.append(TermEntry(p + 1, "exceptional", xb.value))
    n_max = resolve_n_max(f, budget, math.log(p))
    return _assemble(
        group, f, 0.0, ell, hyp, xb.value, tail + xb.tail, quad + xb.quad_error, imag, log, budget,
        hecke_prime=p, factor_mode=mode.value, budget=replace(budget, t_max=t_max, n_max=n_max).to_dict(),
    )


def geometric_side_hecke(
    group: GroupDescriptor,
    p: int,
    f: TestFunction,
    budget: TruncationBudget = TruncationBudget(),
    factor_mode=FactorMode.STANDARD_LOG_EPS,
    narrow: bool = False,
    projective_centralizer: bool = False,
) -> GeometricSideReport:
    side = geometric_side_hecke_cocompact if isinstance(group, CocompactUnits) else geometric_side_hecke_gamma0
    return side(group, p, f, budget, factor_mode, narrow, projective_centralizer)

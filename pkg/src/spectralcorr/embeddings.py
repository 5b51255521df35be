"""Optimal embeddings of quadratic orders and conjugacy-class counts.

Counts for the cocompact unit group of a maximal quaternion order of
discriminant d and for Gamma_0(m) enter only through the local embedding
numbers: each prime of d contributes 1 - (B/p), each prime of m contributes
1 + (B/p). Traces are handled through t**2 alone, so E(t, n) = E(-t, n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from . import _kernels
from .arith import beta, divisors, is_prime, is_squarefree, omega, prime_divisors
from .errors import DomainError, ExceptionalTraceError
from .quadforms import QuadOrder, as_order, class_number, is_square, narrow_class_number, superorders_of_element


@dataclass(frozen=True)
class CocompactUnits:
    """Norm-one units of a maximal order in the quaternion algebra of discriminant d."""

    d: int

    def __post_init__(self):
        if self.d < 2 or not is_squarefree(self.d) or omega(self.d) % 2:
            raise DomainError(
                f"d={self.d} must be squarefree with an even positive number of prime factors"
            )

    @property
    def ramified_primes(self) -> list[int]:
        return prime_divisors(self.d)

    @property
    def level_primes(self) -> list[int]:
        return []

    def __str__(self):
        return f"O1(d={self.d})"


@dataclass(frozen=True)
class HeckeCongruence:
    """Gamma_0(m) for squarefree m."""

    m: int

    def __post_init__(self):
        if self.m < 1 or not is_squarefree(self.m):
            raise DomainError(f"m={self.m} must be a squarefree positive integer")

    @property
    def ramified_primes(self) -> list[int]:
        return []

    @property
    def level_primes(self) -> list[int]:
        return prime_divisors(self.m) if self.m > 1 else []

    def __str__(self):
        return f"Gamma0({self.m})"


GroupDescriptor = Union[CocompactUnits, HeckeCongruence]


def parse_group(spec: str) -> GroupDescriptor:
    """``O1:6`` / ``d=6`` style cocompact, ``G0:5`` / ``m=5`` style congruence.

    The ``str()`` forms ``O1(d=6)`` and ``Gamma0(5)`` are accepted too.
    """
    spec = spec.strip()
    if spec.endswith(")") and "(" in spec:
        head, _, inner = spec[:-1].partition("(")
        spec = f"{head}:{inner.split('=')[-1]}"
    kind, _, value = spec.replace("=", ":").partition(":")
    kind = kind.strip().lower()
    if kind in ("o1", "d", "cocompact"):
        return CocompactUnits(int(value))
    if kind in ("g0", "gamma0", "m", "hecke"):
        return HeckeCongruence(int(value))
    raise DomainError(f"unrecognised group {spec!r}")


@dataclass(frozen=True)
class IntegerMatrix2x2:
    a: int
    b: int
    c: int
    d: int

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: IntegerMatrix2x2) -> IntegerMatrix2x2:
        return IntegerMatrix2x2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def adjugate(self) -> IntegerMatrix2x2:
        return IntegerMatrix2x2(self.d, -self.b, -self.c, self.a)

    def act(self, z: Fraction) -> Fraction:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def in_M(self, m: int) -> bool:
        return self.c % m == 0

    def tolist(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]


def symbol_bp(order: Union[QuadOrder, int], p: int) -> int:
    """(B/p): 1 if p splits or B is not maximal at p, -1 if inert, 0 if ramified."""
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    order = as_order(order)
    if order.conductor % p == 0:
        return 1
    return int(_kernels.kronecker(order.fund_disc, p))


def embedding_count_order(order: Union[QuadOrder, int], group: GroupDescriptor, narrow: bool = False) -> int:
    """Number of optimal embeddings of the order modulo conjugation by the group.

    ``narrow=True`` replaces the wide class number by the narrow one; that is
    the count of oriented conjugacy classes (see the conjugacy oracle).
    """
    order = as_order(order)
    value = narrow_class_number(order) if narrow else class_number(order)
    for p in group.ramified_primes:
        value *= 1 - symbol_bp(order, p)
    for p in group.level_primes:
        value *= 1 + symbol_bp(order, p)
    return value


def local_embedding_identity(d: int, symbols: dict[int, int]) -> tuple[int, int]:
    """Both sides of prod_{p|d}(1 - x_p) = sum_{m|d} beta(d/m) prod_{p|m}(1 + x_p).

    ``symbols`` maps each prime of d to a value x_p in {-1, 0, 1}; d must be
    squarefree with an even number of primes, as for a quaternion discriminant.
    """
    CocompactUnits(d)
    primes = prime_divisors(d)
    if set(symbols) != set(primes) or any(x not in (-1, 0, 1) for x in symbols.values()):
        raise DomainError("need one symbol in {-1, 0, 1} for each prime of d")
    lhs = math.prod(1 - symbols[p] for p in primes)
    rhs = 0
    for m in divisors(d):
        rhs += beta(d // m) * math.prod(1 + symbols[p] for p in primes if m % p == 0)
    return lhs, rhs


def embedding_count_trace(t: int, n: int, group: GroupDescriptor, narrow: bool = False) -> int:
    """E(t, n, group), the number of conjugacy classes with trace t and norm n."""
    if is_square(t * t - 4 * n):
        raise ExceptionalTraceError(t, n)
    return sum(embedding_count_order(B, group, narrow) for B in superorders_of_element(t, n))


def power_traces(s: int, limit: int) -> list[int]:
    """Traces s, s^2 - 2, ... of the powers of an element of trace s, up to ``limit``."""
    out = []
    prev, cur = 2, s
    while cur <= limit:
        out.append(cur)
        prev, cur = cur, s * cur - prev
    return out


@lru_cache(maxsize=None)
def _primitive_table(group: GroupDescriptor, t_max: int, narrow: bool) -> tuple[int, ...]:
    counts = [0, 0, 0] + [embedding_count_trace(t, 1, group, narrow) for t in range(3, t_max + 1)]
    for s in range(3, t_max + 1):
        for t in power_traces(s, t_max)[1:]:
            counts[t] -= counts[s]
    return tuple(counts)


def primitive_counts(group: GroupDescriptor, t_max: int, narrow: bool = False) -> list[int]:
    """E'(t, 1, group) at index t for 0 <= t <= t_max (zero below 3)."""
    # share one table across callers by rounding the size up
    size = max(64, 1 << (max(t_max, 3) - 1).bit_length())
    return list(_primitive_table(group, size, narrow)[: t_max + 1])


def primitive_count(t: int, group: GroupDescriptor, narrow: bool = False) -> int:
    """E'(t, 1, group): classes of primitive hyperbolic elements of trace t >= 3."""
    if t < 3:
        raise DomainError("primitive counts are defined for hyperbolic traces t >= 3")
    return primitive_counts(group, t, narrow)[t]


def elliptic_count(t: int, group: GroupDescriptor, narrow: bool = False) -> int:
    """E'(t, 1, group) = E(t, 1, group) for the elliptic traces t in {0, 1}."""
    if t not in (0, 1):
        raise DomainError("elliptic traces of norm one are 0 and 1")
    return embedding_count_trace(t, 1, group, narrow)


def exceptional_class_count(p: int, m: int) -> int:
    """E(p + 1, p, Gamma_0(m)) = 2**omega(m) * (p - 1)."""
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if m % p == 0:
        raise DomainError(f"p={p} divides m={m}")
    return 2 ** omega(m) * (p - 1)


def exceptional_n_values(p: int, m: int, v: int) -> list[int]:
    mv = m // v
    n0 = ((p - 1) * pow(v, -1, mv)) % mv if mv > 1 else 0
    return [n0 + k * mv for k in range(p - 1)]


def exceptional_representatives(p: int, m: int) -> list[IntegerMatrix2x2]:
    """Representatives of the Gamma_0(m)-classes of trace p + 1 and determinant p."""
    exceptional_class_count(p, m)  # validates p, m
    if not is_squarefree(m):
        raise DomainError(f"m={m} must be squarefree")
    reps = []
    for v in divisors(m):
        for n in exceptional_n_values(p, m, v):
            g = IntegerMatrix2x2(p - n * v, n, v * (p - n * v - 1), n * v + 1)
            assert g.trace == p + 1 and g.det == p and g.in_M(m)
            reps.append(g)
    return reps


def cusp_representatives(m: int) -> list[Fraction]:
    return [Fraction(1, v) for v in divisors(m)]


def hecke_coset_representatives(p: int) -> list[IntegerMatrix2x2]:
    """Right coset representatives of M_p(m) modulo Gamma_0(m), p not dividing m."""
    return [IntegerMatrix2x2(1, j, 0, p) for j in range(p)] + [IntegerMatrix2x2(p, 0, 0, 1)]


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def cusp_equivalence_witness(m: int, v: int, z: Fraction) -> IntegerMatrix2x2 | None:
    """An element of Gamma_0(m) taking 1/v to z, found by solving
    xy - c (m/v) x - b v y = 1 for z = x / (y v); None if z is not of that shape.
    """
    x, den = z.numerator, z.denominator
    if den % v:
        return None
    y = den // v
    if math.gcd(y, m) != 1:
        return None
    g, s, r = _egcd((m // v) * x, v * y)
    if g != 1:
        return None
    # c (m/v) x + b v y = x y - 1
    c, b = s * (x * y - 1), r * (x * y - 1)
    a, d = x - b * v, y - c * (m // v)
    alpha = IntegerMatrix2x2(a, b, m * c, d)
    if alpha.det != 1 or alpha.act(Fraction(1, v)) != z:
        return None
    return alpha


def verify_cusp_inequivalence(m: int, p: int) -> bool:
    """Check that every Hecke coset representative maps each cusp 1/v to a
    Gamma_0(m)-equivalent cusp, so inequivalent cusps stay inequivalent mod M_p(m).
    """
    if m % p == 0 or not is_squarefree(m) or not is_prime(p):
        raise DomainError("need squarefree m and a prime p not dividing m")
    for v in divisors(m):
        for gamma in hecke_coset_representatives(p):
            z = gamma.act(Fraction(1, v))
            if cusp_equivalence_witness(m, v, z) is None:
                return False
    return True


# -- brute-force conjugacy oracle -------------------------------------------------

INCONCLUSIVE = "inconclusive"
ORACLE_MATRIX_CAP = 5_000_000

_S = IntegerMatrix2x2(0, -1, 1, 0)
_T = IntegerMatrix2x2(1, 1, 0, 1)


def _p1_label(c: int, d: int, m: int) -> tuple[int, int]:
    units = [u for u in range(1, m + 1) if math.gcd(u, m) == 1] or [1]
    return min(((u * c) % m, (u * d) % m) for u in units)


@lru_cache(maxsize=None)
def gamma0_generators(m: int) -> tuple[IntegerMatrix2x2, ...]:
    """A generating set of Gamma_0(m) (with inverses), by Schreier's lemma over
    coset representatives of Gamma_0(m) in SL2(Z) reached from S and T.
    """
    gens = {_T, IntegerMatrix2x2(1, 0, m, 1)}
    if m > 1:
        reps = {_p1_label(0, 1, m): IntegerMatrix2x2(1, 0, 0, 1)}
        queue = [IntegerMatrix2x2(1, 0, 0, 1)]
        while queue:
            R = queue.pop(0)
            for s in (_S, _T):
                Rs = R @ s
                label = _p1_label(Rs.c, Rs.d, m)
                if label not in reps:
                    reps[label] = Rs
                    queue.append(Rs)
                else:
                    g = Rs @ reps[label].adjugate()
                    assert g.c % m == 0 and g.det == 1
                    if g not in (IntegerMatrix2x2(1, 0, 0, 1), IntegerMatrix2x2(-1, 0, 0, -1)):
                        gens.add(g)
    out = set()
    for g in gens:
        out.add(g)
        out.add(g.adjugate())
    return tuple(sorted(out, key=lambda g: (abs(g.a) + abs(g.b) + abs(g.c) + abs(g.d), g.tolist())))


def _components(t: int, m: int, bound: int, det: int, unoriented: bool) -> tuple[int, int]:
    gens = np.array([g.tolist() for g in gamma0_generators(m)], dtype=np.int64)
    n, comps = _kernels.conjugacy_components(t, det, m, bound, gens, unoriented)
    return int(n), int(comps)


def conjugacy_oracle_report(
    t: int, m: int, bound: int, det: int = 1, unoriented: bool = True
) -> dict:
    """Class counts at ``bound`` and ``2 * bound`` with a stability verdict."""
    if bound < abs(t):
        raise DomainError("entry bound must be at least |t|")
    if is_square(t * t - 4 * det):
        raise ExceptionalTraceError(t, det)
    runs = []
    for B in (bound, 2 * bound):
        # crude size guard before enumerating
        if (2 * B + 1) * B > ORACLE_MATRIX_CAP * 4:
            runs.append({"bound": B, "matrices": None, "classes": None})
            continue
        n, comps = _components(t, m, B, det, unoriented)
        runs.append({"bound": B, "matrices": n, "classes": comps})
    counts = [r["classes"] for r in runs]
    stable = None not in counts and counts[0] == counts[1]
    return {
        "trace": t,
        "det": det,
        "level": m,
        "unoriented": unoriented,
        "runs": runs,
        "stable": stable,
        "count": counts[1] if stable else INCONCLUSIVE,
    }


def oracle_conjugacy_count(
    t: int, m: int, bound: int, det: int = 1, unoriented: bool = True
) -> Union[int, str]:
    """Independent count of Gamma_0(m)-classes of trace t by enumeration.

    ``unoriented`` identifies gamma with its adjugate (an optimal embedding with
    its Galois conjugate); this is the quantity the wide class number formula
    counts. Returns ``INCONCLUSIVE`` when doubling the bound changes the answer.
    """
    return conjugacy_oracle_report(t, m, bound, det, unoriented)["count"]

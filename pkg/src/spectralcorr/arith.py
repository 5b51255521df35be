"""Elementary arithmetic functions on positive integers.

Everything here is exact integer arithmetic by trial division, with inputs
checked against the signed 64-bit range. Only :func:`von_mangoldt_log` and
:func:`x_product_log` return floats.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

from .errors import ArithmeticOverflowError, DomainError

INT64_MAX = 2**63 - 1


def check_natural(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, int):
        try:
            n = int(n)
        except (TypeError, ValueError):
            raise DomainError(f"expected a positive integer, got {n!r}") from None
    if n < 1:
        raise DomainError(f"expected a positive integer, got {n}")
    if n > INT64_MAX:
        raise ArithmeticOverflowError(f"{n} exceeds the 64-bit range")
    return n


def checked_mul(a: int, b: int) -> int:
    """Product that refuses to leave the signed 64-bit range."""
    c = a * b
    if abs(c) > INT64_MAX:
        raise ArithmeticOverflowError(f"{a} * {b} overflows 64 bits")
    return c


@lru_cache(maxsize=65536)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization ``((p, e), ...)`` with ascending primes."""
    n = check_natural(n)
    out = []
    if n % 2 == 0:
        e = 0
        while n % 2 == 0:
            n //= 2
            e += 1
        out.append((2, e))
    p = 3
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def prime_divisors(n: int) -> list[int]:
    return [p for p, _ in factorize(n)]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = factorize(n)
    return len(f) == 1 and f[0][1] == 1


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(n))


def omega(n: int) -> int:
    """Number of distinct prime divisors."""
    return len(factorize(n))


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


class DivisorStats(NamedTuple):
    divisors: list[int]
    tau: int
    omega: int


def divisor_stats(n: int) -> DivisorStats:
    divs = divisors(n)
    return DivisorStats(divs, len(divs), omega(n))


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def beta(n: int) -> int:
    """Dirichlet square of the Möbius function, sum over k | n of mu(k) mu(n/k).

    On squarefree n with r prime factors this is (-2)**r.
    """
    return sum(mobius(k) * mobius(n // k) for k in divisors(n))


def von_mangoldt_log(n: int) -> float:
    f = factorize(n)
    if len(f) == 1:
        return math.log(f[0][0])
    return 0.0


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out = out // p * (p - 1)
    return out


def x_product_log(n: int) -> float:
    """log of the product of gcd(k, n) over k = 0, ..., n - 1, with gcd(0, n) = n.

    Grouped by g = gcd(k, n): exactly phi(n / g) residues have gcd g.
    """
    n = check_natural(n)
    return math.fsum(euler_phi(n // g) * math.log(g) for g in divisors(n) if g > 1)


def squarefree_range(lo: int, hi: int) -> list[int]:
    return [n for n in range(max(lo, 1), hi + 1) if is_squarefree(n)]


def quaternion_discriminants(limit: int) -> list[int]:
    """Squarefree d <= limit with an even, positive number of prime factors."""
    return [d for d in squarefree_range(2, limit) if omega(d) % 2 == 0]

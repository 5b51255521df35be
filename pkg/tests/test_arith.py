import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from sympy import factorint, mobius as sympy_mobius

from spectralcorr import _kernels
from spectralcorr.arith import (
    beta,
    check_natural,
    checked_mul,
    divisor_stats,
    divisors,
    factorize,
    mobius,
    omega,
    quaternion_discriminants,
    squarefree_range,
    von_mangoldt_log,
    x_product_log,
)
from spectralcorr.errors import ArithmeticOverflowError, DomainError


def test_mobius_examples():
    assert mobius(1) == 1
    assert mobius(6) == 1
    assert mobius(12) == 0
    assert mobius(30) == -1


def test_mobius_matches_sieve():
    table = _kernels.mobius_sieve(100_000)
    for n in range(1, 100_001, 7):
        assert mobius(n) == table[n]


@given(st.integers(1, 10**9))
def test_factorization_matches_sympy(n):
    assert dict(factorize(n)) == factorint(n)
    assert mobius(n) == sympy_mobius(n)


def test_divisor_stats_examples():
    assert divisor_stats(6) == ([1, 2, 3, 6], 4, 2)
    s = divisor_stats(30)
    assert len(s.divisors) == 8 and s.tau == 8 and s.omega == 3
    assert divisor_stats(1) == ([1], 1, 0)


def test_beta_examples():
    assert beta(1) == 1
    assert beta(2) == -2
    assert beta(6) == 4
    assert beta(4) == 1  # mu(2)^2
    assert beta(8) == 0


def test_beta_on_squarefree_is_power_of_minus_two():
    for n in squarefree_range(1, 3000):
        assert beta(n) == (-2) ** omega(n)


def test_beta_multiplicative():
    for m in range(1, 201):
        for n in range(1, 201):
            if math.gcd(m, n) == 1:
                assert beta(m * n) == beta(m) * beta(n)


def test_von_mangoldt():
    assert von_mangoldt_log(8) == pytest.approx(math.log(2), abs=0)
    assert von_mangoldt_log(6) == 0
    assert von_mangoldt_log(1) == 0
    lam = _kernels.von_mangoldt_sieve(2000)
    for n in range(1, 2001):
        assert lam[n] == pytest.approx(von_mangoldt_log(n), abs=1e-15)


def test_x_product_log_examples():
    assert x_product_log(1) == 0
    assert x_product_log(4) == pytest.approx(math.log(8), abs=1e-15)
    assert x_product_log(6) == pytest.approx(math.log(72), abs=1e-14)


def test_x_product_log_direct_product():
    for n in range(1, 60):
        prod = math.prod(math.gcd(k, n) for k in range(n))  # gcd(0, n) = n
        assert x_product_log(n) == pytest.approx(math.log(prod), rel=1e-14, abs=1e-14)


def test_natural_number_checks():
    with pytest.raises(DomainError):
        mobius(0)
    with pytest.raises(DomainError):
        check_natural(-3)
    with pytest.raises(ArithmeticOverflowError):
        check_natural(2**63)
    with pytest.raises(ArithmeticOverflowError):
        checked_mul(2**40, 2**40)


def test_quaternion_discriminants():
    ds = quaternion_discriminants(40)
    assert ds == [6, 10, 14, 15, 21, 22, 26, 33, 34, 35, 38, 39]


def test_beta_identities_small():
    for d in squarefree_range(2, 500):
        k = omega(d)
        assert sum(beta(d // m) for m in divisors(d)) == (-1) ** k
        assert sum(beta(d // m) * 2 ** omega(m) for m in divisors(d)) == 0
        if k >= 2:
            s = sum(
                Fraction(beta(d // m) * 2 ** omega(m)) * sum(p for p, _ in factorize(m))
                for m in divisors(d)
            )
            assert s == 0

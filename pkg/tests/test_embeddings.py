import itertools
from fractions import Fraction

import pytest

from spectralcorr.arith import beta, divisors, omega, prime_divisors
from spectralcorr.embeddings import (
    INCONCLUSIVE,
    CocompactUnits,
    HeckeCongruence,
    IntegerMatrix2x2,
    conjugacy_oracle_report,
    cusp_representatives,
    elliptic_count,
    embedding_count_order,
    embedding_count_trace,
    exceptional_class_count,
    exceptional_representatives,
    gamma0_generators,
    local_embedding_identity,
    oracle_conjugacy_count,
    parse_group,
    power_traces,
    primitive_count,
    primitive_counts,
    symbol_bp,
    verify_cusp_inequivalence,
)
from spectralcorr.errors import DomainError, ExceptionalTraceError
from spectralcorr.oracles import valid_discriminants
from spectralcorr.quadforms import QuadOrder

QUATERNION_D = (6, 10, 14, 15, 21, 22, 26, 33, 34, 35)


def test_group_validation():
    for bad in (1, 2, 4, 12, 30):
        with pytest.raises(DomainError):
            CocompactUnits(bad)
    with pytest.raises(DomainError):
        HeckeCongruence(4)
    assert parse_group(str(HeckeCongruence(6))) == HeckeCongruence(6)
    assert parse_group(str(CocompactUnits(6))) == CocompactUnits(6)


def test_symbol_examples():
    assert symbol_bp(-4, 2) == 0
    assert symbol_bp(-4, 5) == 1
    assert symbol_bp(QuadOrder.from_disc(-16), 2) == 1
    assert symbol_bp(-4, 3) == -1
    with pytest.raises(DomainError):
        symbol_bp(-4, 4)


def test_embedding_count_order_examples():
    assert embedding_count_order(-4, HeckeCongruence(1)) == 1
    assert embedding_count_order(-4, HeckeCongruence(5)) == 2
    assert embedding_count_order(-4, CocompactUnits(6)) == 2


def test_embedding_count_trace_examples():
    g = HeckeCongruence(1)
    assert embedding_count_trace(3, 1, g) == 1
    assert embedding_count_trace(0, 1, g) == 1
    assert embedding_count_trace(1, 1, g) == 1
    with pytest.raises(ExceptionalTraceError):
        embedding_count_trace(6, 5, g)
    with pytest.raises(ExceptionalTraceError):
        embedding_count_trace(2, 1, g)


def test_trace_sign_symmetry():
    for g in (HeckeCongruence(1), HeckeCongruence(6), CocompactUnits(10)):
        for t in range(0, 25):
            for n in (1, 2, 3, 5):
                try:
                    assert embedding_count_trace(t, n, g) == embedding_count_trace(-t, n, g)
                except ExceptionalTraceError:
                    pass


def test_power_traces():
    assert power_traces(3, 50) == [3, 7, 18, 47]
    assert power_traces(4, 200) == [4, 14, 52, 194]


def test_primitive_count_examples():
    g = HeckeCongruence(1)
    assert primitive_count(3, g) == embedding_count_trace(3, 1, g) == 1
    assert primitive_count(7, g) == embedding_count_trace(7, 1, g) - primitive_count(3, g)
    assert primitive_count(4, g) == embedding_count_trace(4, 1, g)
    with pytest.raises(DomainError):
        primitive_count(2, g)


def test_primitive_counts_reassemble():
    # E(t) = sum over s with t in the power-trace orbit of s of E'(s)
    g = HeckeCongruence(6)
    prim = primitive_counts(g, 200)
    for t in range(3, 201):
        total = sum(prim[s] for s in range(3, t + 1) if t in power_traces(s, t))
        assert total == embedding_count_trace(t, 1, g)


def test_local_embedding_identity_all_patterns():
    for d in QUATERNION_D:
        primes = prime_divisors(d)
        for pattern in itertools.product((-1, 0, 1), repeat=len(primes)):
            lhs, rhs = local_embedding_identity(d, dict(zip(primes, pattern)))
            assert lhs == rhs


def test_embedding_identity_concrete_orders():
    discs = valid_discriminants(-500, 500)
    for d in QUATERNION_D:
        cocompact = CocompactUnits(d)
        levels = [(m, beta(d // m)) for m in divisors(d)]
        for D in discs:
            lhs = embedding_count_order(D, cocompact)
            assert lhs == sum(b * embedding_count_order(D, HeckeCongruence(m)) for m, b in levels)


def test_primitive_identity():
    for d in QUATERNION_D:
        left = primitive_counts(CocompactUnits(d), 30)
        levels = [(m, beta(d // m), primitive_counts(HeckeCongruence(m), 30)) for m in divisors(d)]
        for t in range(3, 31):
            assert left[t] == sum(b * c[t] for _, b, c in levels)
        for t in (0, 1):
            assert elliptic_count(t, CocompactUnits(d)) == sum(
                b * elliptic_count(t, HeckeCongruence(m)) for m, b in [(m, b) for m, b, _ in levels]
            )


def test_exceptional_class_count_examples():
    assert exceptional_class_count(5, 1) == 4
    assert exceptional_class_count(3, 2) == 4
    assert exceptional_class_count(7, 6) == 24
    with pytest.raises(DomainError):
        exceptional_class_count(3, 6)


def test_exceptional_representatives_examples():
    reps = exceptional_representatives(3, 2)
    assert len(reps) == 4
    assert IntegerMatrix2x2(3, 0, 2, 1) in reps
    assert IntegerMatrix2x2(3, 0, 4, 1) in reps
    # the construction gives [[2,0],[1,1]], conjugate to diag(2, 1) under [[1,0],[-1,1]]
    (g,) = exceptional_representatives(2, 1)
    assert g == IntegerMatrix2x2(2, 0, 1, 1)
    u = IntegerMatrix2x2(1, 0, -1, 1)
    assert u.adjugate() @ IntegerMatrix2x2(2, 0, 0, 1) @ u == g


@pytest.mark.parametrize("m", [1, 2, 3, 5, 6, 10, 15])
def test_exceptional_representatives_structure(m):
    for p in (2, 3, 5, 7, 11, 13):
        if m % p == 0:
            continue
        reps = exceptional_representatives(p, m)
        assert len(reps) == exceptional_class_count(p, m) == 2 ** omega(m) * (p - 1)
        assert len(set(reps)) == len(reps)
        for g in reps:
            assert g.trace == p + 1 and g.det == p and g.c % m == 0
        # each rep has fixed point 1/v-type cusp data (v = gcd(c, m)) and n distinct mod (m/v)(p-1)
        by_v = {}
        for g in reps:
            n = g.b
            v = (g.d - 1) // n if n else g.c // (g.a - 1)
            by_v.setdefault(v, []).append(n)
        assert sorted(by_v) == divisors(m)
        for v, ns in by_v.items():
            mv = m // v
            assert len(ns) == p - 1
            assert len({n % (mv * (p - 1)) for n in ns}) == p - 1
            assert all((n * v) % mv == (p - 1) % mv for n in ns)


def test_cusps():
    assert cusp_representatives(1) == [Fraction(1)]
    assert cusp_representatives(6) == [Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]
    assert len(cusp_representatives(10)) == 4
    for m, p in [(6, 5), (1, 2), (15, 2), (10, 3), (30, 7)]:
        assert verify_cusp_inequivalence(m, p)
    with pytest.raises(DomainError):
        verify_cusp_inequivalence(6, 3)


def test_generators_lie_in_gamma0():
    for m in (1, 2, 6, 7, 10):
        for g in gamma0_generators(m):
            assert g.det == 1 and g.c % m == 0


def test_oracle_examples():
    assert oracle_conjugacy_count(0, 1, 50) == 1
    assert oracle_conjugacy_count(3, 1, 50) == 1
    assert oracle_conjugacy_count(4, 1, 200) == 1 == embedding_count_trace(4, 1, HeckeCongruence(1))


def test_oracle_level_one_wide_and_oriented():
    # unoriented classes match the wide formula; oriented classes match the
    # narrow one for hyperbolic t and are twice the count for elliptic t
    g = HeckeCongruence(1)
    for t in (0, 1, 3, 4, 5, 6):
        report = conjugacy_oracle_report(t, 1, 60)
        assert report["stable"]
        assert report["count"] == embedding_count_trace(t, 1, g)
        oriented = oracle_conjugacy_count(t, 1, 60, unoriented=False)
        if t < 2:
            assert oriented == 2 * embedding_count_trace(t, 1, g, narrow=True)
        else:
            assert oriented == embedding_count_trace(t, 1, g, narrow=True)


def test_oracle_inconclusive_when_capped():
    report = conjugacy_oracle_report(3, 1, 10**7)
    assert report["count"] == INCONCLUSIVE and not report["stable"]


def test_fixture_embedding_counts(embedding_count_fixture):
    entries = embedding_count_fixture["entries"]
    statuses = {}
    for e in entries:
        statuses.setdefault(e["status"], []).append((e["group"], e["t"]))
        if e["status"] == "exceptional":
            assert e["t"] == 2
            continue
        g = parse_group(e["group"])
        assert embedding_count_trace(e["t"], 1, g) == e["formula_wide"]
        assert e["stable"]
        if e["t"] >= 3:
            assert e["oracle_oriented"] == e["formula_narrow"]
    # the one known wide-formula discrepancy is kept in the fixture
    assert statuses["disagree_wide"] == [("Gamma0(7)", 6)]
    assert "inconclusive" not in statuses
    for row in embedding_count_fixture["cocompact"]:
        assert embedding_count_trace(row["t"], 1, parse_group(row["group"])) == row["formula_wide"]

import json
import random
from fractions import Fraction

import pytest

from spectralcorr.arith import divisors
from spectralcorr.correspondence import (
    MultiplicityTable,
    newform_dimensions,
    newform_table,
    oldform_table,
    verify_area_identity,
    verify_counting_identities,
    verify_theorem1,
    verify_theorem2,
)
from spectralcorr.errors import DataInconsistencyError, DomainError
from spectralcorr.selberg_transform import Gaussian
from spectralcorr.trace_geometry import FactorMode, TruncationBudget


def test_area_examples():
    v = verify_area_identity(6)
    assert v.passed and v.exact and v.abs_diff == 0
    assert v.lhs == Fraction(2, 3)
    assert [(b["m"], b["beta"], b["area_coeff"]) for b in v.breakdown] == [
        (1, 4, "1/3"),
        (2, -2, "1"),
        (3, -2, "4/3"),
        (6, 1, "4"),
    ]
    for d in (10, 210):
        assert verify_area_identity(d).abs_diff == 0
    with pytest.raises(DomainError):
        verify_area_identity(30)


def test_counting_identities():
    out = verify_counting_identities(6, 30)
    assert len(out) == 2 + 28
    assert all(v.passed and v.exact for v in out)
    assert out[0].name.startswith("E'(0,1)")
    assert all(v.passed for v in verify_counting_identities(10, 30, narrow=True))
    with pytest.raises(DomainError):
        verify_counting_identities(6, 2)


@pytest.fixture(scope="module")
def thm1_d6():
    return verify_theorem1(6, Gaussian(1.0))


def test_theorem1_d6(thm1_d6):
    v = thm1_d6
    assert v.passed
    assert v.abs_diff <= max(1e-8, v.error_budget)
    assert 0 < v.error_budget < 1e-8
    par = v.sub_checks["parabolic"]
    assert par["pass"] and abs(par["beta_sum"]) < 1e-8
    assert len(v.breakdown) == 1 + len(divisors(6))
    d = json.loads(v.to_json())
    assert d["pass"] is True and d["name"] == v.name


def test_theorem1_elliptic_order_variant(thm1_d6):
    # doubled orders (unit-group torsion in SL2 instead of PSL2) move both sides together
    v = verify_theorem1(6, Gaussian(1.0), elliptic_orders=(4, 6), jobs=2)
    assert v.passed == thm1_d6.passed
    assert v.lhs != thm1_d6.lhs


def test_theorem1_budget_levels(thm1_d6):
    coarse = verify_theorem1(6, Gaussian(1.0), TruncationBudget(t_max=300, tail_cap=1e-4))
    assert coarse.error_budget > thm1_d6.error_budget
    assert thm1_d6.abs_diff <= max(coarse.abs_diff, thm1_d6.error_budget)


def test_theorem2_modes_and_centralizer():
    f = Gaussian(1.0)
    std = verify_theorem2(6, 5, f)
    printed = verify_theorem2(6, 5, f, factor_mode=FactorMode.AS_PRINTED)
    proj = verify_theorem2(6, 5, f, projective_centralizer=True)
    for v in (std, printed, proj):
        assert v.passed
        assert abs(v.sub_checks["exceptional"]["beta_sum"]) < 1e-8
    assert std.sub_checks["imag"]["lhs"] == 0.0
    assert printed.sub_checks["imag"]["lhs"] != 0.0
    with pytest.raises(DomainError):
        verify_theorem2(6, 3, f)


def test_newform_examples():
    # one newform of level 1 seen at every level m | 6 with multiplicity tau(m)
    t = MultiplicityTable(6, {(1, "a"): 1, (2, "a"): 2, (3, "a"): 2, (6, "a"): 4})
    assert newform_dimensions(t) == {"a": 0}
    assert newform_dimensions(t, 1) == {"a": 1}
    assert newform_dimensions(MultiplicityTable(6, {})) == {}
    assert newform_dimensions(MultiplicityTable(6, {(1, "x"): 0, (6, "x"): 0})) == {"x": 0}


def test_newform_errors():
    with pytest.raises(DataInconsistencyError):
        newform_dimensions(MultiplicityTable(6, {(2, "a"): 1}))
    with pytest.raises(DomainError):
        MultiplicityTable(6, {(4, "a"): 1})
    with pytest.raises(DomainError):
        MultiplicityTable(6, {(2, "a"): -1})


def test_round_trip_random_tables():
    rng = random.Random(20240611)
    for _ in range(100):
        new = MultiplicityTable(
            6,
            {(m, lam): rng.randint(0, 5) for m in divisors(6) for lam in ("a", "b", "c")},
        )
        old = oldform_table(new)
        back = newform_table(old)
        assert {k: v for k, v in back.entries.items() if v} == {k: v for k, v in new.entries.items() if v}


def test_theorem1_narrow_counts():
    v = verify_theorem1(10, Gaussian(0.5), narrow=True)
    assert v.passed and v.error_budget < 1e-8

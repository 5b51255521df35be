import json
import math
from dataclasses import replace
from fractions import Fraction

import pytest

from spectralcorr.embeddings import CocompactUnits, HeckeCongruence, embedding_count_order, embedding_count_trace
from spectralcorr.errors import BudgetTooSmallError, DomainError
from spectralcorr.quadforms import log_norm_one_unit, superorders_of_element
from spectralcorr.selberg_transform import Gaussian
from spectralcorr.trace_geometry import (
    Area,
    FactorMode,
    TruncationBudget,
    area,
    count_majorant,
    elliptic_term_laplace,
    geometric_side_hecke,
    geometric_side_hecke_cocompact,
    geometric_side_hecke_gamma0,
    geometric_side_laplace,
    hecke_elliptic_term,
    hecke_exceptional_block,
    hecke_hyperbolic_term,
    hyperbolic_term_laplace,
    identity_term,
    parabolic_block,
    resolve_n_max,
    resolve_t_max_laplace,
    unit_factor,
)

F = Gaussian(1.0)

# [DERIVED] mpmath at 40 digits, notes/oracle_values.py and notes/oracle_reports.py
ORACLE = {
    "identity_pi_over_3": 0.077364203102187651595,
    "elliptic_t0": 0.10430886329522409785,
    "elliptic_t1": 0.17347761828716787008,
    "hyperbolic_t3_k20": 0.098167879034076565638,
    "parabolic_m1": 0.670447367293243104,
    "parabolic_m2": 0.81392431479098459823,
    "hecke_elliptic_t0_p2_disc-8": 0.073757504573913524728,
    "hecke_hyp_t5_p2_disc17_std": 0.072729666719375642716,
    "exceptional_m1_p2": 1.4217705596804806332,
    "laplace_gamma0_1": 1.2080451907121907723,
    "laplace_o1_6": 1.2019765552914958775,
    "hecke_gamma0_1_p2": 2.2856086089439699478,
    "hecke_o1_6_p5": 2.4850597473157492117,
}


def test_areas():
    assert area(HeckeCongruence(1)).coeff == Fraction(1, 3)
    assert area(HeckeCongruence(6)).coeff == 4
    assert area(CocompactUnits(6)).coeff == Fraction(2, 3)
    assert area(CocompactUnits(10)).value == pytest.approx(4 * math.pi / 3, rel=1e-15)


def test_identity_and_elliptic_frozen():
    assert identity_term(Area(Fraction(1, 3)), F) == pytest.approx(ORACLE["identity_pi_over_3"], abs=1e-14)
    assert elliptic_term_laplace(0, 1, F) == pytest.approx(ORACLE["elliptic_t0"], abs=1e-14)
    assert elliptic_term_laplace(1, 1, F) == pytest.approx(ORACLE["elliptic_t1"], abs=1e-14)
    assert elliptic_term_laplace(0, 0, F) == 0.0
    with pytest.raises(DomainError):
        elliptic_term_laplace(2, 1, F)


def test_hyperbolic_frozen_and_tail():
    v, tail = hyperbolic_term_laplace(3, 1, F, k_max=20)
    assert v == pytest.approx(ORACLE["hyperbolic_t3_k20"], abs=1e-15)
    assert tail >= 0
    # the k-tail bound covers the rest of the series
    v_long, _ = hyperbolic_term_laplace(3, 1, F, k_max=60)
    assert abs(v_long - v) <= tail
    _, t2 = hyperbolic_term_laplace(3, 1, F, k_max=2)
    _, t4 = hyperbolic_term_laplace(3, 1, F, k_max=4)
    assert t4 < t2
    with pytest.raises(DomainError):
        hyperbolic_term_laplace(2, 1, F)


def test_parabolic_frozen():
    b1 = parabolic_block(1, F)
    assert abs(b1.value - ORACLE["parabolic_m1"]) <= b1.tail + b1.quad_error + 1e-14
    b2 = parabolic_block(2, F)
    assert abs(b2.value - ORACLE["parabolic_m2"]) <= b2.tail + b2.quad_error + 1e-14


def test_hecke_terms_frozen():
    assert hecke_elliptic_term(0, 2, -8, 1, F) == pytest.approx(ORACLE["hecke_elliptic_t0_p2_disc-8"], abs=1e-14)
    assert hecke_hyperbolic_term(5, 2, 17, 1, F) == pytest.approx(ORACLE["hecke_hyp_t5_p2_disc17_std"], rel=1e-13)
    assert hecke_hyperbolic_term(-5, 2, 17, 1, F) == hecke_hyperbolic_term(5, 2, 17, 1, F)
    xb = hecke_exceptional_block(1, 2, F)
    assert abs(xb.value - ORACLE["exceptional_m1_p2"]) <= xb.tail + xb.quad_error + 1e-14
    with pytest.raises(DomainError):
        hecke_hyperbolic_term(3, 2, 1, 1, F)
    with pytest.raises(DomainError):
        hecke_exceptional_block(2, 2, F)


def test_unit_factor_modes():
    assert unit_factor(8, FactorMode.STANDARD_LOG_EPS) == pytest.approx(math.log(3 + 2 * math.sqrt(2)))
    assert unit_factor(8, "AsPrinted") == pytest.approx(math.acosh(math.log(3 + 2 * math.sqrt(2))))
    # log eps < 1 for disc 5: the printed arcosh needs the complex branch
    with pytest.raises(DomainError):
        unit_factor(5, FactorMode.AS_PRINTED)
    z = unit_factor(5, FactorMode.AS_PRINTED, allow_complex=True)
    assert z.real == 0 and z.imag == pytest.approx(math.acos(math.log((3 + math.sqrt(5)) / 2)))
    with pytest.raises((DomainError, ValueError)):
        FactorMode.parse("nonsense")


@pytest.mark.parametrize(
    "group, key",
    [(HeckeCongruence(1), "laplace_gamma0_1"), (CocompactUnits(6), "laplace_o1_6")],
)
def test_laplace_report_frozen(group, key):
    rep = geometric_side_laplace(group, F)
    assert abs(rep.grand_total - ORACLE[key]) <= rep.error_bound + 1e-13
    assert rep.error_bound < 1e-9
    parts = rep.identity_term + rep.elliptic_total + rep.hyperbolic_total + rep.parabolic_or_exceptional_total
    assert rep.grand_total == parts
    if isinstance(group, CocompactUnits):
        assert rep.parabolic_or_exceptional_total == 0.0
        assert all(e.block != "parabolic" for e in rep.term_log)
    else:
        assert any(e.block == "parabolic" for e in rep.term_log)


@pytest.mark.parametrize(
    "group, p, key",
    [(HeckeCongruence(1), 2, "hecke_gamma0_1_p2"), (CocompactUnits(6), 5, "hecke_o1_6_p5")],
)
def test_hecke_report_frozen(group, p, key):
    rep = geometric_side_hecke(group, p, F)
    assert abs(rep.grand_total - ORACLE[key]) <= rep.error_bound + 1e-13
    assert rep.identity_term == 0.0
    exc = [e for e in rep.term_log if e.block == "exceptional"]
    if isinstance(group, CocompactUnits):
        assert exc == [] and rep.parabolic_or_exceptional_total == 0.0
    else:
        assert [e.t for e in exc] == [p + 1]


def test_hecke_signs_logged_separately():
    rep = geometric_side_hecke_gamma0(1, 2, F)
    ts = {e.t for e in rep.term_log if e.block == "hyperbolic"}
    assert ts == {-t for t in ts}
    assert 3 not in ts and -3 not in ts


def test_hecke_prime_validation():
    with pytest.raises(DomainError):
        geometric_side_hecke_cocompact(6, 3, F)
    with pytest.raises(DomainError):
        geometric_side_hecke_gamma0(6, 4, F)


def test_as_printed_report_has_imaginary_part():
    std = geometric_side_hecke_cocompact(6, 5, F)
    pr = geometric_side_hecke_cocompact(6, 5, F, factor_mode=FactorMode.AS_PRINTED)
    assert std.imag_total == 0.0
    assert pr.imag_total != 0.0
    assert pr.factor_mode == "AsPrinted"


def test_doubling_cutoffs_stays_within_tail():
    g = HeckeCongruence(2)
    base = geometric_side_laplace(g, F)
    t_max, n_max = base.budget["t_max"], base.budget["n_max"]
    big = geometric_side_laplace(g, F, TruncationBudget(t_max=2 * t_max, n_max=2 * n_max, k_max=40))
    assert abs(big.grand_total - base.grand_total) <= base.error_bound
    assert big.tail_estimate <= base.tail_estimate


def test_tail_shrinks_with_t_max():
    g = CocompactUnits(6)
    tails = [geometric_side_laplace(g, F, TruncationBudget(t_max=T, tail_cap=1.0)).tail_estimate for T in (50, 200, 800)]
    assert tails[0] > tails[1] > tails[2]


def test_budget_cap_enforced():
    with pytest.raises(BudgetTooSmallError):
        geometric_side_laplace(CocompactUnits(6), F, TruncationBudget(t_max=10))


def test_budget_validation_and_auto():
    with pytest.raises(DomainError):
        TruncationBudget(t_max=0)
    with pytest.raises(DomainError):
        TruncationBudget(quad_tol=0)
    b = TruncationBudget.for_tolerance(1e-8)
    assert b.tail_cap == pytest.approx(1e-9) and b.tail_target <= 1e-12
    assert resolve_t_max_laplace(CocompactUnits(6), F, replace(b, t_max=77)) == 77
    assert resolve_n_max(F, b) >= 2


def test_count_majorant_dominates_counts():
    for g, nl in ((HeckeCongruence(1), 0), (HeckeCongruence(6), 2), (CocompactUnits(6), 2)):
        for t in range(3, 400):
            D = t * t - 4
            weighted = 0.0
            for B in superorders_of_element(t, 1):
                weighted += embedding_count_order(B, g) * max(1.0, log_norm_one_unit(B.disc))
            assert weighted <= count_majorant(D, nl)
            assert embedding_count_trace(t, 1, g) <= count_majorant(D, nl)


def test_linearity_in_count():
    v1, t1 = hyperbolic_term_laplace(5, 1, F)
    v3, t3 = hyperbolic_term_laplace(5, 3, F)
    assert v3 == pytest.approx(3 * v1, rel=1e-15) and t3 == pytest.approx(3 * t1, rel=1e-15)


def test_report_serialization():
    rep = geometric_side_laplace(CocompactUnits(6), Gaussian(0.5))
    d = json.loads(rep.to_json())
    assert d["grand_total"] == rep.grand_total
    assert d["test_function"] == "gaussian:a=0.5"
    assert len(d["term_log"]) == len(rep.term_log)
    lines = rep.to_csv().strip().splitlines()
    assert lines[0] == "t,block,value,imag" and len(lines) == len(rep.term_log) + 1
    assert "term_log" not in rep.to_dict(include_terms=False)

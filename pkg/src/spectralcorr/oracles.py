"""Independent cross-checks for the counting layer, and fixture export.

None of these routines shares code with the formulas they check beyond the
Kronecker symbol: class numbers come from Dirichlet's analytic formula and
from reducing every form in a box, units from a direct Pell search, class
counts from enumerating matrices.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import _kernels
from .arith import prime_divisors
from .embeddings import (
    INCONCLUSIVE,
    CocompactUnits,
    HeckeCongruence,
    conjugacy_oracle_report,
    embedding_count_trace,
)
from .errors import ExceptionalTraceError, InvalidOrderError
from .quadforms import _fundamental_unit, class_number, fundamental_part, has_norm_minus_one_unit, narrow_class_number, unit_data, Real
from .selberg_transform import Gaussian, h_hat_quadrature, phi_from_q, q_from_hhat, q_from_phi
from .serialize import dumps


#: y-range of the direct Pell search used inside the analytic oracle.
PELL_SEARCH_Y = 10**4


def valid_discriminants(lo: int, hi: int) -> list[int]:
    out = []
    for D in range(lo, hi + 1):
        try:
            fundamental_part(D)
        except InvalidOrderError:
            continue
        out.append(D)
    return out


def enumeration_class_number(D: int) -> int:
    """D < 0: reduce every primitive form with a, |b| inside a box and count the results.

    The box holds every reduced form (a <= sqrt(|D|/3)), so the count is exact.
    """
    if D >= 0:
        raise ValueError("box enumeration is for negative discriminants")
    box = math.isqrt(-D // 3) + 1
    return int(_kernels.enumerate_definite_classes(D, box))


def _fundamental_unit_pell(D: int, y_max: int) -> Optional[tuple[int, int]]:
    """Smallest y >= 1 with x^2 - D y^2 = +-4, found by direct search."""
    for y in range(1, y_max + 1):
        for sign in (-4, 4):
            x2 = D * y * y + sign
            if x2 > 0:
                x = math.isqrt(x2)
                if x * x == x2:
                    return x, y
    return None


def pell_unit(D: int, y_max: int = 10**6) -> Union[tuple[int, int], str]:
    """(x, y) for the fundamental unit (x + y sqrt D)/2 of the order, or ``inconclusive``."""
    found = _fundamental_unit_pell(D, y_max)
    return INCONCLUSIVE if found is None else found


def _unit_of_maximal_order(DK: int) -> tuple[int, int]:
    # the direct search covers small units; beyond it fall back to the continued fraction
    found = _fundamental_unit_pell(DK, PELL_SEARCH_Y)
    if found is None:
        x, y, _ = _fundamental_unit(DK)
        return x, y
    return found


def _unit_index_real(DK: int, f: int) -> int:
    """[O_K^* : O^*] for the order of conductor f, by powering the fundamental unit of O_K."""
    x0, y0 = _unit_of_maximal_order(DK)
    x, y = x0, y0
    k = 1
    # (X + Y sqrt DK)/2 lies in the order iff f | Y and X = (Y/f) DK f^2 mod 2
    while not (y % f == 0 and (x - (y // f) * DK * f * f) % 2 == 0):
        x, y = (x * x0 + DK * y * y0) // 2, (x * y0 + y * x0) // 2
        k += 1
    return k


def analytic_class_number(D: int) -> int:
    """Wide class number of the order of discriminant D from Dirichlet's formula.

    The maximal order comes from the character sum; the conductor f enters
    through h(O) = h_K f prod_{p | f}(1 - chi(p)/p) / [O_K^* : O^*].
    """
    DK, f = fundamental_part(D)
    if DK < 0:
        w = 6 if DK == -3 else 4 if DK == -4 else 2
        hK = round(-w * int(_kernels.kronecker_sum_imag(DK)) / (2 * abs(DK)))
        index = w // 2 if f > 1 else 1
    else:
        x, y = _unit_of_maximal_order(DK)
        log_eps = math.log((x + y * math.sqrt(DK)) / 2)
        hK = round(-float(_kernels.kronecker_sum_real(DK)) / (2 * log_eps))
        index = _unit_index_real(DK, f)
    num = hK * f
    den = 1
    for p in prime_divisors(f) if f > 1 else []:
        num *= p - int(_kernels.kronecker(DK, p))
        den *= p
    value = num // den
    assert value * den == num and value % index == 0
    return value // index


def class_number_record(D: int) -> dict:
    h = class_number(D)
    rec = {"h_wide": h, "h_narrow": narrow_class_number(D), "oracle_analytic": analytic_class_number(D)}
    if D < 0:
        rec["oracle_enumeration"] = enumeration_class_number(D)
        rec["unit"] = {"torsion_order": unit_data(D).torsion_order}
    else:
        u = unit_data(D)
        assert isinstance(u, Real)
        rec["unit"] = {
            "norm_minus_one": has_norm_minus_one_unit(D),
            "norm_one_x": str(u.norm_one_x),
            "norm_one_y": str(u.norm_one_y),
            "log_eps": u.log_eps,
        }
    oracles = [v for k, v in rec.items() if k.startswith("oracle_")]
    rec["agree"] = all(v == h for v in oracles)
    return rec


def class_number_fixture(lo: int, hi: int) -> dict:
    return {
        "generator": "spectralcorr oracle forms",
        "range": [lo, hi],
        "entries": {str(D): class_number_record(D) for D in valid_discriminants(lo, hi)},
    }


def embedding_count_record(t: int, m: int, bound: int) -> dict:
    group = HeckeCongruence(m)
    rec: dict = {"t": t, "n": 1, "group": str(group)}
    try:
        rec["formula_wide"] = embedding_count_trace(t, 1, group)
        rec["formula_narrow"] = embedding_count_trace(t, 1, group, narrow=True)
    except ExceptionalTraceError:
        rec["status"] = "exceptional"
        return rec
    un = conjugacy_oracle_report(t, m, bound, unoriented=True)
    ori = conjugacy_oracle_report(t, m, bound, unoriented=False)
    rec["oracle_unoriented"] = un["count"]
    rec["oracle_oriented"] = ori["count"]
    rec["oracle_bounds"] = [r["bound"] for r in un["runs"]]
    rec["stable"] = bool(un["stable"] and ori["stable"])
    if not rec["stable"]:
        rec["status"] = INCONCLUSIVE
    elif rec["oracle_unoriented"] == rec["formula_wide"]:
        rec["status"] = "agree_wide"
    else:
        rec["status"] = "disagree_wide"
    return rec


def embedding_count_fixture(levels=(1, 2, 3, 5, 6, 7, 10), traces=range(0, 9), bound: int = 40) -> dict:
    entries = []
    for m in levels:
        for t in traces:
            entries.append(embedding_count_record(t, m, bound))
    cocompact = []
    for d in (6, 10, 14, 15):
        g = CocompactUnits(d)
        for t in traces:
            if t == 2:
                continue
            cocompact.append({"t": t, "n": 1, "group": str(g), "formula_wide": embedding_count_trace(t, 1, g)})
    return {"generator": "spectralcorr oracle conjugacy", "bound": bound, "entries": entries, "cocompact": cocompact}


def transform_fixture(a: float = 1.0) -> dict:
    f = Gaussian(a)
    us = np.linspace(-20.0, 20.0, 41)
    quad = h_hat_quadrature(f, us)
    closed = f.h_hat(us)
    xs = [0.0, 1.0, 5.0]
    return {
        "generator": "spectralcorr oracle transform",
        "test_function": f.spec,
        "h_hat_max_abs_diff": float(np.max(np.abs(quad - closed))),
        "phi": {str(x): phi_from_q(f, x) for x in xs},
        "round_trip": {str(x): {"Q": float(q_from_hhat(f, x)), "Q_from_phi": q_from_phi(f, x)} for x in xs},
    }


def write_fixture(path: Union[str, Path], data: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data))
    return path

"""Numerical and exact checks of the beta-weighted correspondence between
the spectrum of a cocompact quaternion unit group and Gamma_0(m) newforms."""

__version__ = "0.1.0"

from ._jit import HAVE_NUMBA
from .correspondence import (
    IdentityVerdict,
    MultiplicityTable,
    newform_dimensions,
    verify_area_identity,
    verify_counting_identities,
    verify_theorem1,
    verify_theorem2,
)
from .embeddings import CocompactUnits, HeckeCongruence, parse_group
from .selberg_transform import Gaussian, parse_test_function
from .trace_geometry import FactorMode, TruncationBudget

__all__ = [
    "HAVE_NUMBA",
    "CocompactUnits",
    "FactorMode",
    "Gaussian",
    "HeckeCongruence",
    "IdentityVerdict",
    "MultiplicityTable",
    "TruncationBudget",
    "newform_dimensions",
    "parse_group",
    "parse_test_function",
    "verify_area_identity",
    "verify_counting_identities",
    "verify_theorem1",
    "verify_theorem2",
]

from . import exc, types
from ._version import __version__
from .annihilator import (
    ann_at_zero_direct,
    annihilator_space,
    is_dependent,
    minimal_annihilator,
    trdeg,
)
from .aps import aps_decide, reduction_stress, verify_witness
from .circuit import CircuitBuilder, Instance, eval_generic, expand, parse
from .config import DEFAULT_LIMITS, Limits, RunConfig, make_rng
from .field import FieldDesc, FieldElement, mk_field
from .hitting import HittingInstance, brute_counterexample, certify, search
from .jacobian import jacobian_rank
from .laurent import LaurentPoly, Witness
from .poly import Polynomial
from .protocol import ProtocolParams, am_decide, coam_decide, fiber_stats

__all__ = [
    "DEFAULT_LIMITS",
    "CircuitBuilder",
    "FieldDesc",
    "FieldElement",
    "HittingInstance",
    "Instance",
    "LaurentPoly",
    "Limits",
    "Polynomial",
    "ProtocolParams",
    "RunConfig",
    "Witness",
    "__version__",
    "am_decide",
    "ann_at_zero_direct",
    "annihilator_space",
    "aps_decide",
    "brute_counterexample",
    "certify",
    "coam_decide",
    "eval_generic",
    "exc",
    "expand",
    "fiber_stats",
    "is_dependent",
    "jacobian_rank",
    "make_rng",
    "minimal_annihilator",
    "mk_field",
    "parse",
    "reduction_stress",
    "search",
    "trdeg",
    "types",
    "verify_witness",
]

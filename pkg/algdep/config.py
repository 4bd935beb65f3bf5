"""Resource limits, run configuration and seed discipline."""

import hashlib
import logging
from pathlib import Path
from typing import Literal, Optional, Tuple

import numpy as np
import pydantic
from pydantic import ConfigDict, Field
from typing_extensions import Annotated

from . import exc

logger = logging.getLogger(__name__)

SEED_MASK = 2**64 - 1


class Limits(pydantic.BaseModel):
    """
    Caps for every computation whose size grows with the input.

    max_monomials: y-monomials in one annihilator degree slice
    max_terms: terms of any intermediate polynomial during expansion
    max_matrix_entries: rows * columns of an annihilator constraint matrix
    enumeration_budget: domain points enumerated by the gap kernels
    max_field_size: elements of a field built by table or brute force
    max_parameter_points: parameter points scanned for counterexamples
    max_sweep: candidates visited by an exhaustive sweep
    """

    max_monomials: Annotated[int, Field(ge=1)] = 20_000
    max_terms: Annotated[int, Field(ge=1)] = 200_000
    max_matrix_entries: Annotated[int, Field(ge=1)] = 4_000_000
    enumeration_budget: Annotated[int, Field(ge=1)] = 2**24
    max_field_size: Annotated[int, Field(ge=2)] = 2**20
    max_parameter_points: Annotated[int, Field(ge=1)] = 2**16
    max_sweep: Annotated[int, Field(ge=0)] = 2**20

    def check(self, limit: str, requested: int, *, gate=None):
        cap = getattr(self, limit)
        if requested > cap:
            raise exc.ResourceLimit(
                limit=limit, requested=requested, cap=cap, gate=gate
            )

    model_config = ConfigDict(extra="forbid", frozen=True)


DEFAULT_LIMITS = Limits()


class RunConfig(pydantic.BaseModel):
    """
    One CLI invocation.

    Identical configurations produce byte-identical primary output.
    """

    subcommand: str
    paths: Tuple[Path, ...] = ()
    seed: Annotated[int, Field(ge=0, le=SEED_MASK)] = 0
    trials: Annotated[int, Field(ge=1)] = 8
    rounds: Annotated[int, Field(ge=1)] = 64
    degree_bound: Optional[Annotated[int, Field(ge=0)]] = None
    qprime_degree: Optional[Annotated[int, Field(ge=1)]] = None
    output: Literal["text", "tsv"] = "text"
    limits: Limits = DEFAULT_LIMITS

    model_config = ConfigDict(extra="forbid", frozen=True)


def split_seed(seed: int, tag: str, index: int = 0) -> int:
    """Derive the child seed of ``(seed, tag, index)``.

    Children of distinct tags or indices are independent streams; any
    single trial can be replayed from its triple alone.
    """
    digest = hashlib.sha256(f"{seed}:{tag}:{index}".encode("utf8"))
    return int.from_bytes(digest.digest()[:8], "little") & SEED_MASK


def make_rng(seed: int, tag: Optional[str] = None, index: int = 0):
    if tag is not None:
        seed = split_seed(seed, tag, index)
    return np.random.Generator(np.random.PCG64(seed))


def child_rng(rng: np.random.Generator, tag: str, index: int = 0):
    """Split a generator deterministically by drawing one parent word."""
    parent = int(rng.integers(0, 2**63))
    return make_rng(parent, tag, index)

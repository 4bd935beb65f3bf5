"""Jacobian matrix of an instance and its rank at random points."""

import logging
from typing import List

import numpy as np

from .annihilator import matrix_rank
from .circuit import Circuit, Instance, eval_generic, formal_partial
from .config import DEFAULT_LIMITS, Limits, child_rng
from .field import extension_with_size, sample
from .types import Record

logger = logging.getLogger(__name__)


class JacobianReport(Record):
    rank: int
    m: int
    n: int
    trials: int
    applicable: bool
    reason: str
    field: str

    @property
    def full(self) -> bool:
        return self.rank == self.m

    def to_text(self) -> str:
        status = "full" if self.full else "deficient"
        return (
            f"jacobian rank {self.rank} of {self.m} ({status}) over "
            f"{self.field}, {self.trials} trials; {self.reason}"
        )


def jacobian_matrix(inst: Instance) -> List[List[Circuit]]:
    """Entry (i, j) computes d f_i / d x_j."""
    return [
        [formal_partial(c, j) for j in range(1, inst.nvars + 1)]
        for c in inst.circuits
    ]


def jacobian_rank(
    inst: Instance,
    rng: np.random.Generator,
    trials: int = 8,
    limits: Limits = DEFAULT_LIMITS,
) -> JacobianReport:
    """
    Largest rank of the Jacobian at ``trials`` uniform points.

    Points come from an extension with more than 4 r (D'-1) trials
    elements, r = min(m, n). The rank equals trdeg only when the
    characteristic exceeds D'^r; otherwise the report is flagged.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    m, n = inst.m, inst.nvars
    r = min(m, n)
    Dprime = max(inst.Dprime, 1)
    p = inst.field.p
    applicable = p > Dprime**r
    if applicable:
        reason = f"characteristic {p} > D'^r = {Dprime ** r}"
    else:
        reason = (
            f"criterion inapplicable: characteristic {p} <= "
            f"D'^r = {Dprime ** r}"
        )
        logger.warning(reason)
    ext = extension_with_size(inst.field, 4 * r * (Dprime - 1) * trials + 1)
    limits.check("max_field_size", ext.q)
    matrix = jacobian_matrix(inst)
    rank = 0
    for t in range(trials):
        if r == 0:
            break
        trial_rng = child_rng(rng, "jacobian", t)
        point = [sample(ext, trial_rng) for _ in range(n)]
        values = [
            [eval_generic(entry, point).value for entry in row]
            for row in matrix
        ]
        rank = max(rank, matrix_rank(ext, values))
        logger.debug(f"jacobian trial {t}: rank {rank}")
        if rank == r:
            break
    return JacobianReport(
        rank=rank,
        m=m,
        n=n,
        trials=trials,
        applicable=applicable,
        reason=reason,
        field=repr(ext),
    )

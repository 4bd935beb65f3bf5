"""
Approximate polynomial satisfiability.

An instance is in APS iff the origin lies in the closure of the image of
f, iff every annihilator has zero constant term. With k = trdeg:

- k = m: every point of A^m is in the closure, so the answer is yes;
- k = m - 1: the annihilators form a principal ideal, read its generator;
- otherwise reduce to k + 1 random linear combinations that keep trdeg k
  and answer the principal case there. A yes instance never yields a no
  trial, so one no trial settles the answer.
"""

import itertools
import logging
from fractions import Fraction
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from . import exc
from .annihilator import ann_at_zero_direct, expand_all, minimal_annihilator
from .annihilator import trdeg
from .circuit import Instance, VectorRing, eval_generic, linear_combination
from .config import DEFAULT_LIMITS, Limits, child_rng, make_rng
from .field import FieldDesc, FieldElement, extension_with_size
from .laurent import LaurentPoly, Witness, eps_degree_bounds, in_eps_ideal
from .types import Record

logger = logging.getLogger(__name__)

Route = Literal[
    "independent-case",
    "principal-case",
    "reduced",
    "direct-oracle",
    "constant-circuit",
]


class ReductionPlan(Record):
    """
    Coefficients c_ij drawn from S = ``field`` for g_i = sum_j c_ij f_j.

    delta = (k+1) D'^k / |S| bounds the chance that g loses trdeg or
    gains the origin in its closure.
    """

    k: int
    maxdeg: int
    field: FieldDesc
    matrix: Tuple[Tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return self.field.q

    @property
    def delta(self) -> Fraction:
        return Fraction((self.k + 1) * self.maxdeg**self.k, self.size)

    def to_text(self) -> str:
        rows = "; ".join(
            " ".join(self.field.format(c) for c in row) for row in self.matrix
        )
        return (
            f"plan k={self.k} |S|={self.size} delta={self.delta} "
            f"over {self.field!r}: [{rows}]"
        )

    def to_row(self) -> dict:
        return {
            "k": self.k,
            "size": self.size,
            "delta": str(self.delta),
            "field": repr(self.field),
        }


class ApsVerdict(Record):
    answer: bool
    route: Route
    k: int
    m: int
    trials: int = 0
    attempts: int = 0
    seeds: Tuple[int, ...] = ()
    annihilator: Optional[str] = None
    delta: Optional[str] = None
    exhaustive: bool = False
    cross_check: Optional[bool] = None

    def to_text(self) -> str:
        answer = "YES" if self.answer else "NO"
        text = f"APS: {answer} (route={self.route})"
        if self.annihilator is not None:
            text += f"\nannihilator: {self.annihilator}"
        if self.route == "reduced":
            text += (
                f"\ntrials {self.trials} of {self.attempts} sampled, "
                f"delta={self.delta}"
            )
        if self.cross_check is not None:
            text += f"\npipeline answer: {self.cross_check}"
        return text


# preprocessing


def normalize(
    inst: Instance, limits: Limits = DEFAULT_LIMITS
) -> Tuple[Instance, Optional[int]]:
    """
    Drop identically zero circuits. Returns the instance and the index of
    the first nonzero constant circuit, if any.
    """
    polys = expand_all(inst, limits)
    kept = []
    for i, (c, poly) in enumerate(zip(inst.circuits, polys)):
        if not poly:
            logger.debug(f"dropping zero circuit {c.name}")
            continue
        if poly.total_degree() == 0:
            return inst, i
        kept.append(c)
    return inst.with_circuits(kept), None


def verify_witness(inst: Instance, w: Witness) -> bool:
    """Whether every f_i(w) lies in eps F[eps]."""
    if w.n != inst.nvars:
        raise exc.ArityMismatch(expected=inst.nvars, got=w.n, where="witness")
    if not inst.field.is_subfield_of(w.field):
        raise exc.FieldMismatch(inst.field, w.field)
    try:
        D, Dprime = eps_degree_bounds(inst)
    except exc.ConstantCircuit:
        D = Dprime = None
    if D is not None and not w.respects(D, Dprime):
        logger.warning(
            f"witness window {w.window()} exceeds [-{D}, {Dprime}]"
        )
    for c in inst.circuits:
        value = eval_generic(c, w.coords)
        if isinstance(value, FieldElement):
            # no coordinates to carry eps; the circuit is a constant
            embed = value.field.embedding(w.field)
            value = LaurentPoly.constant(
                w.field, FieldElement(w.field, embed(value.value))
            )
        if not in_eps_ideal(value):
            logger.info(f"witness fails at {c.name}: {value!r}")
            return False
    return True


def exact_zero(
    inst: Instance, limits: Limits = DEFAULT_LIMITS
) -> Optional[Tuple[FieldElement, ...]]:
    """First common zero in F_q^n in index order, or None."""
    field, n = inst.field, inst.nvars
    total = field.q**n
    limits.check("enumeration_budget", total)
    if not inst.circuits:
        return tuple(field.zero for _ in range(n))
    chunk = 2**16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        coords = [(idx // field.q**i) % field.q for i in range(n)]
        ring = VectorRing(field, field, idx.shape)
        alive = np.ones(idx.shape, dtype=bool)
        for c in inst.circuits:
            alive &= np.asarray(eval_generic(c, coords, ring)) == 0
        hits = np.nonzero(alive)[0]
        if hits.size:
            index = int(idx[hits[0]])
            return tuple(
                FieldElement(field, (index // field.q**i) % field.q)
                for i in range(n)
            )
    return None


# reduction


def plan_field(
    inst: Instance, k: int, limits: Limits = DEFAULT_LIMITS
) -> Tuple[FieldDesc, int]:
    """Smallest extension with |S| >= 2 (k+1) D'^k, and D'."""
    maxdeg = max(inst.Dprime, 1)
    field = extension_with_size(inst.field, 2 * (k + 1) * maxdeg**k)
    limits.check("max_field_size", field.q)
    return field, maxdeg


def apply_plan(
    inst: Instance,
    matrix: Sequence[Sequence],
    field: Optional[FieldDesc] = None,
) -> Instance:
    """g_i = sum_j matrix[i][j] f_j over ``field`` (default: the base)."""
    field = field or inst.field
    rows = []
    for row in matrix:
        if len(row) != inst.m:
            raise exc.ArityMismatch(expected=inst.m, got=len(row),
                                    where="plan row")
        rows.append(
            [
                c if isinstance(c, FieldElement) else FieldElement(
                    field, int(c) % field.p
                )
                for c in row
            ]
        )
    circuits = [
        linear_combination(field, inst.circuits, row, name=f"g{i}")
        for i, row in enumerate(rows, start=1)
    ]
    return Instance(field=field, nvars=inst.nvars, circuits=tuple(circuits))


def random_reduce(
    inst: Instance,
    k: int,
    rng: np.random.Generator,
    limits: Limits = DEFAULT_LIMITS,
) -> Tuple[ReductionPlan, Instance]:
    """k + 1 uniform combinations of the f_j with coefficients from S."""
    if k >= inst.m - 1:
        raise exc.PreconditionViolation(
            f"reduction needs k < m - 1, got k={k}, m={inst.m}"
        )
    field, maxdeg = plan_field(inst, k, limits)
    matrix = tuple(
        tuple(int(v) for v in rng.integers(0, field.q, size=inst.m))
        for _ in range(k + 1)
    )
    plan = ReductionPlan(k=k, maxdeg=maxdeg, field=field, matrix=matrix)
    rows = [[FieldElement(field, c) for c in row] for row in matrix]
    return plan, apply_plan(inst, rows, field)


def principal_answer(
    inst: Instance, limits: Limits = DEFAULT_LIMITS
) -> Tuple[bool, str]:
    """Whether the minimal annihilator has zero constant term."""
    annihilator = minimal_annihilator(inst, limits)
    return not annihilator.constant_term(), annihilator.to_text("y")


def _reduced_answer(g: Instance, k: int, limits) -> Optional[bool]:
    """None when g lost trdeg, else the principal-case answer on g."""
    kg = trdeg(g, limits).k
    if kg != k:
        logger.warning(f"reduction dropped trdeg from {k} to {kg}")
        return None
    return principal_answer(g, limits)[0]


def aps_decide(
    inst: Instance,
    rng: Optional[np.random.Generator] = None,
    trials: int = 8,
    limits: Limits = DEFAULT_LIMITS,
    exhaustive: bool = False,
    oracle: bool = False,
) -> ApsVerdict:
    """Decide whether the origin lies in the closure of the image of f."""
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    if rng is None:
        rng = make_rng(0, "aps")
    original = inst
    inst, constant = normalize(inst, limits)
    if constant is not None:
        c = inst.circuits[constant]
        value = expand_all(inst.subset([constant]), limits)[0]
        logger.info(f"{c.name} is a nonzero constant")
        return ApsVerdict(
            answer=False,
            route="constant-circuit",
            k=0,
            m=inst.m,
            annihilator=(
                f"y{constant + 1} - ({value.constant_term()})"
            ),
        )
    verdict = _decide(inst, rng, trials, limits, exhaustive)
    if oracle:
        answer = ann_at_zero_direct(original, limits)
        if answer != verdict.answer:
            logger.warning(
                f"direct oracle says {answer}, pipeline {verdict.answer}"
            )
        verdict = verdict.model_copy(
            update={
                "answer": answer,
                "route": "direct-oracle",
                "cross_check": verdict.answer,
            }
        )
    logger.info(verdict.to_text().splitlines()[0])
    return verdict


def _decide(inst, rng, trials, limits, exhaustive) -> ApsVerdict:
    m = inst.m
    if m == 0:
        return ApsVerdict(answer=True, route="independent-case", k=0, m=0)
    k = trdeg(inst, limits).k
    if k == m:
        return ApsVerdict(answer=True, route="independent-case", k=k, m=m)
    if k == m - 1:
        answer, text = principal_answer(inst, limits)
        return ApsVerdict(
            answer=answer, route="principal-case", k=k, m=m, annihilator=text
        )
    if exhaustive:
        return _sweep(inst, k, limits)
    accepted = 0
    attempt = 0
    seeds: List[int] = []
    delta = None
    max_attempts = 8 * trials
    while accepted < trials:
        if attempt >= max_attempts:
            raise exc.NotFound(
                tried=attempt, reason="reductions keep dropping trdeg"
            )
        plan, g = random_reduce(inst, k, child_rng(rng, "aps", attempt),
                                limits)
        delta = str(plan.delta)
        answer = _reduced_answer(g, k, limits)
        seeds.append(attempt)
        attempt += 1
        if answer is None:
            continue
        accepted += 1
        logger.debug(f"trial {accepted}: reduced answer {answer}")
        if not answer:
            break
    else:
        answer = True
    return ApsVerdict(
        answer=answer,
        route="reduced",
        k=k,
        m=m,
        trials=accepted,
        attempts=attempt,
        seeds=tuple(seeds),
        delta=delta,
    )


def _sweep(inst: Instance, k: int, limits: Limits) -> ApsVerdict:
    """Every plan over S in index order; no iff some kept plan says no."""
    field, maxdeg = plan_field(inst, k, limits)
    m = inst.m
    cells = (k + 1) * m
    limits.check("max_sweep", field.q**cells)
    delta = str(Fraction((k + 1) * maxdeg**k, field.q))
    kept = 0
    visited = 0
    answer = True
    for flat in itertools.product(range(field.q), repeat=cells):
        visited += 1
        rows = [
            [FieldElement(field, v) for v in flat[i * m:(i + 1) * m]]
            for i in range(k + 1)
        ]
        reduced = _reduced_answer(apply_plan(inst, rows, field), k, limits)
        if reduced is None:
            continue
        kept += 1
        if not reduced:
            answer = False
            break
    logger.info(f"sweep visited {visited} plans, {kept} kept trdeg")
    return ApsVerdict(
        answer=answer,
        route="reduced",
        k=k,
        m=inst.m,
        trials=kept,
        attempts=visited,
        delta=delta,
        exhaustive=True,
    )


class StressReport(Record):
    k: int
    seeds: int
    preserved: int
    disagreements: int
    delta: Fraction
    truth: bool
    skipped: bool = False

    @property
    def rate(self) -> Fraction:
        if not self.preserved:
            return Fraction(0)
        return Fraction(self.disagreements, self.preserved)

    def to_text(self) -> str:
        if self.skipped:
            return f"reduction stress skipped (k={self.k})"
        return (
            f"reduction stress: {self.disagreements}/{self.preserved} "
            f"disagree with the direct oracle ({self.truth}); "
            f"delta={self.delta}, {self.seeds} seeds"
        )

    def to_row(self) -> dict:
        return {
            "k": self.k,
            "seeds": self.seeds,
            "preserved": self.preserved,
            "disagreements": self.disagreements,
            "rate": str(self.rate),
            "delta": str(self.delta),
        }


def reduction_stress(
    inst: Instance,
    seeds: int,
    seed: int = 0,
    limits: Limits = DEFAULT_LIMITS,
) -> StressReport:
    """Single-trial disagreement rate of the reduction against the oracle."""
    inst, constant = normalize(inst, limits)
    truth = ann_at_zero_direct(inst, limits)
    k = trdeg(inst, limits).k
    if constant is not None or k >= inst.m - 1:
        return StressReport(k=k, seeds=0, preserved=0, disagreements=0,
                            delta=Fraction(0), truth=truth, skipped=True)
    preserved = disagreements = 0
    delta = Fraction(0)
    for i in range(seeds):
        plan, g = random_reduce(inst, k, make_rng(seed, "stress", i), limits)
        delta = plan.delta
        answer = _reduced_answer(g, k, limits)
        if answer is None:
            continue
        preserved += 1
        disagreements += answer != truth
    return StressReport(
        k=k,
        seeds=seeds,
        preserved=preserved,
        disagreements=disagreements,
        delta=delta,
        truth=truth,
    )

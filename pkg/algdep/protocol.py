"""
Gap statistics and the set-lowerbound protocol for algebraic dependence.

For a square instance f: F_q'^n -> F_q'^n the dependent and independent
cases are told apart by fiber sizes (AM side) or by the image size (coAM
side). Points of F_q'^n are indexed by ``sum a_i q'^i`` with a_1 the
lowest digit; the same indexing is used for image points.
"""

import logging
from fractions import Fraction
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import Field
from typing_extensions import Annotated

from . import exc
from .circuit import CircuitBuilder, Instance, VectorRing, eval_generic
from .config import DEFAULT_LIMITS, Limits, child_rng, make_rng
from .field import FieldDesc, FieldElement, TABLE_LIMIT, log2_ceil, sample
from .types import Record

logger = logging.getLogger(__name__)

Mode = Literal["am", "coam"]
Verdict = Literal["dependent", "independent", "inconclusive"]

CHUNK = 2**18


# parameters


def am_threshold(n: int, D: int, Dprime: int) -> int:
    """q' must exceed 4 n D D' + 4 k D with k = 2D."""
    return 4 * n * D * Dprime + 4 * (2 * D) * D


def coam_threshold(n: int, D: int, Dprime: int) -> int:
    """q' must exceed D (2D + n D')."""
    return D * (2 * D + n * Dprime)


class ProtocolParams(Record):
    mode: Mode
    qprime: FieldDesc
    n: Annotated[int, Field(ge=1)]
    D: Annotated[int, Field(ge=1)]
    Dprime: Annotated[int, Field(ge=1)]
    rounds: Annotated[int, Field(ge=1)] = 64
    seed: int = 0

    @property
    def k(self) -> int:
        """Preimage gap parameter."""
        return 2 * self.D

    @property
    def threshold(self) -> int:
        if self.mode == "am":
            return am_threshold(self.n, self.D, self.Dprime)
        return coam_threshold(self.n, self.D, self.Dprime)

    def check(self):
        if self.qprime.q <= self.threshold:
            raise exc.ThresholdViolation(
                mode=self.mode, qprime=self.qprime.q, required=self.threshold
            )

    @classmethod
    def for_instance(
        cls,
        inst: Instance,
        mode: Mode,
        qprime: Optional[FieldDesc] = None,
        rounds: int = 64,
        seed: int = 0,
    ) -> "ProtocolParams":
        """Degree profile of ``inst``; q' defaults to the first legal one."""
        for c, degree in zip(inst.circuits, inst.degrees):
            if degree == 0:
                raise exc.ConstantCircuit(c.name)
        n = min(inst.m, inst.nvars)
        D, Dprime = inst.D, inst.Dprime
        if qprime is None:
            threshold = (am_threshold if mode == "am" else coam_threshold)(
                n, D, Dprime
            )
            qprime = smallest_qprime(inst.field, threshold)
        return cls(
            mode=mode,
            qprime=qprime,
            n=n,
            D=D,
            Dprime=Dprime,
            rounds=rounds,
            seed=seed,
        )

    def to_text(self) -> str:
        return (
            f"{self.mode}: q'={self.qprime.q} n={self.n} D={self.D} "
            f"D'={self.Dprime} k={self.k} threshold={self.threshold} "
            f"rounds={self.rounds}"
        )


def smallest_qprime(field: FieldDesc, threshold: int) -> FieldDesc:
    """Smallest extension of ``field`` with more than ``threshold`` points."""
    j = 1
    while field.q**j <= threshold:
        j += 1
    return field.extension(j)


# square reduction


class SquareReduction(Record):
    """
    Outcome of making an instance square.

    Either ``shortcut`` is set (more circuits than variables, so the
    instance is dependent) or ``instance`` holds the m-variable instance.
    """

    instance: Optional[Instance] = None
    shortcut: Optional[Literal["dependent"]] = None
    matrix: Tuple[Tuple[int, ...], ...] = ()

    def to_text(self) -> str:
        if self.shortcut:
            return f"square reduction: shortcut {self.shortcut}"
        inst = self.instance
        return (
            f"square reduction: m={inst.m} n={inst.nvars} over "
            f"{inst.field!r}"
        )

    def to_row(self) -> dict:
        if self.shortcut:
            return {"shortcut": self.shortcut}
        return {"m": self.instance.m, "n": self.instance.nvars,
                "field": repr(self.instance.field)}


def default_reduction_field(field: FieldDesc) -> FieldDesc:
    """Largest extension of ``field`` still served by log tables."""
    j = 1
    while field.q ** (j + 1) <= TABLE_LIMIT:
        j += 1
    return field.extension(j)


def reduce_to_square(
    inst: Instance,
    rng: np.random.Generator,
    field: Optional[FieldDesc] = None,
    limits: Limits = DEFAULT_LIMITS,
) -> SquareReduction:
    """
    Substitute x_j <- sum_l a_jl z_l (l = 1..m) with uniform a from
    ``field`` when m < n. Circuits keep their structure; only the
    variable inputs are replaced by linear forms.
    """
    m, n = inst.m, inst.nvars
    if m > n:
        logger.info(f"m={m} > n={n}: dependent without further work")
        return SquareReduction(shortcut="dependent")
    if m == n or m == 0:
        return SquareReduction(instance=inst)
    field = field or default_reduction_field(inst.field)
    if not inst.field.is_subfield_of(field):
        raise exc.FieldMismatch(inst.field, field)
    limits.check("max_field_size", field.q)
    matrix = tuple(
        tuple(sample(field, rng).value for _ in range(m)) for _ in range(n)
    )
    circuits = []
    for c in inst.circuits:
        b = CircuitBuilder(field, m, c.name)
        inputs = {}
        for j, row in enumerate(matrix, start=1):
            terms = [
                b.mul(b.const(FieldElement(field, a)), b.var(l))
                for l, a in enumerate(row, start=1)
                if a
            ]
            inputs[j] = b.sum(terms)
        circuits.append(b.build(b.inline(c, inputs)))
    reduced = Instance(field=field, nvars=m, circuits=tuple(circuits))
    logger.debug(f"reduced {n} variables to {m} over {field!r}")
    return SquareReduction(instance=reduced, matrix=matrix)


# exhaustive statistics


def _require_square(inst: Instance):
    if inst.m != inst.nvars or inst.m == 0:
        raise exc.PreconditionViolation(
            f"square instance required, got m={inst.m}, n={inst.nvars}"
        )


def decode(index: int, q: int, n: int) -> Tuple[int, ...]:
    digits = []
    for _ in range(n):
        digits.append(index % q)
        index //= q
    return tuple(digits)


def encode(digits, q: int) -> int:
    index = 0
    for value in reversed(list(digits)):
        index = index * q + int(value)
    return index


def image_index(
    inst: Instance, qprime: FieldDesc, limits: Limits = DEFAULT_LIMITS
) -> np.ndarray:
    """Index of f(a) for every domain index a, computed in chunks."""
    _require_square(inst)
    if not inst.field.is_subfield_of(qprime):
        raise exc.FieldMismatch(inst.field, qprime)
    n, q = inst.nvars, qprime.q
    total = q**n
    limits.check("enumeration_budget", total)
    if qprime.e > 1 and q > TABLE_LIMIT:
        raise exc.ResourceLimit(limit="table_size", requested=q,
                                cap=TABLE_LIMIT)
    image = np.zeros(total, dtype=np.int64)
    weights = [q**i for i in range(n)]
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(start + CHUNK, total), dtype=np.int64)
        coords = [(idx // w) % q for w in weights]
        ring = VectorRing(inst.field, qprime, idx.shape)
        acc = np.zeros(idx.shape, dtype=np.int64)
        for c, w in zip(inst.circuits, weights):
            value = eval_generic(c, coords, ring)
            acc += np.asarray(value, dtype=np.int64) * w
        image[start:start + len(idx)] = acc
    return image


class GapReport(Record):
    """
    Exact fiber statistics of f over F_q'^n.

    histogram: pairs (N, number of image points b with N_b = N)
    """

    field: str
    q: int
    n: int
    points: int
    image_size: int
    histogram: Tuple[Tuple[int, int], ...]

    def total(self) -> int:
        return sum(size * count for size, count in self.histogram)

    def domain_count(self, at_most: Optional[int] = None,
                     above: Optional[int] = None) -> int:
        """Domain points a whose fiber size N_f(a) meets the bounds."""
        total = 0
        for size, count in self.histogram:
            if at_most is not None and size > at_most:
                continue
            if above is not None and size <= above:
                continue
            total += size * count
        return total

    def fraction_at_most(self, t: int) -> Fraction:
        return Fraction(self.domain_count(at_most=t), self.points)

    def fraction_above(self, t: int) -> Fraction:
        return Fraction(self.domain_count(above=t), self.points)

    def image_fraction(self) -> Fraction:
        return Fraction(self.image_size, self.points)

    def to_text(self) -> str:
        fibers = " ".join(f"{size}x{count}" for size, count in self.histogram)
        return (
            f"fibers over {self.field}^{self.n}: |Im| = {self.image_size} "
            f"of {self.points}\nN_b histogram (size x count): {fibers}"
        )

    def to_row(self) -> dict:
        return {
            "q": self.q,
            "n": self.n,
            "points": self.points,
            "image_size": self.image_size,
            "max_fiber": max(size for size, _ in self.histogram),
        }


def fiber_stats(
    inst: Instance, qprime: FieldDesc, limits: Limits = DEFAULT_LIMITS
) -> GapReport:
    image = image_index(inst, qprime, limits)
    _, sizes = np.unique(image, return_counts=True)
    fiber, count = np.unique(sizes, return_counts=True)
    report = GapReport(
        field=repr(qprime),
        q=qprime.q,
        n=inst.nvars,
        points=len(image),
        image_size=len(sizes),
        histogram=tuple(
            (int(s), int(c)) for s, c in zip(fiber.tolist(), count.tolist())
        ),
    )
    if report.total() != report.points:
        raise AssertionError("fiber sizes do not sum to the domain size")
    return report


class LemmaFractions(Record):
    """Observed fractions next to the bounds the gap lemmas promise."""

    small_preimage: Fraction
    small_preimage_bound: Fraction
    large_preimage: Fraction
    large_preimage_bound: Fraction
    image: Fraction
    large_image_bound: Fraction
    small_image_bound: Fraction

    def independent_holds(self) -> bool:
        return (
            self.small_preimage >= self.small_preimage_bound
            and self.image >= self.large_image_bound
        )

    def dependent_holds(self) -> bool:
        return (
            self.large_preimage >= self.large_preimage_bound
            and self.image <= self.small_image_bound
        )

    def to_text(self) -> str:
        return "\n".join(
            f"{name} = {value}" for name, value in self.to_row().items()
        )

    def to_row(self) -> dict:
        return {name: str(value) for name, value in self}


def lemma_fractions(report: GapReport, D: int, Dprime: int) -> LemmaFractions:
    """
    small_preimage: fraction of a with N_f(a) <= D
    large_preimage: fraction of a with N_f(a) > 2D
    image: |Im| / q'^n
    """
    q, n = report.q, report.n
    k = 2 * D
    return LemmaFractions(
        small_preimage=report.fraction_at_most(D),
        small_preimage_bound=1 - Fraction(n * D * Dprime, q),
        large_preimage=report.fraction_above(k),
        large_preimage_bound=1 - Fraction(k * D, q),
        image=report.image_fraction(),
        large_image_bound=Fraction(1, D) - Fraction(n * Dprime, q),
        small_image_bound=Fraction(D, q),
    )


class GapCheck(Record):
    mode: Mode
    verdict: Verdict
    fractions: LemmaFractions

    def to_text(self) -> str:
        return f"{self.mode}-gap: {self.verdict}\n{self.fractions.to_text()}"

    def to_row(self) -> dict:
        return {"mode": self.mode, "verdict": self.verdict,
                **self.fractions.to_row()}


def _verdict(independent: bool, dependent: bool) -> Verdict:
    if independent and not dependent:
        return "independent"
    if dependent and not independent:
        return "dependent"
    logger.warning("gap statistics fit neither side")
    return "inconclusive"


def check_am_gap(report: GapReport, params: ProtocolParams) -> GapCheck:
    """Fiber sizes against the small and large preimage bounds."""
    params.check()
    fractions = lemma_fractions(report, params.D, params.Dprime)
    verdict = _verdict(
        fractions.small_preimage >= fractions.small_preimage_bound,
        fractions.large_preimage >= fractions.large_preimage_bound,
    )
    return GapCheck(mode="am", verdict=verdict, fractions=fractions)


def check_coam_gap(report: GapReport, params: ProtocolParams) -> GapCheck:
    """|Im| against 2D q'^(n-1) and D q'^(n-1)."""
    params.check()
    fractions = lemma_fractions(report, params.D, params.Dprime)
    scale = report.q ** (report.n - 1)
    verdict = _verdict(
        report.image_size > 2 * params.D * scale,
        report.image_size <= params.D * scale,
    )
    return GapCheck(mode="coam", verdict=verdict, fractions=fractions)


# set lowerbound protocol


class SetOracle:
    """
    A set S of indices below 2^bits.

    The prover may enumerate ``members``; the verifier only calls
    ``verify`` on the prover's answer and its certificate.
    """

    def __init__(self, bits: int, members: np.ndarray):
        self.bits = bits
        self.members = np.asarray(members, dtype=np.int64)

    def __len__(self):
        return len(self.members)

    def certify(self, x: int):
        return None

    def verify(self, x: int, certificate) -> bool:
        i = np.searchsorted(self.members, x)
        return bool(i < len(self.members) and self.members[i] == x)


class FiberSet(SetOracle):
    """f^-1(b); membership is tested by evaluation."""

    def __init__(self, inst, qprime, target: int, image: np.ndarray):
        total = len(image)
        super().__init__(
            log2_ceil(total), np.nonzero(image == target)[0]
        )
        self.inst = inst
        self.qprime = qprime
        self.target = target

    def verify(self, x: int, certificate) -> bool:
        return evaluate_index(self.inst, self.qprime, x) == self.target


class ImageSet(SetOracle):
    """Im(f); the certificate of b is a preimage point."""

    def __init__(self, inst, qprime, image: np.ndarray):
        super().__init__(log2_ceil(len(image)), np.unique(image))
        self.inst = inst
        self.qprime = qprime
        self._image = image

    def certify(self, x: int):
        hits = np.nonzero(self._image == x)[0]
        return int(hits[0]) if hits.size else None

    def verify(self, x: int, certificate) -> bool:
        if certificate is None:
            return False
        return evaluate_index(self.inst, self.qprime, certificate) == x


def evaluate_index(inst: Instance, qprime: FieldDesc, index: int) -> int:
    """Index of f(a) for a single domain index, by circuit evaluation."""
    point = [FieldElement(qprime, v) for v in decode(index, qprime.q,
                                                     inst.nvars)]
    values = [eval_generic(c, point).value for c in inst.circuits]
    return encode(values, qprime.q)


class Round(Record):
    """
    One round: the hash h(x) = A x + b over GF(2), the prover's answer and
    the verdict. rows packs A row by row, bit j of a row for input bit j.
    """

    index: int
    ell: int
    rows: Tuple[int, ...]
    offset: int
    accept: bool
    response: Optional[int] = None

    def to_text(self) -> str:
        rows = ",".join(format(r, "x") for r in self.rows)
        response = "-" if self.response is None else str(self.response)
        verdict = "accept" if self.accept else "reject"
        return (
            f"round {self.index}: l={self.ell} A={rows} b={self.offset:x} "
            f"x={response} {verdict}"
        )


def _hash(rows: Tuple[int, ...], offset: int, x: int) -> int:
    value = 0
    for i, row in enumerate(rows):
        bit = (bin(row & x).count("1") + (offset >> i)) & 1
        value |= bit << i
    return value


def gs_round(
    oracle: SetOracle, m: int, rng: np.random.Generator, index: int = 0
) -> Tuple[Round, bool]:
    """
    Draw h with l = ceil(log2(4m)) output bits; the prover answers with
    the first member in index order hashing to zero.
    """
    if m < 1:
        raise ValueError(f"claimed bound must be positive, got {m}")
    ell = log2_ceil(4 * m)
    bits = oracle.bits
    A = rng.integers(0, 2, size=(ell, bits), dtype=np.int64)
    b = rng.integers(0, 2, size=ell, dtype=np.int64)
    rows = tuple(
        int(sum(int(A[i, j]) << j for j in range(bits))) for i in range(ell)
    )
    offset = int(sum(int(b[i]) << i for i in range(ell)))
    members = oracle.members
    h = np.full(members.shape, offset, dtype=np.int64)
    for j in range(bits):
        column = int(sum(int(A[i, j]) << i for i in range(ell)))
        if column:
            h ^= np.where((members >> j) & 1, column, 0)
    hits = np.nonzero(h == 0)[0]
    response = int(members[hits[0]]) if hits.size else None
    accept = False
    if response is not None:
        certificate = oracle.certify(response)
        accept = _hash(rows, offset, response) == 0 and oracle.verify(
            response, certificate
        )
    row = Round(
        index=index,
        ell=ell,
        rows=rows,
        offset=offset,
        response=response,
        accept=accept,
    )
    return row, accept


def acceptance_bounds(m: int) -> Tuple[float, float]:
    """
    (honest lower bound at |S| = 2m, cheating upper bound at |S| = m) for
    one round, by inclusion-exclusion and the union bound.
    """
    size = 2**log2_ceil(4 * m)
    s = 2 * m
    honest = s / size - s * (s - 1) / (2 * size * size)
    cheating = m / size
    return honest, cheating


def acceptance_threshold(m: int) -> float:
    honest, cheating = acceptance_bounds(m)
    return (honest + cheating) / 2


class Transcript(Record):
    mode: Mode
    claimed: int
    set_size: int
    threshold: float
    verdict: Verdict
    rounds: Tuple[Round, ...] = ()
    shortcut: bool = False

    @property
    def accepts(self) -> int:
        return sum(r.accept for r in self.rounds)

    def to_text(self) -> str:
        head = (
            f"{self.mode}-decide: {self.verdict} "
            f"(accepted {self.accepts}/{len(self.rounds)}, "
            f"tau={self.threshold:.4f}, m={self.claimed})"
        )
        if self.shortcut:
            head += " shortcut m > n"
        return "\n".join([head] + [r.to_text() for r in self.rounds])

    def to_row(self) -> dict:
        return {
            "mode": self.mode,
            "verdict": self.verdict,
            "accepts": self.accepts,
            "rounds": len(self.rounds),
            "threshold": self.threshold,
            "claimed": self.claimed,
        }


def run_rounds(
    oracle: SetOracle, m: int, rounds: int, rng: np.random.Generator
) -> Tuple[List[Round], int]:
    played = []
    for t in range(rounds):
        row, _ = gs_round(oracle, m, child_rng(rng, "gs", t), index=t)
        played.append(row)
    return played, sum(r.accept for r in played)


def _prepare(inst, params: ProtocolParams, rng, limits):
    """Square the instance over q' or report the m > n shortcut."""
    params.check()
    reduction = reduce_to_square(
        inst, child_rng(rng, "square"), params.qprime, limits
    )
    return reduction


def am_decide(
    inst: Instance,
    params: ProtocolParams,
    rng: Optional[np.random.Generator] = None,
    limits: Limits = DEFAULT_LIMITS,
) -> Transcript:
    """
    Arthur picks a; Merlin proves |f^-1(f(a))| >= 2D. Dependent iff at
    least tau * t rounds accept.
    """
    if rng is None:
        rng = make_rng(params.seed, "am-decide")
    reduction = _prepare(inst, params, rng, limits)
    threshold = acceptance_threshold(params.D)
    if reduction.shortcut:
        return Transcript(mode="am", claimed=params.D, set_size=0,
                          threshold=threshold, verdict="dependent",
                          shortcut=True)
    square = reduction.instance
    image = image_index(square, params.qprime, limits)
    a = int(child_rng(rng, "arthur").integers(0, len(image)))
    oracle = FiberSet(square, params.qprime, int(image[a]), image)
    logger.debug(f"arthur picked {a}; fiber size {len(oracle)}")
    played, accepts = run_rounds(oracle, params.D, params.rounds, rng)
    verdict = (
        "dependent" if accepts >= threshold * params.rounds
        else "independent"
    )
    logger.info(f"am-decide: {accepts}/{params.rounds} accepted, {verdict}")
    return Transcript(
        mode="am",
        claimed=params.D,
        set_size=len(oracle),
        threshold=threshold,
        rounds=tuple(played),
        verdict=verdict,
    )


def coam_decide(
    inst: Instance,
    params: ProtocolParams,
    rng: Optional[np.random.Generator] = None,
    limits: Limits = DEFAULT_LIMITS,
) -> Transcript:
    """
    Merlin proves |Im(f)| >= 2 D q'^(n-1). Independent iff at least
    tau * t rounds accept.
    """
    if rng is None:
        rng = make_rng(params.seed, "coam-decide")
    reduction = _prepare(inst, params, rng, limits)
    if reduction.shortcut:
        return Transcript(mode="coam", claimed=0, set_size=0,
                          threshold=0.0, verdict="dependent", shortcut=True)
    square = reduction.instance
    claimed = params.D * params.qprime.q ** (square.nvars - 1)
    threshold = acceptance_threshold(claimed)
    image = image_index(square, params.qprime, limits)
    oracle = ImageSet(square, params.qprime, image)
    played, accepts = run_rounds(oracle, claimed, params.rounds, rng)
    verdict = (
        "independent" if accepts >= threshold * params.rounds
        else "dependent"
    )
    logger.info(f"coam-decide: {accepts}/{params.rounds} accepted, {verdict}")
    return Transcript(
        mode="coam",
        claimed=claimed,
        set_size=len(oracle),
        threshold=threshold,
        rounds=tuple(played),
        verdict=verdict,
    )


__all__ = [
    "ProtocolParams",
    "GapReport",
    "Transcript",
    "reduce_to_square",
    "fiber_stats",
    "check_am_gap",
    "check_coam_gap",
    "gs_round",
    "am_decide",
    "coam_decide",
    "lemma_fractions",
]

"""
Hitting sets for a parameterised family through approximate satisfiability.

A family is one circuit Psi(y, x) whose first ``nparams`` variables are the
parameters y and the remaining n are x. A list H of points in F_q^n hits
the family when no nonzero specialisation Psi(a, .) vanishes on all of H.
With r the x-degree of the specialisations and p not dividing r + 1, H
fails to hit iff the system

    x_i^(r+1) - 1,  Psi(y, x) - 1,  Psi(y, v) for v in H

has an approximate solution. The family must be closed under scaling the
parameters by a constant; that is assumed, not checked.
"""

import itertools
import logging
from collections import defaultdict
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import model_validator

from . import exc
from .aps import aps_decide
from .circuit import Circuit, CircuitBuilder, Instance, expand
from .config import DEFAULT_LIMITS, Limits, child_rng
from .field import FieldDesc, FieldElement
from .poly import Monomial, Polynomial
from .types import Record

logger = logging.getLogger(__name__)

Point = Tuple[int, ...]


class HittingInstance(Record):
    """A family together with a candidate list H."""

    family: Instance
    r: int
    points: Tuple[Point, ...] = ()

    @model_validator(mode="after")
    def family_must_be_parameterised(self):
        family = self.family
        if family.m != 1:
            raise ValueError(
                f"a family is one circuit, got {family.m}"
            )
        if not 0 < family.nparams < family.nvars:
            raise ValueError(
                f"need 0 < params < nvars, got {family.nparams} of "
                f"{family.nvars}"
            )
        if self.r < 1:
            raise ValueError(f"degree r must be positive, got {self.r}")
        n, q = self.n, family.field.q
        for v in self.points:
            if len(v) != n:
                raise exc.ArityMismatch(
                    expected=n, got=len(v), where="candidate point"
                )
            if any(not 0 <= c < q for c in v):
                raise ValueError(f"point {v} has entries outside F_{q}")
        return self

    @property
    def field(self) -> FieldDesc:
        return self.family.field

    @property
    def psi(self) -> Circuit:
        return self.family.circuits[0]

    @property
    def s(self) -> int:
        return self.family.nparams

    @property
    def n(self) -> int:
        return self.family.nvars - self.family.nparams

    @property
    def h(self) -> int:
        return len(self.points)

    def with_points(self, points: Sequence[Sequence[int]]):
        return HittingInstance(
            family=self.family,
            r=self.r,
            points=tuple(tuple(int(c) for c in v) for v in points),
        )

    def to_text(self) -> str:
        return format_candidates(self.field, self.points)

    def to_row(self) -> dict:
        return {"n": self.n, "params": self.s, "r": self.r, "h": self.h}


class CriterionSystem(Record):
    instance: Instance
    n: int
    s: int
    h: int

    def to_text(self) -> str:
        return self.instance.to_text()

    def to_row(self) -> dict:
        return {"n": self.n, "params": self.s, "h": self.h,
                "m": self.instance.m}


class DensityReport(Record):
    samples: int
    certified: int
    h: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.certified, self.samples or 1)

    def to_text(self) -> str:
        return (
            f"{self.certified} of {self.samples} random candidates of size "
            f"{self.h} certified ({float(self.fraction):.3f})"
        )


def hardwire(
    psi: Circuit,
    nparams: int,
    point: Sequence[int],
    nvars: Optional[int] = None,
) -> Circuit:
    """
    Psi(y, point) as a circuit reading only the parameters. It has
    ``nvars`` variables, default ``nparams``; the extra ones are unused.
    """
    nvars = nparams if nvars is None else nvars
    b = CircuitBuilder(psi.field, nvars, f"{psi.name}@{_label(point)}")
    inputs = {i: b.var(i) for i in range(1, nparams + 1)}
    for j, c in enumerate(point, start=nparams + 1):
        inputs[j] = b.const(FieldElement(psi.field, c))
    return b.build(b.inline(psi, inputs))


def build_criterion(hi: HittingInstance) -> CriterionSystem:
    field, n, s, r = hi.field, hi.n, hi.s, hi.r
    if (r + 1) % field.p == 0:
        raise exc.CharDividesOrder(p=field.p, order=r + 1)
    nvars = s + n
    circuits = []
    for i in range(1, n + 1):
        b = CircuitBuilder(field, nvars, f"x{i}^{r + 1}-1")
        power = b.pow(b.var(s + i), r + 1)
        circuits.append(b.build(b.sub(power, b.const(1))))
    b = CircuitBuilder(field, nvars, f"{hi.psi.name}-1")
    identity = {i: b.var(i) for i in range(1, nvars + 1)}
    circuits.append(b.build(b.sub(b.inline(hi.psi, identity), b.const(1))))
    circuits.extend(hardwire(hi.psi, s, v, nvars) for v in hi.points)
    inst = Instance(field=field, nvars=nvars, circuits=tuple(circuits))
    logger.debug(f"criterion system: {inst.m} circuits in {nvars} vars")
    return CriterionSystem(instance=inst, n=n, s=s, h=hi.h)


def certify(
    hi: HittingInstance,
    rng: np.random.Generator,
    trials: int = 8,
    limits: Limits = DEFAULT_LIMITS,
    refute: bool = True,
) -> bool:
    """
    True iff the criterion system is not approximately satisfiable, i.e. H
    hits the family. With ``refute`` an exact counterexample found by
    scanning the parameters settles a no first.
    """
    system = build_criterion(hi)
    if refute and hi.field.q**hi.s <= limits.max_parameter_points:
        y = brute_counterexample(hi, limits)
        if y is not None:
            logger.info(f"parameters {y} vanish on the candidate")
            return False
    verdict = aps_decide(system.instance, rng, trials, limits)
    logger.info(f"candidate of size {hi.h}: {verdict.to_text()}")
    return not verdict.answer


def search(
    family: Instance,
    r: int,
    h: int,
    rng: np.random.Generator,
    budget: int = 10,
    trials: int = 8,
    limits: Limits = DEFAULT_LIMITS,
    exhaustive: bool = False,
) -> HittingInstance:
    """First certified candidate, random by default or in index order."""
    base = HittingInstance(family=family, r=r)
    if h == 0:
        raise exc.NotFound(tried=0, reason="an empty set hits nothing")
    if exhaustive:
        candidates = _all_candidates(base, h, limits)
    else:
        candidates = _random_candidates(base, h, rng, budget)
    tried = 0
    for index, points in enumerate(candidates):
        tried += 1
        hi = base.with_points(points)
        if certify(hi, child_rng(rng, "certify", index), trials, limits):
            logger.info(f"candidate {index} certified")
            return hi
    raise exc.NotFound(tried=tried, reason=f"no certified set of size {h}")


def _random_candidates(base: HittingInstance, h, rng, budget):
    q, n = base.field.q, base.n
    for c in range(budget):
        draw = child_rng(rng, "candidate", c)
        yield [decode_point(int(draw.integers(0, q**n)), q, n)
               for _ in range(h)]


def _all_candidates(base: HittingInstance, h: int, limits: Limits):
    q, n = base.field.q, base.n
    limits.check("max_sweep", q ** (n * h))
    for indices in itertools.combinations(range(q**n), h):
        yield [decode_point(i, q, n) for i in indices]


def decode_point(index: int, q: int, n: int) -> Point:
    """Coordinate i is digit i of ``index`` in base q, lowest first."""
    point = []
    for _ in range(n):
        index, digit = divmod(index, q)
        point.append(digit)
    return tuple(point)


def _split(poly: Polynomial, s: int) -> Dict[Monomial, Dict[Monomial, int]]:
    """x-monomial -> its coefficient as a y-polynomial."""
    grouped: Dict[Monomial, Dict[Monomial, int]] = defaultdict(dict)
    for monomial, c in poly.terms.items():
        grouped[monomial[s:]][monomial[:s]] = c
    return grouped


def _evaluate(field: FieldDesc, terms: Dict[Monomial, int], point):
    total = 0
    for monomial, c in terms.items():
        value = c
        for a, k in zip(point, monomial):
            if k:
                value = field.mul(value, field.pow(a, k))
        total = field.add(total, value)
    return total


def brute_counterexample(
    hi: HittingInstance, limits: Limits = DEFAULT_LIMITS
) -> Optional[Point]:
    """
    First parameter point, lexicographically, whose specialisation is a
    nonzero polynomial vanishing on every point of H.
    """
    field, s = hi.field, hi.s
    limits.check("max_parameter_points", field.q**s)
    grouped = _split(expand(hi.psi, limits), s)
    for y in itertools.product(range(field.q), repeat=s):
        coefficients = {
            x: _evaluate(field, terms, y) for x, terms in grouped.items()
        }
        coefficients = {x: c for x, c in coefficients.items() if c}
        if not coefficients:
            continue
        if all(not _evaluate(field, coefficients, v) for v in hi.points):
            return y
    return None


def is_homogeneous(family: Instance, r: int,
                   limits: Limits = DEFAULT_LIMITS) -> bool:
    """Whether every term of the expanded family has x-degree r."""
    s = family.nparams
    poly = expand(family.circuits[0], limits)
    return all(sum(m[s:]) == r for m in poly.terms)


def hitting_density(
    family: Instance,
    r: int,
    h: int,
    rng: np.random.Generator,
    samples: int = 20,
    trials: int = 8,
    limits: Limits = DEFAULT_LIMITS,
) -> DensityReport:
    """How many random candidates of size h certify."""
    base = HittingInstance(family=family, r=r)
    certified = 0
    candidates = _random_candidates(base, h, rng, samples)
    for index, points in enumerate(candidates):
        hi = base.with_points(points)
        if certify(hi, child_rng(rng, "certify", index), trials, limits):
            certified += 1
    report = DensityReport(samples=samples, certified=certified, h=h)
    logger.info(report.to_text())
    return report


# candidate files


def _label(point: Sequence[int]) -> str:
    return "(" + ";".join(str(c) for c in point) + ")"


def format_candidates(field: FieldDesc, points: Sequence[Point]) -> str:
    sep = ", " if field.e == 1 else " "
    return "".join(
        sep.join(field.format(c) for c in v) + "\n" for v in points
    )


def parse_candidates(text: str, field: FieldDesc, n: int) -> List[Point]:
    """
    One point per line. Over a prime field the coordinates are separated
    by commas; over an extension by whitespace, each a ``c0,c1,...``
    constant.
    """
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if field.e == 1:
            tokens = [t for t in line.replace(",", " ").split() if t]
        else:
            tokens = line.split()
        if len(tokens) != n:
            raise exc.InstanceSyntaxError(
                line=lineno, error=f"expected {n} coordinates, got "
                f"{len(tokens)}"
            )
        try:
            points.append(tuple(field.parse(t) for t in tokens))
        except (ValueError, exc.ArityMismatch) as e:
            raise exc.InstanceSyntaxError(line=lineno, error=str(e))
    return points


def load_candidates(
    path: Union[str, Path], field: FieldDesc, n: int
) -> List[Point]:
    return parse_candidates(Path(path).read_text(), field, n)

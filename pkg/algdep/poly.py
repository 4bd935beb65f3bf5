"""
Sparse multivariate polynomials over a FieldDesc.

Terms map an exponent tuple to a nonzero encoded field integer. Monomials
are ordered graded-lex: by total degree, then lexicographically on the
exponent tuple, so x2 < x1 in two variables.
"""

import logging
import math
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from . import exc
from .config import DEFAULT_LIMITS, Limits
from .field import FieldDesc, FieldElement

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]


def _scalar(field: FieldDesc, c) -> int:
    """Encoded value of a constant; plain ints live in the prime subfield."""
    if isinstance(c, FieldElement):
        if c.field is not field and c.field != field:
            raise exc.FieldMismatch(c.field, field)
        return c.value
    if isinstance(c, int):
        return c % field.p
    raise TypeError(f"constant must be int or FieldElement, got {c!r}")


def monomial_key(monomial: Monomial):
    return (sum(monomial), monomial)


def _compositions(nvars: int, degree: int) -> Iterable[Monomial]:
    if nvars == 1:
        yield (degree,)
        return
    for first in range(degree + 1):
        for rest in _compositions(nvars - 1, degree - first):
            yield (first,) + rest


def monomials_up_to(
    nvars: int, d: int, limits: Limits = DEFAULT_LIMITS
) -> List[Monomial]:
    """All monomials of total degree at most d, ascending graded-lex."""
    if nvars < 1 or d < 0:
        raise ValueError(f"need nvars >= 1 and d >= 0, got {nvars}, {d}")
    limits.check("max_monomials", math.comb(nvars + d, d))
    monomials = []
    for degree in range(d + 1):
        monomials.extend(sorted(_compositions(nvars, degree)))
    return monomials


class Polynomial:
    """
    Immutable sparse polynomial in ``nvars`` variables over ``field``.

    No zero coefficient is ever stored, so two polynomials are equal iff
    their term maps are.
    """

    __slots__ = ("field", "nvars", "terms")

    def __init__(
        self,
        field: FieldDesc,
        nvars: int,
        terms: Mapping[Monomial, int] = (),
    ):
        clean = {}
        for monomial, c in dict(terms).items():
            if isinstance(c, FieldElement):
                c = c.value
            if len(monomial) != nvars:
                raise exc.ArityMismatch(
                    expected=nvars, got=len(monomial), where="monomial"
                )
            if c:
                clean[tuple(monomial)] = c
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise TypeError("Polynomial is immutable")

    @classmethod
    def _trusted(cls, field, nvars, terms: Dict[Monomial, int]):
        obj = cls.__new__(cls)
        object.__setattr__(obj, "field", field)
        object.__setattr__(obj, "nvars", nvars)
        object.__setattr__(obj, "terms", terms)
        return obj

    @classmethod
    def zero(cls, field: FieldDesc, nvars: int) -> "Polynomial":
        return cls._trusted(field, nvars, {})

    @classmethod
    def constant(cls, field: FieldDesc, nvars: int, c) -> "Polynomial":
        return cls(field, nvars, {(0,) * nvars: _scalar(field, c)})

    @classmethod
    def variable(cls, field: FieldDesc, nvars: int, i: int) -> "Polynomial":
        """The variable x_i, 1-based."""
        if not 1 <= i <= nvars:
            raise exc.ArityMismatch(expected=nvars, got=i, where="variable")
        monomial = tuple(1 if j == i - 1 else 0 for j in range(nvars))
        return cls._trusted(field, nvars, {monomial: 1})

    # structure

    def __iter__(self):
        for monomial in sorted(self.terms, key=monomial_key, reverse=True):
            yield monomial, FieldElement(self.field, self.terms[monomial])

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and self.field == other.field
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def coefficient(self, monomial: Monomial) -> FieldElement:
        return FieldElement(self.field, self.terms.get(tuple(monomial), 0))

    def constant_term(self) -> FieldElement:
        return self.coefficient((0,) * self.nvars)

    def total_degree(self) -> int:
        """Largest term degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(monomial) for monomial in self.terms)

    def leading_monomial(self) -> Monomial:
        if not self.terms:
            raise ValueError("zero polynomial has no leading monomial")
        return max(self.terms, key=monomial_key)

    def leading_coefficient(self) -> FieldElement:
        return self.coefficient(self.leading_monomial())

    def is_constant(self) -> bool:
        return self.total_degree() <= 0

    def monic(self) -> "Polynomial":
        """Scale so the graded-lex leading coefficient is 1."""
        return self.scale(self.leading_coefficient().inv())

    # arithmetic

    def _check(self, other: "Polynomial"):
        if self.nvars != other.nvars:
            raise exc.ArityMismatch(
                expected=self.nvars, got=other.nvars, where="polynomial"
            )
        if self.field is not other.field and self.field != other.field:
            raise exc.FieldMismatch(self.field, other.field)

    def _lift(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, FieldElement)):
            return Polynomial.constant(self.field, self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        add = self.field.add
        terms = dict(self.terms)
        for monomial, c in other.terms.items():
            value = add(terms.get(monomial, 0), c)
            if value:
                terms[monomial] = value
            else:
                terms.pop(monomial, None)
        return Polynomial._trusted(self.field, self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        neg = self.field.neg
        terms = {m: neg(c) for m, c in self.terms.items()}
        return Polynomial._trusted(self.field, self.nvars, terms)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        field = self.field
        add, mul = field.add, field.mul
        terms: Dict[Monomial, int] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                monomial = tuple(a + b for a, b in zip(m1, m2))
                terms[monomial] = add(terms.get(monomial, 0), mul(c1, c2))
        terms = {m: c for m, c in terms.items() if c}
        return Polynomial._trusted(field, self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial.constant(self.field, self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c) -> "Polynomial":
        c = _scalar(self.field, c)
        mul = self.field.mul
        terms = {m: mul(v, c) for m, v in self.terms.items()} if c else {}
        return Polynomial._trusted(self.field, self.nvars, terms)

    # evaluation and substitution

    def eval(self, point: Sequence) -> FieldElement:
        """Exact value at a point of the field (or an extension of it)."""
        if len(point) != self.nvars:
            raise exc.ArityMismatch(
                expected=self.nvars, got=len(point), where="eval"
            )
        fields = [v.field for v in point if isinstance(v, FieldElement)]
        target = max(fields + [self.field], key=lambda f: f.q)
        values = []
        for v in point:
            if isinstance(v, FieldElement):
                values.append(v.field.embedding(target)(v.value))
            else:
                values.append(int(v))
        embed = self.field.embedding(target)
        add, mul, pow_ = target.add, target.mul, target.pow
        total = 0
        for monomial, c in self.terms.items():
            term = embed(c)
            for v, k in zip(values, monomial):
                if k:
                    term = mul(term, pow_(v, k))
            total = add(total, term)
        return FieldElement(target, total)

    def compose(
        self,
        values: Sequence["Polynomial"],
        limits: Limits = DEFAULT_LIMITS,
    ) -> "Polynomial":
        """Substitute ``values[i]`` for variable i+1."""
        if len(values) != self.nvars:
            raise exc.ArityMismatch(
                expected=self.nvars, got=len(values), where="compose"
            )
        if not values:
            return self
        target_nvars = values[0].nvars
        result = Polynomial.zero(self.field, target_nvars)
        powers: Dict[Tuple[int, int], Polynomial] = {}

        def power(i, k):
            if (i, k) not in powers:
                powers[(i, k)] = values[i] ** k
            return powers[(i, k)]

        for monomial, c in self.terms.items():
            term = Polynomial.constant(self.field, target_nvars, c)
            for i, k in enumerate(monomial):
                if k:
                    term = term * power(i, k)
                    limits.check("max_terms", len(term.terms))
            result = result + term
            limits.check("max_terms", len(result.terms))
        return result

    def partial(self, i: int) -> "Polynomial":
        """Formal derivative with respect to x_i, 1-based."""
        if not 1 <= i <= self.nvars:
            raise exc.ArityMismatch(expected=self.nvars, got=i, where="d/dx")
        idx = i - 1
        field = self.field
        terms: Dict[Monomial, int] = {}
        for monomial, c in self.terms.items():
            k = monomial[idx]
            if k == 0:
                continue
            value = field.mul(c, k % field.p)
            if value:
                lowered = list(monomial)
                lowered[idx] -= 1
                terms[tuple(lowered)] = value
        return Polynomial._trusted(field, self.nvars, terms)

    def embed(self, target: FieldDesc) -> "Polynomial":
        embed = self.field.embedding(target)
        terms = {m: embed(c) for m, c in self.terms.items()}
        return Polynomial._trusted(target, self.nvars, terms)

    # text

    def to_text(self, var: str = "x") -> str:
        """Terms in descending graded-lex, e.g. ``1*y1^2 + 6*y3``."""
        if not self.terms:
            return "0"
        parts = []
        for monomial, c in self:
            factors = []
            for i, k in enumerate(monomial, start=1):
                if k == 1:
                    factors.append(f"{var}{i}")
                elif k > 1:
                    factors.append(f"{var}{i}^{k}")
            coeff = self.field.format(c.value)
            if self.field.e > 1:
                coeff = f"({coeff})"
            parts.append("*".join([coeff] + factors))
        return " + ".join(parts)

    def __repr__(self):
        return f"Polynomial({self.to_text()})"

    __str__ = to_text


def poly_arith(a: Polynomial, b, op: str) -> Polynomial:
    """Dispatch add, sub, mul, or scale (b a field constant)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "scale":
        return a.scale(b)
    raise ValueError(f"unknown polynomial operation {op!r}")


def total_degree(p: Polynomial) -> int:
    return p.total_degree()


def eval_poly(p: Polynomial, point: Sequence) -> FieldElement:
    return p.eval(point)


def variables(field: FieldDesc, nvars: int) -> List[Polynomial]:
    return [Polynomial.variable(field, nvars, i) for i in range(1, nvars + 1)]


def product_of(items: Iterable[Polynomial], field, nvars) -> Polynomial:
    result = Polynomial.constant(field, nvars, 1)
    for item in items:
        result = result * item
    return result


def from_dense(
    field: FieldDesc, nvars: int, monomials: Sequence[Monomial], column
) -> Polynomial:
    """Polynomial with coefficient ``column[j]`` on ``monomials[j]``."""
    return Polynomial(field, nvars, dict(zip(monomials, column)))


__all__ = [
    "Monomial",
    "Polynomial",
    "monomial_key",
    "monomials_up_to",
    "poly_arith",
    "total_degree",
    "eval_poly",
    "variables",
]

"""
Finite Laurent polynomials in a formal variable eps, and witnesses.

A witness assigns a Laurent polynomial to every variable; it is an
approximate solution when every circuit lands in the ideal eps*F[eps].
"""

import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

from pydantic import model_validator

from . import exc
from .circuit import CircuitBuilder, Instance
from .field import FieldDesc, FieldElement, mk_field
from .types import Record

logger = logging.getLogger(__name__)


class LaurentPoly:
    """Immutable map exponent -> nonzero encoded coefficient."""

    __slots__ = ("field", "terms")

    def __init__(self, field: FieldDesc, terms: Mapping[int, int] = ()):
        clean = {}
        for k, c in dict(terms).items():
            if isinstance(c, FieldElement):
                c = c.value
            if c:
                clean[int(k)] = c
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise TypeError("LaurentPoly is immutable")

    @classmethod
    def _trusted(cls, field, terms):
        obj = cls.__new__(cls)
        object.__setattr__(obj, "field", field)
        object.__setattr__(obj, "terms", terms)
        return obj

    @classmethod
    def constant(cls, field: FieldDesc, c) -> "LaurentPoly":
        if isinstance(c, FieldElement):
            c = c.value
        else:
            c = int(c) % field.p
        return cls(field, {0: c})

    @classmethod
    def eps(cls, field: FieldDesc, k: int = 1, c=1) -> "LaurentPoly":
        """The monomial c * eps^k."""
        if not isinstance(c, FieldElement):
            c = FieldElement(field, int(c) % field.p)
        return cls(field, {k: c.value})

    def lift_constant(self, source: FieldDesc, c: int) -> "LaurentPoly":
        """Constant of ``source`` carried into this polynomial's field."""
        value = source.embedding(self.field)(c)
        return LaurentPoly._trusted(self.field, {0: value} if value else {})

    # structure

    def valuation(self) -> Optional[int]:
        """Least exponent; None for zero."""
        return min(self.terms) if self.terms else None

    def top_degree(self) -> Optional[int]:
        """Largest exponent; None for zero."""
        return max(self.terms) if self.terms else None

    def coefficient(self, k: int) -> FieldElement:
        return FieldElement(self.field, self.terms.get(k, 0))

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentPoly.constant(self.field, other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.field == other.field and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # arithmetic

    def _lift(self, other):
        if isinstance(other, LaurentPoly):
            if other.field is not self.field and other.field != self.field:
                raise exc.FieldMismatch(self.field, other.field)
            return other
        if isinstance(other, (int, FieldElement)):
            return LaurentPoly.constant(self.field, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        add = self.field.add
        terms = dict(self.terms)
        for k, c in other.terms.items():
            value = add(terms.get(k, 0), c)
            if value:
                terms[k] = value
            else:
                terms.pop(k, None)
        return LaurentPoly._trusted(self.field, terms)

    __radd__ = __add__

    def __neg__(self):
        neg = self.field.neg
        terms = {k: neg(c) for k, c in self.terms.items()}
        return LaurentPoly._trusted(self.field, terms)

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
        add, mul = self.field.add, self.field.mul
        terms: Dict[int, int] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = k1 + k2
                terms[k] = add(terms.get(k, 0), mul(c1, c2))
        terms = {k: c for k, c in terms.items() if c}
        return LaurentPoly._trusted(self.field, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LaurentPoly":
        if k < 0:
            if len(self.terms) != 1:
                raise exc.DivisionByZero(
                    "only a monomial has a Laurent polynomial inverse"
                )
            ((exp, c),) = self.terms.items()
            inverse = LaurentPoly._trusted(
                self.field, {-exp: self.field.inv(c)}
            )
            return inverse**-k
        result = LaurentPoly.constant(self.field, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    pow = __pow__

    # text

    def to_text(self) -> str:
        """Witness file tokens ``exp:coeffs`` in ascending exponent."""
        return " ".join(
            f"{k}:{self.field.format(self.terms[k])}"
            for k in sorted(self.terms)
        )

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms):
            c = self.field.format(self.terms[k])
            parts.append(c if k == 0 else f"{c}*eps^{k}")
        return " + ".join(parts)


def laurent_arith(a: LaurentPoly, b, op: str) -> LaurentPoly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown Laurent operation {op!r}")


def valuation(a: LaurentPoly) -> Optional[int]:
    return a.valuation()


def top_degree(a: LaurentPoly) -> Optional[int]:
    return a.top_degree()


def in_eps_ideal(a: LaurentPoly) -> bool:
    """True iff every exponent is at least 1; zero is in the ideal."""
    return all(k >= 1 for k in a.terms)


def eps_zero_value(a: LaurentPoly) -> FieldElement:
    """The value at eps = 0; only defined without negative powers."""
    v = a.valuation()
    if v is not None and v < 0:
        raise exc.NegativeValuation(v)
    return a.coefficient(0)


def eps_degree_bounds(inst: Instance) -> Tuple[int, int]:
    """
    (D, D') with D the product of the syntactic degrees and D' the largest
    degree times D. Witness coordinates may be searched in the window
    eps^-D .. eps^D'.
    """
    degrees = inst.degrees
    for c, degree in zip(inst.circuits, degrees):
        if degree == 0:
            raise exc.ConstantCircuit(c.name)
    D = inst.D
    return D, inst.Dprime * D


class Witness(Record):
    field: FieldDesc
    coords: Tuple[LaurentPoly, ...]

    @model_validator(mode="after")
    def coords_must_share_field(self):
        for a in self.coords:
            if a.field != self.field:
                raise ValueError(f"coordinate over {a.field!r}, expected "
                                 f"{self.field!r}")
        return self

    @classmethod
    def constant(cls, field: FieldDesc, point: Sequence) -> "Witness":
        """The eps-free witness of an exact point."""
        return cls(
            field=field,
            coords=tuple(LaurentPoly.constant(field, v) for v in point),
        )

    @property
    def n(self) -> int:
        return len(self.coords)

    def window(self) -> Tuple[int, int]:
        """(least exponent, largest exponent) over all coordinates."""
        lows = [a.valuation() for a in self.coords if a]
        highs = [a.top_degree() for a in self.coords if a]
        return min(lows, default=0), max(highs, default=0)

    def respects(self, D: int, Dprime: int) -> bool:
        low, high = self.window()
        return low >= -D and high <= Dprime

    def to_text(self) -> str:
        lines = []
        for i, a in enumerate(self.coords, start=1):
            body = a.to_text()
            lines.append(f"x{i} : {body}" if body else f"x{i} :")
        return "\n".join(lines) + "\n"

    def to_row(self) -> dict:
        low, high = self.window()
        return {"field": repr(self.field), "n": self.n, "low": low,
                "high": high}


def parse_witness(text: str, field: FieldDesc, nvars: int) -> Witness:
    coords: Dict[int, LaurentPoly] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, body = line.partition(":")
        head = head.strip()
        if not sep or not head.startswith("x"):
            raise exc.InstanceSyntaxError(
                line=lineno, error="expected 'x<i> : <exp>:<coeffs> ...'"
            )
        try:
            index = int(head[1:])
        except ValueError:
            raise exc.InstanceSyntaxError(
                line=lineno, error=f"bad variable {head!r}"
            )
        if not 1 <= index <= nvars or index in coords:
            raise exc.InstanceSyntaxError(
                line=lineno, error=f"variable {head} out of range or repeated"
            )
        terms: Dict[int, int] = {}
        for token in body.split():
            exp, sep, digits = token.partition(":")
            try:
                k = int(exp)
            except ValueError:
                raise exc.InstanceSyntaxError(
                    line=lineno, error=f"bad exponent in {token!r}"
                )
            if not sep:
                raise exc.InstanceSyntaxError(
                    line=lineno, error=f"expected exp:coeffs, got {token!r}"
                )
            try:
                value = field.parse(digits)
            except exc.ArityMismatch:
                raise exc.FieldMismatch(f"coefficient {digits}", field)
            except ValueError as e:
                raise exc.InstanceSyntaxError(line=lineno, error=str(e))
            terms[k] = field.add(terms.get(k, 0), value)
        coords[index] = LaurentPoly(field, terms)
    missing = [i for i in range(1, nvars + 1) if i not in coords]
    if missing:
        raise exc.ArityMismatch(
            expected=nvars, got=nvars - len(missing), where="witness"
        )
    return Witness(
        field=field, coords=tuple(coords[i] for i in range(1, nvars + 1))
    )


def load_witness(
    path: Union[str, Path], field: FieldDesc, nvars: int
) -> Witness:
    return parse_witness(Path(path).read_text(), field, nvars)


def remark_family(
    d: int, n: int, field: Optional[FieldDesc] = None
) -> Tuple[Instance, Witness]:
    """
    The family X1, X1, X1^(d-1) X2 - 1, X_{i-2}^d - X_{i-1} (i = 4..n+1)
    and its exact approximate solution x1 = eps, x2 = eps^-(d-1),
    x_j = x_{j-1}^d. The least exponent of the witness is -(d-1) d^(n-2),
    so the lower end of the eps window cannot be much tighter than -D.
    """
    if d < 2 or n < 2:
        raise ValueError(f"need d >= 2 and n >= 2, got d={d}, n={n}")
    field = field or mk_field(7)
    circuits = []
    for name in ("f1", "f2"):
        b = CircuitBuilder(field, n, name)
        circuits.append(b.build(b.var(1)))
    b = CircuitBuilder(field, n, "f3")
    lead = b.mul(b.pow(b.var(1), d - 1), b.var(2))
    circuits.append(b.build(b.sub(lead, b.const(1))))
    for i in range(4, n + 2):
        b = CircuitBuilder(field, n, f"f{i}")
        circuits.append(
            b.build(b.sub(b.pow(b.var(i - 2), d), b.var(i - 1)))
        )
    inst = Instance(field=field, nvars=n, circuits=tuple(circuits))
    coords = [LaurentPoly.eps(field, 1), LaurentPoly.eps(field, -(d - 1))]
    for _ in range(3, n + 1):
        coords.append(coords[-1] ** d)
    witness = Witness(field=field, coords=tuple(coords))
    logger.debug(f"remark family d={d} n={n} window {witness.window()}")
    return inst, witness

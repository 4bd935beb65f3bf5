"""
Algebraic circuits and the instance file format.

A circuit is a list of gates in topological order. Every gate refers only
to gates with smaller ids, so evaluation is a single forward pass with a
memo keyed by gate id.
"""

import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence
from typing import Tuple, Union

import numpy as np
import pydantic
from pydantic import ConfigDict, Field, model_validator
from typing_extensions import Annotated

from . import exc
from .config import DEFAULT_LIMITS, Limits
from .field import FieldDesc, FieldElement, mk_field
from .poly import Polynomial
from .types import Record

logger = logging.getLogger(__name__)

GateKind = Literal["var", "const", "add", "mul"]


class Gate(pydantic.BaseModel):
    """
    One gate.

    args holds the 1-based variable index for ``var``, the encoded field
    value for ``const`` and the two operand ids for ``add`` and ``mul``.
    """

    id: Annotated[int, Field(ge=1)]
    kind: GateKind
    args: Tuple[int, ...]

    model_config = ConfigDict(extra="forbid", frozen=True)


class Circuit(pydantic.BaseModel):
    name: str = "f"
    field: FieldDesc
    nvars: Annotated[int, Field(ge=0)]
    gates: Tuple[Gate, ...]
    output: int

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="after")
    def gates_must_form_a_dag(self):
        if not self.gates:
            raise ValueError(f"circuit {self.name} has no gates")
        seen = set()
        last = 0
        for gate in self.gates:
            if gate.id <= last:
                raise ValueError(f"gate ids must increase, got {gate.id}")
            last = gate.id
            if gate.kind == "var":
                index = gate.args[0] if len(gate.args) == 1 else 0
                if not 1 <= index <= self.nvars:
                    raise ValueError(f"gate {gate.id}: bad variable index")
            elif gate.kind == "const":
                value = gate.args[0] if len(gate.args) == 1 else -1
                if not 0 <= value < self.field.q:
                    raise ValueError(f"gate {gate.id}: bad constant")
            else:
                if len(gate.args) != 2 or not seen.issuperset(gate.args):
                    raise ValueError(f"gate {gate.id}: undefined operand")
            seen.add(gate.id)
        if self.output not in seen:
            raise ValueError(f"output {self.output} is not a gate")
        return self

    def __len__(self):
        return len(self.gates)

    def gate(self, gid: int) -> Gate:
        for gate in self.gates:
            if gate.id == gid:
                return gate
        raise KeyError(gid)

    def live_gates(self) -> List[Gate]:
        """Gates the output depends on, in order."""
        by_id = {gate.id: gate for gate in self.gates}
        live = {self.output}
        for gate in reversed(self.gates):
            if gate.id in live and gate.kind in ("add", "mul"):
                live.update(gate.args)
        return [by_id[gid] for gid in sorted(live)]

    def rename(self, name: str) -> "Circuit":
        return self.model_copy(update={"name": name})


class Instance(Record):
    """
    A named list of circuits over one field.

    nparams marks the first ``nparams`` variables as parameters; it is 0
    for ordinary instances and s' for parameterized families.
    """

    field: FieldDesc
    nvars: Annotated[int, Field(ge=0)]
    circuits: Tuple[Circuit, ...] = ()
    nparams: Annotated[int, Field(ge=0)] = 0

    @model_validator(mode="after")
    def circuits_must_match(self):
        for c in self.circuits:
            if c.nvars != self.nvars:
                raise ValueError(f"circuit {c.name} has {c.nvars} variables, "
                                 f"instance has {self.nvars}")
            if c.field != self.field:
                raise ValueError(f"circuit {c.name} is over {c.field!r}")
        if self.nparams > self.nvars:
            raise ValueError("more parameters than variables")
        return self

    @property
    def m(self) -> int:
        return len(self.circuits)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(c.name for c in self.circuits)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(syntactic_degree(c) for c in self.circuits)

    @property
    def D(self) -> int:
        """Product of the syntactic degrees."""
        return math.prod(self.degrees)

    @property
    def Dprime(self) -> int:
        """Largest syntactic degree."""
        return max(self.degrees, default=0)

    def subset(self, indices: Sequence[int]) -> "Instance":
        return self.model_copy(
            update={"circuits": tuple(self.circuits[i] for i in indices)}
        )

    def with_circuits(self, circuits: Sequence[Circuit]) -> "Instance":
        return self.model_copy(update={"circuits": tuple(circuits)})

    def to_text(self) -> str:
        return serialize(self)

    def to_row(self) -> dict:
        return {
            "field": repr(self.field),
            "nvars": self.nvars,
            "m": self.m,
            "D": self.D,
            "Dprime": self.Dprime,
        }


# builder


class CircuitBuilder:
    """
    Append-only gate list; every method returns the new gate id.

    >>> b = CircuitBuilder(mk_field(7), 2)
    >>> c = b.build(b.sub(b.mul(b.var(1), b.var(2)), b.const(1)))
    """

    def __init__(self, field: FieldDesc, nvars: int, name: str = "f"):
        self.field = field
        self.nvars = nvars
        self.name = name
        self._gates: List[Gate] = []
        self._consts: Dict[int, int] = {}
        self._vars: Dict[int, int] = {}

    def _push(self, kind, args) -> int:
        gid = len(self._gates) + 1
        self._gates.append(Gate(id=gid, kind=kind, args=tuple(args)))
        return gid

    def var(self, i: int) -> int:
        if i not in self._vars:
            self._vars[i] = self._push("var", (i,))
        return self._vars[i]

    def const(self, value) -> int:
        if isinstance(value, FieldElement):
            value = value.value
        else:
            value = int(value) % self.field.p
        if value not in self._consts:
            self._consts[value] = self._push("const", (value,))
        return self._consts[value]

    def add(self, left: int, right: int) -> int:
        return self._push("add", (left, right))

    def mul(self, left: int, right: int) -> int:
        return self._push("mul", (left, right))

    def neg(self, gid: int) -> int:
        return self.mul(self.const(-1), gid)

    def sub(self, left: int, right: int) -> int:
        return self.add(left, self.neg(right))

    def sum(self, gids: Sequence[int]) -> int:
        if not gids:
            return self.const(0)
        total = gids[0]
        for gid in gids[1:]:
            total = self.add(total, gid)
        return total

    def pow(self, gid: int, k: int) -> int:
        """Square-and-multiply power gate."""
        if k < 0:
            raise ValueError("negative exponent")
        if k == 0:
            return self.const(1)
        result = None
        base = gid
        while k:
            if k & 1:
                result = base if result is None else self.mul(result, base)
            k >>= 1
            if k:
                base = self.mul(base, base)
        return result

    def inline(self, circuit: Circuit, inputs: Dict[int, int]) -> int:
        """
        Copy the live gates of ``circuit``, reading variable i from gate
        ``inputs[i]``. Returns the id holding the copied output.
        """
        if circuit.field != self.field:
            embed = circuit.field.embedding(self.field)
        else:
            embed = None
        mapping: Dict[int, int] = {}
        for gate in circuit.live_gates():
            if gate.kind == "var":
                mapping[gate.id] = inputs[gate.args[0]]
            elif gate.kind == "const":
                value = gate.args[0]
                if embed is not None:
                    value = embed(value)
                mapping[gate.id] = self.const(FieldElement(self.field, value))
            elif gate.kind == "add":
                left, right = gate.args
                mapping[gate.id] = self.add(mapping[left], mapping[right])
            else:
                left, right = gate.args
                mapping[gate.id] = self.mul(mapping[left], mapping[right])
        return mapping[circuit.output]

    def build(self, output: int, name: Optional[str] = None) -> Circuit:
        return _compact(
            self.field, self.nvars, self._gates, output, name or self.name
        )


def _compact(field, nvars, gates, output, name) -> Circuit:
    """Drop dead gates and renumber the rest 1, 2, ..."""
    live = {output}
    for gate in reversed(gates):
        if gate.id in live and gate.kind in ("add", "mul"):
            live.update(gate.args)
    renumber = {}
    kept = []
    for gate in gates:
        if gate.id not in live:
            continue
        gid = len(kept) + 1
        renumber[gate.id] = gid
        args = gate.args
        if gate.kind in ("add", "mul"):
            args = tuple(renumber[a] for a in args)
        kept.append(Gate(id=gid, kind=gate.kind, args=args))
    return Circuit(
        name=name,
        field=field,
        nvars=nvars,
        gates=tuple(kept),
        output=renumber[output],
    )


def constant_circuit(field: FieldDesc, nvars: int, value, name="f"):
    b = CircuitBuilder(field, nvars, name)
    return b.build(b.const(value))


def variable_circuit(field: FieldDesc, nvars: int, i: int, name="f"):
    b = CircuitBuilder(field, nvars, name)
    return b.build(b.var(i))


def from_polynomial(poly: Polynomial, name: str = "f") -> Circuit:
    """Sum-of-monomials circuit computing ``poly``."""
    b = CircuitBuilder(poly.field, poly.nvars, name)
    terms = []
    for monomial, c in poly:
        gid = None
        for i, k in enumerate(monomial, start=1):
            if k:
                power = b.pow(b.var(i), k)
                gid = power if gid is None else b.mul(gid, power)
        if gid is None:
            gid = b.const(c)
        elif c != 1:
            gid = b.mul(b.const(c), gid)
        terms.append(gid)
    return b.build(b.sum(terms))


def linear_combination(
    field: FieldDesc,
    circuits: Sequence[Circuit],
    coefficients: Sequence,
    name: str = "g",
) -> Circuit:
    """Circuit for ``sum_j coefficients[j] * circuits[j]``."""
    if len(circuits) != len(coefficients):
        raise exc.ArityMismatch(
            expected=len(circuits), got=len(coefficients), where="combination"
        )
    nvars = circuits[0].nvars if circuits else 0
    b = CircuitBuilder(field, nvars, name)
    inputs = {i: b.var(i) for i in range(1, nvars + 1)}
    terms = []
    for circuit, c in zip(circuits, coefficients):
        if isinstance(c, FieldElement) and c.field != field:
            raise exc.FieldMismatch(c.field, field)
        if not c:
            continue
        out = b.inline(circuit, inputs)
        terms.append(out if c == 1 else b.mul(b.const(c), out))
    return b.build(b.sum(terms))


# evaluation


class Ring:
    """Arithmetic used by ``eval_generic``; ``const`` lifts field values."""

    def const(self, value: int) -> Any:
        raise NotImplementedError

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b


class OperatorRing(Ring):
    """Any type with ``+`` and ``*`` plus a constant lift."""

    def __init__(self, lift: Callable[[int], Any]):
        self._lift = lift

    def const(self, value: int):
        return self._lift(value)


class VectorRing(Ring):
    """Pointwise arithmetic on numpy arrays of encoded field values."""

    def __init__(self, source: FieldDesc, target: FieldDesc, shape):
        self.target = target
        self.shape = shape
        self._embed = source.embedding(target)

    def const(self, value: int):
        return self.target.vfull(self.shape, self._embed(value))

    def add(self, a, b):
        return self.target.vadd(a, b)

    def mul(self, a, b):
        return self.target.vmul(a, b)


def ring_for(field: FieldDesc, sample) -> Ring:
    """Pick the ring of a point entry and lift ``field`` constants into it."""
    if isinstance(sample, FieldElement):
        target = sample.field
        embed = field.embedding(target)
        return OperatorRing(lambda c: FieldElement(target, embed(c)))
    if isinstance(sample, Polynomial):
        target, nvars = sample.field, sample.nvars
        embed = field.embedding(target)
        return OperatorRing(
            lambda c: Polynomial.constant(
                target, nvars, FieldElement(target, embed(c))
            )
        )
    if isinstance(sample, np.ndarray):
        raise TypeError("array points need an explicit VectorRing")
    lift = getattr(sample, "lift_constant", None)
    if lift is None:
        raise TypeError(f"cannot evaluate a circuit at {type(sample)}")
    return OperatorRing(lambda c: lift(field, c))


def eval_generic(
    c: Circuit, point: Sequence, ring: Optional[Ring] = None
) -> Any:
    """Evaluate gate by gate at ``point`` in the ring of its entries."""
    if len(point) != c.nvars:
        raise exc.ArityMismatch(expected=c.nvars, got=len(point), where="eval")
    point = [
        FieldElement(c.field, v % c.field.p) if isinstance(v, int) else v
        for v in point
    ]
    if ring is None:
        if point:
            ring = ring_for(c.field, point[0])
        else:
            ring = OperatorRing(lambda v: FieldElement(c.field, v))
    memo: Dict[int, Any] = {}
    for gate in c.live_gates():
        if gate.kind == "var":
            memo[gate.id] = point[gate.args[0] - 1]
        elif gate.kind == "const":
            memo[gate.id] = ring.const(gate.args[0])
        elif gate.kind == "add":
            memo[gate.id] = ring.add(memo[gate.args[0]], memo[gate.args[1]])
        else:
            memo[gate.id] = ring.mul(memo[gate.args[0]], memo[gate.args[1]])
    return memo[c.output]


def eval_instance(inst: Instance, point: Sequence, ring=None) -> List[Any]:
    return [eval_generic(c, point, ring) for c in inst.circuits]


def expand(c: Circuit, limits: Limits = DEFAULT_LIMITS) -> Polynomial:
    """
    Exact sparse polynomial of ``c``.

    ``limits.max_terms`` bounds the term count of every gate value, the
    number of term products one multiplication gate may form and the
    degree of every product, a dense univariate of degree d having d + 1
    terms.
    """
    field, nvars = c.field, c.nvars
    memo: Dict[int, Polynomial] = {}
    for gate in c.live_gates():
        if gate.kind == "var":
            value = Polynomial.variable(field, nvars, gate.args[0])
        elif gate.kind == "const":
            value = Polynomial.constant(
                field, nvars, FieldElement(field, gate.args[0])
            )
        elif gate.kind == "add":
            value = memo[gate.args[0]] + memo[gate.args[1]]
        else:
            left, right = memo[gate.args[0]], memo[gate.args[1]]
            limits.check("max_terms", len(left) * len(right), gate=gate.id)
            limits.check(
                "max_terms",
                left.total_degree() + right.total_degree(),
                gate=gate.id,
            )
            value = left * right
        limits.check("max_terms", len(value), gate=gate.id)
        memo[gate.id] = value
    return memo[c.output]


def syntactic_degree(c: Circuit) -> int:
    """Gate-wise degree bound: var 1, const 0, add max, mul sum."""
    degree: Dict[int, int] = {}
    for gate in c.live_gates():
        if gate.kind == "var":
            degree[gate.id] = 1
        elif gate.kind == "const":
            degree[gate.id] = 0
        elif gate.kind == "add":
            degree[gate.id] = max(degree[a] for a in gate.args)
        else:
            degree[gate.id] = sum(degree[a] for a in gate.args)
    return degree[c.output]


def formal_partial(c: Circuit, i: int) -> Circuit:
    """
    Circuit for the derivative of ``c`` in x_i, by forward-mode sum and
    product rules.

    Branches with zero derivative are pruned and a unit derivative is
    never multiplied out, so a gate costs at most three new gates unless
    it multiplies two factors that both depend on x_i. Gates the result
    does not use are dropped.
    """
    if not 1 <= i <= c.nvars:
        raise exc.ArityMismatch(expected=c.nvars, got=i, where="d/dx")
    b = CircuitBuilder(c.field, c.nvars, f"d{c.name}/dx{i}")
    value: Dict[int, int] = {}
    deriv: Dict[int, Optional[int]] = {}
    one: Optional[int] = None

    def times(d: int, factor: int) -> int:
        return factor if d == one else b.mul(d, factor)

    for gate in c.live_gates():
        if gate.kind == "var":
            value[gate.id] = b.var(gate.args[0])
            if gate.args[0] == i:
                one = b.const(1)
                deriv[gate.id] = one
            else:
                deriv[gate.id] = None
        elif gate.kind == "const":
            value[gate.id] = b.const(FieldElement(c.field, gate.args[0]))
            deriv[gate.id] = None
        elif gate.kind == "add":
            left, right = gate.args
            value[gate.id] = b.add(value[left], value[right])
            dl, dr = deriv[left], deriv[right]
            if dl is None or dr is None:
                deriv[gate.id] = dr if dl is None else dl
            else:
                deriv[gate.id] = b.add(dl, dr)
        else:
            left, right = gate.args
            value[gate.id] = b.mul(value[left], value[right])
            dl, dr = deriv[left], deriv[right]
            if left == right:
                if dl is None:
                    deriv[gate.id] = None
                else:
                    half = times(dl, value[left])
                    deriv[gate.id] = b.add(half, half)
                continue
            parts = []
            if dl is not None:
                parts.append(times(dl, value[right]))
            if dr is not None:
                parts.append(times(dr, value[left]))
            deriv[gate.id] = b.sum(parts) if parts else None
    out = deriv[c.output]
    if out is None:
        out = b.const(0)
    return b.build(out)


# instance files


def _syntax(line: int, error: str):
    return exc.InstanceSyntaxError(line=line, error=error)


def _int(token: str, line: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise _syntax(line, f"{what} must be an integer, got {token!r}")


def _parse_const(field: FieldDesc, token: str, line: int) -> int:
    parts = token.split(",")
    if len(parts) != field.e:
        raise exc.FieldMismatch(f"constant {token} (line {line})", field)
    digits = [_int(part, line, "constant digit") for part in parts]
    return field.from_coeffs(digits)


def parse(text: str) -> Instance:
    """Parse the line-based instance grammar."""
    field = None
    nvars = None
    nparams = 0
    circuits: List[Circuit] = []
    block = None  # (name, start line, gates, defined ids)
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        head = tokens[0]
        if head == "field":
            if field is not None or len(tokens) != 3:
                raise _syntax(lineno, "expected one 'field <p> <e>' header")
            p = _int(tokens[1], lineno, "p")
            e = _int(tokens[2], lineno, "e")
            field = mk_field(p, e)
            continue
        if field is None:
            raise _syntax(lineno, "'field' header must come first")
        if head == "nvars":
            if nvars is not None or len(tokens) != 2:
                raise _syntax(lineno, "expected one 'nvars <n>' header")
            nvars = _int(tokens[1], lineno, "nvars")
            if nvars < 0:
                raise _syntax(lineno, "nvars must be non-negative")
            continue
        if nvars is None:
            raise _syntax(lineno, "'nvars' header must precede circuits")
        if head == "params":
            if circuits or block is not None or len(tokens) != 2:
                raise _syntax(lineno, "'params <s>' belongs to the header")
            nparams = _int(tokens[1], lineno, "params")
            if not 0 <= nparams <= nvars:
                raise _syntax(lineno, "params must lie in [0, nvars]")
            continue
        if head == "circuit":
            if block is not None:
                raise _syntax(lineno, f"circuit {block[0]} has no output")
            if len(tokens) != 2:
                raise _syntax(lineno, "expected 'circuit <name>'")
            block = (tokens[1], lineno, [], set())
            continue
        if block is None:
            raise _syntax(lineno, f"{head!r} outside a circuit block")
        name, start, gates, defined = block
        if head == "output":
            if len(tokens) != 2:
                raise _syntax(lineno, "expected 'output <id>'")
            if not gates:
                raise _syntax(start, f"circuit {name} has no gates")
            out = _int(tokens[1], lineno, "output")
            if out not in defined:
                raise exc.UndefinedGate(line=lineno, gate=out)
            circuits.append(
                Circuit(
                    name=name,
                    field=field,
                    nvars=nvars,
                    gates=tuple(gates),
                    output=out,
                )
            )
            block = None
            continue
        gid = _int(head, lineno, "gate id")
        if gid < 1 or (gates and gid <= gates[-1].id):
            raise _syntax(lineno, f"gate id {gid} is not increasing")
        if len(tokens) < 3:
            raise _syntax(lineno, "incomplete gate")
        kind = tokens[1]
        if kind == "var":
            if len(tokens) != 3:
                raise _syntax(lineno, "expected '<id> var <i>'")
            index = _int(tokens[2], lineno, "variable index")
            if not 1 <= index <= nvars:
                raise _syntax(lineno, f"variable x{index} out of range")
            args = (index,)
        elif kind == "const":
            if len(tokens) != 3:
                raise _syntax(lineno, "expected '<id> const <c0,...>'")
            args = (_parse_const(field, tokens[2], lineno),)
        elif kind in ("add", "mul"):
            if len(tokens) != 4:
                raise _syntax(lineno, f"expected '<id> {kind} <id> <id>'")
            args = tuple(_int(t, lineno, "operand") for t in tokens[2:])
            for operand in args:
                if operand not in defined:
                    raise exc.UndefinedGate(line=lineno, gate=operand)
        else:
            raise _syntax(lineno, f"unknown gate kind {kind!r}")
        gates.append(Gate(id=gid, kind=kind, args=args))
        defined.add(gid)
    if block is not None:
        raise _syntax(last_line, f"circuit {block[0]} has no output")
    if field is None or nvars is None:
        raise _syntax(last_line, "missing 'field' or 'nvars' header")
    inst = Instance(
        field=field, nvars=nvars, circuits=tuple(circuits), nparams=nparams
    )
    logger.debug(f"parsed {inst.m} circuits over {field!r}, n={nvars}")
    return inst


def serialize(inst: Instance) -> str:
    lines = [inst.field.to_text(), f"nvars {inst.nvars}"]
    if inst.nparams:
        lines.append(f"params {inst.nparams}")
    for c in inst.circuits:
        lines.append(f"circuit {c.name}")
        for gate in c.gates:
            if gate.kind == "const":
                arg = inst.field.format(gate.args[0])
            else:
                arg = " ".join(str(a) for a in gate.args)
            lines.append(f"{gate.id} {gate.kind} {arg}")
        lines.append(f"output {c.output}")
    return "\n".join(lines) + "\n"


def load(path: Union[str, Path]) -> Instance:
    return parse(Path(path).read_text())


def instance_of(
    field: FieldDesc, polys: Sequence[Polynomial], names=None
) -> Instance:
    """Instance whose circuits compute the given polynomials."""
    if not polys:
        raise ValueError("need at least one polynomial")
    names = names or [f"f{i}" for i in range(1, len(polys) + 1)]
    circuits = [from_polynomial(p, name) for p, name in zip(polys, names)]
    return Instance(field=field, nvars=polys[0].nvars, circuits=circuits)

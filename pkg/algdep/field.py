"""
Finite fields F_p and F_{p^e}.

Elements are encoded as integers in [0, q): the coefficient vector
(c0, ..., c_{e-1}) of the residue modulo the field's modulus is read as the
base-p number c0 + c1*p + ... so equality is integer equality. FieldDesc
exposes the arithmetic on these integers (scalar and numpy-vectorised);
FieldElement wraps one integer with operator overloading for callers that
want values, e.g. the generic circuit evaluator.
"""

import functools
import logging
from typing import Callable, FrozenSet, Iterator, Sequence, Tuple

import numpy as np
from pydantic import Field, model_validator
from typing_extensions import Annotated

from . import exc
from .config import DEFAULT_LIMITS, Limits
from .types import Record

logger = logging.getLogger(__name__)

PRIME_BITS = 61
FIELD_BITS = 128
TABLE_LIMIT = 2**16
_TRIAL_DIVISION_LIMIT = 2**40


def is_prime(n: int) -> bool:
    """Primality by trial division; deterministic Miller-Rabin above 2^40."""
    if n < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % small == 0:
            return n == small
    if n < _TRIAL_DIVISION_LIMIT:
        f = 41
        while f * f <= n:
            if n % f == 0 or n % (f + 2) == 0:
                return False
            f += 6
        return True
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _prime_factors(n: int) -> Tuple[int, ...]:
    factors = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            factors.append(f)
            while n % f == 0:
                n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        factors.append(n)
    return tuple(factors)


# Polynomials over F_p as coefficient lists, low-to-high, no trailing zeros.


def _ptrim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _psub(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _ptrim([(x - y) % p for x, y in zip(a, b)])


def _pmod(a, m, p):
    a = list(a)
    inv_lead = pow(m[-1], p - 2, p)
    dm = len(m) - 1
    while len(_ptrim(a)) - 1 >= dm:
        shift = len(a) - 1 - dm
        c = a[-1] * inv_lead % p
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
    return a


def _pmulmod(a, b, m, p):
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    return _pmod(_ptrim(prod), m, p)


def _ppowmod(a, k, m, p):
    result = [1]
    base = _pmod(a, m, p)
    while k:
        if k & 1:
            result = _pmulmod(result, base, m, p)
        base = _pmulmod(base, base, m, p)
        k >>= 1
    return result


def _pgcd(a, b, p):
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Ben-Or test for a polynomial over F_p (coefficients low-to-high)."""
    poly = _ptrim(list(poly))
    degree = len(poly) - 1
    if degree <= 0:
        return False
    if degree == 1:
        return True
    x = [0, 1]
    b = x
    for _ in range(degree // 2):
        b = _ppowmod(b, p, poly, p)
        if len(_pgcd(_psub(b, x, p), poly, p)) != 1:
            return False
    return True


def canonical_modulus(p: int, e: int) -> Tuple[int, ...]:
    """First monic irreducible of degree e, lower coefficients as base-p."""
    for low in range(p**e):
        coeffs = []
        for _ in range(e):
            coeffs.append(low % p)
            low //= p
        candidate = coeffs + [1]
        if is_irreducible(candidate, p):
            return tuple(candidate)
    raise AssertionError(f"no irreducible of degree {e} over F_{p}")


class FieldDesc(Record):
    """
    The field F_{p^e}.

    p: prime characteristic, at most 61 bits
    e: extension degree
    modulus: monic irreducible of degree e over F_p, low-to-high
    """

    p: Annotated[int, Field(ge=2, lt=2**PRIME_BITS)]
    e: Annotated[int, Field(ge=1)]
    modulus: Tuple[int, ...]

    @model_validator(mode="after")
    def modulus_must_be_monic_irreducible(self):
        if len(self.modulus) != self.e + 1 or self.modulus[-1] != 1:
            raise ValueError(f"modulus {self.modulus} is not monic of degree "
                             f"{self.e}")
        if any(not 0 <= c < self.p for c in self.modulus):
            raise ValueError(f"modulus {self.modulus} has digits outside "
                             f"[0, {self.p})")
        if not is_irreducible(self.modulus, self.p):
            raise ValueError(f"modulus {self.modulus} is reducible")
        return self

    @property
    def q(self) -> int:
        return self.p**self.e

    @property
    def char(self) -> int:
        return self.p

    def to_text(self) -> str:
        return f"field {self.p} {self.e}"

    def __repr__(self):
        return f"F_{self.p}^{self.e}" if self.e > 1 else f"F_{self.p}"

    # element construction

    def __call__(self, value) -> "FieldElement":
        return self.element(value)

    def element(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.field != self:
                raise exc.FieldMismatch(value.field, self)
            return value
        if isinstance(value, (tuple, list)):
            return FieldElement(self, self.from_coeffs(value))
        return FieldElement(self, int(value) % self.p)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def elements(self) -> Iterator["FieldElement"]:
        for value in range(self.q):
            yield FieldElement(self, value)

    def coeffs(self, a: int) -> Tuple[int, ...]:
        digits = []
        for _ in range(self.e):
            digits.append(a % self.p)
            a //= self.p
        return tuple(digits)

    def from_coeffs(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) > self.e:
            raise exc.ArityMismatch(
                expected=self.e, got=len(coeffs), where="constant"
            )
        value = 0
        for c in reversed(list(coeffs)):
            value = value * self.p + int(c) % self.p
        return value

    def format(self, a: int) -> str:
        return ",".join(str(c) for c in self.coeffs(a))

    def parse(self, text: str) -> int:
        parts = text.strip().split(",")
        try:
            digits = [int(part) for part in parts]
        except ValueError:
            raise ValueError(f"constant {text!r} is not a comma list of "
                             "integers")
        if len(digits) != self.e:
            raise exc.ArityMismatch(
                expected=self.e, got=len(digits), where=f"constant {text}"
            )
        return self.from_coeffs(digits)

    # scalar arithmetic on encoded integers

    def add(self, a: int, b: int) -> int:
        p = self.p
        if self.e == 1:
            return (a + b) % p
        if p == 2:
            return a ^ b
        result, scale = 0, 1
        for _ in range(self.e):
            result += ((a % p + b % p) % p) * scale
            a //= p
            b //= p
            scale *= p
        return result

    def neg(self, a: int) -> int:
        p = self.p
        if self.e == 1:
            return -a % p
        if p == 2:
            return a
        result, scale = 0, 1
        for _ in range(self.e):
            result += (-(a % p) % p) * scale
            a //= p
            scale *= p
        return result

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.e == 1:
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        if self.q <= TABLE_LIMIT:
            exp, log = _tables(self)
            return int(exp[(int(log[a]) + int(log[b])) % (self.q - 1)])
        product = _pmulmod(
            _ptrim(list(self.coeffs(a))),
            _ptrim(list(self.coeffs(b))),
            list(self.modulus),
            self.p,
        )
        return self.from_coeffs(product)

    def inv(self, a: int) -> int:
        if a == 0:
            raise exc.DivisionByZero(f"inverse of zero in {self!r}")
        if self.e == 1:
            return pow(a, self.p - 2, self.p)
        if self.q <= TABLE_LIMIT:
            exp, log = _tables(self)
            return int(exp[(-int(log[a])) % (self.q - 1)])
        return self.pow(a, self.q - 2)

    def pow(self, a: int, k: int) -> int:
        if k < 0:
            return self.pow(self.inv(a), -k)
        if a == 0:
            return 1 if k == 0 else 0
        if self.e == 1:
            return pow(a, k, self.p)
        if self.q <= TABLE_LIMIT:
            exp, log = _tables(self)
            return int(exp[(int(log[a]) * k) % (self.q - 1)])
        result, base = 1, a
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    # vectorised arithmetic on numpy arrays of encoded integers

    def _dtype(self):
        return np.int64 if self.q < 2**31 else object

    def varray(self, values) -> np.ndarray:
        return np.asarray(values, dtype=self._dtype())

    def vfull(self, shape, value: int) -> np.ndarray:
        return np.full(shape, value, dtype=self._dtype())

    def vadd(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        p = self.p
        if self.e == 1:
            return (a + b) % p
        if p == 2:
            return np.bitwise_xor(a, b)
        result = np.zeros(np.broadcast(a, b).shape, dtype=self._dtype())
        scale = 1
        for _ in range(self.e):
            result = result + ((a % p + b % p) % p) * scale
            a = a // p
            b = b // p
            scale *= p
        return result

    def vneg(self, a: np.ndarray) -> np.ndarray:
        p = self.p
        if self.e == 1:
            return (-a) % p
        if p == 2:
            return a
        result = np.zeros(np.shape(a), dtype=self._dtype())
        scale = 1
        for _ in range(self.e):
            result = result + ((-(a % p)) % p) * scale
            a = a // p
            scale *= p
        return result

    def vsub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.vadd(a, self.vneg(b))

    def vmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.e == 1:
            return (a * b) % self.p
        if self.q > TABLE_LIMIT:
            raise exc.ResourceLimit(
                limit="table_size", requested=self.q, cap=TABLE_LIMIT
            )
        exp, log = _tables(self)
        a, b = np.broadcast_arrays(a, b)
        nonzero = (a != 0) & (b != 0)
        result = np.zeros(a.shape, dtype=np.int64)
        idx = (log[a[nonzero]] + log[b[nonzero]]) % (self.q - 1)
        result[nonzero] = exp[idx]
        return result

    # structure

    def generator(self) -> int:
        """Smallest encoded element generating the multiplicative group."""
        return _generator(self)

    def extension(self, j: int) -> "FieldDesc":
        return mk_field(self.p, self.e * j)

    def is_subfield_of(self, other: "FieldDesc") -> bool:
        return self.p == other.p and other.e % self.e == 0

    def embedding(
        self, target: "FieldDesc", limits: Limits = DEFAULT_LIMITS
    ) -> Callable[[int], int]:
        """Return the encoded-integer map of the embedding into ``target``."""
        if target == self:
            return _identity
        if not self.is_subfield_of(target):
            raise exc.FieldMismatch(self, target)
        if self.e == 1:
            return _identity
        limits.check("max_field_size", target.q)
        powers = _embedding_powers(self, target)

        def embed(a: int) -> int:
            result = 0
            for c, power in zip(self.coeffs(a), powers):
                if c:
                    result = target.add(result, target.mul(c, power))
            return result

        return embed


def _identity(a: int) -> int:
    return a


@functools.lru_cache(maxsize=None)
def _tables(field: FieldDesc):
    q = field.q
    g = _generator(field)
    exp = np.zeros(q - 1, dtype=np.int64)
    log = np.zeros(q, dtype=np.int64)
    modulus = list(field.modulus)
    g_poly = _ptrim(list(field.coeffs(g)))
    x = [1]
    for i in range(q - 1):
        value = field.from_coeffs(x)
        exp[i] = value
        log[value] = i
        x = _pmulmod(x, g_poly, modulus, field.p)
    logger.debug(f"built log tables for {field!r}")
    return exp, log


@functools.lru_cache(maxsize=None)
def _generator(field: FieldDesc) -> int:
    q = field.q
    if q == 2:
        return 1
    factors = _prime_factors(q - 1)
    modulus = list(field.modulus)
    for g in range(2, q):
        g_poly = _ptrim(list(field.coeffs(g)))
        if all(
            _ppowmod(g_poly, (q - 1) // r, modulus, field.p) != [1]
            for r in factors
        ):
            return g
    raise AssertionError(f"no generator for {field!r}")


@functools.lru_cache(maxsize=None)
def _embedding_powers(source: FieldDesc, target: FieldDesc):
    # smallest encoded root of the source modulus in the target
    modulus = source.modulus
    for alpha in range(target.q):
        value = 0
        for c in reversed(modulus):
            value = target.add(target.mul(value, alpha), c)
        if value == 0:
            break
    else:
        raise AssertionError(f"{source!r} does not embed in {target!r}")
    powers, power = [], 1
    for _ in range(source.e):
        powers.append(power)
        power = target.mul(power, alpha)
    return tuple(powers)


class FieldElement:
    """An element of a FieldDesc; immutable, compared by value."""

    __slots__ = ("field", "value")

    def __init__(self, field: FieldDesc, value: int):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise TypeError("FieldElement is immutable")

    @property
    def coeffs(self) -> Tuple[int, ...]:
        return self.field.coeffs(self.value)

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field != self.field:
                raise exc.FieldMismatch(self.field, other.field)
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.field.p
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.add(self.value, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.sub(self.value, b))

    def __rsub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.sub(b, self.value))

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.mul(self.value, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(
            self.field, self.field.mul(self.value, self.field.inv(b))
        )

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def __pow__(self, k: int):
        return FieldElement(self.field, self.field.pow(self.value, k))

    def inv(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self.field.e, self.value))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.field!r}({self.field.format(self.value)})"

    def __str__(self):
        return self.field.format(self.value)


def mk_field(p: int, e: int = 1) -> FieldDesc:
    """Build F_{p^e} with its canonical modulus."""
    if e < 1:
        raise exc.TooLarge(what="extension degree", value=e, cap=">= 1")
    if p.bit_length() > PRIME_BITS:
        raise exc.TooLarge(what="characteristic bits", value=p.bit_length(),
                           cap=PRIME_BITS)
    if not is_prime(p):
        raise exc.NotPrime(p)
    if (p**e).bit_length() > FIELD_BITS:
        raise exc.TooLarge(what="field size bits",
                           value=(p**e).bit_length(), cap=FIELD_BITS)
    return _mk_field(p, e)


@functools.lru_cache(maxsize=None)
def _mk_field(p: int, e: int) -> FieldDesc:
    modulus = canonical_modulus(p, e)
    logger.debug(f"F_{p}^{e} modulus {modulus}")
    return FieldDesc(p=p, e=e, modulus=modulus)


def arith(a: FieldElement, b, op: str) -> FieldElement:
    """Dispatch one of add, sub, mul, inv (b ignored) or pow (b an int)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inv()
    if op == "pow":
        return a ** int(b)
    raise ValueError(f"unknown field operation {op!r}")


def extension_for_order(field: FieldDesc, k: int) -> int:
    """Smallest j with k | q^j - 1."""
    if k % field.p == 0:
        raise exc.CharDividesOrder(p=field.p, order=k)
    j, power = 1, field.q % k
    while (power - 1) % k != 0:
        power = power * field.q % k
        j += 1
    return j


def roots_of_unity(
    field: FieldDesc, k: int, limits: Limits = DEFAULT_LIMITS
) -> Tuple[FieldDesc, FrozenSet[FieldElement]]:
    """All k-th roots of unity, in the smallest extension holding them."""
    if k < 1:
        raise ValueError(f"order must be positive, got {k}")
    j = extension_for_order(field, k)
    ext = field.extension(j)
    limits.check("max_field_size", ext.q)
    g = ext.generator()
    step = (ext.q - 1) // k
    zeta = ext.pow(g, step)
    roots, value = set(), 1
    for _ in range(k):
        roots.add(FieldElement(ext, value))
        value = ext.mul(value, zeta)
    return ext, frozenset(roots)


def sample(field: FieldDesc, rng: np.random.Generator) -> FieldElement:
    """Uniform element; deterministic given the generator state."""
    if field.q < 2**62:
        return FieldElement(field, int(rng.integers(0, field.q)))
    digits = [int(rng.integers(0, field.p)) for _ in range(field.e)]
    return FieldElement(field, field.from_coeffs(digits))


def sample_values(
    field: FieldDesc, rng: np.random.Generator, size: int
) -> Tuple[int, ...]:
    return tuple(sample(field, rng).value for _ in range(size))


def extension_with_size(field: FieldDesc, at_least: int) -> FieldDesc:
    """Smallest F_{p^{e*j}} with at least ``at_least`` elements."""
    j = 1
    while field.q**j < at_least:
        j += 1
    return field.extension(j)


def log2_ceil(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0

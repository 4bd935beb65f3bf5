"""
Annihilators by linear algebra.

An annihilator of degree at most d is A = sum c_a y^a over the y-monomials
of degree <= d with A(f_1, ..., f_m) = 0. Expanding every f^a gives a
matrix with one row per x-monomial and one column per y-monomial; the
annihilators are its nullspace.
"""

import functools
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import exc
from .circuit import Circuit, Instance, eval_generic, expand, formal_partial
from .config import DEFAULT_LIMITS, Limits, make_rng
from .field import TABLE_LIMIT, FieldDesc, extension_with_size, sample
from .poly import Monomial, Polynomial, monomials_up_to
from .types import Record

logger = logging.getLogger(__name__)


class AnnSpace(Record):
    """
    Annihilators of degree <= ``degree`` in y1..y_m.

    The basis is in reduced echelon form over the graded-lex y-monomials:
    every element has leading coefficient 1 and no two share a leading
    monomial.
    """

    field: FieldDesc
    nvars: int
    degree: int
    basis: Tuple[Polynomial, ...] = ()

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def is_empty(self) -> bool:
        return not self.basis

    def constant_terms_zero(self) -> bool:
        return all(not a.constant_term() for a in self.basis)

    def to_text(self) -> str:
        lines = [f"annihilators of degree <= {self.degree}: dim {self.dim}"]
        lines.extend(a.to_text("y") for a in self.basis)
        return "\n".join(lines)

    def to_row(self) -> dict:
        return {"m": self.nvars, "degree": self.degree, "dim": self.dim}


class TrdegResult(Record):
    """
    Transcendence degree and the independent subset that realises it.

    basis holds 0-based circuit indices in scan order.
    """

    k: int
    m: int
    basis: Tuple[int, ...]
    names: Tuple[str, ...] = ()

    def to_text(self) -> str:
        members = ", ".join(self.names) if self.names else "none"
        return f"trdeg {self.k} of {self.m} (independent: {members})"

    def to_row(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "basis": ",".join(str(i + 1) for i in self.basis),
        }


# linear algebra over a FieldDesc


def rref(field: FieldDesc, matrix) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """Reduced row-echelon form and its pivot columns, left to right."""
    M = field.varray(matrix).copy()
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {M.shape}")
    rows, cols = M.shape
    pivots = []
    r = 0
    for col in range(cols):
        if r == rows:
            break
        nonzero = np.nonzero(M[r:, col])[0]
        if nonzero.size == 0:
            continue
        pivot = r + int(nonzero[0])
        if pivot != r:
            M[[r, pivot]] = M[[pivot, r]]
        scale = field.inv(int(M[r, col]))
        if scale != 1:
            M[r] = field.vmul(M[r], field.vfull(cols, scale))
        factors = M[:, col].copy()
        factors[r] = 0
        others = np.nonzero(factors)[0]
        if others.size:
            M[others] = field.vsub(
                M[others],
                field.vmul(factors[others][:, None], M[r][None, :]),
            )
        pivots.append(col)
        r += 1
    return M[:r], tuple(pivots)


def matrix_rank(field: FieldDesc, matrix) -> int:
    matrix = field.varray(matrix)
    if matrix.size == 0:
        return 0
    return len(rref(field, matrix)[1])


def nullspace(field: FieldDesc, matrix) -> List[np.ndarray]:
    """
    One vector per free column j: 1 at j, minus the reduced entries at the
    pivot columns, zero elsewhere.
    """
    R, pivots = rref(field, matrix)
    cols = field.varray(matrix).shape[1]
    pivot_set = set(pivots)
    basis = []
    for j in range(cols):
        if j in pivot_set:
            continue
        v = field.vfull(cols, 0)
        v[j] = 1
        for i, c in enumerate(pivots):
            entry = int(R[i, j])
            if entry:
                v[c] = field.neg(entry)
        basis.append(v)
    return basis


def _annihilates(field: FieldDesc, M: np.ndarray, v: np.ndarray) -> bool:
    acc = field.vfull(M.shape[0], 0)
    for c in np.nonzero(v)[0]:
        acc = field.vadd(acc, field.vmul(M[:, c], field.vfull(1, int(v[c]))))
    return not np.any(acc)


# annihilator spaces


@functools.lru_cache(maxsize=256)
def _expanded(circuit: Circuit, limits: Limits) -> Polynomial:
    return expand(circuit, limits)


def expand_all(inst: Instance, limits: Limits = DEFAULT_LIMITS):
    return [_expanded(c, limits) for c in inst.circuits]


def _powers(
    polys: Sequence[Polynomial],
    monomials: Sequence[Monomial],
    limits: Limits,
) -> Dict[Monomial, Polynomial]:
    """f^a for every a, each from a predecessor one degree lower."""
    field, nvars = polys[0].field, polys[0].nvars
    values: Dict[Monomial, Polynomial] = {}
    for alpha in monomials:
        if not any(alpha):
            values[alpha] = Polynomial.constant(field, nvars, 1)
            continue
        j = next(i for i, k in enumerate(alpha) if k)
        prev = list(alpha)
        prev[j] -= 1
        value = values[tuple(prev)] * polys[j]
        limits.check("max_terms", len(value))
        values[alpha] = value
    return values


def annihilator_space(
    inst: Instance, d: int, limits: Limits = DEFAULT_LIMITS
) -> AnnSpace:
    """Basis of all annihilators of degree <= d, reduced echelon form."""
    if d < 0:
        raise ValueError(f"degree bound must be non-negative, got {d}")
    field, m = inst.field, inst.m
    if m == 0:
        return AnnSpace(field=field, nvars=0, degree=d)
    polys = expand_all(inst, limits)
    columns = monomials_up_to(m, d, limits)
    powers = _powers(polys, columns, limits)
    row_of: Dict[Monomial, int] = {}
    for alpha in columns:
        for x_monomial in powers[alpha].terms:
            row_of.setdefault(x_monomial, len(row_of))
    limits.check("max_matrix_entries", len(row_of) * len(columns))
    logger.debug(
        f"annihilator system d={d}: {len(row_of)} x {len(columns)}"
    )
    M = field.vfull((len(row_of), len(columns)), 0)
    for j, alpha in enumerate(columns):
        for x_monomial, c in powers[alpha].terms.items():
            M[row_of[x_monomial], j] = c
    basis = []
    for v in nullspace(field, M):
        if not _annihilates(field, M, v):
            raise AssertionError(f"nullspace vector fails at degree {d}")
        terms = {columns[j]: int(v[j]) for j in np.nonzero(v)[0]}
        basis.append(Polynomial(field, m, terms))
    return AnnSpace(field=field, nvars=m, degree=d, basis=tuple(basis))


def perron_bound(inst: Instance, subset: Optional[Sequence[int]] = None):
    """Product of syntactic degrees, a constant circuit counting as 1."""
    indices = range(inst.m) if subset is None else subset
    degrees = inst.degrees
    return math.prod(max(degrees[i], 1) for i in indices)


def is_dependent(
    inst: Instance, subset: Sequence[int], limits: Limits = DEFAULT_LIMITS
) -> bool:
    """Whether the circuits at 0-based ``subset`` have an annihilator."""
    subset = tuple(subset)
    if not subset:
        raise ValueError("subset must be nonempty")
    if len(set(subset)) < len(subset):
        return True
    if len(subset) > inst.nvars:
        return True
    if full_rank_somewhere(inst, subset, limits):
        logger.debug(f"subset {subset}: jacobian has full rank")
        return False
    d = perron_bound(inst, subset)
    space = annihilator_space(inst.subset(subset), d, limits)
    logger.debug(f"subset {subset}: degree {d}, dim {space.dim}")
    return not space.is_empty


def trdeg(inst: Instance, limits: Limits = DEFAULT_LIMITS) -> TrdegResult:
    """Greedy scan; the matroid exchange property makes it maximal."""
    basis: List[int] = []
    for i in range(inst.m):
        if not is_dependent(inst, basis + [i], limits):
            basis.append(i)
    result = TrdegResult(
        k=len(basis),
        m=inst.m,
        basis=tuple(basis),
        names=tuple(inst.circuits[i].name for i in basis),
    )
    logger.info(result.to_text())
    return result


def minimal_annihilator(
    inst: Instance, limits: Limits = DEFAULT_LIMITS
) -> Polynomial:
    """
    The minimal-degree annihilator when trdeg = m - 1, scaled so the
    graded-lex leading coefficient is 1.
    """
    k = trdeg(inst, limits).k
    if k != inst.m - 1:
        raise exc.NotPrincipalCase(k=k, m=inst.m)
    bound = perron_bound(inst)
    annihilator = lowest_annihilator(inst, limits, bound)
    if annihilator is None:
        raise exc.NotFound(
            tried=bound, reason="no annihilator up to Perron bound"
        )
    return annihilator


def lowest_annihilator(
    inst: Instance,
    limits: Limits = DEFAULT_LIMITS,
    degree_bound: Optional[int] = None,
) -> Optional[Polynomial]:
    """First annihilator found scanning d = 1, 2, ..., monic; else None."""
    bound = perron_bound(inst) if degree_bound is None else degree_bound
    for d in range(1, bound + 1):
        space = annihilator_space(inst, d, limits)
        if not space.is_empty:
            if space.dim != 1:
                logger.warning(f"{space.dim} annihilators at degree {d}")
            logger.info(f"lowest annihilator at degree {d}")
            return space.basis[0].monic()
    return None


def ann_at_zero_direct(
    inst: Instance,
    limits: Limits = DEFAULT_LIMITS,
    degree_bound: Optional[int] = None,
) -> bool:
    """
    Whether every annihilator of degree <= (max deg)^k has zero constant
    term, i.e. whether the origin lies in the closure of the image.
    """
    if inst.m == 0:
        return True
    if degree_bound is None:
        k = trdeg(inst, limits).k
        degree_bound = max(inst.Dprime, 1) ** k
    space = annihilator_space(inst, max(degree_bound, 1), limits)
    answer = space.constant_terms_zero()
    logger.info(
        f"direct oracle at degree {space.degree}: dim {space.dim}, "
        f"answer {answer}"
    )
    return answer


def full_rank_somewhere(
    inst: Instance,
    subset: Sequence[int],
    limits: Limits = DEFAULT_LIMITS,
    tries: int = 2,
) -> bool:
    """
    Whether the Jacobian of the subset has full row rank at one of a few
    points. Dependent polynomials have a rank-deficient Jacobian in every
    characteristic, so True proves independence; False proves nothing.
    """
    field = inst.field
    size = max(field.q, min(256, TABLE_LIMIT))
    ext = extension_with_size(field, size)
    if ext.e > 1 and ext.q > TABLE_LIMIT:
        return False
    limits.check("max_field_size", ext.q)
    circuits = [inst.circuits[i] for i in subset]
    partials = [
        [formal_partial(c, j) for j in range(1, inst.nvars + 1)]
        for c in circuits
    ]
    for t in range(tries):
        rng = make_rng(0, "independence", t)
        point = [sample(ext, rng) for _ in range(inst.nvars)]
        values = [[eval_generic(d, point).value for d in row]
                  for row in partials]
        if matrix_rank(ext, values) == len(circuits):
            return True
    return False

import pytest

from algdep import exc
from algdep.circuit import eval_generic, parse
from algdep.config import make_rng
from algdep.field import mk_field, roots_of_unity, sample
from algdep.laurent import (
    LaurentPoly,
    Witness,
    eps_degree_bounds,
    eps_zero_value,
    in_eps_ideal,
    laurent_arith,
    load_witness,
    parse_witness,
    remark_family,
    top_degree,
    valuation,
)


@pytest.fixture
def eps(f7):
    yield LaurentPoly.eps(f7)


def test_constants_and_zero(f7):
    assert LaurentPoly.constant(f7, 8) == 1
    assert LaurentPoly(f7, {3: 0}) == 0
    assert valuation(LaurentPoly(f7)) is None
    assert top_degree(LaurentPoly(f7)) is None


def test_arithmetic(f7, eps):
    a = (eps**-1 + 2) * (eps - 3)
    assert a == LaurentPoly(f7, {-1: 4, 0: 2, 1: 2})
    assert a.valuation() == -1
    assert a.top_degree() == 1
    assert (a - a) == 0
    assert (1 - eps).coefficient(1) == 6


def test_monomial_inverse(f7):
    a = LaurentPoly.eps(f7, 2, 3)
    assert a * a**-1 == 1


def test_inverse_of_binomial_raises(eps):
    with pytest.raises(exc.DivisionByZero):
        (eps + 1) ** -1


ops = [("add", {1: 1, 0: 1}), ("sub", {1: 1, 0: 6}), ("mul", {1: 1})]


@pytest.mark.parametrize("op,terms", ops)
def test_laurent_arith(f7, eps, op, terms):
    assert laurent_arith(eps, 1, op) == LaurentPoly(f7, terms)


def test_laurent_arith_unknown(eps):
    with pytest.raises(ValueError):
        laurent_arith(eps, eps, "div")


def test_mixing_fields_raises(f5, f7):
    with pytest.raises(exc.FieldMismatch):
        LaurentPoly.eps(f5) + LaurentPoly.eps(f7)


def test_in_eps_ideal(f7, eps):
    assert in_eps_ideal(eps**3 + eps)
    assert in_eps_ideal(LaurentPoly(f7))
    assert not in_eps_ideal(eps + 1)
    assert not in_eps_ideal(eps**-2)


def test_eps_zero_value(f7, eps):
    assert eps_zero_value(eps + 4) == 4
    assert eps_zero_value(eps) == 0
    with pytest.raises(exc.NegativeValuation) as e:
        eps_zero_value(eps**-2 + 1)
    assert e.value.valuation == -2


def test_lift_constant_into_extension(f2):
    F4 = mk_field(2, 2)
    a = LaurentPoly.eps(F4)
    assert a.lift_constant(f2, 1) == 1
    assert a.lift_constant(f2, 0) == 0


def test_repr_and_text(f7, eps):
    a = 3 * eps**-1 + 2
    assert repr(a) == "3*eps^-1 + 2"
    assert a.to_text() == "-1:3 0:2"


def test_degree_bounds(load_instance):
    assert eps_degree_bounds(load_instance("x_xy1")) == (2, 4)
    assert eps_degree_bounds(load_instance("circle")) == (2, 4)


def test_degree_bounds_reject_constant_circuit(f7):
    text = "field 7 1\nnvars 1\ncircuit c\n1 const 3\noutput 1\n"
    with pytest.raises(exc.ConstantCircuit):
        eps_degree_bounds(parse(text))


def test_witness_file(instances, load_instance):
    inst = load_instance("x_xy1")
    w = load_witness(instances / "x_xy1.wit", inst.field, inst.nvars)
    F = inst.field
    assert w.coords == (LaurentPoly.eps(F, 1), LaurentPoly.eps(F, -1))
    assert w.window() == (-1, 1)
    assert w.respects(2, 4)
    assert not w.respects(0, 4)
    assert w.to_text() == "x1 : 1:1\nx2 : -1:1\n"
    assert parse_witness(w.to_text(), F, 2) == w


def test_witness_repeated_exponents_add(f7):
    w = parse_witness("x1 : 1:3 1:4\n", f7, 1)
    assert w.coords[0] == 0


bad_witnesses = [
    ("y1 : 1:1\n", exc.InstanceSyntaxError),
    ("x3 : 1:1\n", exc.InstanceSyntaxError),
    ("x1 : a:1\n", exc.InstanceSyntaxError),
    ("x1 : 1\n", exc.InstanceSyntaxError),
    ("x1 : 1:1,1\n", exc.FieldMismatch),
    ("x1 : 1:1\n", exc.ArityMismatch),
]


@pytest.mark.parametrize("text,error", bad_witnesses)
def test_witness_parse_errors(f7, text, error):
    with pytest.raises(error):
        parse_witness(text, f7, 2)


def test_witness_rejects_mixed_fields(f5, f7):
    with pytest.raises(ValueError):
        Witness(field=f7, coords=(LaurentPoly.eps(f5),))


def test_constant_witness(f7):
    w = Witness.constant(f7, [2, 4])
    assert w.window() == (0, 0)
    assert w.to_row()["n"] == 2


@pytest.mark.parametrize("d,n", [(2, 2), (2, 4), (3, 3)])
def test_remark_family_witness(d, n):
    inst, w = remark_family(d, n)
    assert inst.m == n + 1
    for c in inst.circuits:
        assert in_eps_ideal(eval_generic(c, w.coords))
    assert w.window()[0] == -(d - 1) * d ** (n - 2)


def test_remark_family_rejects_small_arguments():
    with pytest.raises(ValueError):
        remark_family(1, 3)


def test_roots_of_unity_are_forced(f7):
    # a^(r+1) - 1 in eps F[eps] pins a(0) to an (r+1)-th root of unity
    r = 2
    _, roots = roots_of_unity(f7, r + 1)
    rng = make_rng(7, "forcing")
    hits = 0
    for _ in range(1000):
        low = int(rng.integers(-2, 1))
        head = sample(f7, rng)
        terms = {low: head.value}
        for k in range(max(low, 0) + 1, 4):
            terms[k] = sample(f7, rng).value
        a = LaurentPoly(f7, terms)
        forced = in_eps_ideal(a ** (r + 1) - 1)
        if forced:
            hits += 1
            assert eps_zero_value(a) in roots
        if low < 0 and head:
            assert not forced
    assert hits > 0

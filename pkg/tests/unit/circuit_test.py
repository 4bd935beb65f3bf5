import itertools

import numpy as np
import pytest

from algdep import exc
from algdep.circuit import (
    Circuit,
    CircuitBuilder,
    Gate,
    Instance,
    VectorRing,
    constant_circuit,
    eval_generic,
    expand,
    formal_partial,
    from_polynomial,
    instance_of,
    linear_combination,
    load,
    parse,
    serialize,
    syntactic_degree,
    variable_circuit,
)
from algdep.config import Limits
from algdep.field import mk_field
from algdep.laurent import LaurentPoly
from algdep.poly import Polynomial, variables

fixtures = [
    "x_xy1",
    "x_x1",
    "frob_p2",
    "circle",
    "xy_sum",
    "xy_sum_shifted",
    "x_x_xy1",
    "xp_yp",
    "mixed_p3",
    "linear_forms",
    "binary_quadratics",
    "gf4_square",
]


@pytest.mark.parametrize("name", fixtures)
def test_parse_serialize_round_trip(load_instance, name):
    inst = load_instance(name)
    assert parse(serialize(inst)) == inst


def test_parse_x_xy1(load_instance):
    inst = load_instance("x_xy1")
    assert inst.m == 2
    assert inst.nvars == 2
    assert inst.names == ("f1", "f2")
    assert inst.degrees == (1, 2)
    assert inst.D == 2
    assert inst.Dprime == 2
    x, y = variables(inst.field, 2)
    assert expand(inst.circuits[1]) == x * y - 1


def test_parse_params(load_instance):
    assert load_instance("linear_forms").nparams == 2
    assert "params 3" in serialize(load_instance("binary_quadratics"))


def test_parse_extension_constant(load_instance):
    inst = load_instance("gf4_square")
    F = inst.field
    x1, x2 = variables(F, 2)
    alpha = F([0, 1])
    assert expand(inst.circuits[0]) == x1 + x2.scale(alpha)


bad_instances = [
    ("nvars 1\n", exc.InstanceSyntaxError, 1),
    ("field 7 1\ncircuit f\n1 var 1\noutput 1\n", exc.InstanceSyntaxError, 2),
    ("field 7 1\nnvars 1\ncircuit f\n1 var 2\noutput 1\n",
     exc.InstanceSyntaxError, 4),
    ("field 7 1\nnvars 1\ncircuit f\n1 var 1\n2 add 1 3\noutput 2\n",
     exc.UndefinedGate, 5),
    ("field 7 1\nnvars 1\ncircuit f\n1 var 1\noutput 4\n",
     exc.UndefinedGate, 5),
    ("field 7 1\nnvars 1\ncircuit f\noutput 1\n", exc.InstanceSyntaxError, 3),
    ("field 7 1\nnvars 1\ncircuit f\n1 var 1\n", exc.InstanceSyntaxError, 4),
    ("field 7 1\nnvars 1\ncircuit f\n2 var 1\n1 var 1\noutput 1\n",
     exc.InstanceSyntaxError, 5),
    ("field 7 1\nnvars 1\ncircuit f\n1 sub 1 1\noutput 1\n",
     exc.InstanceSyntaxError, 4),
]


@pytest.mark.parametrize("text,error,line", bad_instances)
def test_parse_errors_carry_line(text, error, line):
    with pytest.raises(error) as e:
        parse(text)
    assert e.value.line == line


def test_parse_constant_with_wrong_arity():
    text = "field 2 2\nnvars 1\ncircuit f\n1 const 1\noutput 1\n"
    with pytest.raises(exc.FieldMismatch):
        parse(text)


def test_parse_rejects_composite_field():
    with pytest.raises(exc.NotPrime):
        parse("field 6 1\nnvars 1\n")


def test_comments_and_blank_lines_are_ignored():
    text = (
        "# header\nfield 5 1  # p\n\nnvars 1\n"
        "circuit f\n1 var 1\noutput 1\n"
    )
    assert parse(text).m == 1


def test_load_missing_file(instances):
    with pytest.raises(FileNotFoundError):
        load(instances / "missing.inst")


def test_builder_shares_vars_and_consts(f7):
    b = CircuitBuilder(f7, 2)
    assert b.var(1) == b.var(1)
    assert b.const(8) == b.const(1)


def test_build_drops_dead_gates(f7):
    b = CircuitBuilder(f7, 2)
    x, y = b.var(1), b.var(2)
    b.mul(x, y)
    c = b.build(b.add(x, x))
    assert len(c) == 2
    assert c.output == 2
    assert [g.kind for g in c.gates] == ["var", "add"]


def test_builder_pow(f7):
    b = CircuitBuilder(f7, 1)
    c = b.build(b.pow(b.var(1), 13))
    x, = variables(f7, 1)
    assert expand(c) == x**13
    assert syntactic_degree(c) == 13
    assert len(c) < 13


def test_circuit_validator_rejects_forward_reference(f7):
    gate = Gate(id=1, kind="add", args=(1, 1))
    with pytest.raises(ValueError):
        Circuit(field=f7, nvars=1, gates=(gate,), output=1)


def test_instance_rejects_mixed_arity(f7):
    with pytest.raises(ValueError):
        Instance(
            field=f7,
            nvars=2,
            circuits=(variable_circuit(f7, 1, 1),),
        )


def test_syntactic_degree_exceeds_true_degree(f7):
    b = CircuitBuilder(f7, 1)
    x = b.var(1)
    square = b.mul(x, x)
    c = b.build(b.sub(square, square))
    assert syntactic_degree(c) == 2
    assert not expand(c)


def test_expand_respects_term_limit(f7):
    b = CircuitBuilder(f7, 4)
    s = b.sum([b.var(i) for i in range(1, 5)])
    c = b.build(b.pow(s, 8))
    with pytest.raises(exc.ResourceLimit) as e:
        expand(c, Limits(max_terms=50))
    assert e.value.gate is not None


def _twelve_gate_circuit(F):
    b = CircuitBuilder(F, 2, "g")
    x, y = b.var(1), b.var(2)
    a = b.const(F([1, 1]))
    c = b.const(F([3, 0]))
    xy = b.mul(x, y)
    axy = b.mul(a, xy)
    x2 = b.mul(x, x)
    s = b.add(axy, x2)
    t = b.add(s, c)
    u = b.mul(t, y)
    v = b.add(u, x)
    return b.build(b.mul(v, t))


def test_expand_agrees_with_eval_exhaustive():
    F = mk_field(5, 2)
    c = _twelve_gate_circuit(F)
    assert len(c) == 12
    p = expand(c)
    for a, b in itertools.product(range(F.q), repeat=2):
        point = [F.element([a % 5, a // 5]), F.element([b % 5, b // 5])]
        assert eval_generic(c, point) == p.eval(point)


def test_eval_generic_vectorised():
    F = mk_field(5, 2)
    c = _twelve_gate_circuit(F)
    a, b = np.meshgrid(np.arange(F.q), np.arange(F.q))
    a, b = a.ravel(), b.ravel()
    values = eval_generic(c, [a, b], VectorRing(F, F, a.shape))
    p = expand(c)
    for i in range(0, a.size, 37):
        point = [F.element([a[i] % 5, a[i] // 5]),
                 F.element([b[i] % 5, b[i] // 5])]
        assert values[i] == p.eval(point).value


def test_eval_generic_needs_ring_for_arrays(f7):
    c = variable_circuit(f7, 1, 1)
    with pytest.raises(TypeError):
        eval_generic(c, [np.arange(3)])


def test_eval_generic_on_laurent(load_instance):
    inst = load_instance("x_xy1")
    F = inst.field
    point = [LaurentPoly.eps(F, 1), LaurentPoly.eps(F, -1)]
    f1, f2 = (eval_generic(c, point) for c in inst.circuits)
    assert f1 == LaurentPoly.eps(F, 1)
    assert f2 == 0


def test_eval_generic_on_polynomials(load_instance):
    inst = load_instance("circle")
    t, = variables(inst.field, 1)
    value = eval_generic(inst.circuits[2], [t, t + 1])
    assert value == 2 * t * t + 2 * t + 1


def test_eval_generic_ints_are_reduced(load_instance):
    inst = load_instance("x_xy1")
    assert eval_generic(inst.circuits[1], [9, 4]) == 0


def test_eval_generic_wrong_arity(load_instance):
    with pytest.raises(exc.ArityMismatch):
        eval_generic(load_instance("x_xy1").circuits[0], [1])


@pytest.mark.parametrize("name", ["x_xy1", "circle", "mixed_p3",
                                  "gf4_square", "binary_quadratics"])
def test_formal_partial_matches_polynomial_partial(load_instance, name):
    inst = load_instance(name)
    for c in inst.circuits:
        for i in range(1, inst.nvars + 1):
            assert expand(formal_partial(c, i)) == expand(c).partial(i)


def test_formal_partial_prunes_to_zero(load_instance):
    c = load_instance("x_xy1").circuits[0]
    d = formal_partial(c, 2)
    assert len(d) == 1
    assert not expand(d)
    assert d.name == "df1/dx2"


def test_formal_partial_size_is_bounded(f7):
    b = CircuitBuilder(f7, 2)
    c = b.build(b.pow(b.add(b.var(1), b.var(2)), 37))
    d = formal_partial(c, 1)
    assert len(d) <= 3 * len(c)
    assert expand(d) == expand(c).partial(1)


def test_formal_partial_of_product_chain(f7):
    b = CircuitBuilder(f7, 2)
    x1 = b.var(1)
    g = b.mul(b.add(x1, b.var(2)), x1)
    for _ in range(20):
        g = b.mul(g, x1)
    c = b.build(g)
    d = formal_partial(c, 1)
    assert len(d) <= 3 * len(c)
    assert expand(d) == expand(c).partial(1)


def test_formal_partial_unit_factor(f7):
    b = CircuitBuilder(f7, 2)
    c = b.build(b.mul(b.var(1), b.var(2)))
    d = formal_partial(c, 1)
    assert len(d) == 1
    assert expand(d) == variables(f7, 2)[1]


def test_expand_charges_degree_growth(f7):
    b = CircuitBuilder(f7, 1)
    g = b.var(1)
    for _ in range(40):
        g = b.mul(g, g)
    c = b.build(g)
    assert len(expand(c.model_copy(update={"output": 11}))) == 1
    with pytest.raises(exc.ResourceLimit) as e:
        expand(c, Limits(max_terms=10**6))
    assert e.value.limit == "max_terms"


def test_from_polynomial_round_trip(f7):
    x, y = variables(f7, 2)
    p = 3 * x**3 * y + 5 * y**2 - 1
    assert expand(from_polynomial(p)) == p


def test_constant_circuit(f7):
    assert expand(constant_circuit(f7, 2, 3)) == Polynomial.constant(f7, 2, 3)


def test_linear_combination(load_instance):
    inst = load_instance("xy_sum")
    f1, f2, f3, f4 = inst.circuits
    g = linear_combination(inst.field, [f1, f2, f3, f4], [1, 1, 0, -1])
    assert not expand(g)
    assert len(g) >= 1


def test_linear_combination_arity(load_instance):
    inst = load_instance("xy_sum")
    with pytest.raises(exc.ArityMismatch):
        linear_combination(inst.field, inst.circuits, [1])


def test_inline_embeds_constants():
    F2, F4 = mk_field(2), mk_field(2, 2)
    b = CircuitBuilder(F2, 1)
    c = b.build(b.add(b.var(1), b.const(1)))
    b4 = CircuitBuilder(F4, 1)
    out = b4.inline(c, {1: b4.var(1)})
    x, = variables(F4, 1)
    assert expand(b4.build(out)) == x + 1


def test_instance_of(f7):
    x, y = variables(f7, 2)
    inst = instance_of(f7, [x, x * y - 1])
    assert inst.names == ("f1", "f2")
    assert expand(inst.circuits[1]) == x * y - 1
    assert inst.to_row()["m"] == 2

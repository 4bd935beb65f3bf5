from fractions import Fraction

import pytest

from algdep import exc
from algdep.annihilator import ann_at_zero_direct
from algdep.aps import (
    aps_decide,
    apply_plan,
    exact_zero,
    normalize,
    plan_field,
    principal_answer,
    random_reduce,
    reduction_stress,
    verify_witness,
)
from algdep.circuit import Instance, constant_circuit, instance_of
from algdep.config import Limits, make_rng
from algdep.field import mk_field
from algdep.laurent import Witness, load_witness, remark_family
from algdep.poly import Polynomial, variables

golden = [
    ("x_xy1", True, "independent-case"),
    ("x_x1", False, "principal-case"),
    ("x_x_xy1", True, "principal-case"),
    ("circle", True, "principal-case"),
    ("xy_sum", False, "reduced"),
    ("xy_sum_shifted", False, "reduced"),
]


@pytest.mark.parametrize("name,answer,route", golden)
def test_aps_decide(load_instance, name, answer, route):
    verdict = aps_decide(load_instance(name), make_rng(0, "aps"))
    assert (verdict.answer, verdict.route) == (answer, route)


def test_verdict_text(load_instance):
    verdict = aps_decide(load_instance("x_xy1"))
    assert verdict.to_text() == "APS: YES (route=independent-case)"
    verdict = aps_decide(load_instance("x_x1"))
    assert verdict.annihilator == "1*y1 + 6*y2 + 1"
    assert verdict.to_text().startswith("APS: NO (route=principal-case)")


def test_principal_answer(load_instance):
    answer, text = principal_answer(load_instance("x_x_xy1"))
    assert answer
    assert text == "1*y1 + 6*y2"


# g3 = f1 + f2 - f4 vanishes on xy_sum and is the constant -1 on
# xy_sum_shifted; the first plan hides the obstruction, the second exposes it.
adversarial = [(1, 0, 0, 0), (0, 0, 1, 0), (1, 1, 0, -1)]


def test_adversarial_plan_gives_false_yes(load_instance):
    g = apply_plan(load_instance("xy_sum"), adversarial)
    assert g.names == ("g1", "g2", "g3")
    answer, text = principal_answer(g)
    assert answer
    assert text == "1*y3"


def test_adversarial_plan_on_shifted_instance(load_instance):
    g = apply_plan(load_instance("xy_sum_shifted"), adversarial)
    answer, text = principal_answer(g)
    assert not answer
    assert text == "1*y3 + 1"


def test_apply_plan_checks_row_length(load_instance):
    with pytest.raises(exc.ArityMismatch):
        apply_plan(load_instance("xy_sum"), [(1, 0)])


def test_reduced_verdict_records_trials(load_instance):
    verdict = aps_decide(load_instance("xy_sum"), make_rng(0, "aps"))
    assert verdict.k == 2
    assert verdict.m == 4
    assert 1 <= verdict.trials <= verdict.attempts
    assert Fraction(verdict.delta) == Fraction(12, 49)
    assert "delta=12/49" in verdict.to_text()


def test_plan_field(load_instance):
    field, maxdeg = plan_field(load_instance("xy_sum"), 2)
    assert (field.q, maxdeg) == (49, 2)


def test_random_reduce(load_instance, rng):
    plan, g = random_reduce(load_instance("xy_sum"), 2, rng)
    assert g.m == 3
    assert g.field.q == 49
    assert plan.delta == Fraction(12, 49)
    assert len(plan.matrix) == 3


def test_random_reduce_needs_small_trdeg(load_instance, rng):
    with pytest.raises(exc.PreconditionViolation):
        random_reduce(load_instance("circle"), 2, rng)


def test_exhaustive_sweep_respects_limit(load_instance):
    with pytest.raises(exc.ResourceLimit):
        aps_decide(
            load_instance("xy_sum"),
            exhaustive=True,
            limits=Limits(max_sweep=1000),
        )


def test_oracle_cross_check(load_instance):
    verdict = aps_decide(load_instance("x_x1"), oracle=True)
    assert verdict.route == "direct-oracle"
    assert verdict.answer is False
    assert verdict.cross_check is False


def test_constant_circuit(f7):
    x, = variables(f7, 1)
    inst = instance_of(f7, [x, Polynomial.constant(f7, 1, 3)])
    verdict = aps_decide(inst)
    assert not verdict.answer
    assert verdict.route == "constant-circuit"


def test_normalize_drops_zero_circuits(f7):
    x, = variables(f7, 1)
    inst = instance_of(f7, [x, x - x])
    kept, constant = normalize(inst)
    assert kept.m == 1
    assert constant is None


def test_trials_must_be_positive(load_instance):
    with pytest.raises(ValueError):
        aps_decide(load_instance("x_xy1"), trials=0)


def test_verify_witness(instances, load_instance):
    inst = load_instance("x_xy1")
    good = load_witness(instances / "x_xy1.wit", inst.field, inst.nvars)
    bad = load_witness(instances / "x_xy1_bad.wit", inst.field, inst.nvars)
    assert verify_witness(inst, good)
    assert not verify_witness(inst, bad)


def test_verify_witness_arity(instances, load_instance):
    inst = load_instance("x_xy1")
    w = load_witness(instances / "x_xy1.wit", inst.field, 2)
    with pytest.raises(exc.ArityMismatch):
        verify_witness(load_instance("x_x1"), w)


@pytest.mark.parametrize("value,expected", [(0, True), (3, False)])
def test_verify_witness_without_variables(f7, value, expected):
    c = constant_circuit(f7, 0, value)
    inst = Instance(field=f7, nvars=0, circuits=(c,))
    w = Witness(field=mk_field(7, 2), coords=())
    assert verify_witness(inst, w) is expected


@pytest.mark.parametrize("d,n", [(2, 2), (2, 3), (3, 3)])
def test_remark_family_is_accepted(d, n):
    inst, w = remark_family(d, n)
    assert verify_witness(inst, w)


exact = [("x_xy1", None), ("x_x1", None), ("circle", (0, 0))]


@pytest.mark.parametrize("name,expected", exact)
def test_exact_zero(load_instance, name, expected):
    zero = exact_zero(load_instance(name))
    if expected is None:
        assert zero is None
    else:
        assert tuple(z.value for z in zero) == expected


def test_reduction_stress(load_instance):
    report = reduction_stress(load_instance("xy_sum"), 4, seed=3)
    assert not report.skipped
    assert report.truth is False
    assert report.disagreements <= report.preserved <= 4
    assert report.delta == Fraction(12, 49)


def test_reduction_stress_skips_small_cases(load_instance):
    report = reduction_stress(load_instance("x_x1"), 4)
    assert report.skipped
    assert "skipped" in report.to_text()


@pytest.mark.slow
@pytest.mark.timeout(3600)
@pytest.mark.parametrize("name", ["xy_sum", "xy_sum_shifted"])
def test_reduction_stress_within_delta(load_instance, name):
    report = reduction_stress(load_instance(name), 200, seed=17)
    assert report.seeds == 200
    assert report.preserved >= 150
    assert report.rate <= report.delta


oracle_corpus = [
    "x_xy1",
    "x_x1",
    "x_x_xy1",
    "circle",
    "xy_sum",
    "xy_sum_shifted",
    "frob_p2",
    "xp_yp",
    "mixed_p3",
    "gf4_square",
]


@pytest.mark.slow
@pytest.mark.parametrize("name", oracle_corpus)
def test_pipeline_agrees_with_direct_oracle(load_instance, name):
    inst = load_instance(name)
    verdict = aps_decide(inst, make_rng(0, "aps", 10), trials=10)
    assert verdict.answer is ann_at_zero_direct(inst)

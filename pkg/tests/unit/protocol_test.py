from fractions import Fraction

import numpy as np
import pytest

from algdep import exc
from algdep.annihilator import is_dependent
from algdep.circuit import instance_of
from algdep.config import Limits, make_rng
from algdep.field import mk_field
from algdep.poly import variables
from algdep.protocol import (
    ProtocolParams,
    SetOracle,
    acceptance_bounds,
    acceptance_threshold,
    am_decide,
    am_threshold,
    check_am_gap,
    check_coam_gap,
    coam_decide,
    coam_threshold,
    decode,
    encode,
    fiber_stats,
    gs_round,
    lemma_fractions,
    reduce_to_square,
    smallest_qprime,
)


@pytest.fixture(scope="module")
def coordinates():
    F = mk_field(7)
    x, y = variables(F, 2)
    yield instance_of(F, [x, y])


@pytest.fixture(scope="module")
def square_of_sum():
    F = mk_field(7)
    x, y = variables(F, 2)
    yield instance_of(F, [x + y, (x + y) ** 2])


@pytest.fixture(scope="module")
def f49():
    yield mk_field(7, 2)


def test_thresholds():
    assert am_threshold(2, 2, 2) == 64
    assert coam_threshold(2, 2, 2) == 16


def test_smallest_qprime(f7):
    assert smallest_qprime(f7, 64).q == 343
    assert smallest_qprime(f7, 16).q == 49
    assert smallest_qprime(f7, 6).q == 7


def test_params_for_instance(load_instance):
    params = ProtocolParams.for_instance(load_instance("x_xy1"), "am")
    assert (params.n, params.D, params.Dprime, params.k) == (2, 2, 2, 4)
    assert params.qprime.q == 343
    params.check()
    assert "threshold=64" in params.to_text()


def test_params_reject_small_field(load_instance, f49):
    params = ProtocolParams.for_instance(
        load_instance("x_xy1"), "am", qprime=f49
    )
    with pytest.raises(exc.ThresholdViolation) as e:
        params.check()
    assert e.value.required == 64


def test_params_reject_constant_circuit(f7):
    x, = variables(f7, 1)
    inst = instance_of(f7, [x, x**0])
    with pytest.raises(exc.ConstantCircuit):
        ProtocolParams.for_instance(inst, "coam")


def test_decode_encode():
    assert decode(11, 7, 2) == (4, 1)
    assert encode((4, 1), 7) == 11


def test_fibers_of_independent_pair(load_instance, f49):
    report = fiber_stats(load_instance("x_xy1"), f49)
    assert report.points == 49 * 49
    assert report.image_size == 48 * 49 + 1
    assert report.histogram == ((1, 48 * 49), (49, 1))
    assert report.total() == report.points


def test_fibers_of_dependent_pair(square_of_sum, f49):
    report = fiber_stats(square_of_sum, f49)
    assert report.image_size == 49
    assert report.histogram == ((49, 49),)
    assert report.fraction_above(4) == 1


def test_fiber_stats_needs_square(load_instance, f49):
    with pytest.raises(exc.PreconditionViolation):
        fiber_stats(load_instance("circle"), f49)


def test_fiber_stats_respects_budget(load_instance):
    with pytest.raises(exc.ResourceLimit):
        fiber_stats(
            load_instance("x_xy1"),
            mk_field(7, 3),
            Limits(enumeration_budget=1000),
        )


def test_lemma_fractions(load_instance):
    inst = load_instance("x_xy1")
    F343 = mk_field(7, 3)
    fractions = lemma_fractions(fiber_stats(inst, F343), 2, 2)
    assert fractions.small_preimage == Fraction(342, 343)
    assert fractions.small_preimage_bound == 1 - Fraction(8, 343)
    assert fractions.independent_holds()
    assert not fractions.dependent_holds()


def test_am_gap(load_instance, square_of_sum):
    for inst, expected in [
        (load_instance("x_xy1"), "independent"),
        (square_of_sum, "dependent"),
    ]:
        params = ProtocolParams.for_instance(inst, "am")
        check = check_am_gap(fiber_stats(inst, params.qprime), params)
        assert check.verdict == expected
        assert check.to_text().startswith(f"am-gap: {expected}")


def test_coam_gap(load_instance, square_of_sum):
    for inst, expected in [
        (load_instance("x_xy1"), "independent"),
        (square_of_sum, "dependent"),
    ]:
        params = ProtocolParams.for_instance(inst, "coam")
        assert params.qprime.q == 49
        check = check_coam_gap(fiber_stats(inst, params.qprime), params)
        assert check.verdict == expected


def test_reduce_to_square(f7, rng):
    x, y, z = variables(f7, 3)
    reduction = reduce_to_square(instance_of(f7, [x * y, z]), rng)
    square = reduction.instance
    assert (square.m, square.nvars) == (2, 2)
    assert square.field.q == 7**5
    assert len(reduction.matrix) == 3
    assert all(len(row) == 2 for row in reduction.matrix)


def test_reduce_to_square_shortcuts(load_instance, rng):
    assert reduce_to_square(load_instance("x_x1"), rng).shortcut == (
        "dependent"
    )
    inst = load_instance("x_xy1")
    assert reduce_to_square(inst, rng).instance == inst


def test_acceptance_bounds_are_separated():
    for m in [1, 2, 8, 100, 4096]:
        honest, cheating = acceptance_bounds(m)
        assert honest > acceptance_threshold(m) > cheating


def _acceptance_rate(size, m, rounds=400):
    rng = make_rng(size, "members")
    members = np.sort(rng.choice(2**12, size=size, replace=False))
    oracle = SetOracle(12, members)
    accepted = 0
    for t in range(rounds):
        _, accept = gs_round(oracle, m, make_rng(size, "round", t), t)
        accepted += accept
    return accepted / rounds


@pytest.mark.flaky(reruns=3)
def test_round_separates_large_and_small_sets():
    m = 8
    tau = acceptance_threshold(m)
    assert _acceptance_rate(2 * m, m) > tau
    assert _acceptance_rate(m, m) < tau


def test_round_rejects_empty_set(rng):
    row, accept = gs_round(SetOracle(4, np.array([], dtype=np.int64)), 2,
                           rng)
    assert not accept
    assert row.response is None
    assert "reject" in row.to_text()


def test_round_needs_positive_bound(rng):
    with pytest.raises(ValueError):
        gs_round(SetOracle(4, np.arange(3)), 0, rng)


@pytest.mark.slow
def test_am_decide(coordinates, square_of_sum):
    # D = 1 gives a two-bit hash: a lone point is accepted at rate 1/4
    params = ProtocolParams.for_instance(coordinates, "am", rounds=256)
    independent = am_decide(coordinates, params)
    assert independent.set_size == 1
    assert independent.verdict == "independent"
    dependent = am_decide(
        square_of_sum, ProtocolParams.for_instance(square_of_sum, "am")
    )
    assert dependent.verdict == "dependent"
    assert len(dependent.rounds) == 64


@pytest.mark.flaky(reruns=3)
def test_coam_decide(load_instance, square_of_sum):
    inst = load_instance("x_xy1")
    params = ProtocolParams.for_instance(inst, "coam", rounds=32)
    transcript = coam_decide(inst, params)
    assert transcript.verdict == "independent"
    assert transcript.claimed == 98
    assert transcript.set_size == 48 * 49 + 1
    params = ProtocolParams.for_instance(square_of_sum, "coam", rounds=32)
    assert coam_decide(square_of_sum, params).verdict == "dependent"


def test_decide_shortcut(load_instance):
    inst = load_instance("x_x1")
    params = ProtocolParams.for_instance(inst, "coam")
    transcript = coam_decide(inst, params)
    assert transcript.shortcut
    assert transcript.verdict == "dependent"
    assert "shortcut" in transcript.to_text()


def test_decide_is_deterministic(load_instance):
    inst = load_instance("x_xy1")
    params = ProtocolParams.for_instance(inst, "coam", rounds=4, seed=11)
    assert coam_decide(inst, params) == coam_decide(inst, params)


@pytest.mark.slow
@pytest.mark.timeout(3600)
@pytest.mark.parametrize("mode", ["am", "coam"])
def test_decisions_agree_with_dependence(
    load_instance, coordinates, square_of_sum, mode
):
    decide = am_decide if mode == "am" else coam_decide
    corpus = [coordinates, square_of_sum] + [
        load_instance(name) for name in ("x_xy1", "frob_p2", "xp_yp")
    ]
    for inst in corpus:
        dependent = is_dependent(inst, range(inst.m))
        truth = "dependent" if dependent else "independent"
        rounds = 256 if mode == "am" and inst.D == 1 else 64
        params = ProtocolParams.for_instance(inst, mode, rounds=rounds)
        agree = sum(
            decide(inst, params, make_rng(seed, mode)).verdict == truth
            for seed in range(100)
        )
        assert agree >= 95, inst.names

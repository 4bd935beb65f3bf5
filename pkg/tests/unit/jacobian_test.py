import pytest

from algdep.annihilator import trdeg
from algdep.circuit import expand, instance_of
from algdep.config import make_rng
from algdep.field import mk_field
from algdep.jacobian import jacobian_matrix, jacobian_rank
from algdep.poly import variables


def test_matrix_entries_are_partials(load_instance):
    inst = load_instance("x_xy1")
    J = jacobian_matrix(inst)
    x, y = variables(inst.field, 2)
    assert [[expand(e) for e in row] for row in J] == [
        [x**0, 0 * x],
        [y, x],
    ]


def test_full_rank(load_instance, rng):
    report = jacobian_rank(load_instance("x_xy1"), rng)
    assert report.rank == 2
    assert report.full
    assert report.applicable
    assert "full" in report.to_text()


def test_circle_rank_is_two(rng):
    F = mk_field(101)
    x, y = variables(F, 2)
    report = jacobian_rank(instance_of(F, [x, y, x * x + y * y]), rng)
    assert (report.rank, report.m) == (2, 3)
    assert not report.full
    assert report.applicable


def test_frobenius_is_flagged(load_instance, rng):
    report = jacobian_rank(load_instance("xp_yp"), rng)
    assert report.rank == 0
    assert not report.applicable
    assert "inapplicable" in report.reason


def test_frobenius_sum_rank(load_instance, rng):
    report = jacobian_rank(load_instance("frob_p2"), rng)
    assert report.rank == 1
    assert "deficient" in report.to_text()


def test_rank_is_deterministic(load_instance):
    inst = load_instance("xy_sum")
    a = jacobian_rank(inst, make_rng(3, "jacobian"))
    b = jacobian_rank(inst, make_rng(3, "jacobian"))
    assert a == b


def test_trials_must_be_positive(load_instance, rng):
    with pytest.raises(ValueError):
        jacobian_rank(load_instance("circle"), rng, trials=0)


def test_vanishing_determinant_is_flagged(load_instance, rng):
    report = jacobian_rank(load_instance("mixed_p3"), rng)
    assert report.rank == 1
    assert not report.applicable


def _f101_corpus(random_poly):
    F = mk_field(101)
    corpus = []
    for i in range(20):
        rng = make_rng(i, "jacobian-corpus")
        n = int(rng.integers(2, 4))
        if i % 4 == 0:
            g = random_poly(F, n, 2, rng)
            polys = [g, g * g + 3, random_poly(F, n, 1, rng)]
        else:
            m = int(rng.integers(1, 4))
            polys = [random_poly(F, n, 2, rng) for _ in range(m)]
        corpus.append(instance_of(F, polys))
    return corpus


@pytest.mark.slow
def test_rank_never_exceeds_trdeg(random_poly):
    for i, inst in enumerate(_f101_corpus(random_poly)):
        report = jacobian_rank(inst, make_rng(i, "jacobian"))
        k = trdeg(inst).k
        assert report.applicable
        assert report.rank <= k
        assert report.rank == k

from pathlib import Path

import pytest

import algdep

INSTANCES = Path(__file__).parent / "instances"


@pytest.fixture(scope="session")
def instances():
    yield INSTANCES


@pytest.fixture(scope="session")
def load_instance():
    def load(name):
        return algdep.circuit.load(INSTANCES / f"{name}.inst")

    yield load


@pytest.fixture
def rng():
    yield algdep.make_rng(1234, "tests")


@pytest.fixture(scope="session")
def f2():
    yield algdep.mk_field(2)


@pytest.fixture(scope="session")
def f5():
    yield algdep.mk_field(5)


@pytest.fixture(scope="session")
def f7():
    yield algdep.mk_field(7)


@pytest.fixture(scope="session")
def random_poly():
    """Seeded nonconstant polynomial of total degree <= ``degree``."""

    def make(field, nvars, degree, rng):
        monomials = algdep.poly.monomials_up_to(nvars, degree)
        while True:
            coeffs = rng.integers(0, field.q, size=len(monomials))
            keep = rng.random(len(monomials)) < 0.5
            terms = {
                m: int(c) for m, c, k in zip(monomials, coeffs, keep) if k
            }
            p = algdep.Polynomial(field, nvars, terms)
            if p.total_degree() >= 1:
                return p

    yield make

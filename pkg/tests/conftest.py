import random
from fractions import Fraction

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from stabwalls.lattice import CharVector, SurfaceLattice

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def plane():
    """Picard rank one, (H^2) = 1, K = -3H."""
    return SurfaceLattice(((1,),), (1,), (-3,), 1)


def blowup():
    """<H, C> with H^2 = 1, C^2 = -1, K = -3H + C."""
    return SurfaceLattice(((1, 0), (0, -1)), (1, 0), (-3, 1), 1, C=(0, 1), pullback=(True, False))


def quadric():
    """P^1 x P^1: hyperbolic plane, H = (1, 1), K = (-2, -2)."""
    return SurfaceLattice(((0, 1), (1, 0)), (1, 1), (-2, -2), 1)


def k3_like():
    return SurfaceLattice(((2,),), (1,), (0,), 2)


def rank_three():
    """Blow-up of P^2 at two points."""
    return SurfaceLattice(((1, 0, 0), (0, -1, 0), (0, 0, -1)), (3, -1, -1), (-3, 1, 1), 1)


LATTICES = {"plane": plane, "blowup": blowup, "quadric": quadric, "k3": k3_like, "rank3": rank_three}


@pytest.fixture
def P2():
    return plane()


@pytest.fixture
def Bl():
    return blowup()


def rationals(lo=-6, hi=6, max_den=4):
    return st.builds(Fraction, st.integers(lo, hi), st.integers(1, max_den))


def nonzero_rationals(lo=-6, hi=6, max_den=4):
    return rationals(lo, hi, max_den).filter(lambda x: x != 0)


def char_vectors(rho, rank=st.integers(-3, 3)):
    return st.builds(
        lambda r, c, s: CharVector(Fraction(r), tuple(c), s),
        rank,
        st.lists(rationals(), min_size=rho, max_size=rho),
        rationals(),
    )


def vectors(rho, **kw):
    return st.lists(rationals(**kw), min_size=rho, max_size=rho).map(tuple)


def rq(rng: random.Random, lo=-9, hi=9, max_den=6) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, max_den))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

import random
from fractions import Fraction

import pytest
from mpmath import mp, mpf

from cflab.exact import RealDescriptor, golden_ratio, sqrt2

mp.dps = 60


@pytest.fixture
def x_sqrt2():
    return sqrt2()


@pytest.fixture
def x_golden():
    return golden_ratio()


@pytest.fixture
def x_alt12():
    # [0; 1, 2, 1, 2, ...] = sqrt(3) - 1
    return RealDescriptor(0, (), (1, 2), digit_bound=2, label="cf: 0; (period: 1 2)")


SQRT2 = mp.sqrt(2)
GOLDEN = (1 + mp.sqrt(5)) / 2
ALT12 = mp.sqrt(3) - 1

ORACLE_VALUES = {
    "cf: 1; (period: 2)": SQRT2,
    "cf: 1; (period: 1)": GOLDEN,
    "cf: 0; (period: 1 2)": ALT12,
}


def oracle_dist(q: int, value: mpf) -> mpf:
    """||q*value|| via 60-digit decimal arithmetic (test oracle only)."""
    t = mp.frac(q * value)
    return min(t, 1 - t)


def frac_mpf(f: Fraction) -> mpf:
    return mp.mpf(f.numerator) / mp.mpf(f.denominator)


def enclosure_holds(enc, truth: mpf) -> bool:
    return frac_mpf(enc.lo) <= truth <= frac_mpf(enc.hi)


def oracle_value(x: RealDescriptor) -> mpf:
    return ORACLE_VALUES[x.label]


def random_fraction(rng: random.Random, max_den: int = 10**6) -> Fraction:
    den = rng.randint(1, max_den)
    num = rng.randint(-max_den, max_den)
    return Fraction(num, den)

import random
from fractions import Fraction

import pytest

from fcplx.barcodes import Bar, Barcode, from_barcode
from fcplx.complexes import make_complex
from fcplx.rationals import POS_INF


def interval_free(a, degree=0):
    """One-generator complex, infinite bar at a."""
    return from_barcode(Barcode([Bar(degree, Fraction(a), POS_INF)]))


def interval_pair(c, d, degree=1):
    """Two-generator complex with d(y) = x, finite bar [d, c)."""
    return from_barcode(Barcode([Bar(degree, Fraction(d), Fraction(c))]))


@pytest.fixture
def e2_31():
    return make_complex([("y", 0, 3), ("x", 1, 1)], {"y": ["x"]})


@pytest.fixture
def rng():
    return random.Random(20240817)

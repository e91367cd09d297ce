import math
import random
from fractions import Fraction

import pytest

from lattes.core import DegenerateParameter, MarkedPoint, lift
from lattes.escape import ExactLog
from lattes.heights import (
    is_torsion,
    neron_tate,
    pairing_height,
    set_height,
    weil_limit,
    weil_orbit,
)


@pytest.mark.parametrize("a", [2, 3, 5])
def test_exact_zero_at_a_and_a_squared(a):
    C = lift(MarkedPoint.constant(a))
    for t in (a, a * a):
        h = neron_tate(C, t)
        assert h.certificate == "exact-zero"
        assert h.value == 0


def test_decomposition_at_four(a2):
    h = neron_tate(a2, 4)
    parts = {str(p): v.exact for p, v in h.decomposition}
    assert parts == {"inf": ExactLog({2: Fraction(5, 2)}), "2": ExactLog({2: Fraction(-5, 2)})}


def test_positive_height(a2):
    h = neron_tate(a2, 3)
    assert h.certificate == "positive"
    assert h.lower_bound > 0
    assert abs(h.value - weil_limit(a2, 3, 7)) < 1e-2


def test_degenerate_parameter(a2):
    for t in (0, 1):
        with pytest.raises(DegenerateParameter):
            neron_tate(a2, t)


def test_weil_limit_torsion(a2):
    for n in (2, 4, 8):
        assert weil_limit(a2, 4, n) == 0
    orbit = weil_orbit(a2, 4, 2)
    # projective points: compare up to sign
    assert [(z, w) if (z, w) > (0, 0) else (-z, -w) for z, w in orbit] == [(2, 1), (0, 1), (1, 0)]


def test_set_height(a2):
    assert set_height(a2, [4]) == 0
    assert set_height(a2, [2, 4]) == 0
    assert abs(set_height(a2, [3, 4]) - neron_tate(a2, 3).value / 2) < 1e-15
    with pytest.raises(ValueError):
        set_height(a2, [])


def test_pairing_examples(a2):
    assert abs(pairing_height(a2, [2, 4])) < 1e-8
    d = 2
    assert abs(pairing_height(a2, [3, 5]) - 8 / d * set_height(a2, [3, 5])) < 1e-6
    assert abs(pairing_height(a2, [5, 3]) - pairing_height(a2, [3, 5])) < 1e-12
    with pytest.raises(ValueError):
        pairing_height(a2, [3])
    with pytest.raises(ValueError, match="diagonal"):
        pairing_height(a2, [3, Fraction(6, 2)])


def test_is_torsion(a2):
    v = is_torsion(a2, 4)
    assert (v.verdict, v.tail, v.period) == ("torsion", 2, 1)
    assert is_torsion(a2, 3).verdict == "not-torsion"


def test_height_zero_iff_torsion_on_sample(a2, a3):
    rng = random.Random(5)
    sample = {Fraction(rng.randint(-30, 30), rng.randint(1, 6)) for _ in range(12)} | {2, 3, 4, 9}
    for C in (a2, a3):
        for t in sorted(sample - {0, 1}):
            v = is_torsion(C, t)
            h = neron_tate(C, t)
            assert h.value >= -1e-12
            if v.verdict == "torsion":
                assert h.certificate == "exact-zero" or abs(h.value) < 1e-9
            if h.certificate == "exact-zero":
                assert v.verdict == "torsion"

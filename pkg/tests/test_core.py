from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from lattes.core import (
    ARCH,
    INF,
    A_exponent,
    DegenerateParameter,
    InadmissiblePoint,
    LevelCapExceeded,
    MarkedPoint,
    Place,
    bad_places,
    closed_resultant,
    first_iterate,
    iterate,
    lattes_eval,
    lattes_pair,
    lift,
    orbit,
)
from lattes.forms import BinaryForm, form_resultant
from lattes.parse import parse_marked_point

T1, T2 = sp.symbols("t1 t2")


def sym(f: BinaryForm):
    d = f.degree
    return sum(sp.Rational(c.numerator, c.denominator) * T1 ** (d - i) * T2 ** i for i, c in enumerate(f.coeffs))


def test_lattes_eval_examples():
    assert lattes_eval(Fraction(4), Fraction(2)) == 0
    for t in (Fraction(3), 2 + 1j):
        assert lattes_eval(t, 0) == INF
        assert lattes_eval(t, 1) == INF
        assert lattes_eval(t, t) == INF
        assert lattes_eval(t, INF) == INF
    with pytest.raises(DegenerateParameter, match="degenerate parameter"):
        lattes_eval(1, 2)


def test_lattes_pair_matches_affine_map():
    t, z = Fraction(7, 3), Fraction(-5, 2)
    a, b = lattes_pair(t, 1, z, 1)
    assert Fraction(a) / Fraction(b) == lattes_eval(t, z)


def test_lift_examples():
    C = lift(MarkedPoint.constant(2))
    assert (C.c1, C.c2) == (BinaryForm([2]), BinaryForm([1]))
    C = lift(parse_marked_point("t+2"))
    assert (C.c1, C.c2) == (BinaryForm([1, 2]), BinaryForm([0, 1]))
    C = lift(parse_marked_point("(t+1)/(t-3)"))
    assert (C.c1, C.c2) == (BinaryForm([1, 1]), BinaryForm([1, -3]))


@pytest.mark.parametrize("bad, which", [("0", "0"), ("1", "1"), ("t", "t"), ("(2*t)/2", "t"), ("(t-1)/(t-1)", "1")])
def test_inadmissible(bad, which):
    with pytest.raises(InadmissiblePoint) as e:
        parse_marked_point(bad)
    assert e.value.which == which
    assert f"equals {which}" in str(e.value)


@pytest.mark.parametrize("a", [2, 3])
def test_first_iterate_constant(a):
    s = first_iterate(lift(MarkedPoint.constant(a)))
    assert s.d == 2
    assert s.P == BinaryForm([1, -2 * a * a, a ** 4])
    # 4 a (1 - a) t2 (t1 - a t2)
    assert s.Q == BinaryForm([0, 4 * a * (1 - a), -4 * a * a * (1 - a)])


def test_constant_point_resultant_pattern():
    # symbolic Sylvester oracle for F(z, w) as forms in (t1, t2): |Res| = 16 z^4 w^8 (w - z)^4
    z, w = sp.symbols("z w")
    P = sp.Poly(sp.expand((T1 * w ** 2 - T2 * z ** 2) ** 2), T1, T2)
    Q = sp.Poly(sp.expand(4 * T2 * z * w * (w - z) * (T1 * w - T2 * z)), T1, T2)
    p = [P.coeff_monomial(T1 ** (2 - i) * T2 ** i) for i in range(3)]
    q = [Q.coeff_monomial(T1 ** (2 - i) * T2 ** i) for i in range(3)]
    syl = sp.Matrix([p + [0], [0] + p, q + [0], [0] + q])
    res = sp.factor(syl.det())
    assert sp.expand(res ** 2 - (16 * z ** 4 * w ** 8 * (w - z) ** 4) ** 2) == 0
    # and our exact resultant agrees at integer points
    for zz, ww in [(2, 1), (3, 1), (5, 2), (-1, 3)]:
        p = BinaryForm([ww ** 4, -2 * ww ** 2 * zz ** 2, zz ** 4])
        q = BinaryForm([0, 4 * zz * ww * (ww - zz) * ww, -4 * zz * ww * (ww - zz) * zz])
        assert abs(form_resultant(p, q)) == 16 * zz ** 4 * ww ** 8 * (ww - zz) ** 4


def test_degree_law_and_leading_coefficients(suite):
    for C in suite:
        states = orbit(C, 4)
        s1 = states[0]
        for s in states:
            k = 4 ** (s.n - 1)
            assert s.degree == k * s1.d
            assert s.P(1, 0) == s1.scalars.p10 ** k
            assert s.P(0, 1) == s1.scalars.p01 ** k
            assert s.P(1, 1) - s.Q(1, 1) == s1.scalars.diff11 ** k
            assert s.Q(1, 0) == 0


@pytest.mark.parametrize("text", ["2", "t+2"])
def test_square_root_identities(text):
    # exact expansion of level n+1 against the R-halves of level n
    C = lift(parse_marked_point(text))
    s, s_next = orbit(C, 2)
    R0, R1, Rt = (sym(r) for r in s.halves)
    P2, Q2 = sym(s_next.P), sym(s_next.Q)
    assert sp.expand(P2 - R0 ** 2) == 0
    assert sp.expand(P2 - Q2 - R1 ** 2) == 0
    assert sp.expand(T2 * P2 - T1 * Q2 - T2 * Rt ** 2) == 0


def test_iterate_matches_symbolic_map():
    C = lift(MarkedPoint.constant(3))
    s1, s2 = orbit(C, 2)
    P, Q = sym(s1.P), sym(s1.Q)
    a = T1 * Q ** 2 - T2 * P ** 2
    F = (sp.expand(a ** 2 / T2 ** 2), sp.expand(4 * T2 * P * Q * (Q - P) * (T1 * Q - T2 * P) / T2 ** 2))
    assert sp.expand(F[0] - sym(s2.P)) == 0
    assert sp.expand(F[1] - sym(s2.Q)) == 0


def test_closed_resultant_small(suite):
    for C in suite:
        states = orbit(C, 2)
        s1 = states[0]
        assert A_exponent(1) == 0
        assert closed_resultant(s1, 1) == form_resultant(s1.P, s1.Q)
        assert abs(closed_resultant(s1, 2)) == abs(form_resultant(states[1].P, states[1].Q))
    assert closed_resultant(first_iterate(lift(MarkedPoint.constant(2))), 1) == 256


def test_bad_places_examples(suite):
    s2 = first_iterate(lift(MarkedPoint.constant(2)))
    assert bad_places(s2) == [Place(2)]
    s3 = first_iterate(lift(MarkedPoint.constant(3)))
    assert bad_places(s3) == [Place(2), Place(3)]
    for C in suite:
        assert Place(2) in bad_places(first_iterate(C))


def test_level_cap():
    C = lift(MarkedPoint.constant(2))
    with pytest.raises(LevelCapExceeded):
        orbit(C, 7)


def test_orbit_json():
    s = first_iterate(lift(MarkedPoint.constant(2)))
    js = s.to_json()
    assert js["degree"] == 2 and js["P"] == ["1", "-8", "16"]
    assert js["scalars"]["P1(0,1)"] == "16"


def test_c_estimate_small_sample():
    rng = np.random.default_rng(1)
    t = rng.uniform(0, 1 / 16, 500) * np.exp(2j * np.pi * rng.uniform(size=500))
    z = rng.normal(size=500) + 1j * rng.normal(size=500)
    w = rng.normal(size=500) + 1j * rng.normal(size=500)
    A, B = lattes_pair(1, t, z, w)
    lhs = np.maximum(abs(A), abs(B)) / np.maximum(abs(z), abs(w)) ** 4
    assert np.all(lhs >= abs(t) ** 2 / 16)

import math

import numpy as np
import pytest

from lattes.core import MarkedPoint, lift
from lattes.escape import ComplexConstant, escape_arch
from lattes.measure import (
    bifurcation_potential,
    box_fraction,
    box_mass,
    distinct_check,
    empirical_potential,
    grid_boxes,
    potential_I,
    rho_lambda,
    total_mass,
)
from lattes.parse import parse_marked_point
from lattes.quadrature import QuadratureError, QuadratureSpec, p1_integral

T_SAMPLE = (2, -1, 0.5 + 0.5j)


@pytest.mark.parametrize("t", T_SAMPLE)
def test_potential_at_zero(t):
    r = potential_I(0, t)
    assert abs(r.value - math.log(abs(t))) <= 1e-4


@pytest.mark.parametrize("t", T_SAMPLE)
def test_unit_mass(t):
    assert abs(total_mass(t) - 1) <= 1e-4


def test_rho_symmetries():
    # the density only depends on t up to the anharmonic group and conjugation
    base = rho_lambda(0.3 + 0.4j)
    for t in (0.3 - 0.4j,):
        assert abs(rho_lambda(t).rho - base.rho) < 1e-8 * base.rho
    t = 0.3 + 0.4j
    # rho(1 - t) = rho(t) since z -> 1 - z swaps 0 and 1
    assert abs(rho_lambda(1 - t).rho - base.rho) < 1e-8 * base.rho


def test_potential_growth():
    # far away the potential behaves like 2 log|z|
    t = 2
    z = 1e4
    assert abs(potential_I(z, t).value - 2 * math.log(z)) < 1e-3


def test_quadrature_failure_reported():
    with pytest.raises(QuadratureError):
        p1_integral(lambda z: np.ones(z.shape), 2, spec=QuadratureSpec(tol=1e-30, max_level=1, min_level=1))
    with pytest.raises(ValueError):
        p1_integral(lambda z: np.ones(z.shape), 1)


@pytest.mark.parametrize("a", [2, 3])
@pytest.mark.parametrize("t", [2.5, -1.5 + 0.7j, 0.3j])
def test_pipeline_agreement_constant(a, t):
    C = lift(MarkedPoint.constant(a))
    assert abs(bifurcation_potential(C, t).value - escape_arch(C, t, 1).value) <= 5e-3


@pytest.mark.parametrize("text", ["t/2", "1/t^2"])
def test_pipeline_agreement_with_gcd(text):
    C = lift(parse_marked_point(text))
    for t in (-1.5 + 0.7j, 0.3j):
        assert abs(bifurcation_potential(C, t).value - escape_arch(C, t, 1).value) <= 5e-3


def test_complex_constant_potential():
    a = 1 + 1j
    for t in (2.5, -0.5 + 1j):
        b = bifurcation_potential(a, t).value
        e = escape_arch(ComplexConstant(a), t, 1).value
        assert abs(b - e) <= 5e-3


def test_box_mass_properties(a2):
    upper = box_mass(a2, (1.5, 2.5, 0.2, 1.0))
    lower = box_mass(a2, (1.5, 2.5, -1.0, -0.2))
    left = box_mass(a2, (1.5, 2.0, 0.2, 1.0))
    right = box_mass(a2, (2.0, 2.5, 0.2, 1.0))
    assert upper > 0
    assert abs(upper - lower) < 1e-9
    assert abs(upper - left - right) < 1e-8
    assert box_mass(a2, (30, 31, 30, 31)) < 1e-4


def test_box_mass_through_special_points(a2):
    with pytest.raises(ValueError):
        box_mass(a2, (-0.5, 0.5, 0.0, 0.5))
    m_up = box_mass(a2, (-0.5, 0.5, 0.0, 0.5), indent=0.05)
    m_dn = box_mass(a2, (-0.5, 0.5, -0.5, 0.0), indent=0.05)
    whole = box_mass(a2, (-0.5, 0.5, -0.5, 0.5))
    assert abs(m_up - m_dn) < 1e-8
    assert abs(m_up + m_dn - whole) < 1e-6


def test_box_fraction_edges():
    roots = np.array([0.5 + 0.5j, 1.0 + 0.5j, 3 + 3j])
    mult = np.array([1, 2, 1])
    boxes = grid_boxes(0, 2, 0, 1, 2, 1)
    fr = [box_fraction(roots, mult, b) for b in boxes]
    assert fr == [0.5, 0.25]
    assert empirical_potential(np.array([0j]), np.array([1]), 2.0) == pytest.approx(math.log(2))


def test_distinct_measures():
    r = distinct_check(2, 3)
    assert r.distinguished
    x, y = r.closed["t=0"]
    assert abs(abs(x - y) - abs(2 * math.log(2) - 2 * math.log(3))) < 1e-12
    assert abs(abs(x - y) - 0.811) < 1e-3
    same = distinct_check(2, 2)
    assert not same.distinguished
    assert same.grid_sup == 0

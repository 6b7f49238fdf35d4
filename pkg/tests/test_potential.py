import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tunneltime.errors import MultiBump, NoBarrier, NonDecaying
from tunneltime.potential import (
    Eckart,
    Gaussian,
    PotentialSpec,
    Rectangular,
    Sampled,
    asymptotic_check,
    default_cuts,
    evaluate,
    find_turning_points,
    footprint,
    zero_potential,
)


def test_evaluate_scalar_and_array():
    g = Gaussian(2.0, 0.0, 1.0)
    assert isinstance(evaluate(g, 0.0), float)
    assert evaluate(g, 0.0) == 2.0
    x = np.linspace(-1, 1, 5)
    np.testing.assert_allclose(g(x), 2.0 * np.exp(-0.5 * x**2), rtol=1e-15)


def test_rectangular_edges_inclusive():
    r = Rectangular(1.0, 0.0, 2.0)
    assert r(0.0) == 1.0 and r(2.0) == 1.0
    assert r(-1e-12) == 0.0 and r(2.0 + 1e-12) == 0.0


def test_eckart_shape():
    e = Eckart(3.0, 2.0)
    assert e(0.0) == 3.0
    assert e(2.0) == pytest.approx(3.0 / np.cosh(1.0) ** 2, rel=1e-15)


def test_gaussian_turning_points_closed_form():
    g = Gaussian(1.0, 0.0, 1.0)
    tp = find_turning_points(g, np.exp(-0.5))
    assert tp.a == pytest.approx(-1.0, abs=1e-10)
    assert tp.b == pytest.approx(1.0, abs=1e-10)


def test_gaussian_turning_points_symmetric_about_centre():
    g = Gaussian(2.0, 0.7, 1.3)
    tp = find_turning_points(g, 0.4)
    assert abs((tp.b - 0.7) - (0.7 - tp.a)) < 2e-10


def test_rectangular_turning_points_are_edges():
    tp = find_turning_points(Rectangular(1.0, -1.0, 3.0), 0.5)
    assert (tp.a, tp.b) == (-1.0, 3.0)


def test_no_barrier_at_or_above_top():
    with pytest.raises(NoBarrier):
        find_turning_points(Gaussian(1.0, 0.0, 1.0), 1.0)
    with pytest.raises(NoBarrier):
        find_turning_points(Eckart(1.0, 1.0), 1.5)


def test_double_bump_rejected():
    x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    u = np.array([0.0, 1.0, 0.1, 1.0, 0.0])
    with pytest.raises(MultiBump):
        find_turning_points(Sampled(x, u), 0.5)


def test_gaussian_asymptotic_cut():
    lo, hi = default_cuts(Gaussian(1.0, 0.0, 1.0))
    expected = np.sqrt(2.0 * np.log(1e12))
    assert hi == pytest.approx(expected, rel=1e-12)
    assert lo == pytest.approx(-expected, rel=1e-12)


class _Plateau(PotentialSpec):
    mass = 1.0
    peak = 1.0
    peak_position = 0.0
    length_scale = 1.0

    def _u(self, x):
        return np.ones_like(x)


def test_non_decaying_rejected():
    with pytest.raises(NonDecaying):
        asymptotic_check(_Plateau(), 1e-6)


def test_sampled_validation():
    with pytest.raises(ValueError):
        Sampled([0.0, 1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        Sampled([0.0, 2.0, 1.0], [0.0, 1.0, 0.0])
    s = Sampled([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])
    assert s(0.5) == 0.5 and s(-1.0) == 0.0 and s(3.0) == 0.0
    with pytest.raises(ValueError):
        s.u[0] = 5.0


def test_parameter_validation():
    with pytest.raises(ValueError):
        Rectangular(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        Gaussian(1.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        Eckart(1.0, 1.0, mass=0.0)


def test_zero_potential_footprint():
    z = zero_potential(-2.0, 3.0)
    assert z.peak == 0.0
    assert footprint(z, 0.5) == (-2.0, 3.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.02, 0.97), st.floats(0.02, 0.97))
def test_forbidden_interval_shrinks_with_energy(e1, e2):
    g = Eckart(1.0, 1.5)
    lo, hi = sorted((e1, e2))
    t1, t2 = find_turning_points(g, lo), find_turning_points(g, hi)
    assert t1.a < t1.b
    assert t1.a <= t2.a + 1e-10 and t2.b <= t1.b + 1e-10

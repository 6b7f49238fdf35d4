import numpy as np
import pytest

from tunneltime.errors import Divergent, NoBarrier, TurningPointRegion
from tunneltime.potential import Eckart, Gaussian, Rectangular, find_turning_points
from tunneltime.scatter import interior_wavefunction
from tunneltime.wkb import (
    barrier_action,
    imaginary_traversal_time,
    transmission_wkb,
    wkb_report,
    wkb_wavefunction,
)

# frozen from mpmath quadrature at 40 digits
GAUSS_CASES = [
    # (height, center, sigma, mass, E, a, b, action, |t|)
    (1.0, 0.0, 1.0, 1.0, 0.5, -1.177410022515474691, 1.177410022515474691,
     1.766335568828421023, 4.0674426431838845162),
    (2.0, 0.5, 1.5, 2.0, 0.3, -2.4218213381359350082, 3.4218213381359350082,
     10.445785923628107144, 9.5130291396796423271),
]


@pytest.mark.parametrize("case", GAUSS_CASES)
def test_gaussian_against_mpmath(case):
    v0, x0, s, m, e, a, b, action, tau = case
    g = Gaussian(v0, x0, s, m)
    tp = find_turning_points(g, e)
    assert tp.a == pytest.approx(a, abs=1e-10)
    assert tp.b == pytest.approx(b, abs=1e-10)
    assert barrier_action(g, e) == pytest.approx(action, rel=1e-10)
    assert imaginary_traversal_time(g, e) == pytest.approx(tau, rel=1e-8)


@pytest.mark.parametrize("v0,w,m,e", [(1.0, 1.0, 1.0, 0.5), (3.0, 0.7, 2.0, 0.2)])
def test_eckart_closed_forms(v0, w, m, e):
    spec = Eckart(v0, w, m)
    action = np.pi * w * np.sqrt(2 * m) * (np.sqrt(v0) - np.sqrt(e))
    tau = np.pi * w * np.sqrt(m / (2 * e))
    assert barrier_action(spec, e) == pytest.approx(action, rel=1e-9)
    assert imaginary_traversal_time(spec, e) == pytest.approx(tau, rel=1e-7)


def test_rectangular_closed_forms():
    r = Rectangular(1.0, 0.0, 3.0, 2.0)
    e = 0.4
    kappa = np.sqrt(2 * 2.0 * 0.6)
    assert barrier_action(r, e) == pytest.approx(3.0 * kappa, rel=1e-13)
    assert transmission_wkb(r, e) == pytest.approx(np.exp(-6.0 * kappa), rel=1e-12)
    assert imaginary_traversal_time(r, e) == pytest.approx(2.0 * 3.0 / kappa, rel=1e-12)


def test_action_energy_derivative_is_minus_time():
    g = Gaussian(1.5, 0.0, 0.8, 1.3)
    e, h = 0.6, 1e-5
    dadE = (barrier_action(g, e + h) - barrier_action(g, e - h)) / (2 * h)
    assert dadE == pytest.approx(-imaginary_traversal_time(g, e), rel=1e-6)


def test_above_barrier():
    g = Gaussian(1.0, 0.0, 1.0)
    with pytest.raises(NoBarrier):
        transmission_wkb(g, 1.2)
    assert transmission_wkb(g, 1.2, above_barrier=True) == 1.0


def test_divergent_threshold():
    with pytest.raises(Divergent):
        imaginary_traversal_time(Gaussian(1.0, 0.0, 1.0), 0.5, threshold=1.0)


def test_report_consistency():
    g = Gaussian(1.0, 0.0, 1.0)
    rep = wkb_report(g, 0.5)
    assert rep.transmission == pytest.approx(np.exp(-2 * rep.action), rel=1e-14)
    assert rep.phase.barrier == rep.action


def test_wavefunction_midpoint_decay():
    r = Rectangular(1.0, 0.0, 1.0)
    psi = wkb_wavefunction(r, 0.5, 0.5)
    assert abs(psi) == pytest.approx(np.exp(-0.5), rel=1e-12)


def test_wavefunction_transmitted_current():
    g = Gaussian(1.0, 0.0, 1.0)
    psi = wkb_wavefunction(g, 0.5, 6.0)
    p = np.sqrt(2 * (0.5 - g(6.0)))
    assert abs(psi) ** 2 * p == pytest.approx(np.exp(-2 * barrier_action(g, 0.5)), rel=1e-10)


def test_wavefunction_excludes_turning_points():
    g = Gaussian(1.0, 0.0, 1.0)
    b = find_turning_points(g, 0.5).b
    with pytest.raises(TurningPointRegion):
        wkb_wavefunction(g, 0.5, b + 1e-4)


def test_wavefunction_log_slope_matches_exact():
    g = Gaussian(1.0, 0.0, 1.0, mass=30.0)
    x = np.array([-0.2, 0.2])
    exact = np.abs(interior_wavefunction(g, 0.5, x))
    approx = np.abs([wkb_wavefunction(g, 0.5, xi) for xi in x])
    s_exact = np.diff(np.log(exact))[0]
    s_wkb = np.diff(np.log(approx))[0]
    assert s_wkb == pytest.approx(s_exact, rel=0.02)

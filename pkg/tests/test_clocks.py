import numpy as np
import pytest

from tunneltime.clocks import (
    clock_report,
    dwell_time,
    larmor_amplitudes,
    larmor_times,
    phase_time,
)
from tunneltime.errors import ChannelAboveBarrier, NoConvergence, PhaseWrap
from tunneltime.potential import Gaussian, Rectangular, zero_potential
from tunneltime.wkb import imaginary_traversal_time

# d arg t / dE for a rectangular barrier of unit height, differentiated
# symbolically with sympy (t referenced to free propagation)
PHASE_DELAY = [
    # (width, E, mass, delay)
    (2.0, 0.5, 1.0, -0.07194483984836623210717255),
    (1.0, 0.3, 1.0, 0.7146937745473109279654008),
    (3.0, 0.2, 2.0, -4.208094014805544693099709),
]


def buttiker_dwell(E, V, L, m=1.0):
    k = np.sqrt(2 * m * E)
    q = np.sqrt(2 * m * (V - E))
    k0 = k * k + q * q
    num = 2 * q * L * (q * q - k * k) + k0 * np.sinh(2 * q * L)
    return m * k / q * num / (4 * k * k * q * q + k0**2 * np.sinh(q * L) ** 2)


@pytest.mark.parametrize("case", PHASE_DELAY)
def test_phase_delay_rectangular(case):
    L, E, m, delay = case
    pt = phase_time(Rectangular(1.0, 0.0, L, m), E)
    assert pt.delay == pytest.approx(delay, rel=1e-7, abs=1e-9)
    assert pt.traversal == pytest.approx(delay + m * L / np.sqrt(2 * m * E), rel=1e-7)


@pytest.mark.parametrize("L,E", [(1.0, 0.5), (2.0, 0.3), (4.0, 0.8)])
def test_dwell_closed_form(L, E):
    assert dwell_time(Rectangular(1.0, 0.0, L), E) == pytest.approx(buttiker_dwell(E, 1.0, L), rel=1e-9)


def test_free_particle_clocks():
    free = zero_potential(0.0, 5.0)
    pt = phase_time(free, 0.5)
    assert abs(pt.delay) < 1e-8
    assert pt.traversal == pytest.approx(5.0, rel=1e-8)
    assert dwell_time(free, 0.5) == pytest.approx(5.0, rel=1e-10)


def test_larmor_y_equals_dwell():
    r = Rectangular(1.0, 0.0, 2.0)
    lt = larmor_times(r, 0.5)
    assert lt.tau_y == pytest.approx(dwell_time(r, 0.5), rel=1e-8)


def test_larmor_z_tracks_imaginary_time_for_opaque_rectangle():
    r = Rectangular(1.0, 0.0, 10.0)
    lt = larmor_times(r, 0.5)
    assert lt.tau_z == pytest.approx(imaginary_traversal_time(r, 0.5), rel=1e-6)


def test_larmor_spin_stays_normalised():
    sol = larmor_amplitudes(Gaussian(1.0, 0.0, 1.0), 0.5, 1e-3)
    assert sol.P_x**2 + sol.P_y**2 + sol.P_z**2 == pytest.approx(1.0, abs=1e-12)


def test_channel_above_barrier():
    with pytest.raises(ChannelAboveBarrier):
        larmor_amplitudes(Gaussian(1.0, 0.0, 1.0), 0.9, 0.4)


def test_larmor_no_convergence():
    with pytest.raises(NoConvergence):
        larmor_times(Rectangular(1.0, 0.0, 2.0), 0.5, rtol=1e-30)


def test_phase_wrap():
    with pytest.raises(PhaseWrap):
        phase_time(Rectangular(1.0, 0.0, 50.0), 2.0, dE=1.0)


def test_clock_report_above_barrier_has_nan_wkb_time():
    rep = clock_report(zero_potential(0.0, 2.0), 0.5)
    assert np.isnan(rep.tau_imag_wkb)
    assert rep.tau_dwell == pytest.approx(2.0, rel=1e-10)

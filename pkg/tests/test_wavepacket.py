import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from tunneltime.acceptance import PacketSetup
from tunneltime.clocks import phase_time
from tunneltime.errors import BoxTooSmall, NoTransmission, UnstableStep
from tunneltime.potential import Gaussian, zero_potential
from tunneltime.scatter import scattering_amplitudes
from tunneltime.wavepacket import (
    GridSpec,
    PacketSpec,
    auto_grid,
    compare_free,
    evolve,
    momentum_weighted,
    peak_arrival,
    write_snapshots_csv,
)
from tunneltime.wkb import transmission_wkb

SMALL = PacketSetup(height=2.0, sigma_x=10.0, n=1024)


def _run(setup, n=None, dt_scale=1.0):
    spec, packet, detector, t_final, grid = setup.build()
    if n is not None:
        grid = GridSpec(grid.left, grid.right, n)
    dt = dt_scale * 0.1 * packet.mass * grid.dx**2
    return spec, packet, detector, compare_free(packet, spec, detector, grid, dt, t_final)


@pytest.fixture(scope="module")
def small():
    return _run(SMALL)


@pytest.fixture(scope="module")
def free_run():
    packet = PacketSpec(-40.0, 1.0, 5.0)
    grid = auto_grid(packet, None, 80.0, 1024)
    return packet, evolve(packet, None, grid, 0.1 * grid.dx**2, 80.0)


def test_free_moments(free_run):
    packet, run = free_run
    for i in range(0, run.times.size, 37):
        mean, sd = run.moments(i)
        assert abs(mean - packet.center(run.times[i])) < 1e-8
        assert sd == pytest.approx(packet.width(run.times[i]), rel=1e-8)


def test_norm_conserved(free_run):
    _, run = free_run
    assert np.abs(run.norm_history - 1.0).max() < 1e-8


def test_free_arrival_within_one_snapshot(free_run):
    packet, run = free_run
    # exact free density at the detector peaks slightly before the centre
    # passes, because the packet spreads while it arrives
    def neg_rho(t):
        w = packet.width(t)
        return -np.exp(-((20.0 - packet.center(t)) ** 2) / (2 * w * w)) / w

    exact = minimize_scalar(neg_rho, bounds=(40.0, 80.0), method="bounded", options={"xatol": 1e-10}).x
    assert exact < 60.0
    assert abs(peak_arrival(run, 20.0) - exact) < run.times[1] - run.times[0]


def test_mirror_symmetry():
    right = PacketSpec(-30.0, 1.0, 4.0)
    left = PacketSpec(30.0, -1.0, 4.0)
    spec = Gaussian(1.5, 0.0, 1.0)
    grid = auto_grid(right, spec, 50.0, 512)
    dt = 0.1 * grid.dx**2
    a = evolve(right, spec, grid, dt, 50.0)
    b = evolve(left, spec, grid, dt, 50.0)
    idx = (-np.arange(grid.n)) % grid.n
    assert np.abs(a.density() - b.density()[idx]).max() < 1e-10
    assert a.transmitted() == pytest.approx(b.transmitted(), abs=1e-12)


def test_box_too_small():
    packet = PacketSpec(-10.0, 1.0, 3.0)
    with pytest.raises(BoxTooSmall):
        evolve(packet, None, GridSpec(-40.0, 40.0, 512), 0.001, 60.0)


def test_unstable_step():
    packet = PacketSpec(-10.0, 1.0, 3.0)
    grid = GridSpec(-100.0, 100.0, 512)
    with pytest.raises(UnstableStep):
        evolve(packet, None, grid, 0.2 * grid.dx**2, 1.0)


def test_grid_size_power_of_two():
    with pytest.raises(ValueError):
        GridSpec(-1.0, 1.0, 1000)


def test_packet_must_clear_barrier():
    with pytest.raises(ValueError):
        evolve(PacketSpec(-5.0, 1.0, 3.0), Gaussian(2.0, 0.0, 1.0), GridSpec(-200.0, 200.0, 1024), 0.01, 1.0)


def test_no_transmission(free_run):
    _, run = free_run
    with pytest.raises(NoTransmission):
        peak_arrival(run, run.grid.left + 5.0)


def test_transmitted_fraction_matches_oracle(small):
    spec, packet, _, cmp = small
    oracle = momentum_weighted(packet, lambda k: scattering_amplitudes(spec, 0.5 * k * k).T)
    assert cmp.transmitted_fraction == pytest.approx(oracle, rel=1e-3)


def test_wkb_estimate_within_factor_two(small):
    spec, packet, _, cmp = small
    ratio = cmp.transmitted_fraction / transmission_wkb(spec, packet.energy)
    assert 0.5 < ratio < 2.0


def test_advance_converged_in_grid(small):
    refined = _run(SMALL, n=2 * SMALL.n, dt_scale=0.25)[3]
    assert refined.advance == pytest.approx(small[3].advance, rel=1e-3)


def test_advance_matches_filtered_stationary_phase(small):
    # transmission reshapes |phi(k)|^2; the transmitted peak travels with the
    # mode kbar of |phi(k)|^2 T(k) and carries the phase delay at kbar
    spec, packet, detector, cmp = small
    s = 1.0 / (2.0 * packet.sigma_x)

    def neg_log_weight(k):
        return (k - packet.k0) ** 2 / (2 * s * s) - np.log(scattering_amplitudes(spec, 0.5 * k * k).T)

    kbar = minimize_scalar(neg_log_weight, bounds=(packet.k0, packet.k0 + 10 * s), method="bounded",
                           options={"xatol": 1e-10}).x
    path = detector - packet.x0
    predicted = path * (1.0 / packet.k0 - 1.0 / kbar) - phase_time(spec, 0.5 * kbar**2).delay
    assert cmp.advance > 0
    assert cmp.advance == pytest.approx(predicted, rel=0.02)


def test_zero_potential_gives_no_advance():
    packet = PacketSpec(-40.0, 1.0, 5.0)
    grid = auto_grid(packet, None, 80.0, 512)
    cmp = compare_free(packet, zero_potential(-1.0, 1.0), 20.0, grid, 0.1 * grid.dx**2, 80.0)
    assert cmp.advance == 0.0
    np.testing.assert_array_equal(cmp.barrier_run.snapshots, cmp.free_run.snapshots)


def test_transmitted_amplitude_stays_below_free(small):
    _, _, detector, cmp = small
    t = cmp.barrier_run.times
    fb = np.abs(cmp.barrier_run.field_at(detector))
    ff = np.abs(cmp.free_run.field_at(detector))
    early = (t < cmp.arrival_free) & (ff**2 > 1e-8 * ff.max() ** 2)
    assert early.sum() > 10
    assert np.all(fb[early] < ff[early])


def test_thicker_barrier_larger_advance(small):
    thick = _run(PacketSetup(height=2.0, sigma=2.0, sigma_x=10.0, n=1024))[3]
    assert thick.advance > small[3].advance
    assert thick.transmitted_fraction < small[3].transmitted_fraction


def test_snapshot_csv(tmp_path, free_run):
    _, run = free_run
    path = tmp_path / "snap.csv"
    write_snapshots_csv(run, path, every=100, header={"note": "free"})
    text = path.read_text().splitlines()
    assert any(line.startswith("# note = free") for line in text)
    data = np.loadtxt(path, delimiter=",", comments="#", skiprows=sum(l.startswith("#") for l in text) + 1)
    assert data.shape[1] == 5
    np.testing.assert_allclose(data[:, 4], data[:, 2] ** 2 + data[:, 3] ** 2, rtol=1e-12, atol=1e-300)

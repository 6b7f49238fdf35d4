"""
Acceptance suite: each criterion returns rows of (check, value, tolerance, passed).

Every check is computed, never skipped; a criterion passes only when all of
its rows pass. The rows contain no timings, so two runs of the suite give
identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dispersion as dsp
from .clocks import larmor_times, phase_time
from .potential import Eckart, Gaussian, Rectangular, footprint
from .scatter import scattering_amplitudes
from .wavepacket import PacketSpec, auto_grid, compare_free, momentum_weighted
from .wkb import barrier_action, imaginary_traversal_time

# action of Gaussian(height=1, sigma=1, mass=1) at E = 0.5; mass scales A as sqrt(m)
GAUSS_UNIT_ACTION = 1.7663355688284217
ACTIONS = (5.0, 10.0, 20.0)


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    value: float
    tolerance: float
    passed: bool


def _check(criterion, name, value, tolerance, passed=None):
    ok = bool(value <= tolerance) if passed is None else bool(passed)
    return Check(criterion, name, float(value), float(tolerance), ok)


def _opaque_pair(action):
    """Rectangular and Gaussian barriers with the given action at E = 0.5."""
    rect = Rectangular(height=1.0, left=0.0, right=action, mass=1.0)
    gauss = Gaussian(height=1.0, center=0.0, sigma=1.0, mass=(action / GAUSS_UNIT_ACTION) ** 2)
    return rect, gauss


def criterion_1():
    rect = Rectangular(1.0, 0.0, 1.0, 1.0)
    exact = 1.0 / np.cosh(1.0) ** 2
    rows = [_check(1, "rect T(E=0.5) vs 1/cosh^2(1)", abs(scattering_amplitudes(rect, 0.5).T - exact), 1e-8)]
    energies = np.linspace(0.05, 2.0, 200)
    for label, spec in (
        ("rectangular", rect),
        ("gaussian", Gaussian(1.0, 0.0, 1.0, 1.0)),
        ("eckart", Eckart(1.0, 1.0, 1.0)),
    ):
        worst = 0.0
        for e in energies:
            s = scattering_amplitudes(spec, float(e))
            worst = max(worst, abs(s.R + s.T - 1.0))
        rows.append(_check(1, f"{label} max |R+T-1| over 200 energies", worst, 1e-10))
    return rows


def criterion_2():
    rows = []
    for a in ACTIONS:
        for label, spec in zip(("rectangular", "gaussian"), _opaque_pair(a)):
            ln_t = scattering_amplitudes(spec, 0.5).log_T
            ln_d = -2.0 * barrier_action(spec, 0.5)
            rows.append(_check(2, f"{label} A={a:g} |ln D - ln T|/|ln T|", abs(ln_d - ln_t) / abs(ln_t), 0.05))
    return rows


def criterion_3():
    rect = Rectangular(1.0, 0.0, 3.0, 1.0)
    e = 0.5
    closed = rect.mass * rect.width / np.sqrt(2.0 * rect.mass * (rect.height - e))
    rows = [_check(3, "rect |t| vs closed form (relative)", abs(imaginary_traversal_time(rect, e) - closed) / closed, 1e-12)]
    gauss = Gaussian(1.0, 0.0, 1.0, 1.0)
    h = 1e-4 * e
    dadE = (barrier_action(gauss, e + h) - barrier_action(gauss, e - h)) / (2.0 * h)
    tau = imaginary_traversal_time(gauss, e)
    rows.append(_check(3, "gaussian dA/dE + |t| (relative)", abs(dadE + tau) / tau, 1e-4))
    return rows


def criterion_4():
    rows = []
    for a in ACTIONS:
        for label, spec in zip(("rectangular", "gaussian"), _opaque_pair(a)):
            lt = larmor_times(spec, 0.5, rtol=1.0)
            tau = imaginary_traversal_time(spec, 0.5)
            rows.append(_check(4, f"{label} A={a:g} |tau_z/|t| - 1|", abs(lt.tau_z / tau - 1.0), 0.10))
            rows.append(_check(4, f"{label} A={a:g} tau_z change under omega halving", lt.residual_z / abs(lt.tau_z), 1e-3))
    return rows


def criterion_5():
    k = 1.0
    times, flights = [], []
    for kl in (8.0, 16.0):
        spec = Rectangular(1.0, 0.0, kl, 1.0)
        times.append(phase_time(spec, 0.5).traversal)
        flights.append(spec.mass * spec.width / k)
    change = abs(times[1] - times[0]) / abs(times[0])
    return [
        _check(5, "phase time relative change kL 8 -> 16", change, 0.01),
        _check(5, "free-flight ratio kL 16 / kL 8 minus 2", abs(flights[1] / flights[0] - 2.0), 1e-12),
    ]


LORENTZ = dsp.LorentzParams(omega_p=0.5, omega_0=1.0, gamma=0.05)


def kk_max_error(count, params=LORENTZ):
    """Largest relative Re chi error over the grid outside +-2 gamma of omega_0."""
    s = dsp.lorentz_samples(params, span=6.0, count=count)
    w = s.omega[:-1]
    keep = np.abs(w - params.omega_0) > 2.0 * params.gamma
    rec = dsp.kk_real_from_imag(s, w[keep])
    ref = s.chi.real[:-1][keep]
    return float(np.max(np.abs(rec - ref) / np.abs(ref)))


def criterion_6():
    errs = [kk_max_error(n) for n in (4096, 8192, 16384)]
    rows = [_check(6, "max relative Re chi error, 4096 points", errs[0], 0.01)]
    rows.append(_check(6, "max relative Re chi error, 8192 points", errs[1], errs[0], errs[1] < errs[0]))
    rows.append(_check(6, "max relative Re chi error, 16384 points", errs[2], errs[1], errs[2] < errs[1]))
    return rows


def criterion_7():
    prof = dsp.refractive_profile(dsp.lorentz_samples(LORENTZ, span=6.0, count=4096))
    vg = prof.v_group[np.isfinite(prof.v_group)]
    return [
        _check(7, "max v_group (must exceed 1)", vg.max(), 1.0, vg.max() > 1.0),
        _check(7, "min v_group (must be below 0)", vg.min(), 0.0, vg.min() < 0.0),
    ]


@dataclass(frozen=True)
class PacketSetup:
    """The documented narrow-band run: k0 sigma_x = 25 through an A ~ 5 barrier."""

    height: float = 2.5
    sigma: float = 1.0
    k0: float = 1.0
    sigma_x: float = 25.0
    clearance: float = 8.0
    detector_gap: float = 10.0
    tail: float = 6.0
    n: int = 2048

    def build(self):
        spec = Gaussian(self.height, 0.0, self.sigma, 1.0)
        e0 = 0.5 * self.k0**2
        a, b = footprint(spec, e0)
        packet = PacketSpec(a - self.clearance * self.sigma_x, self.k0, self.sigma_x, 1.0)
        detector = b + self.detector_gap
        t_final = (detector - packet.x0 + self.tail * self.sigma_x) / packet.velocity
        grid = auto_grid(packet, spec, t_final, self.n)
        return spec, packet, detector, t_final, grid


def criterion_8(setup: PacketSetup = PacketSetup()):
    spec, packet, detector, t_final, grid = setup.build()
    dt = 0.1 * packet.mass * grid.dx**2
    cmp = compare_free(packet, spec, detector, grid, dt, t_final)
    barrier_run, free_run = cmp.barrier_run, cmp.free_run
    drift = max(np.abs(barrier_run.norm_history - 1.0).max(), np.abs(free_run.norm_history - 1.0).max())

    centre_err = width_err = 0.0
    for i, t in enumerate(free_run.times):
        mean, sd = free_run.moments(i)
        centre_err = max(centre_err, abs(mean - packet.center(t)) / max(abs(packet.center(t)), packet.sigma_x))
        width_err = max(width_err, abs(sd - packet.width(t)) / packet.width(t))

    oracle = momentum_weighted(packet, lambda k: scattering_amplitudes(spec, 0.5 * k * k / packet.mass).T)
    predicted = -phase_time(spec, packet.energy).delay
    return [
        _check(8, "max |norm - 1| (barrier and free runs)", drift, 1e-8),
        _check(8, "free centre relative error", centre_err, 1e-6),
        _check(8, "free width relative error", width_err, 1e-6),
        _check(8, "transmitted fraction vs momentum-resolved oracle", abs(cmp.transmitted_fraction / oracle - 1.0), 0.01),
        _check(8, "peak advance vs phase-time prediction", abs(cmp.advance / predicted - 1.0), 0.15),
    ]


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
}


def run_suite(selected=None):
    """All checks of the selected criteria (default 1-8) in criterion order."""
    ids = sorted(CRITERIA) if selected is None else sorted(selected)
    rows = []
    for cid in ids:
        rows.extend(CRITERIA[cid]())
    return rows


def summarize(rows):
    """criterion -> passed, over all its rows."""
    out = {}
    for r in rows:
        out[r.criterion] = out.get(r.criterion, True) and r.passed
    return out

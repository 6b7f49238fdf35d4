"""
Tunneling-time clocks: Wigner phase time, dwell time and the Larmor clock.

All clocks at one energy share one converged slicing, so finite differences
in energy or field strength see the same discretisation error on both sides
and it cancels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChannelAboveBarrier, NoBarrier, NoConvergence, PhaseWrap
from .potential import PotentialSpec, footprint
from .scatter import converged_slicing, solve_slicing, wavefunction_on_slicing
from .wkb import imaginary_traversal_time

DEFAULT_OMEGAS = (1e-3, 5e-4, 2.5e-4)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


@dataclass(frozen=True)
class PhaseTime:
    delay: float
    traversal: float


@dataclass(frozen=True)
class SpinChannelSolution:
    t_up: complex
    t_down: complex
    P_x: float
    P_y: float
    P_z: float


@dataclass(frozen=True)
class LarmorTimes:
    tau_y: float
    tau_z: float
    residual_y: float
    residual_z: float


@dataclass(frozen=True)
class ClockReport:
    energy: float
    tau_phase_delay: float
    tau_phase_traversal: float
    tau_dwell: float
    tau_larmor_y: float
    tau_larmor_z: float
    tau_imag_wkb: float
    omega_L_used: float


def _window(spec, E, window):
    return footprint(spec, E) if window is None else (float(window[0]), float(window[1]))


def _slicing(spec, E, window, slicing):
    if slicing is not None:
        return slicing
    return converged_slicing(spec, E, breakpoints=window)[0]


def phase_time(
    spec: PotentialSpec, E: float, dE: float | None = None, window=None, slicing=None
) -> PhaseTime:
    """Energy derivative of the transmission phase.

    ``delay`` is d(arg t)/dE with t measured against free propagation, so it
    vanishes for U = 0. ``traversal`` adds the free-flight time m(b - a)/k
    across the barrier footprint and is the Wigner phase time of the barrier
    region.

    The derivative uses central differences at steps dE and dE/2 combined
    by Richardson extrapolation. Default dE = 1e-6 * E.

    Raises
    ------
    PhaseWrap
        If consecutive phase samples differ by more than pi/2.
    """
    if not E > 0:
        raise ValueError(f"energy must be positive, got {E}")
    a, b = _window(spec, E, window)
    h = 1e-6 * E if dE is None else dE
    if not 0 < h < E:
        raise ValueError("dE must lie in (0, E)")
    sl = _slicing(spec, E, (a, b), slicing)

    energies = (E - h, E - 0.5 * h, E + 0.5 * h, E + h)
    raw = np.array([np.angle(solve_slicing(sl, e).t) for e in energies])
    steps = np.angle(np.exp(1j * np.diff(raw)))
    if np.any(np.abs(steps) > 0.5 * np.pi):
        raise PhaseWrap(f"phase step above pi/2 near E = {E:g}; reduce dE")
    phase = np.concatenate([[0.0], np.cumsum(steps)])

    d_full = (phase[3] - phase[0]) / (2.0 * h)
    d_half = (phase[2] - phase[1]) / h
    delay = (4.0 * d_half - d_full) / 3.0
    k = np.sqrt(2.0 * spec.mass * E)
    return PhaseTime(delay=float(delay), traversal=float(delay + spec.mass * (b - a) / k))


def dwell_time(spec: PotentialSpec, E: float, window=None, slicing=None, panels: int = 256) -> float:
    """Probability inside [a, b] divided by the incident flux k/m."""
    a, b = _window(spec, E, window)
    sl = _slicing(spec, E, (a, b), slicing)
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = (0.5 * (hi - lo) * _GL_X + 0.5 * (hi + lo)).ravel()
    w = (0.5 * (hi - lo) * _GL_W).ravel()
    psi = wavefunction_on_slicing(sl, E, x)
    k = np.sqrt(2.0 * spec.mass * E)
    return float(np.sum(w * np.abs(psi) ** 2) * spec.mass / k)


def larmor_amplitudes(
    spec: PotentialSpec, E: float, omega_L: float, window=None, slicing=None
) -> SpinChannelSolution:
    """Transmitted spin state for a field along z confined to the window.

    The incident spin points along x. Spin-up sees U - omega_L/2 inside the
    window, spin-down U + omega_L/2; outside the window both see U.

    Raises
    ------
    ChannelAboveBarrier
        If the lowered channel is not below the barrier top (skipped for a
        field-free reference potential with no barrier).
    """
    if omega_L < 0:
        raise ValueError("omega_L must be non-negative")
    if spec.peak > 0 and E >= spec.peak - 0.5 * omega_L:
        raise ChannelAboveBarrier(
            f"E = {E:g} not below lowered barrier top {spec.peak - 0.5 * omega_L:g}"
        )
    win = _window(spec, E, window)
    sl = _slicing(spec, E, win, slicing)
    t_up = solve_slicing(sl.shifted(-0.5 * omega_L, win), E).t
    t_down = solve_slicing(sl.shifted(+0.5 * omega_L, win), E).t
    norm = np.sqrt(abs(t_up) ** 2 + abs(t_down) ** 2)
    cu, cd = t_up / norm, t_down / norm
    cross = np.conj(cu) * cd
    return SpinChannelSolution(
        t_up=complex(t_up),
        t_down=complex(t_down),
        P_x=float(2.0 * cross.real),
        P_y=float(2.0 * cross.imag),
        P_z=float(abs(cu) ** 2 - abs(cd) ** 2),
    )


def _extrapolate_even(omegas, values):
    """Value at omega = 0 of the polynomial in omega**2 through the samples."""
    w2 = np.asarray(omegas) ** 2
    coef = np.polyfit(w2, values, len(w2) - 1)
    return float(np.polyval(coef, 0.0))


def larmor_times(
    spec: PotentialSpec,
    E: float,
    omegas=DEFAULT_OMEGAS,
    window=None,
    slicing=None,
    rtol: float = 1e-3,
) -> LarmorTimes:
    """Zero-field limits tau_z = P_z / omega and tau_y = -P_y / omega.

    P / omega is even in omega, so the samples are extrapolated as a
    polynomial in omega**2. The residual is the change in the extrapolated
    value when the smallest field is dropped.

    Raises
    ------
    NoConvergence
        If the residual exceeds ``rtol`` relative to the larger time.
    """
    omegas = sorted((float(w) for w in omegas), reverse=True)
    if len(omegas) < 3 or omegas[-1] <= 0:
        raise ValueError("need at least 3 positive field strengths")
    win = _window(spec, E, window)
    sl = _slicing(spec, E, win, slicing)
    sols = [larmor_amplitudes(spec, E, w, window=win, slicing=sl) for w in omegas]
    fz = [s.P_z / w for s, w in zip(sols, omegas)]
    fy = [-s.P_y / w for s, w in zip(sols, omegas)]
    tz, ty = _extrapolate_even(omegas, fz), _extrapolate_even(omegas, fy)
    rz = abs(tz - _extrapolate_even(omegas[:-1], fz[:-1]))
    ry = abs(ty - _extrapolate_even(omegas[:-1], fy[:-1]))
    scale = max(abs(tz), abs(ty))
    if max(rz, ry) > rtol * scale:
        raise NoConvergence(f"Larmor extrapolation residual {max(rz, ry):.3g} at E = {E:g}")
    return LarmorTimes(tau_y=ty, tau_z=tz, residual_y=ry, residual_z=rz)


def clock_report(
    spec: PotentialSpec, E: float, omegas=DEFAULT_OMEGAS, window=None, rtol: float = 1e-3
) -> ClockReport:
    """All clocks side by side at one energy; WKB time is NaN above the barrier."""
    win = _window(spec, E, window)
    sl = converged_slicing(spec, E, breakpoints=win)[0]
    pt = phase_time(spec, E, window=win, slicing=sl)
    lt = larmor_times(spec, E, omegas, window=win, slicing=sl, rtol=rtol)
    try:
        tau_imag = imaginary_traversal_time(spec, E)
    except NoBarrier:
        tau_imag = float("nan")
    return ClockReport(
        energy=E,
        tau_phase_delay=pt.delay,
        tau_phase_traversal=pt.traversal,
        tau_dwell=dwell_time(spec, E, window=win, slicing=sl),
        tau_larmor_y=lt.tau_y,
        tau_larmor_z=lt.tau_z,
        tau_imag_wkb=tau_imag,
        omega_L_used=min(omegas),
    )

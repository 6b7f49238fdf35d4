"""
Semiclassical (WKB) tunneling quantities.

The forbidden-region integrals

    A   = int_a^b sqrt(2m(U - E)) dx          (barrier action)
    |t| = int_a^b m / sqrt(2m(U - E)) dx      (imaginary traversal time)

have square-root behaviour at the turning points. Each half of [a, b] is
mapped with x = a + u**2 (x = b - u**2 on the right half), which turns both
integrands smooth, and then integrated with a composite Gauss-Legendre rule
refined by panel doubling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import Divergent, NoBarrier, NoConvergence, TurningPointRegion
from .potential import (
    PotentialSpec,
    Sampled,
    TurningPoints,
    evaluate,
    find_turning_points,
    default_cuts,
    slope,
)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
DIVERGENCE_THRESHOLD = 1e10


@dataclass(frozen=True)
class PhaseProfile:
    """Accumulated int p dx per region: left allowed, barrier, right allowed.

    ``barrier`` is the magnitude of the (imaginary) under-barrier integral.
    """

    boundaries: tuple
    left: float
    barrier: float
    right: float


@dataclass(frozen=True)
class WKBReport:
    energy: float
    turning: TurningPoints
    action: float
    transmission: float
    tau_imag: float
    phase: PhaseProfile
    imaginary: bool = True


def _accurate_turning_points(spec, E):
    tp = find_turning_points(spec, E, tol=1e-14 * max(1.0, spec.length_scale))
    return tp


def _panels(lo: float, hi: float, breaks) -> np.ndarray:
    edges = [lo] + sorted(b for b in breaks if lo < b < hi) + [hi]
    return np.asarray(edges)


def _forbidden_integral(spec, E, tp, kernel, rtol=1e-13, max_level=12):
    """Integrate kernel(U - E) over [a, b] with sqrt endpoint substitution."""
    a, b = tp.a, tp.b
    c = spec.peak_position
    if not a < c < b:
        c = 0.5 * (a + b)
    kinks = list(spec.x) if isinstance(spec, Sampled) else []
    halves = [
        (a, +1.0, _panels(0.0, np.sqrt(c - a), [np.sqrt(k - a) for k in kinks if a < k < c])),
        (b, -1.0, _panels(0.0, np.sqrt(b - c), [np.sqrt(b - k) for k in kinks if c < k < b])),
    ]

    # at a smooth turning point U(a) equals E up to the root's last digits;
    # measuring from U(a) makes g vanish exactly at u = 0, which keeps the
    # 1/sqrt kernel free of a spurious near-endpoint feature
    shift = {}
    for origin in (a, b):
        off = evaluate(spec, origin) - E
        shift[origin] = off if abs(off) <= 1e-12 * max(abs(E), spec.peak) else 0.0

    def rule(level):
        total = 0.0
        for origin, sign, edges in halves:
            sub = []
            for lo, hi in zip(edges[:-1], edges[1:]):
                sub.append(np.linspace(lo, hi, 2**level + 1))
            pts = np.concatenate([s[:-1] for s in sub] + [edges[-1:]])
            lo, hi = pts[:-1, None], pts[1:, None]
            u = 0.5 * (hi - lo) * _GL_X + 0.5 * (hi + lo)
            w = 0.5 * (hi - lo) * _GL_W
            g = evaluate(spec, origin + sign * u**2) - E - shift[origin]
            total += np.sum(w * 2.0 * u * kernel(np.maximum(g, 0.0)))
        return total

    prev = rule(0)
    for level in range(1, max_level + 1):
        cur = rule(level)
        if not np.isfinite(cur):
            break
        if abs(cur - prev) <= rtol * abs(cur) or cur == prev:
            return cur
        prev = cur
    raise NoConvergence(f"forbidden-region quadrature did not converge at E = {E:g}")


def barrier_action(spec: PotentialSpec, E: float) -> float:
    """A = int_a^b sqrt(2m(U - E)) dx over the forbidden region.

    Raises NoBarrier when E is not below the barrier top.
    """
    tp = _accurate_turning_points(spec, E)
    m = spec.mass
    return _forbidden_integral(spec, E, tp, lambda g: np.sqrt(2.0 * m * g))


def transmission_wkb(spec: PotentialSpec, E: float, above_barrier: bool = False) -> float:
    """WKB transmission D = exp(-2A).

    Parameters
    ----------
    above_barrier : bool
        When True, energies at or above the barrier top return D = 1 instead
        of raising NoBarrier.
    """
    if E >= spec.peak:
        if above_barrier:
            return 1.0
        raise NoBarrier(f"E = {E:g} is not below the barrier top {spec.peak:g}")
    return float(np.exp(-2.0 * barrier_action(spec, E)))


def imaginary_traversal_time(
    spec: PotentialSpec, E: float, threshold: float = DIVERGENCE_THRESHOLD
) -> float:
    """Magnitude of the purely imaginary time int m dx / p under the barrier.

    Raises
    ------
    NoBarrier
        E not below the barrier top.
    Divergent
        The integral fails to converge or exceeds ``threshold``.
    """
    tp = _accurate_turning_points(spec, E)
    m = spec.mass
    with np.errstate(divide="ignore"):
        kernel = lambda g: m / np.sqrt(2.0 * m * g)
        try:
            tau = _forbidden_integral(spec, E, tp, kernel)
        except NoConvergence as exc:
            raise Divergent(str(exc)) from None
    if not np.isfinite(tau) or tau > threshold:
        raise Divergent(f"imaginary time exceeds {threshold:g} at E = {E:g}")
    return float(tau)


def _local_momentum(spec, E, x):
    return np.sqrt(2.0 * spec.mass * np.abs(E - evaluate(spec, x)))


def _allowed_phase(spec, E, x0, x1):
    """int_{x0}^{x1} p dx through a classically allowed stretch."""
    if x0 == x1:
        return 0.0
    f = lambda s: _local_momentum(spec, E, s)
    val, _ = quad(f, min(x0, x1), max(x0, x1), limit=200, epsabs=1e-13, epsrel=1e-12)
    return val if x1 > x0 else -val


def _forbidden_partial(spec, E, x, b):
    """int_x^b |p| dx for a < x < b."""
    f = lambda s: _local_momentum(spec, E, s)
    val, _ = quad(f, x, b, limit=200, epsabs=1e-13, epsrel=1e-12)
    return val


def exclusion_width(spec: PotentialSpec, x_turn: float) -> float:
    """Half-width of the WKB breakdown window around a turning point."""
    du = abs(slope(spec, x_turn))
    if not np.isfinite(du) or du == 0.0:
        return 1e-3
    return max(1e-3, (2.0 * spec.mass * du) ** (-1.0 / 3.0))


def wkb_wavefunction(spec: PotentialSpec, E: float, x: float, part: str = "total") -> complex:
    """Piecewise WKB wavefunction normalised to unit incident current.

    Regions: x > b carries the transmitted running wave, a < x < b the
    under-barrier exponential, x < a the incident plus reflected waves.

    Parameters
    ----------
    part : {"total", "incident", "reflected"}
        Component to return on the incident side. Outside x < a only
        "total" is meaningful; "incident" returns the full value there too.

    Raises
    ------
    TurningPointRegion
        If x lies within the exclusion window of a turning point.
    """
    tp = _accurate_turning_points(spec, E)
    a, b = tp.a, tp.b
    if abs(x - a) < exclusion_width(spec, a) or abs(x - b) < exclusion_width(spec, b):
        raise TurningPointRegion(f"x = {x:g} too close to a turning point")
    m = spec.mass
    p = float(_local_momentum(spec, E, x))
    amp = np.sqrt(m / p)
    quarter = 0.25j * np.pi

    if x > b:
        action = barrier_action(spec, E)
        s = _allowed_phase(spec, E, b, x)
        return complex(-amp * np.exp(-action + 1j * s + quarter))
    if x > a:
        action = barrier_action(spec, E)
        return complex(amp * np.exp(-action + _forbidden_partial(spec, E, x, b)))
    s = _allowed_phase(spec, E, a, x)
    incident = amp * np.exp(1j * s + quarter)
    reflected = amp * np.exp(-1j * s - quarter)
    if part == "incident":
        return complex(incident)
    if part == "reflected":
        return complex(reflected)
    return complex(incident + reflected)


def wkb_report(spec: PotentialSpec, E: float) -> WKBReport:
    """Bundle turning points, action, D, imaginary time and phase record."""
    tp = _accurate_turning_points(spec, E)
    action = barrier_action(spec, E)
    lo, hi = default_cuts(spec)
    lo, hi = min(lo, tp.a), max(hi, tp.b)
    phase = PhaseProfile(
        boundaries=(lo, tp.a, tp.b, hi),
        left=_allowed_phase(spec, E, lo, tp.a),
        barrier=action,
        right=_allowed_phase(spec, E, tp.b, hi),
    )
    return WKBReport(
        energy=E,
        turning=tp,
        action=action,
        transmission=float(np.exp(-2.0 * action)),
        tau_imag=imaginary_traversal_time(spec, E),
        phase=phase,
    )

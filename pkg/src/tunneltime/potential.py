"""
One-dimensional barrier potentials.

All quantities are in natural units with hbar = 1. Every shape vanishes far
from the barrier, which is what lets the scattering code treat the outer
regions as free space.

Shapes
------
Rectangular(height, left, right, mass)
    U = height on [left, right], zero elsewhere.
Eckart(height, width, mass)
    U = height / cosh(x / width)**2.
Gaussian(height, center, sigma, mass)
    U = height * exp(-(x - center)**2 / (2 sigma**2)).
Sampled(x, u, mass)
    Linear interpolation of a table, zero outside the table.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import MultiBump, NoBarrier, NonDecaying

TOL_TURN = 1e-10
SCAN_SAMPLES = 1024


class PotentialSpec:
    """Common interface of the barrier shapes.

    Subclasses provide ``_u(x)`` on numpy arrays plus ``peak`` and
    ``peak_position``.
    """

    mass: float

    def __call__(self, x):
        return evaluate(self, x)

    def _u(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def peak(self) -> float:
        raise NotImplementedError

    @property
    def peak_position(self) -> float:
        raise NotImplementedError

    @property
    def length_scale(self) -> float:
        """Characteristic width, used to size searches."""
        raise NotImplementedError

    def _check_mass(self) -> None:
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class Rectangular(PotentialSpec):
    height: float = 1.0
    left: float = 0.0
    right: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not self.height > 0:
            raise ValueError(f"height must be positive, got {self.height}")
        if not self.left < self.right:
            raise ValueError("Rectangular barrier needs left < right")
        self._check_mass()

    @property
    def width(self) -> float:
        return self.right - self.left

    def _u(self, x):
        return np.where((x >= self.left) & (x <= self.right), self.height, 0.0)

    @property
    def peak(self):
        return self.height

    @property
    def peak_position(self):
        return 0.5 * (self.left + self.right)

    @property
    def length_scale(self):
        return self.width


@dataclass(frozen=True)
class Eckart(PotentialSpec):
    height: float = 1.0
    width: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not self.height > 0:
            raise ValueError(f"height must be positive, got {self.height}")
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")
        self._check_mass()

    def _u(self, x):
        return self.height / np.cosh(x / self.width) ** 2

    @property
    def peak(self):
        return self.height

    @property
    def peak_position(self):
        return 0.0

    @property
    def length_scale(self):
        return self.width


@dataclass(frozen=True)
class Gaussian(PotentialSpec):
    height: float = 1.0
    center: float = 0.0
    sigma: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not self.height > 0:
            raise ValueError(f"height must be positive, got {self.height}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        self._check_mass()

    def _u(self, x):
        return self.height * np.exp(-0.5 * ((x - self.center) / self.sigma) ** 2)

    @property
    def peak(self):
        return self.height

    @property
    def peak_position(self):
        return self.center

    @property
    def length_scale(self):
        return self.sigma


@dataclass(frozen=True, eq=False)
class Sampled(PotentialSpec):
    """Tabulated potential, linearly interpolated and zero outside the table."""

    x: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.5, 1.0]))
    u: np.ndarray = field(default_factory=lambda: np.zeros(3))
    mass: float = 1.0

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        u = np.array(self.u, dtype=float)
        if x.ndim != 1 or x.shape != u.shape:
            raise ValueError("x and u must be 1-D arrays of equal length")
        if x.size < 3:
            raise ValueError("Sampled potential needs at least 3 points")
        if np.any(np.diff(x) <= 0):
            raise ValueError("Sampled x must be strictly increasing")
        x.flags.writeable = False
        u.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)
        self._check_mass()

    def _u(self, x):
        return np.interp(x, self.x, self.u, left=0.0, right=0.0)

    @property
    def peak(self):
        return float(self.u.max())

    @property
    def peak_position(self):
        return float(self.x[np.argmax(self.u)])

    @property
    def length_scale(self):
        return float(self.x[-1] - self.x[0])


@dataclass(frozen=True)
class TurningPoints:
    a: float
    b: float
    energy: float

    @property
    def width(self) -> float:
        return self.b - self.a


def evaluate(spec: PotentialSpec, x):
    """Return U(x); scalar in, float out, array in, array out."""
    xa = np.asarray(x, dtype=float)
    u = spec._u(xa)
    if u.ndim == 0:
        return float(u)
    return u


def asymptotic_check(spec: PotentialSpec, eps: float, span: float = 1e6):
    """Positions beyond which |U| < eps.

    Parameters
    ----------
    spec : PotentialSpec
    eps : float
        Asymptotic threshold, > 0.
    span : float
        Search span in units of ``spec.length_scale``.

    Returns
    -------
    (x_cut_left, x_cut_right)

    Raises
    ------
    NonDecaying
        If the potential stays above ``eps`` across the whole span.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if isinstance(spec, Rectangular):
        return spec.left, spec.right
    if isinstance(spec, Sampled):
        return float(spec.x[0]), float(spec.x[-1])

    x0 = spec.peak_position
    scale = spec.length_scale
    cuts = []
    for direction in (-1.0, 1.0):
        g = lambda d: abs(evaluate(spec, x0 + direction * d)) - eps
        inner, outer = 0.0, scale
        while g(outer) >= 0:
            inner, outer = outer, 2.0 * outer
            if outer > span * scale:
                raise NonDecaying(
                    f"|U| stays above {eps:g} out to {span:g} length scales"
                )
        d = brentq(g, inner, outer, xtol=1e-14 * outer, rtol=1e-15)
        cuts.append(x0 + direction * d)
    return cuts[0], cuts[1]


def default_cuts(spec: PotentialSpec):
    """Asymptotic cuts at eps = 1e-12 * V0 (1e-12 for a zero table)."""
    eps = 1e-12 * spec.peak if spec.peak > 0 else 1e-12
    return asymptotic_check(spec, eps)


def _scan_grid(spec: PotentialSpec) -> np.ndarray:
    lo, hi = default_cuts(spec)
    grid = np.linspace(lo, hi, SCAN_SAMPLES)
    extra = [spec.peak_position]
    if isinstance(spec, Sampled):
        extra.extend(spec.x)
    return np.unique(np.concatenate([grid, extra]))


def find_turning_points(spec: PotentialSpec, E: float, tol: float = TOL_TURN) -> TurningPoints:
    """Outermost classical turning points bracketing the single barrier.

    A sign-change scan over the decayed support is followed by Brent
    bracketing on each edge. Rectangular barriers return their edges.

    Raises
    ------
    NoBarrier
        If ``E`` is at or above the barrier top.
    MultiBump
        If the scan finds more than one forbidden interval.
    """
    if not E > 0:
        raise ValueError(f"energy must be positive, got {E}")
    if E >= spec.peak:
        raise NoBarrier(f"E = {E:g} is not below the barrier top {spec.peak:g}")
    if isinstance(spec, Rectangular):
        return TurningPoints(spec.left, spec.right, E)

    grid = _scan_grid(spec)
    f = evaluate(spec, grid) - E
    inside = f > 0
    edges = np.flatnonzero(np.diff(inside.astype(np.int8)))
    starts = [0] if inside[0] else []
    starts += [i + 1 for i in edges if not inside[i]]
    if not starts:
        raise NoBarrier(f"no forbidden region found at E = {E:g}")
    if len(starts) > 1:
        raise MultiBump(f"{len(starts)} forbidden intervals at E = {E:g}")

    g = lambda x: evaluate(spec, x) - E
    i0 = starts[0]
    a = grid[0] if i0 == 0 else brentq(g, grid[i0 - 1], grid[i0], xtol=tol, rtol=1e-15)
    stops = [i for i in edges if inside[i]]
    if stops:
        i1 = stops[0]
        b = brentq(g, grid[i1], grid[i1 + 1], xtol=tol, rtol=1e-15)
    else:
        b = grid[-1]
    return TurningPoints(float(a), float(b), E)


def slope(spec: PotentialSpec, x: float) -> float:
    """dU/dx by central difference; infinite at a rectangular edge."""
    if isinstance(spec, Rectangular):
        if np.isclose(x, spec.left) or np.isclose(x, spec.right):
            return np.inf
        return 0.0
    h = 1e-5 * spec.length_scale
    return (evaluate(spec, x + h) - evaluate(spec, x - h)) / (2 * h)


def footprint(spec: PotentialSpec, E: float):
    """Barrier extent used for free-flight reference times and field windows.

    Rectangular: the edges. Sampled: the table range. Smooth shapes: the
    turning points at ``E``.
    """
    if isinstance(spec, Rectangular):
        return spec.left, spec.right
    if isinstance(spec, Sampled):
        return float(spec.x[0]), float(spec.x[-1])
    tp = find_turning_points(spec, E)
    return tp.a, tp.b


def zero_potential(left: float = 0.0, right: float = 1.0, mass: float = 1.0) -> Sampled:
    """U = 0 everywhere, as a three-point table spanning [left, right]."""
    return Sampled(np.linspace(left, right, 3), np.zeros(3), mass)

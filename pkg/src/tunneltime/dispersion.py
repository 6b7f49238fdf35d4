"""
Causal linear response: Lorentz susceptibility, Kramers-Kronig transforms,
and phase/group velocities (c = 1).

The principal-value integrals are handled by subtracting the pole term
analytically. For the real part,

    P int_0^W w' f(w') / (w'^2 - w^2) dw'
        = int_0^W [w' f(w') - w f(w)] / (w'^2 - w^2) dw'
          + (f(w) / 2) ln|(W - w) / (W + w)|

and the remainder is smooth, so plain trapezoid integration on the grid
converges at second order. Beyond the grid end W the input is replaced by
its power-law asymptote and integrated in closed form.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import BranchAmbiguity, GridTooCoarse, NonDecayingInput

TAIL_FRACTION = 0.1
TAIL_TERMS = 8
TAIL_FIT_FRACTION = 0.5
KK_TOL = 1e-2


@dataclass(frozen=True)
class LorentzParams:
    omega_p: float
    omega_0: float
    gamma: float

    def __post_init__(self):
        if min(self.omega_p, self.omega_0, self.gamma) <= 0:
            raise ValueError("Lorentz parameters must be positive")


@dataclass(frozen=True, eq=False)
class SusceptibilitySamples:
    omega: np.ndarray
    chi: np.ndarray
    model_params: LorentzParams | None = None

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        c = np.asarray(self.chi, dtype=complex)
        if w.ndim != 1 or w.shape != c.shape:
            raise ValueError("omega and chi must be 1-D and the same length")
        if w.size < 8:
            raise ValueError("need at least 8 frequency samples")
        if w[0] < 0 or np.any(np.diff(w) <= 0):
            raise ValueError("omega grid must be non-negative and strictly increasing")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "chi", c)


@dataclass(frozen=True)
class RefractiveProfile:
    omega: np.ndarray
    n: np.ndarray
    v_phase: np.ndarray
    v_group: np.ndarray


def lorentz_susceptibility(params: LorentzParams, omega):
    """chi(w) = w_p^2 / (w_0^2 - w^2 - i gamma w)."""
    w = np.asarray(omega, dtype=float)
    chi = params.omega_p**2 / (params.omega_0**2 - w**2 - 1j * params.gamma * w)
    return complex(chi) if chi.ndim == 0 else chi


def lorentz_samples(params: LorentzParams, span: float = 6.0, count: int = 4096) -> SusceptibilitySamples:
    """Lorentz model on the grid [0, span * omega_0] with ``count`` points."""
    w = np.linspace(0.0, span * params.omega_0, count)
    return SusceptibilitySamples(w, lorentz_susceptibility(params, w), params)


def _tail_integral(w, W, n):
    """int_W^inf dw' / (w'^(2n) (w'^2 - w^2)) for 0 <= w < W and n >= 1."""
    w = np.asarray(w, dtype=float)
    x = w / W
    out = np.empty_like(w)
    small = x < 0.5
    j = np.arange(60)[:, None]
    out[small] = np.sum(x[small] ** (2 * j) / (2 * n + 2 * j + 1), axis=0) / W ** (2 * n + 1)
    wl = w[~small]
    acc = np.log((W + wl) / (W - wl)) / (2 * wl)
    for i in range(1, n + 1):
        acc = (acc - 1.0 / ((2 * i - 1) * W ** (2 * i - 1))) / wl**2
    out[~small] = acc
    return out


def _tail_fit(w, f, power, terms=TAIL_TERMS, fraction=TAIL_FIT_FRACTION):
    """Coefficients c_j in f ~ sum_j c_j / w**(power + 2j) beyond the grid end.

    The series is fitted by least squares over the upper ``fraction`` of the
    grid, where the Lorentz asymptotic expansion already converges fast, and
    is constrained to reproduce the last sample exactly.

    Raises NonDecayingInput when the last tenth of the grid falls off slower
    than 1/w.
    """
    scale = np.abs(f).max()
    if scale == 0.0:
        return np.zeros(1)
    end = w >= w[-1] * (1.0 - TAIL_FRACTION)
    end[-3:] = True
    tail = np.abs(f[end])
    if tail.max() > 1e-12 * scale:
        nz = tail > 0
        slope = np.polyfit(np.log(w[end][nz]), np.log(tail[nz]), 1)[0] if nz.sum() >= 2 else 0.0
        if slope > -1.0:
            raise NonDecayingInput(
                f"input decays like w^{slope:.2f} at the grid end; need faster than 1/w"
            )
    sel = w >= w[-1] * (1.0 - fraction)
    sel[-3:] = True
    u = w[-1] / w[sel]
    terms = max(1, min(terms, sel.sum() // 2))
    if terms == 1:
        return np.array([f[-1] * w[-1] ** power])
    # pinned to the last sample: the model is f_end * u**p + sum_j b_j (u**(p + 2j) - u**p),
    # so it joins the data continuously where the pole log is singular
    shapes = np.stack([u ** (power + 2 * j) - u**power for j in range(1, terms)], axis=1)
    b = np.linalg.lstsq(shapes, f[sel] - f[-1] * u**power, rcond=None)[0]
    c = np.concatenate([[f[-1] - b.sum()], b])
    return c * w[-1] ** (power + 2 * np.arange(terms))


def _tail_sum(coef, om, W):
    """Closed-form tail contribution; term j decays two powers faster than term j - 1."""
    return sum(c * _tail_integral(om, W, 1 + j) for j, c in enumerate(coef))


def _pv_remainder(w, f, target, weighted, block=256):
    """Trapezoid integral of the pole-subtracted integrand, plus an error estimate.

    weighted=True integrates [w' f(w') - w f(w)] / (w'^2 - w^2),
    weighted=False integrates [f(w') - f(w)] / (w'^2 - w^2).
    The estimate compares against the same rule on every other grid point.
    """
    spline = CubicSpline(w, f)
    h_min = np.diff(w).min()
    m = w.size if w.size % 2 else w.size - 1
    vals, errs = [], []
    for start in range(0, target.size, block):
        wt = target[start : start + block, None]
        ft = spline(wt)
        num = (w * f - wt * ft) if weighted else (f - ft)
        den = w**2 - wt**2
        near = np.abs(w - wt) < 1e-6 * h_min
        with np.errstate(divide="ignore", invalid="ignore"):
            g = num / den
            # removable singularity: the limit of the quotient at w' = w
            if weighted:
                lim = np.where(wt == 0.0, spline(wt, 1), (ft + wt * spline(wt, 1)) / (2 * wt))
            else:
                lim = np.where(wt == 0.0, 0.5 * spline(wt, 2), spline(wt, 1) / (2 * wt))
        g = np.where(near, lim, g)
        vals.append(np.trapezoid(g, w, axis=1))
        half = np.trapezoid(g[:, :m:2], w[:m:2], axis=1)
        errs.append(np.abs(np.trapezoid(g[:, :m], w[:m], axis=1) - half) / 3.0)
    return np.concatenate(vals), np.concatenate(errs), spline


def _check_target(w, omega):
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(om < w[0]) or np.any(om >= w[-1]):
        raise ValueError("omega must lie inside [grid start, grid end)")
    return om


def _check_resolution(samples):
    p = samples.model_params
    if p is not None:
        points = p.gamma / np.diff(samples.omega).max()
        if points < 10:
            raise GridTooCoarse(f"resonance width spans only {points:.1f} grid points")


def _pole_log(w0, W, om):
    """int_{w0}^{W} dw' / (w'^2 - w^2) times 2w (principal value)."""
    if w0 == 0:
        return np.log(np.abs((W - om) / (W + om)))
    with np.errstate(divide="ignore"):
        lo = np.log(np.abs((w0 - om) / (w0 + om)))
    return np.log(np.abs((W - om) / (W + om))) - lo


def kk_real_from_imag(samples: SusceptibilitySamples, omega, tol: float = KK_TOL):
    """Re chi(w) = (2/pi) P int_0^inf w' Im chi(w') / (w'^2 - w^2) dw'.

    The part of the integral below the first grid point is ignored; grids
    normally start at 0. Beyond the grid end Im chi is continued by an even
    series sum_j c_j / w'^(3 + 2j), fitted to the upper half of the grid and
    pinned to the last sample.

    Raises
    ------
    GridTooCoarse
        If the half-grid error estimate exceeds ``tol`` times max |Im chi|.
    NonDecayingInput
        If Im chi does not decay at the grid end.
    """
    w = samples.omega
    f = samples.chi.imag
    om = _check_target(w, omega)
    _check_resolution(samples)
    coef = _tail_fit(w, f, 3)
    body, err, spline = _pv_remainder(w, f, om, weighted=True)
    scale = np.abs(f).max()
    if scale > 0 and np.any(err > tol * scale):
        raise GridTooCoarse(f"principal-value error estimate {err.max():.3g} too large")
    pole = np.where(om > 0, 0.5 * spline(om) * _pole_log(w[0], w[-1], om), 0.0)
    tail = _tail_sum(coef, om, w[-1])
    out = (2.0 / np.pi) * (body + pole + tail)
    return float(out[0]) if np.ndim(omega) == 0 else out


def kk_imag_from_real(samples: SusceptibilitySamples, omega, tol: float = KK_TOL):
    """Im chi(w) = -(2w/pi) P int_0^inf Re chi(w') / (w'^2 - w^2) dw'.

    Mirror of ``kk_real_from_imag``; the tail series starts at 1 / w'^2.
    """
    w = samples.omega
    f = samples.chi.real
    om = _check_target(w, omega)
    _check_resolution(samples)
    coef = _tail_fit(w, f, 2)
    body, err, spline = _pv_remainder(w, f, om, weighted=False)
    scale = np.abs(f).max()
    if scale > 0 and np.any(err * np.maximum(om, 1e-300) > tol * scale):
        raise GridTooCoarse(f"principal-value error estimate {err.max():.3g} too large")
    with np.errstate(divide="ignore", invalid="ignore"):
        pole = np.where(om > 0, spline(om) * _pole_log(w[0], w[-1], om) / (2.0 * om), 0.0)
    tail = _tail_sum(coef, om, w[-1])
    out = -(2.0 * om / np.pi) * (body + pole + tail)
    return float(out[0]) if np.ndim(omega) == 0 else out


def refractive_profile(samples: SusceptibilitySamples) -> RefractiveProfile:
    """n = sqrt(1 + chi), v_phase = 1 / Re n, v_group = 1 / d(w Re n)/dw.

    The principal root is taken and then kept continuous along the grid.

    Raises
    ------
    BranchAmbiguity
        If 1 + chi touches or crosses the negative real axis.
    """
    z = 1.0 + samples.chi
    on_cut = (z.imag == 0) & (z.real < 0)
    crossing = (z.real[1:] < 0) & (z.real[:-1] < 0) & (np.sign(z.imag[1:]) != np.sign(z.imag[:-1]))
    if np.any(on_cut) or np.any(crossing):
        raise BranchAmbiguity("1 + chi crosses the negative real axis")
    n = np.sqrt(z)
    for i in range(1, n.size):
        if abs(n[i] + n[i - 1]) < abs(n[i] - n[i - 1]):
            n[i:] = -n[i:]
    w = samples.omega
    with np.errstate(divide="ignore"):
        v_phase = 1.0 / n.real
        v_group = 1.0 / np.gradient(w * n.real, w)
    return RefractiveProfile(omega=w, n=n, v_phase=v_phase, v_group=v_group)


def read_susceptibility_csv(path) -> SusceptibilitySamples:
    """Two columns (w, Im chi) or three columns (w, Re chi, Im chi).

    Lines starting with '#' and a non-numeric header row are skipped.
    """
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in rec])
            except ValueError:
                if rows:
                    raise
    data = np.array(rows)
    if data.ndim != 2 or data.shape[1] not in (2, 3):
        raise ValueError("susceptibility table needs 2 or 3 columns")
    if data.shape[1] == 2:
        return SusceptibilitySamples(data[:, 0], 1j * data[:, 1])
    return SusceptibilitySamples(data[:, 0], data[:, 1] + 1j * data[:, 2])

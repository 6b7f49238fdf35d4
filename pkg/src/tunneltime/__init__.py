"""
tunneltime: numerical laboratory for one-dimensional quantum tunneling times.

Modules
-------
potential   barrier shapes, turning points, asymptotic cuts
wkb         barrier action, WKB transmission, imaginary traversal time
scatter     exact transfer-matrix scattering and interior wavefunctions
clocks      phase (Wigner), dwell and Larmor clock times
dispersion  Lorentz susceptibility, Kramers-Kronig transforms, group velocity
wavepacket  split-operator Gaussian packets and peak-arrival timing
cli         config-driven command-line front end
"""

__version__ = "0.1.0"

from .errors import TunnelError  # noqa: F401
from .potential import (  # noqa: F401
    Eckart,
    Gaussian,
    Rectangular,
    Sampled,
    TurningPoints,
    asymptotic_check,
    evaluate,
    find_turning_points,
    zero_potential,
)

"""
Command-line driver: one config file in, one CSV out.

    tunneltime --config run.cfg [--output out.csv] [--threads N] [--verbose]

The config is flat ``key = value`` text with dotted prefixes; see
configs/SCHEMA.md for every key. The CSV starts with '#' lines carrying the
artifact version and the full effective config, then a header row, then
numbers in 17-significant-digit scientific notation.

Exit codes: 0 success, 1 an acceptance criterion failed, 2 config error,
3 compute error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import acceptance as acc
from . import dispersion as dsp
from .clocks import clock_report, larmor_amplitudes
from .errors import ConfigError, NoBarrier, TunnelError
from .potential import Eckart, Gaussian, Rectangular, Sampled
from .scatter import scattering_amplitudes
from .wavepacket import PacketSpec, auto_grid, compare_free, write_snapshots_csv
from .wkb import barrier_action, imaginary_traversal_time, transmission_wkb

log = logging.getLogger("tunneltime")

COMMANDS = ("transmission", "times", "larmor", "kk", "wavepacket", "acceptance")
SWEEP_VARS = {"transmission": ("E", "L"), "times": ("E", "L"), "larmor": ("omega_L",), "kk": ("omega",)}

DEFAULTS = {
    "potential.shape": "rectangular",
    "potential.height": "1.0",
    "potential.left": "0.0",
    "potential.right": "1.0",
    "potential.width": "1.0",
    "potential.center": "0.0",
    "potential.sigma": "1.0",
    "potential.mass": "1.0",
    "potential.file": "",
    "sweep.variable": "E",
    "sweep.start": "0.1",
    "sweep.stop": "0.9",
    "sweep.count": "9",
    "sweep.spacing": "linear",
    "sweep.relative": "false",
    "energy": "0.5",
    "larmor.omegas": "1e-3, 5e-4, 2.5e-4",
    "dispersion.omega_p": "0.5",
    "dispersion.omega_0": "1.0",
    "dispersion.gamma": "0.05",
    "dispersion.span": "6.0",
    "dispersion.count": "4096",
    "dispersion.file": "",
    "packet.x0": "-200.0",
    "packet.k0": "1.0",
    "packet.sigma_x": "25.0",
    "packet.detector": "10.0",
    "packet.t_final": "360.0",
    "grid.n": "2048",
    "grid.dt": "0",
    "packet.snapshots": "",
    "acceptance.criteria": "1, 2, 3, 4, 5, 6, 7, 8",
    "acceptance.repeat": "true",
    "output": "",
}

TOLERANCES = {"tol.kk": dsp.KK_TOL, "tol.larmor": 1e-3}

UNITS = {
    "E": "energy",
    "L": "length",
    "T_exact": "probability",
    "R_exact": "probability",
    "D_wkb": "probability",
    "action": "dimensionless",
    "unitarity_error": "dimensionless",
    "omega": "frequency",
    "omega_L": "frequency",
    "t": "time",
}


def _units(col):
    if col.startswith("tau"):
        return "time"
    return UNITS.get(col, "dimensionless")


# -- config -----------------------------------------------------------------


def load_config(path) -> dict:
    """Read a flat key = value file and merge it over the defaults."""
    parser = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_string("[run]\n" + fh.read(), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    raw = dict(parser["run"])
    unknown = sorted(set(raw) - set(DEFAULTS) - {"command"} - set(TOLERANCES))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "command" not in raw:
        raise ConfigError("missing required key: command")
    cfg = dict(DEFAULTS)
    cfg.update({k: str(v) for k, v in TOLERANCES.items()})
    cfg.update(raw)
    cfg["_explicit"] = frozenset(raw)
    if cfg["command"] not in COMMANDS:
        raise ConfigError(f"command: expected one of {', '.join(COMMANDS)}, got {cfg['command']!r}")
    return cfg


def _float(cfg, key):
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"{key}: not a number: {cfg[key]!r}") from None


def _int(cfg, key):
    try:
        return int(cfg[key])
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {cfg[key]!r}") from None


def _bool(cfg, key):
    val = cfg[key].strip().lower()
    if val in ("true", "yes", "1", "on"):
        return True
    if val in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {cfg[key]!r}")


def _floats(cfg, key):
    try:
        return [float(v) for v in cfg[key].replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{key}: expected a list of numbers") from None


def build_potential(cfg, length=None):
    """PotentialSpec from the potential.* keys; ``length`` overrides the width."""
    shape = cfg["potential.shape"].lower()
    m = _float(cfg, "potential.mass")
    try:
        if shape == "rectangular":
            left = _float(cfg, "potential.left")
            right = left + length if length is not None else _float(cfg, "potential.right")
            return Rectangular(_float(cfg, "potential.height"), left, right, m)
        if shape == "eckart":
            w = length if length is not None else _float(cfg, "potential.width")
            return Eckart(_float(cfg, "potential.height"), w, m)
        if shape == "gaussian":
            s = length if length is not None else _float(cfg, "potential.sigma")
            return Gaussian(_float(cfg, "potential.height"), _float(cfg, "potential.center"), s, m)
        if shape == "sampled":
            if length is not None:
                raise ConfigError("sweep.variable: L sweeps are not defined for sampled potentials")
            table = np.loadtxt(cfg["potential.file"], delimiter=",", comments="#", ndmin=2)
            return Sampled(table[:, 0], table[:, 1], m)
    except ValueError as exc:
        raise ConfigError(f"potential: {exc}") from None
    raise ConfigError(f"potential.shape: unknown shape {shape!r}")


def sweep_values(cfg):
    """Sweep points from sweep.*; the variable must suit the command."""
    var = cfg["sweep.variable"]
    allowed = SWEEP_VARS.get(cfg["command"], ())
    if var not in allowed:
        raise ConfigError(f"sweep.variable: {var!r} not valid for {cfg['command']} (use {', '.join(allowed)})")
    start, stop = _float(cfg, "sweep.start"), _float(cfg, "sweep.stop")
    count = _int(cfg, "sweep.count")
    if count < 1:
        raise ConfigError("sweep.count: must be at least 1")
    if not start < stop:
        raise ConfigError("sweep.start: must be below sweep.stop")
    spacing = cfg["sweep.spacing"]
    if spacing == "linear":
        vals = np.linspace(start, stop, count)
    elif spacing == "log":
        if start <= 0:
            raise ConfigError("sweep.start: log spacing needs a positive start")
        vals = np.geomspace(start, stop, count)
    else:
        raise ConfigError(f"sweep.spacing: expected linear or log, got {spacing!r}")
    if count == 1:
        vals = np.array([start])
    return var, [float(v) for v in vals]


# -- commands ---------------------------------------------------------------


def _nan_if_no_barrier(fn, *args):
    try:
        return fn(*args)
    except NoBarrier:
        return float("nan")


def _scaled_energy(cfg, spec, e):
    return e * spec.peak if _bool(cfg, "sweep.relative") else e


def _point_spec_energy(cfg, var, value):
    if var == "L":
        spec = build_potential(cfg, length=value)
        return spec, _scaled_energy(cfg, spec, _float(cfg, "energy"))
    spec = build_potential(cfg)
    return spec, _scaled_energy(cfg, spec, value)


def _transmission_row(cfg, var, value):
    spec, e = _point_spec_energy(cfg, var, value)
    s = scattering_amplitudes(spec, e)
    d = transmission_wkb(spec, e, above_barrier=True)
    a = _nan_if_no_barrier(barrier_action, spec, e)
    return [value, e, s.T, s.R, d, a, abs(s.R + s.T - 1.0)]


def _times_row(cfg, var, value):
    spec, e = _point_spec_energy(cfg, var, value)
    rep = clock_report(spec, e, omegas=_floats(cfg, "larmor.omegas"), rtol=_float(cfg, "tol.larmor"))
    s = scattering_amplitudes(spec, e)
    return [
        value,
        e,
        s.T,
        transmission_wkb(spec, e, above_barrier=True),
        _nan_if_no_barrier(imaginary_traversal_time, spec, e),
        rep.tau_phase_delay,
        rep.tau_phase_traversal,
        rep.tau_dwell,
        rep.tau_larmor_y,
        rep.tau_larmor_z,
    ]


def _larmor_row(cfg, var, value):
    spec = build_potential(cfg)
    e = _scaled_energy(cfg, spec, _float(cfg, "energy"))
    sol = larmor_amplitudes(spec, e, value)
    return [value, e, sol.P_x, sol.P_y, sol.P_z, sol.P_z / value, -sol.P_y / value]


ROWS = {
    "transmission": (
        _transmission_row,
        ["{var}", "E", "T_exact", "R_exact", "D_wkb", "action", "unitarity_error"],
    ),
    "times": (
        _times_row,
        [
            "{var}",
            "E",
            "T_exact",
            "D_wkb",
            "tau_imag",
            "tau_phase_delay",
            "tau_phase_traversal",
            "tau_dwell",
            "tau_larmor_y",
            "tau_larmor_z",
        ],
    ),
    "larmor": (
        _larmor_row,
        ["{var}", "E", "P_x", "P_y", "P_z", "tau_z_at_omega", "tau_y_at_omega"],
    ),
}


def _sweep_table(cfg, threads):
    var, values = sweep_values(cfg)
    func, cols = ROWS[cfg["command"]]
    cols = [c.format(var=var) for c in cols]
    # an energy sweep's value is already the E column
    drop = cols[0] == cols[1]
    if drop:
        cols = cols[1:]

    def point(i_v):
        i, v = i_v
        log.info("sweep point %d/%d: %s = %g", i + 1, len(values), var, v)
        try:
            row = func(cfg, var, v)
        except ConfigError:
            raise
        except TunnelError as exc:
            raise TunnelError(f"sweep point {i} ({var} = {v:g}): {type(exc).__name__}: {exc}") from exc
        return row[1:] if drop else row

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(point, enumerate(values)))
    return cols, rows


def _kk_samples(cfg):
    if cfg["dispersion.file"]:
        return dsp.read_susceptibility_csv(cfg["dispersion.file"])
    try:
        params = dsp.LorentzParams(
            _float(cfg, "dispersion.omega_p"), _float(cfg, "dispersion.omega_0"), _float(cfg, "dispersion.gamma")
        )
    except ValueError as exc:
        raise ConfigError(f"dispersion: {exc}") from None
    count = _int(cfg, "dispersion.count")
    if count < 8:
        raise ConfigError("dispersion.count: need at least 8 samples")
    return dsp.lorentz_samples(params, _float(cfg, "dispersion.span"), count)


def _kk_table(cfg):
    s = _kk_samples(cfg)
    tol = _float(cfg, "tol.kk")
    if "sweep.variable" in cfg["_explicit"]:
        _, om = sweep_values(cfg)
        om = np.asarray(om)
        idx = None
    else:
        idx = np.arange(s.omega.size - 1)
        om = s.omega[idx]
    re = dsp.kk_real_from_imag(s, om, tol=tol)
    im = dsp.kk_imag_from_real(s, om, tol=tol) if np.any(s.chi.real != 0) else np.zeros_like(om)
    if idx is None:
        return ["omega", "re_chi_kk", "im_chi_kk"], [list(r) for r in zip(om, re, im)]
    prof = dsp.refractive_profile(s)
    cols = ["omega", "re_chi", "im_chi", "re_chi_kk", "im_chi_kk", "re_n", "im_n", "v_phase", "v_group"]
    rows = [
        [om[j], s.chi.real[i], s.chi.imag[i], re[j], im[j], prof.n.real[i], prof.n.imag[i], prof.v_phase[i], prof.v_group[i]]
        for j, i in enumerate(idx)
    ]
    return cols, rows


def _wavepacket_table(cfg):
    spec = build_potential(cfg)
    m = spec.mass
    try:
        packet = PacketSpec(_float(cfg, "packet.x0"), _float(cfg, "packet.k0"), _float(cfg, "packet.sigma_x"), m)
    except ValueError as exc:
        raise ConfigError(f"packet: {exc}") from None
    t_final = _float(cfg, "packet.t_final")
    try:
        grid = auto_grid(packet, spec, t_final, _int(cfg, "grid.n"))
    except ValueError as exc:
        raise ConfigError(f"grid.n: {exc}") from None
    dt = _float(cfg, "grid.dt") or 0.1 * m * grid.dx**2
    detector = _float(cfg, "packet.detector")
    cmp = compare_free(packet, spec, detector, grid, dt, t_final)
    if cfg["packet.snapshots"]:
        write_snapshots_csv(cmp.barrier_run, cfg["packet.snapshots"], header={"artifact.version": __version__})
    rho_b = np.abs(cmp.barrier_run.field_at(detector)) ** 2
    rho_f = np.abs(cmp.free_run.field_at(detector)) ** 2
    summary = {
        "result.advance": cmp.advance,
        "result.arrival_barrier": cmp.arrival_barrier,
        "result.arrival_free": cmp.arrival_free,
        "result.transmitted_fraction": cmp.transmitted_fraction,
        "result.gate_x": cmp.gate_x,
        "result.dt": cmp.barrier_run.dt,
        "result.dx": grid.dx,
        "result.box": f"{grid.left!r} {grid.right!r}",
    }
    rows = [[t, a, b] for t, a, b in zip(cmp.barrier_run.times, rho_b, rho_f)]
    return ["t", "density_barrier", "density_free"], rows, summary


def _acceptance_table(cfg):
    ids = [int(v) for v in _floats(cfg, "acceptance.criteria")]
    bad = [i for i in ids if i not in acc.CRITERIA]
    if bad:
        raise ConfigError(f"acceptance.criteria: unknown criteria {bad}")
    rows = acc.run_suite(ids)
    if _bool(cfg, "acceptance.repeat"):
        again = acc.run_suite(ids)
        same = _render_rows(_acceptance_rows(rows)) == _render_rows(_acceptance_rows(again))
        rows.append(acc.Check(9, "in-process rerun gives identical rows", 0.0 if same else 1.0, 0.0, same))
    return ["criterion", "check", "value", "tolerance", "passed"], _acceptance_rows(rows), rows


def _acceptance_rows(rows):
    return [[r.criterion, r.name, r.value, r.tolerance, int(r.passed)] for r in rows]


# -- output -----------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return '"' + v.replace('"', "'") + '"' if ("," in v or " " in v) else v
    return "%.16e" % float(v)


def _render_rows(rows):
    return "".join(",".join(_fmt(v) for v in row) + "\n" for row in rows)


def render_csv(cfg, cols, rows, extra=None) -> str:
    head = [f"# tunneltime {__version__}", "# units: hbar = 1; c = 1 for dispersion"]
    for key in sorted(k for k in cfg if not k.startswith("_")):
        head.append(f"# {key} = {cfg[key]}")
    for key, val in (extra or {}).items():
        head.append(f"# {key} = {_fmt(val) if not isinstance(val, str) else val}")
    head.append("# columns: " + ", ".join(f"{c} [{_units(c)}]" for c in cols))
    return "\n".join(head) + "\n" + ",".join(cols) + "\n" + _render_rows(rows)


def run(cfg, output=None, threads=1) -> int:
    """Execute one config; return the exit code."""
    command = cfg["command"]
    extra = None
    status = 0
    if command in ROWS:
        cols, rows = _sweep_table(cfg, threads)
    elif command == "kk":
        cols, rows = _kk_table(cfg)
    elif command == "wavepacket":
        cols, rows, extra = _wavepacket_table(cfg)
    else:
        cols, rows, checks = _acceptance_table(cfg)
        verdict = acc.summarize(checks)
        for cid in sorted(verdict):
            names = "; ".join(
                f"{c.name} = {c.value:.3g} (tol {c.tolerance:.3g})" for c in checks if c.criterion == cid and not c.passed
            )
            print(f"criterion {cid}: {'PASS' if verdict[cid] else 'FAIL'}" + (f"  [{names}]" if names else ""))
        status = 0 if all(verdict.values()) else 1

    text = render_csv(cfg, cols, rows, extra)
    path = output or cfg["output"]
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
        log.info("wrote %d rows to %s", len(rows), path)
    else:
        sys.stdout.write(text)
    return status


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="tunneltime", description="Tunneling-time numerical laboratory.")
    ap.add_argument("--config", required=True, help="key = value config file")
    ap.add_argument("--output", help="CSV path (default: config 'output' or stdout)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    ap.add_argument("--verbose", action="store_true", help="log progress to stderr")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    try:
        cfg = load_config(args.config)
        return run(cfg, args.output, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TunnelError as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

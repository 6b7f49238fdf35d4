import subprocess
import sys

import numpy as np
import pytest

from tunneltime.cli import load_config, main
from tunneltime.errors import ConfigError


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _table(path):
    lines = open(path).read().splitlines()
    head = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    return head, body[0].split(","), np.array([[float(v) for v in l.split(",")] for l in body[1:]])


TRANSMISSION = """\
command = transmission   # inline comments are allowed
potential.shape = rectangular
potential.right = 1.0
sweep.variable = E
sweep.start = 0.1
sweep.stop = 1.5
sweep.count = 15
"""


def test_transmission_columns_and_header(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["--config", _write(tmp_path, TRANSMISSION), "--output", str(out)]) == 0
    head, cols, data = _table(out)
    assert head[0].startswith("# tunneltime ")
    assert "# potential.shape = rectangular" in head
    assert "# sweep.count = 15" in head
    assert any(h.startswith("# tol.kk = ") for h in head)
    assert cols == ["E", "T_exact", "R_exact", "D_wkb", "action", "unitarity_error"]
    assert data.shape == (15, 6)
    assert np.all(data[:, 5] < 1e-10)
    above = data[:, 0] >= 1.0
    assert np.all(data[above, 3] == 1.0) and np.all(np.isnan(data[above, 4]))
    i = np.argmin(abs(data[:, 0] - 0.5))
    assert data[i, 1] == pytest.approx(1 / np.cosh(1.0) ** 2, abs=1e-10)


def test_threads_do_not_change_bytes(tmp_path):
    cfg = _write(tmp_path, TRANSMISSION.replace("transmission", "times").replace("1.5", "0.9"))
    one, two = tmp_path / "1.csv", tmp_path / "2.csv"
    assert main(["--config", cfg, "--output", str(one), "--threads", "1"]) == 0
    assert main(["--config", cfg, "--output", str(two), "--threads", "2"]) == 0
    assert one.read_bytes() == two.read_bytes()


def test_length_sweep(tmp_path):
    out = tmp_path / "l.csv"
    text = TRANSMISSION.replace("sweep.variable = E", "sweep.variable = L\nenergy = 0.5")
    assert main(["--config", _write(tmp_path, text), "--output", str(out)]) == 0
    _, cols, data = _table(out)
    assert cols[:2] == ["L", "E"]
    assert np.all(np.diff(data[:, 2]) < 0)


def test_kk_command(tmp_path):
    out = tmp_path / "kk.csv"
    cfg = _write(tmp_path, "command = kk\ndispersion.count = 2048\n")
    assert main(["--config", cfg, "--output", str(out)]) == 0
    _, cols, data = _table(out)
    assert cols[:5] == ["omega", "re_chi", "im_chi", "re_chi_kk", "im_chi_kk"]
    far = np.abs(data[:, 0] - 1.0) > 0.1
    assert np.max(np.abs(data[far, 3] / data[far, 1] - 1)) < 1e-2


def test_unknown_key_exit_2(tmp_path, capsys):
    assert main(["--config", _write(tmp_path, "command = kk\npotential.heigth = 1\n")]) == 2
    assert "potential.heigth" in capsys.readouterr().err


def test_bad_value_names_field(tmp_path, capsys):
    assert main(["--config", _write(tmp_path, TRANSMISSION + "potential.height = tall\n")]) == 2
    assert "potential.height" in capsys.readouterr().err


def test_wrong_sweep_variable(tmp_path, capsys):
    assert main(["--config", _write(tmp_path, TRANSMISSION.replace("= E", "= omega"))]) == 2
    assert "sweep.variable" in capsys.readouterr().err


def test_missing_command(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "energy = 0.5\n"))


def test_compute_error_exit_3_names_point(tmp_path, capsys):
    text = (
        "command = larmor\npotential.right = 1.0\nenergy = 0.5\n"
        "sweep.variable = omega_L\nsweep.start = 0.5\nsweep.stop = 1.5\nsweep.count = 3\n"
    )
    assert main(["--config", _write(tmp_path, text)]) == 3
    err = capsys.readouterr().err
    assert "sweep point 1" in err and "omega_L = 1" in err and "ChannelAboveBarrier" in err


def test_io_error_exit_4(tmp_path):
    cfg = _write(tmp_path, TRANSMISSION)
    assert main(["--config", cfg, "--output", str(tmp_path / "missing" / "x.csv")]) == 4
    assert main(["--config", str(tmp_path / "nope.cfg")]) == 4


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, TRANSMISSION)
    res = subprocess.run([sys.executable, "-m", "tunneltime", "--config", cfg], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("# tunneltime ")


def test_acceptance_subset_passes(tmp_path, capsys):
    cfg = _write(tmp_path, "command = acceptance\nacceptance.criteria = 1, 7\nacceptance.repeat = false\n")
    assert main(["--config", cfg, "--output", str(tmp_path / "a.csv")]) == 0
    out = capsys.readouterr().out
    assert "criterion 1: PASS" in out and "criterion 7: PASS" in out

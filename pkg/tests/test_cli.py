import json

import numpy as np
import pytest

from branchlab import cli
from branchlab.cli import ConfigError, load_config, parse_grid


def run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path)])


# ---------------------------------------------------------------------------
# grid specs


def test_parse_grid_geom():
    g = parse_grid("geom:0.5:8:5")
    assert np.allclose(g, np.geomspace(0.5, 8.0, 5), rtol=1e-15)


def test_parse_grid_lin():
    g = parse_grid("lin:0:1:5")
    assert g.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_parse_grid_list_is_sorted():
    assert parse_grid("4,1,2").tolist() == [1.0, 2.0, 4.0]


def test_parse_grid_scalar():
    assert parse_grid("2").tolist() == [2.0]


@pytest.mark.parametrize("bad", [
    "geom:0:1:5",      # geometric grid needs positive endpoints
    "geom:1:2",        # wrong arity
    "lin:1:2:0",       # empty grid
    "a,b",
    "",
])
def test_parse_grid_bad(bad):
    with pytest.raises(ConfigError):
        parse_grid(bad)


# ---------------------------------------------------------------------------
# config files


def test_load_config(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nlaw = binary\nmax-index = 256  # inline\n\nN=6\n")
    assert load_config(str(p)) == {"law": "binary", "max_index": "256",
                                   "n": "6"}


def test_load_config_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.cfg"))


def test_load_config_bad_line(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("just words\n")
    with pytest.raises(ConfigError, match="key=value"):
        load_config(str(p))


# ---------------------------------------------------------------------------
# evolve: known values, file formats


def test_evolve_outputs(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 6\nmax-index = 256\n")
    rc = run(tmp_path, "evolve", "--config", str(cfg))
    assert rc == 0
    assert (tmp_path / "evolve.png").exists()

    raw = (tmp_path / "evolve.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "n,j,mass"
    # binary law: two generations in, the extinct mass is 1/2 + 1/8
    assert "2,0,0.625" in lines
    for line in lines[1:]:
        n, j, mass = line.split(",")
        assert float(mass) >= 0.0
        assert int(n) <= 6 and int(j) < 256

    doc = json.loads((tmp_path / "evolve_summary.json").read_text())
    assert set(doc) == {"experiment", "config", "results", "checks"}
    assert doc["experiment"] == "evolve"
    assert doc["config"]["seed"] == 0
    assert doc["config"]["max_index"] == 256
    for c in doc["checks"]:
        assert set(c) == {"name", "value", "tolerance", "pass"}
        assert c["pass"] is True


def test_no_plot(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 4\nmax-index = 64\n")
    rc = run(tmp_path, "evolve", "--config", str(cfg), "--no-plot")
    assert rc == 0
    assert not (tmp_path / "evolve.png").exists()
    assert (tmp_path / "evolve.csv").exists()


def test_csv_cells_roundtrip(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 5\nmax-index = 64\n")
    run(tmp_path, "evolve", "--config", str(cfg), "--no-plot",
        "--law", "ternary")
    from branchlab import gw
    seq = gw.descendant_sequence(gw.builtin_law("ternary"), 5, max_index=64)
    lines = (tmp_path / "evolve.csv").read_text().splitlines()[1:]
    for line in lines:
        n, j, mass = line.split(",")
        # 17 significant digits reproduce the double exactly
        assert float(mass) == float(seq[int(n)].masses[int(j)])


# ---------------------------------------------------------------------------
# exit codes


def test_unknown_law_exit_1(tmp_path, capsys):
    assert run(tmp_path, "evolve", "--law", "nope", "--no-plot") == 1
    assert "error:" in capsys.readouterr().err


def test_bad_weights_exit_1(tmp_path, capsys):
    assert run(tmp_path, "evolve", "--weights", "0.5,oops",
               "--no-plot") == 1
    assert "error:" in capsys.readouterr().err


def test_bad_grid_exit_1(tmp_path, capsys):
    assert run(tmp_path, "limit", "--q-grid", "geom:0:1:5",
               "--no-plot") == 1
    assert "bad grid spec" in capsys.readouterr().err


def test_small_c_exit_1(tmp_path, capsys):
    assert run(tmp_path, "universal-build", "--c", "0.3", "--no-plot") == 1
    assert "increase c" in capsys.readouterr().err


def test_tolerance_failure_exit_2(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("tol = 1e-12\n")
    rc = run(tmp_path, "limit", "--config", str(cfg), "--no-plot",
             "--h", "0.03125", "--q-grid", "1", "--t-grid", "1")
    assert rc == 2
    doc = json.loads((tmp_path / "limit_summary.json").read_text())
    assert doc["checks"][0]["pass"] is False


def test_usage_error_exit_1():
    assert cli.main(["frobnicate"]) == 1


def test_help_exit_0(capsys):
    assert cli.main(["--help"]) == 0
    assert "verify" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# verify subcommand


def test_verify_unknown_exit_1(capsys):
    assert cli.main(["verify", "nosuch"]) == 1
    assert "unknown criterion" in capsys.readouterr().err


def test_verify_grimvall(capsys):
    assert cli.main(["verify", "grimvall"]) == 0
    out = capsys.readouterr().out
    assert "PASS criterion 10 grimvall: a-hat-zero" in out
    assert "FAIL" not in out


def test_verify_damped_identity_reports_failure(capsys):
    # the stable branch is a known red: see tests/test_acceptance.py
    assert cli.main(["verify", "damped-identity"]) == 2
    out = capsys.readouterr().out
    assert "PASS criterion  9 damped-identity: feller-k2" in out
    assert "FAIL criterion  9 damped-identity: stable-k30" in out


# ---------------------------------------------------------------------------
# determinism


def test_same_seed_same_bytes(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 4\npaths = 20000\nmax-index = 128\n")
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    for d, seed in ((a, "7"), (b, "7"), (c, "8")):
        cli.main(["simulate", "--config", str(cfg), "--seed", seed,
                  "--no-plot", "--out", str(d)])
    first = (a / "simulate.csv").read_bytes()
    assert first == (b / "simulate.csv").read_bytes()
    assert first != (c / "simulate.csv").read_bytes()
    assert (a / "simulate_summary.json").read_bytes() == \
        (b / "simulate_summary.json").read_bytes()


# ---------------------------------------------------------------------------
# limit: agreement with the closed form for the binary law


def test_limit_binary_closed_form(tmp_path):
    rc = run(tmp_path, "limit", "--law", "binary", "--h", "0.0078125",
             "--q-grid", "1", "--t-grid", "2", "--no-plot")
    assert rc == 0
    line = (tmp_path / "limit.csv").read_text().splitlines()[1]
    q, t, euler, ode, gap = (float(x) for x in line.split(","))
    assert (q, t) == (1.0, 2.0)
    # exact exponent for the q^2/2 mechanism is q / (1 + q t / 2)
    assert euler == pytest.approx(0.5, abs=2e-3)
    assert ode == pytest.approx(0.5, abs=1e-6)
    assert gap < 2e-3

import dataclasses

import numpy as np
import pytest

from acopt.cli import main
from acopt.config import ConfigError, format_config, parse_config, parse_profile
from acopt.grid import SpatialGrid
from acopt.io import read_field, write_field, write_history
from acopt.scenarios import build, control_norms, run_scenario
from acopt.trn import IterRecord

MINIMAL = """\
# smallest complete file
scenario = tiny
nx = 8
ny = 6
T = 1e-3
M = 2
epsilon = 2.2736e-2
nu_T = 1.0
nu_d = 0
nu_f = 0.01
potential = double_well
c0 = circle(r=0.5)
"""


def test_minimal_config_and_round_trip():
    cfg = parse_config(MINIMAL)
    assert (cfg.nx, cfg.ny, cfg.M, cfg.epsilon) == (8, 6, 2, 2.2736e-2)
    assert cfg.target == cfg.c0 and cfg.scheme == "implicit"
    assert parse_config(format_config(cfg)) == cfg
    other = dataclasses.replace(cfg, c_T=parse_profile("vertical_interface(x0=0.25)"),
                                warm_start=True, snapshots=(0, 2), tol=1e-6)
    assert parse_config(format_config(other)) == other


@pytest.mark.parametrize("text, line, needle", [
    ("nu_T = banana\n", 1, "nu_T"),
    (MINIMAL + "nu_f = 0.02\n", 13, "duplicate"),
    (MINIMAL + "colour = blue\n", 13, "unknown key"),
    (MINIMAL + "nx 4\n", 13, "key = value"),
    (MINIMAL.replace("nx = 8", "nx = 8.5"), 3, "integer"),
    (MINIMAL.replace("circle(r=0.5)", "blob(r=1)"), 12, "generator"),
    (MINIMAL.replace("nu_d = 0", "nu_d = -1"), 9, "non-negative"),
    (MINIMAL.replace("nu_d = 0", "nu_d = 1"), 9, "c_d"),
    (MINIMAL + "N = 3\n", 13, "N = 2"),
    (MINIMAL + "warm_start = yes\n", 13, "true or false"),
    (MINIMAL + "T2 = 1\n", 13, "unknown key"),
    (MINIMAL.replace("T = 1e-3", "T = 1/59"), 5, "number"),
])
def test_config_errors_name_the_line(text, line, needle):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:") and needle in str(info.value)


def test_missing_required_key():
    with pytest.raises(ConfigError, match="epsilon"):
        parse_config(MINIMAL.replace("epsilon = 2.2736e-2\n", ""))


def test_obstacle_initial_state_must_lie_in_simplex():
    base = MINIMAL.replace("double_well", "obstacle") + "N = 3\n"
    ok = base.replace("circle(r=0.5)", "rings3(width=0.5)")
    assert parse_config(ok).obstacle
    bad = base.replace("circle(r=0.5)", "constant(value=0.5, value2=0.5, value3=0.1)")
    with pytest.raises(ConfigError, match="simplex"):
        parse_config(bad)
    with pytest.raises(ConfigError, match="shape"):
        parse_config(base)


def test_write_field_exact_text(tmp_path):
    g = SpatialGrid.square(0.0, 1.0, 2)
    path = write_field(np.ones(g.shape), g, tmp_path / "f.csv")
    assert path.read_text() == ("x,y,c1\n0.0,0.0,1.0\n1.0,0.0,1.0\n"
                                "0.0,1.0,1.0\n1.0,1.0,1.0\n")


def test_field_round_trip_is_bit_exact(tmp_path, rng):
    g = SpatialGrid(-1.0, 2.0, 0.0, 0.3, 7, 5)
    c = rng.standard_normal((3, *g.shape)) * 10.0 ** rng.integers(-20, 20, (3, *g.shape))
    write_field(c, g, tmp_path / "v.csv")
    x, y, back = read_field(tmp_path / "v.csv")
    assert np.array_equal(back, c) and np.array_equal(x, g.x) and np.array_equal(y, g.y)
    with pytest.raises(ValueError):
        write_field(np.ones((3, 3)), g, tmp_path / "bad.csv")


def test_history_lines(tmp_path):
    hist = [IterRecord(0, 1.5, 0.1, 1.0, 3, "boundary", 5),
            IterRecord(1, 1.25, 1e-9, 2.0, 0, "converged", 6)]
    text = write_history(hist, tmp_path / "h.csv").read_text().splitlines()
    assert len(text) == 3
    assert text[0] == "iter,j,grad_norm,delta,cg_iters,status,forward_solves"
    assert text[2] == "1,1.25,1e-09,2.0,0,converged,6"


def test_control_norms():
    g = SpatialGrid.square(0.0, 1.0, 5)
    f = np.stack([np.zeros(g.shape), 2 * np.ones(g.shape)])
    np.testing.assert_allclose(control_norms(f, g), [0.0, 2.0])


def _write(tmp_path, text, name="c.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_cli_exit_codes(tmp_path, capsys):
    good = _write(tmp_path, MINIMAL)
    assert main(["check", str(good)]) == 0
    bad = _write(tmp_path, "nu_T = banana\n", "bad.cfg")
    assert main(["check", str(bad)]) == 1
    assert "line 1" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.cfg")]) == 1


def test_cli_run_outputs_are_deterministic(tmp_path):
    cfg = _write(tmp_path, MINIMAL.replace("nx = 8", "nx = 12").replace("ny = 6", "ny = 12"))
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert main(["run", str(cfg), "--out", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]
    assert {"history.csv", "control_norm.csv", "interface.csv", "summary.csv",
            "state_0000.csv", "control_0002.csv"} <= set(outs[0])
    assert not any(name.endswith(".tmp") for name in outs[0])


def test_forward_only_and_semi_scheme(tmp_path):
    cfg = parse_config(MINIMAL)
    rep = run_scenario(cfg, tmp_path / "fw", forward_only=True, scheme="semi")
    assert rep.exit_code == 0 and rep.summary["scheme"] == "semi-implicit"
    assert not (tmp_path / "fw" / "history.csv").exists()
    assert build(cfg, "semi").scheme == "semi-implicit"


def test_gradcheck_command(tmp_path, capsys):
    cfg = _write(tmp_path, MINIMAL.replace("nx = 8", "nx = 12").replace("ny = 6", "ny = 12"))
    assert main(["gradcheck", str(cfg)]) == 0
    assert "max rel err" in capsys.readouterr().out

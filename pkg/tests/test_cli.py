import csv
import math

import pytest

from levyito import __version__
from levyito.cli import main, parse_config
from levyito.errors import ConfigError
from levyito.levy_core import read_path_csv, simulate_path

DESK = """
[model]
family = cgmy
c = 1
g = 5
m = 5
y = 0.5
gamma = martingale
delta = 1e-2

[contract]
r = 0.05
t = 0.5
k = 100
d = 130
"""


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def table(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def header(path):
    return [ln for ln in path.read_text().splitlines() if ln.startswith("#")]


# -- parsing and exit codes ------------------------------------------------------------


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="spto"):
        parse_config("[run]\ncommand = price-pide\n[contract]\nspto = 1\n")


def test_unknown_section():
    with pytest.raises(ConfigError, match="extras"):
        parse_config("[run]\ncommand = price-pide\n[extras]\na = 1\n")


def test_stochastic_commands_need_seed():
    with pytest.raises(ConfigError, match="seed"):
        parse_config("[run]\ncommand = price-mc\n")
    assert parse_config("[run]\ncommand = price-pide\n").seed is None


def test_negative_sigma_exits_1(tmp_path, capsys):
    cfg = write(tmp_path, DESK.replace("gamma = martingale", "gamma = 0\nsigma = -1") + "spot = 100\n")
    assert main(["price-pide", str(cfg)]) == 1
    assert "sigma" in capsys.readouterr().err


def test_bad_number_exits_1(tmp_path, capsys):
    cfg = write(tmp_path, DESK.replace("k = 100", "k = abc") + "spot = 100\n")
    assert main(["price-pide", str(cfg)]) == 1
    assert "'k'" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["price-pide", str(tmp_path / "absent.ini")]) == 1


def test_numerical_failure_exits_2(tmp_path, capsys):
    text = DESK + "spot = 100\n[numerics]\nn_x = 400\nn_t = 2\nextrapolate = false\n"
    assert main(["price-pide", str(write(tmp_path, text))]) == 2
    assert "increase n_t" in capsys.readouterr().err


# -- commands ----------------------------------------------------------------------------


def test_simulate_roundtrip(tmp_path):
    text = "[run]\nseed = 11\n" + DESK + "[numerics]\nt = 1.0\npath_index = 3\n"
    out = tmp_path / "path.csv"
    assert main(["simulate", str(write(tmp_path, text)), "-o", str(out)]) == 0
    assert header(out)[0] == f"# levyito {__version__}"
    back = read_path_csv(out)
    model = parse_config(text, "simulate").model()[0]
    ref = simulate_path(model, 1e-2, 1.0, 11, path_index=3)
    assert list(back.jump_times) == list(ref.jump_times)
    assert list(back.jump_sizes) == list(ref.jump_sizes)


def test_header_echoes_config_and_seed_override(tmp_path):
    text = "[run]\nseed = 1\n" + DESK + "spot = 100\n[numerics]\nn_paths = 200\n"
    out = tmp_path / "mc.csv"
    assert main(["price-mc", str(write(tmp_path, text)), "-o", str(out), "--seed", "9"]) == 0
    head = header(out)
    assert head[:3] == [f"# levyito {__version__}", "# command=price-mc", "# seed=9"]
    assert "# config: family = cgmy" in head
    row, = table(out)
    assert float(row["spot"]) == 100.0 and int(row["n_paths"]) == 200
    assert float(row["std_error"]) > 0.0 and float(row["delta"]) == 1e-2


def test_price_pide_writes_lattice(tmp_path):
    text = DESK + "spots = 90, 110, 140\n[numerics]\nn_x = 100\nn_t = 100\n"
    out = tmp_path / "pide.csv"
    assert main(["price-pide", str(write(tmp_path, text)), "-o", str(out)]) == 0
    rows = table(out)
    assert [float(r["spot"]) for r in rows] == [90.0, 110.0, 140.0]
    assert float(rows[2]["price"]) == 0.0 and "extrapolated=1" in rows[0]["grid_diag"]
    lattice = table(tmp_path / "pide_lattice.csv")
    assert len(lattice) == 101 * 101
    assert all(float(r["price"]) == 0.0 for r in lattice if float(r["spot"]) >= 130.0)


def test_verify_ito_affine_without_jumps(tmp_path):
    text = """
[run]
command = verify-ito
seed = 4
[model]
family = zero
gamma = 0.7
[function]
name = affine(0.5, -1.5, 2.0)
[numerics]
deltas = 1e-2, 1e-3
n_paths = 5
quad_tol = 1e-10
"""
    out = tmp_path / "ito.csv"
    assert main(["run", str(write(tmp_path, text)), "-o", str(out)]) == 0
    rows = table(out)
    assert len(rows) == 2
    assert all(float(r["max_abs_residual"]) <= 1e-9 for r in rows)


def test_mollify_demo(tmp_path):
    text = "[function]\nname = abs\n[numerics]\nepsilons = 0.1, 0.01\npoints = -0.5, 0.0, 0.5\n"
    out = tmp_path / "moll.csv"
    assert main(["mollify-demo", str(write(tmp_path, text)), "-o", str(out)]) == 0
    rows = table(out)
    assert len(rows) == 6
    for r in rows:
        if float(r["x"]) != 0.0:
            assert float(r["f_eps"]) == pytest.approx(float(r["f"]), abs=1e-12)


def test_decompose_reports_martingale_mean(tmp_path):
    text = "[run]\nseed = 2\n" + DESK + "[function]\nname = identity\n[numerics]\nn_paths = 20\n"
    out = tmp_path / "dec.csv"
    assert main(["decompose", str(write(tmp_path, text)), "-o", str(out)]) == 0
    assert any(h.startswith("# martingale_mean=") for h in header(out))
    rows = table(out)
    assert len(rows) == 20
    assert all(abs(float(r["residual"])) <= float(r["error_estimate"]) for r in rows)


def test_compare_desk_rows_pass(tmp_path):
    text = ("[run]\nseed = 5\n" + DESK.replace("delta = 1e-2", "delta = 1e-3") +
            "spots = 90, 110\n[numerics]\nn_paths = 20000\nn_x = 200\nn_t = 200\n")
    out = tmp_path / "cmp.csv"
    assert main(["compare", str(write(tmp_path, text)), "-o", str(out)]) == 0
    rows = table(out)
    assert len(rows) == 2
    for r in rows:
        assert r["pass"] == "1"
        assert math.isclose(float(r["abs_gap"]), abs(float(r["pide_price"]) - float(r["mc_mean"])))

import numpy as np
import pandas as pd
import pytest

from mssa.cli import main

SOLVE_TOML = """\
[experiment]
name = "solve"
seed = 1
samples = 5000
out = "{out}"

[model]
n = 1
ar = [0.7]
sigma = [1.0]

[filter]
length = 12
ht = [4.0]

[target]
kind = "allpass"
horizon = 1
"""


def write_solve_config(tmp_path, **fmt):
    p = tmp_path / "solve.toml"
    p.write_text(SOLVE_TOML.format(out=fmt.get("out", tmp_path / "out")))
    return p


def test_solve_happy_path(tmp_path, capsys):
    cfg = write_solve_config(tmp_path)
    out = tmp_path / "runout"
    assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "holding_time" in text
    for fname in ("summary.csv", "report.csv", "weights.csv", "weights.svg"):
        assert (out / fname).is_file(), fname
    summary = pd.read_csv(out / "summary.csv")
    assert set(summary.columns) == {"quantity", "value"}
    row = summary.set_index("quantity")["value"]
    assert row["output1_holding_time"] == pytest.approx(4.0, abs=1e-6)


def test_output_is_deterministic(tmp_path):
    cfg = write_solve_config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["solve", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["solve", "--config", str(cfg), "--out", str(out2)]) == 0
    for fname in ("summary.csv", "weights.csv", "weights.svg"):
        assert (out1 / fname).read_bytes() == (out2 / fname).read_bytes(), fname


def test_seed_and_samples_overrides_reach_the_run(tmp_path):
    out1, out2, out3 = (tmp_path / d for d in ("s7", "s8", "s7b"))
    for seed, out in (("7", out1), ("8", out2), ("7", out3)):
        code = main(["var1-forecast", "--seed", seed, "--samples", "3000",
                     "--out", str(out)])
        assert code == 0
    a = pd.read_csv(out1 / "performance.csv")["sample_criterion"]
    b = pd.read_csv(out2 / "performance.csv")["sample_criterion"]
    c = pd.read_csv(out3 / "performance.csv")["sample_criterion"]
    assert not np.allclose(a, b)  # different seed, different path
    assert np.allclose(a, c)  # same seed reproduces


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_missing_config_exits_2(tmp_path, capsys):
    code = main(["solve", "--config", str(tmp_path / "nope.toml")])
    assert code == 2
    assert "does not exist" in capsys.readouterr().err


def test_config_name_mismatch_exits_2(tmp_path, capsys):
    cfg = write_solve_config(tmp_path)
    code = main(["wh-smooth", "--config", str(cfg)])
    assert code == 2
    assert "solve" in capsys.readouterr().err


def test_infeasible_constraint_exits_3(tmp_path, capsys):
    p = tmp_path / "solve.toml"
    p.write_text(SOLVE_TOML.format(out=tmp_path / "out").replace("ht = [4.0]", "ht = [200.0]"))
    code = main(["solve", "--config", str(p), "--out", str(tmp_path / "o")])
    assert code == 3
    assert "no solution" in capsys.readouterr().err


def test_missing_data_file_exits_4(tmp_path, capsys):
    cfg = tmp_path / "now.toml"
    base = (
        '[experiment]\nname = "indpro-nowcast"\nsamples = 2000\n'
        '[model]\nn = 2\n'
        "ar = [[[0.63, 0.32], [-0.28, 1.28]], [[-0.07, -0.44], [-0.05, -0.36]],"
        " [[0.02, 0.3], [0.0, 0.09]]]\n"
        "ma = [[[-0.5, 0.43], [0.19, -0.2]]]\n"
        "sigma = [[0.562, 0.05414], [0.05414, 0.1494]]\n"
        '[model_uni]\nn = 1\nar = [0.96, -0.16]\nma = [-0.64]\nsigma = [1.0]\n'
        "[filter]\nlength = 201\nht = 17.263\n"
        '[target]\nkind = "hp-two-sided"\nlam = 14400.0\n'
        '[data]\nindpro = "%s"\ncli = "%s"\n'
    ) % (tmp_path / "missing1.csv", tmp_path / "missing2.csv")
    cfg.write_text(base)
    code = main(["indpro-nowcast", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 4
    assert "data error" in capsys.readouterr().err


def test_validation_error_from_config_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text('[experiment]\nname = "solve"\n[filter]\nlength = 1\nht = 3.0\n')
    assert main(["solve", "--config", str(p)]) == 2
    assert "length" in capsys.readouterr().err


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for name in ("solve", "var1-forecast", "wh-smooth", "var3-smooth",
                 "indpro-nowcast", "replicate-paper"):
        assert name in text

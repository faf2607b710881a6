import numpy as np
import pytest

from mssa.config import (
    EXPERIMENTS,
    bundled_config,
    bundled_data_path,
    load_config,
    parse_config,
    parse_model,
)
from mssa.errors import ValidationError


def minimal_doc(**overrides):
    doc = {
        "experiment": {"name": "solve", "seed": 3, "samples": 500},
        "filter": {"length": 10, "ht": 4.0},
        "target": {"kind": "allpass", "horizon": 1},
    }
    doc.update(overrides)
    return doc


def test_parse_minimal():
    cfg = parse_config(minimal_doc())
    assert cfg.name == "solve"
    assert cfg.seed == 3
    assert cfg.samples == 500
    assert cfg.length == 10
    assert cfg.ht == [4.0]
    assert cfg.constraint_mode() == "ht"
    assert cfg.target_kind == "allpass"
    assert cfg.horizon == 1
    assert cfg.model is None


def test_scalar_and_list_constraints():
    cfg = parse_config(minimal_doc(filter={"length": 8, "ht": [3.0, 8.0]}))
    assert cfg.ht == [3.0, 8.0]
    cfg2 = parse_config(minimal_doc(filter={"length": 8, "rho": 0.4}))
    assert cfg2.rho == [0.4]
    assert cfg2.constraint_mode() == "rho"
    cfg3 = parse_config(minimal_doc(filter={"length": 8, "match_correlation": 0.2}))
    assert cfg3.constraint_mode() == "correlation"


def test_conflicting_constraints_rejected():
    with pytest.raises(ValidationError, match="more than one"):
        parse_config(minimal_doc(filter={"length": 8, "ht": 4.0, "rho": 0.1}))


def test_constraint_ranges():
    with pytest.raises(ValidationError, match="exceed 1"):
        parse_config(minimal_doc(filter={"length": 8, "ht": 0.5}))
    with pytest.raises(ValidationError, match="rho"):
        parse_config(minimal_doc(filter={"length": 8, "rho": 1.0}))
    with pytest.raises(ValidationError, match="match_correlation"):
        parse_config(minimal_doc(filter={"length": 8, "match_correlation": 1.5}))


def test_unknown_experiment_rejected():
    with pytest.raises(ValidationError, match="unknown experiment"):
        parse_config(minimal_doc(experiment={"name": "frobnicate"}))
    with pytest.raises(ValidationError, match="name"):
        parse_config({"filter": {"length": 5}})


def test_target_kind_rules():
    doc = minimal_doc(target={"kind": "custom", "taps": [1.0, 0.5], "first_lag": -1})
    cfg = parse_config(doc)
    assert cfg.target_taps == [1.0, 0.5]
    assert cfg.target_first_lag == -1
    with pytest.raises(ValidationError, match="non-empty taps"):
        parse_config(minimal_doc(target={"kind": "custom"}))
    with pytest.raises(ValidationError, match="only apply"):
        parse_config(minimal_doc(target={"kind": "allpass", "taps": [1.0]}))
    with pytest.raises(ValidationError, match="kind"):
        parse_config(minimal_doc(target={"kind": "bandpass"}))


def test_length_and_sample_bounds():
    with pytest.raises(ValidationError, match="length"):
        parse_config(minimal_doc(filter={"length": 1, "ht": 4.0}))
    with pytest.raises(ValidationError, match="samples"):
        parse_config(minimal_doc(experiment={"name": "solve", "samples": 1}))
    with pytest.raises(ValidationError, match="lam"):
        parse_config(minimal_doc(target={"kind": "allpass", "lam": 0.0}))


def test_parse_model_univariate_shorthand():
    model = parse_model({"n": 1, "ar": [0.96, -0.16], "ma": [-0.64], "sigma": [1.0]})
    assert model.n_series == 1
    assert model.p == 2 and model.q == 1
    assert model.ar[0][0, 0] == 0.96
    assert model.sigma[0, 0] == 1.0


def test_parse_model_validates():
    with pytest.raises(ValidationError, match="n"):
        parse_model({"sigma": [[1.0]]})
    with pytest.raises(ValidationError, match="shape"):
        parse_model({"n": 2, "ar": [[[0.5]]], "sigma": [[1.0, 0.0], [0.0, 1.0]]})
    from mssa.errors import NonStationaryError

    with pytest.raises(NonStationaryError):
        parse_model({"n": 1, "ar": [1.05], "sigma": [1.0]})


def test_require_model():
    cfg = parse_config(minimal_doc())
    with pytest.raises(ValidationError, match="model"):
        cfg.require_model()


def test_load_config_errors(tmp_path):
    with pytest.raises(ValidationError, match="does not exist"):
        load_config(tmp_path / "nope.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("not valid 🎉 toml [ ")
    with pytest.raises(ValidationError, match="TOML"):
        load_config(bad)


def test_load_config_round_trip(tmp_path):
    p = tmp_path / "ok.toml"
    p.write_text(
        '[experiment]\nname = "solve"\n[filter]\nlength = 6\nrho = 0.3\n'
        '[target]\nkind = "allpass"\n'
    )
    cfg = load_config(p)
    assert cfg.length == 6
    assert cfg.rho == [0.3]


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_all_bundled_configs_parse(name):
    cfg = bundled_config(name)
    assert cfg.name == name
    assert cfg.constraint_mode() is not None


def test_bundled_config_unknown():
    with pytest.raises(ValidationError):
        bundled_config("frobnicate")


def test_bundled_data_paths():
    assert bundled_data_path("indpro.csv").name == "indpro.csv"
    with pytest.raises(ValidationError):
        bundled_data_path("nope.csv")


def test_bundled_nowcast_model_matches_config(varma31_model):
    cfg = bundled_config("indpro-nowcast")
    model = cfg.require_model()
    np.testing.assert_allclose(model.ar[0], varma31_model.ar[0], atol=0)
    np.testing.assert_allclose(model.ma[0], varma31_model.ma[0], atol=0)
    np.testing.assert_allclose(model.sigma, varma31_model.sigma, atol=0)
    assert "model_uni" in cfg.raw

import numpy as np
import pytest
from numpy.testing import assert_allclose
from sklearn.base import clone
from sklearn.pipeline import Pipeline
from sklearn.utils.estimator_checks import check_estimator

from mssa.errors import ValidationError
from mssa.estimator import MSSAFilter
from mssa.processes import apply_filter, simulate
from mssa.solver import solve_mssa

# checks that cannot hold for a causal time-series filter
EXPECTED_FAILURES = {
    "check_transformer_general": "output has N - length + 1 rows (trailing windows)",
    "check_transformer_data_not_an_array": "output has N - length + 1 rows (trailing windows)",
    "check_methods_sample_order_invariance": "row order is time order for a causal filter",
    "check_methods_subset_invariance": "outputs mix neighbouring rows",
}


def test_sklearn_estimator_contract():
    check_estimator(MSSAFilter(length=3, ht=2.5), expected_failed_checks=EXPECTED_FAILURES)


def test_fit_with_known_model_matches_direct_solve(var1_model):
    x = simulate(var1_model, 2000, seed=3)
    est = MSSAFilter(length=100, ht=[3.0, 8.0], target="allpass", horizon=1,
                     model=var1_model).fit(x)
    assert est.filters_.shape == (100, 2, 2)
    assert [round(r.holding_time, 6) for r in est.reports_] == [3.0, 8.0]
    # per-output solutions coincide with direct solver calls
    from mssa.processes import convolve, ma_inversion
    from mssa.targets import allpass_shift

    xi = ma_inversion(var1_model, 601)
    win = convolve(np.eye(2)[None, :, :], xi, out_len=100, first_lag=-1)
    gamma0 = win[:, 0, :].T
    direct = solve_mssa(gamma0, var1_model.sigma, ht=3.0)
    assert_allclose(est.solutions_[0].b, direct.b, atol=1e-12)


def test_transform_runs_the_filters(var1_model):
    x = simulate(var1_model, 500, seed=1)
    est = MSSAFilter(length=40, ht=4.0, horizon=0, model=var1_model).fit(x)
    y = est.transform(x)
    assert y.shape == (461, 2)
    assert_allclose(y, apply_filter(est.filters_, x), atol=0)
    assert_allclose(est.predict(x), y, atol=0)


def test_fit_estimates_var_when_model_missing(var1_model):
    x = simulate(var1_model, 100_000, seed=9)
    est = MSSAFilter(length=30, ht=5.0, horizon=1, var_order=1).fit(x)
    assert_allclose(est.model_.ar[0], var1_model.ar[0], atol=0.02)
    assert est.reports_[0].holding_time == pytest.approx(5.0, abs=1e-9)


def test_output_smoothness_tracks_constraint(var1_model):
    """Tighter holding-time constraints show up in the sample paths."""
    x = simulate(var1_model, 150_000, seed=17)
    from mssa.metrics import empirical_metrics

    for ht in (3.0, 8.0):
        est = MSSAFilter(length=100, ht=ht, horizon=1, model=var1_model).fit(x)
        rep = empirical_metrics(est.transform(x)[:, 0])
        assert rep.holding_time == pytest.approx(ht, rel=0.05)


def test_dual_constraint_pins_target_correlation(var1_model):
    x = simulate(var1_model, 2000, seed=3)
    est = MSSAFilter(length=60, match_correlation=0.5, horizon=1,
                     model=var1_model).fit(x)
    for rep in est.reports_:
        assert rep.correlation == pytest.approx(0.5, abs=1e-9)


def test_constraint_validation(var1_model):
    x = simulate(var1_model, 300, seed=0)
    with pytest.raises(ValidationError, match="exactly one"):
        MSSAFilter(length=20, ht=3.0, rho=0.5, model=var1_model).fit(x)
    with pytest.raises(ValidationError, match="exactly one"):
        MSSAFilter(length=20, model=var1_model).fit(x)
    with pytest.raises(ValidationError, match="one value or one per series"):
        MSSAFilter(length=20, ht=[2.0, 3.0, 4.0], model=var1_model).fit(x)
    with pytest.raises(ValidationError, match="series"):
        MSSAFilter(length=20, ht=3.0, model=var1_model).fit(x[:, :1])
    with pytest.raises(ValidationError, match="target"):
        MSSAFilter(length=20, ht=3.0, target="bandpass", model=var1_model).fit(x)
    with pytest.raises(ValidationError, match="length"):
        MSSAFilter(length=1, ht=3.0, model=var1_model).fit(x)


def test_transform_requires_enough_history(var1_model):
    x = simulate(var1_model, 300, seed=0)
    est = MSSAFilter(length=50, ht=3.0, model=var1_model).fit(x)
    with pytest.raises(ValidationError, match="observations"):
        est.transform(x[:30])


def test_clone_and_pipeline(var1_model):
    x = simulate(var1_model, 400, seed=2)
    est = MSSAFilter(length=30, ht=4.0, horizon=0, model=var1_model)
    clone(est)  # params survive cloning untouched
    pipe = Pipeline([("filter", est)])
    out = pipe.fit_transform(x)
    assert out.shape == (371, 2)


def test_hp_target_univariate(arma21_model):
    x = simulate(arma21_model, 3000, seed=5)
    est = MSSAFilter(length=51, ht=8.0, target="hp-two-sided", lam=14400.0,
                     model=arma21_model).fit(x)
    rep = est.reports_[0]
    assert rep.holding_time == pytest.approx(8.0, abs=1e-6)
    assert 0.0 < rep.correlation < 1.0

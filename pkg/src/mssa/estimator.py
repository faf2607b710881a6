"""Scikit-learn style front end for the constrained filter designs.

:class:`MSSAFilter` wraps the model->target->solve->apply chain as a
transformer: ``fit`` learns (or accepts) a process model and solves for
the filter weights, ``transform`` runs the causal filter over data.
This buys composability with sklearn pipelines and parameter search
utilities without touching the functional core.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .errors import ValidationError
from .metrics import expected_metrics
from .processes import (
    VarmaModel,
    apply_filter,
    convolve,
    deconvolve,
    fit_var_least_squares,
    full_convolution,
    ma_inversion,
)
from .solver import solve_dual, solve_mssa
from .targets import allpass_shift, hp_two_sided

#: expansion length used for criterion windows (tails of stationary
#: models are numerically dead well before this)
_XI_LENGTH = 601


class MSSAFilter(TransformerMixin, BaseEstimator):
    """Causal filter with an exact smoothness constraint, per series.

    For each input series the filter tracks a per-series target (a
    shifted copy for forecasts, a two-sided trend for signal
    extraction) while holding the output's expected time between zero
    crossings at ``ht`` -- or, alternatively, pinning the lag-one ACF
    (``rho``) or the target correlation (``match_correlation``) and
    maximising smoothness.

    Parameters
    ----------
    length : int, default 51
        Number of causal filter taps.
    ht : float or sequence, optional
        Holding-time constraint, one value or one per series.
    rho : float or sequence, optional
        Lag-one ACF constraint (mutually exclusive with ``ht``).
    match_correlation : float, optional
        Target correlation to pin while maximising smoothness
        (mutually exclusive with ``ht`` / ``rho``).
    target : {"allpass", "hp-two-sided"}, default "allpass"
        Target kind; "allpass" with ``horizon`` h aims at ``x_{t+h}``,
        "hp-two-sided" at the two-sided penalised trend.
    horizon : int, default 0
    lam : float, default 14400.0
        Penalty weight of the trend target.
    model : VarmaModel, optional
        Known process model; when omitted, ``fit`` estimates a VAR by
        least squares.
    var_order : int, default 1
        Order of that VAR fit.

    Attributes
    ----------
    model_ : VarmaModel
    filters_ : ndarray, shape (length, n, n)
        Data-space taps; row i filters for target i.
    solutions_ : list of MssaSolution
    reports_ : list of MetricReport
        Model-implied performance per output; correlations are against
        the true target (exact acausal variance), not its causal
        projection.
    n_features_in_ : int
    """

    def __init__(self, length=51, ht=None, rho=None, match_correlation=None,
                 target="allpass", horizon=0, lam=14400.0, model=None,
                 var_order=1):
        self.length = length
        self.ht = ht
        self.rho = rho
        self.match_correlation = match_correlation
        self.target = target
        self.horizon = horizon
        self.lam = lam
        self.model = model
        self.var_order = var_order

    def _constraints(self, n):
        given = [(k, v) for k, v in (("ht", self.ht), ("rho", self.rho),
                                     ("match_correlation", self.match_correlation))
                 if v is not None]
        if len(given) != 1:
            raise ValidationError(
                "set exactly one of ht, rho or match_correlation")
        kind, val = given[0]
        vals = list(np.atleast_1d(np.asarray(val, dtype=float)))
        if len(vals) == 1:
            vals = vals * n
        if len(vals) != n:
            raise ValidationError(
                "%s needs one value or one per series (%d), got %d"
                % (kind, n, len(vals)))
        return kind, vals

    def _target_spec(self, n):
        if self.target == "allpass":
            return allpass_shift(self.horizon, n)
        if self.target == "hp-two-sided":
            return hp_two_sided(self.lam, 401).embed_diagonal(n)
        raise ValidationError(
            "target must be 'allpass' or 'hp-two-sided', got %r" % (self.target,))

    def fit(self, X, y=None):
        """Learn the process model (unless given) and solve the filters."""
        X = validate_data(self, X, dtype=float, ensure_min_samples=2)
        n = X.shape[1]
        if int(self.length) < 2:
            raise ValidationError("length must be at least 2")
        L = int(self.length)
        kind, cons = self._constraints(n)
        if self.model is not None:
            if not isinstance(self.model, VarmaModel):
                raise ValidationError("model must be a VarmaModel")
            if self.model.n_series != n:
                raise ValidationError(
                    "model has %d series, data has %d"
                    % (self.model.n_series, n))
            model = self.model
        else:
            model = fit_var_least_squares(X, order=self.var_order)
        target = self._target_spec(n)
        K = max(_XI_LENGTH, L + 1 - target.first_lag)
        xi = ma_inversion(model, K)

        sols, reports, taps = [], [], np.zeros((L, n, n))
        for i in range(n):
            tgt = target.select_output(i)
            conv = convolve(tgt.weights, xi, out_len=L, first_lag=tgt.first_lag)
            gamma = conv[:, 0, :].T.copy()
            coeffs, _ = full_convolution(tgt.weights, xi, tgt.first_lag)
            W = coeffs[:, 0, :]
            tv = float(np.einsum("kj,jl,kl->", W, model.sigma, W))
            if kind == "ht":
                sol = solve_mssa(gamma, model.sigma, ht=cons[i])
            elif kind == "rho":
                sol = solve_mssa(gamma, model.sigma, rho=cons[i])
            else:
                sol = solve_dual(gamma, model.sigma, correlation=cons[i],
                                 target_variance=tv)
            B = deconvolve(np.ascontiguousarray(sol.b.T)[:, None, :], xi)
            taps[:, i, :] = B[:, 0, :]
            sols.append(sol)
            reports.append(expected_metrics(sol.b, model.sigma,
                                            target_conv=gamma, target_var=tv))

        self.model_ = model
        self.filters_ = taps
        self.solutions_ = sols
        self.reports_ = reports
        return self

    def transform(self, X):
        """Filter outputs for every fully covered time point.

        Returns shape ``(N - length + 1, n)``: row k is the output at
        time ``k + length - 1``, so the first ``length - 1`` input rows
        only serve as warm-up history.
        """
        check_is_fitted(self, "filters_")
        X = validate_data(self, X, dtype=float, reset=False)
        if X.shape[0] < self.filters_.shape[0]:
            raise ValidationError(
                "need at least %d observations" % self.filters_.shape[0])
        return apply_filter(self.filters_, X)

    def predict(self, X):
        """Alias of :meth:`transform` (the filter output is the prediction)."""
        return self.transform(X)

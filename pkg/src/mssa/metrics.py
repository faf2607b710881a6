"""Holding time, sign accuracy and smoothness diagnostics.

For a stationary Gaussian zero-mean series the expected time between
zero crossings (the *holding time*) depends only on the lag-one
autocorrelation ``rho``:

    ht = pi / arccos(rho)

and the probability that predictor ``y`` and target ``z`` agree in sign
depends only on their correlation:

    sa = 1/2 + arcsin(corr(y, z)) / pi .

Expected metrics are evaluated from innovation-space filter windows
(model-implied second moments); empirical metrics are evaluated from
sample paths by literal crossing counts and sign agreement.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .tridiag import quad_form_I, quad_form_M

__all__ = [
    "MetricReport",
    "ht_from_acf",
    "acf_from_ht",
    "sa_from_corr",
    "expected_metrics",
    "empirical_metrics",
    "rms_second_diff",
]


def ht_from_acf(rho):
    """Expected holding time of a Gaussian series with lag-one ACF ``rho``."""
    rho = float(rho)
    if not -1.0 < rho < 1.0:
        raise ValidationError("lag-one ACF must lie strictly inside (-1, 1), got %g" % rho)
    return np.pi / np.arccos(rho)


def acf_from_ht(ht):
    """Lag-one ACF for which a Gaussian series holds its sign ``ht`` steps on average."""
    ht = float(ht)
    if ht <= 1.0:
        raise ValidationError("holding time must exceed 1, got %g" % ht)
    return np.cos(np.pi / ht)


def sa_from_corr(rho_yz):
    """Probability of sign agreement of two jointly Gaussian zero-mean variables."""
    rho_yz = float(rho_yz)
    if not -1.0 <= rho_yz <= 1.0:
        raise ValidationError("correlation must lie in [-1, 1], got %g" % rho_yz)
    return 0.5 + np.arcsin(rho_yz) / np.pi


@dataclass
class MetricReport:
    """Bundle of per-predictor performance numbers.

    ``holding_time`` uses the span/count estimator for sample paths
    (total span divided by crossing count); ``ht_mean_gap`` is the mean
    gap between consecutive crossings, reported alongside since the two
    disagree visibly in short samples.
    """

    correlation: float = np.nan
    sign_accuracy: float = np.nan
    acf1: float = np.nan
    holding_time: float = np.nan
    ht_mean_gap: float = np.nan
    n_crossings: int = 0
    n_obs: int = 0


def expected_metrics(pred_conv, sigma, target_conv=None, target_var=None):
    """Model-implied metrics of a causal predictor, from innovation-space windows.

    Parameters
    ----------
    pred_conv : ndarray, shape (n, L) or (L,)
        Innovation-space window of the predictor (its convolution with
        the process MA expansion), series-major blocks.
    sigma : ndarray, shape (n, n)
        Innovation covariance.
    target_conv : ndarray, optional
        Innovation-space window of the target over the same causal lags.
        When given, correlation and sign accuracy are filled in.
    target_var : float, optional
        Exact target variance.  Defaults to the variance of the causal
        window of the target, which equals the truth only for causal
        targets; pass the full two-sided variance for acausal ones.

    Returns
    -------
    MetricReport
    """
    b = np.atleast_2d(np.asarray(pred_conv, dtype=float))
    var_y = quad_form_I(b, sigma)
    if var_y <= 0:
        raise ValidationError("predictor has zero variance")
    acf1 = quad_form_M(b, sigma) / var_y
    rep = MetricReport(acf1=acf1, holding_time=ht_from_acf(acf1))
    if target_conv is not None:
        g = np.atleast_2d(np.asarray(target_conv, dtype=float))
        cross = _cross_form(g, b, sigma)
        if target_var is None:
            target_var = quad_form_I(g, sigma)
        if target_var <= 0:
            raise ValidationError("target has zero variance")
        rep.correlation = cross / np.sqrt(var_y * target_var)
        rep.sign_accuracy = sa_from_corr(np.clip(rep.correlation, -1.0, 1.0))
    return rep


def _cross_form(g, b, sigma):
    """Bilinear form ``g' (Sigma (x) I) b`` for stacked ``(n, L)`` blocks."""
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    return float(np.sum(sigma * (g @ b.T)))


def count_sign_changes(y):
    """Number of strict sign changes ``y_{t-1} y_t < 0`` (exact zeros do not cross)."""
    y = np.asarray(y, dtype=float)
    return int(np.sum(y[:-1] * y[1:] < 0.0))


def empirical_metrics(y, z=None):
    """Sample metrics of a predictor path, optionally against a target path.

    Parameters
    ----------
    y : ndarray, shape (N,)
        Predictor output (already restricted to fully initialised
        filter outputs).
    z : ndarray, shape (N,), optional
        Aligned target path for correlation / sign accuracy.

    Returns
    -------
    MetricReport
        ``holding_time`` is span/count: ``(N - 1) / #crossings``; the
        mean gap between consecutive crossings is in ``ht_mean_gap``.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size < 2:
        raise ValidationError("need at least two observations")
    if not np.all(np.isfinite(y)):
        raise ValidationError("predictor path contains non-finite values")
    n_cross = count_sign_changes(y)
    rep = MetricReport(n_crossings=n_cross, n_obs=y.size)
    ybar = y - y.mean()
    denom = float(ybar @ ybar)
    if denom > 0:
        rep.acf1 = float(ybar[:-1] @ ybar[1:]) / denom
    if n_cross > 0:
        rep.holding_time = (y.size - 1) / n_cross
        idx = np.nonzero(y[:-1] * y[1:] < 0.0)[0]
        if idx.size >= 2:
            rep.ht_mean_gap = float(np.mean(np.diff(idx)))
        else:
            rep.ht_mean_gap = rep.holding_time
    else:
        rep.holding_time = np.inf
        rep.ht_mean_gap = np.inf
    if z is not None:
        z = np.asarray(z, dtype=float).reshape(-1)
        if z.shape != y.shape:
            raise ValidationError("target path must match predictor length")
        zbar = z - z.mean()
        sz = float(zbar @ zbar)
        if sz > 0 and denom > 0:
            rep.correlation = float(ybar @ zbar) / np.sqrt(denom * sz)
        rep.sign_accuracy = float(np.mean(np.sign(y) * np.sign(z) > 0))
    return rep


def rms_second_diff(b):
    """Root mean-square second difference of a filter's output under unit white noise.

    Equals the l2 norm of the second difference of the zero-padded
    coefficient sequence: padding both ends with two zeros makes the
    boundary terms explicit, and for white-noise input the output's
    second difference has exactly this standard deviation.
    """
    b = np.asarray(b, dtype=float).reshape(-1)
    padded = np.concatenate([[0.0, 0.0], b, [0.0, 0.0]])
    d2 = np.diff(padded, n=2)
    return float(np.sqrt(np.sum(d2 * d2)))

"""Target signal specifications and classical benchmark filters.

A *target* is what the causal predictor tries to track: a (possibly
acausal, two-sided) linear combination of the observed series, shifted
by a forecast horizon.  Benchmarks are fixed causal filters the
optimised predictors are compared against -- the concurrent
Whittaker-Henderson smoother and the mean-square-optimal causal
approximation of an acausal target.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .errors import ValidationError
from .processes import MAExpansion, convolve, deconvolve

__all__ = [
    "TargetSpec",
    "BenchmarkFilter",
    "allpass_shift",
    "hp_two_sided",
    "hp_concurrent",
    "mse_nowcast",
    "whittaker_matrix_row",
]


@dataclass
class TargetSpec:
    """A linear target ``z_t = sum_m G_m x_{t-m}`` with explicit lag origin.

    Parameters
    ----------
    weights : ndarray, shape (K, n_out, n_in)
        Matrix taps ``G_m`` at lags ``first_lag + m``.
    first_lag : int
        Lag of ``weights[0]``; negative values put weight on the future.
    name : str, optional
    """

    weights: np.ndarray
    first_lag: int = 0
    name: str = ""

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim == 1:
            w = w[:, None, None]
        if w.ndim != 3:
            raise ValidationError("target weights must have shape (K, n_out, n_in)")
        self.weights = w

    @property
    def n_out(self):
        return self.weights.shape[1]

    @property
    def n_in(self):
        return self.weights.shape[2]

    def embed_diagonal(self, n):
        """Apply the same scalar taps to each of ``n`` series independently.

        Only defined for univariate specs; returns a spec whose tap
        matrices are ``g_m * I_n``.
        """
        if self.n_out != 1 or self.n_in != 1:
            raise ValidationError("embed_diagonal needs a univariate target spec")
        taps = self.weights[:, 0, 0]
        w = taps[:, None, None] * np.eye(n)[None, :, :]
        return TargetSpec(w, first_lag=self.first_lag, name=self.name)

    def select_output(self, i):
        """Keep a single output row ``i`` (shape becomes ``(K, 1, n_in)``)."""
        return TargetSpec(
            self.weights[:, i : i + 1, :], first_lag=self.first_lag, name=self.name
        )


@dataclass
class BenchmarkFilter:
    """A fixed causal comparison filter ``y_t = sum_{k>=0} B_k x_{t-k}``."""

    weights: np.ndarray
    name: str = ""

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim == 1:
            w = w[:, None, None]
        if w.ndim != 3:
            raise ValidationError("benchmark weights must have shape (L, n_out, n_in)")
        self.weights = w

    @property
    def L(self):
        return self.weights.shape[0]


def allpass_shift(h, n=1):
    """Identity target shifted by horizon ``h``: ``z_t = x_{t+h}``.

    ``h > 0`` is a forecast target, ``h = 0`` a nowcast and ``h < 0`` a
    backcast.  The shift is carried by the lag origin (single tap ``I``
    at lag ``-h``), so downstream convolutions need no extra shift
    argument.
    """
    return TargetSpec(np.eye(n)[None, :, :], first_lag=-int(h), name="allpass(h=%d)" % h)


def whittaker_matrix_row(lam, window, row):
    """One row of the Whittaker-Henderson smoother matrix.

    The smoother solves ``min_y ||x - y||^2 + lam * ||D2 y||^2`` with
    ``D2`` the second-difference operator, i.e. ``y = (I + lam D2'D2)^{-1} x``.
    Because the matrix is symmetric, row ``row`` equals the solution of
    ``(I + lam D2'D2) w = e_row`` -- one sparse solve, no inverse.

    Parameters
    ----------
    lam : float
        Smoothness penalty (1600 for quarterly data, 14400 monthly).
    window : int
        Size of the smoothing window the matrix acts on.
    row : int
        Row index in ``0 .. window-1``.

    Returns
    -------
    ndarray, shape (window,)
    """
    if lam <= 0:
        raise ValidationError("lam must be positive, got %r" % (lam,))
    if window < 3:
        raise ValidationError("window must be at least 3")
    if not 0 <= row < window:
        raise ValidationError("row index %d outside window of length %d" % (row, window))
    eye = sparse.eye(window, format="csc")
    D2 = sparse.diags([1.0, -2.0, 1.0], [0, 1, 2], shape=(window - 2, window))
    A = (eye + lam * (D2.T @ D2)).tocsc()
    e = np.zeros(window)
    e[row] = 1.0
    return spsolve(A, e)


def hp_two_sided(lam, n_taps, window=2001):
    """Symmetric two-sided trend filter, truncated and renormalised.

    The center row of the Whittaker-Henderson smoother on a long window
    is the (effectively) infinite two-sided trend filter; its weights
    decay geometrically, so truncation to ``n_taps`` central taps loses
    almost nothing.  The kept taps are renormalised to unit sum so the
    truncated filter still passes a constant unchanged.

    Parameters
    ----------
    lam : float
    n_taps : int
        Odd number of taps kept; the result covers lags
        ``-(n_taps-1)/2 .. (n_taps-1)/2``.
    window : int, optional
        Window on which the smoother matrix is built; must be odd and
        generously larger than ``n_taps`` (default 2001).

    Returns
    -------
    TargetSpec
        Univariate spec with ``first_lag = -(n_taps-1)/2``.
    """
    if n_taps % 2 != 1 or n_taps < 3:
        raise ValidationError("n_taps must be odd and >= 3, got %r" % (n_taps,))
    if window % 2 != 1 or window < max(2 * n_taps + 1, 51):
        raise ValidationError("window must be odd and well above n_taps, got %r" % (window,))
    center = (window - 1) // 2
    row = whittaker_matrix_row(lam, window, center)
    half = (n_taps - 1) // 2
    taps = row[center - half : center + half + 1]
    taps = taps / taps.sum()
    return TargetSpec(
        taps[:, None, None], first_lag=-half, name="hp_two_sided(lam=%g)" % lam
    )


def hp_concurrent(lam, L):
    """Concurrent (real-time) trend filter: last row of the length-``L`` smoother.

    This is the classical causal trend estimate at the sample edge,
    renormalised to unit sum.

    Returns
    -------
    BenchmarkFilter
        Univariate causal filter of length ``L``; ``weights[k]`` is the
        weight on ``x_{t-k}``.
    """
    row = whittaker_matrix_row(lam, L, L - 1)
    taps = row[::-1].copy()  # last row reads x_{t-L+1}..x_t; flip to lag order
    taps = taps / taps.sum()
    return BenchmarkFilter(taps[:, None, None], name="hp_concurrent(lam=%g)" % lam)


def mse_nowcast(target, xi, delta=0, L=None):
    """Mean-square-optimal causal filter for a (possibly acausal) target.

    The optimal causal approximation keeps exactly the coefficients of
    the target's innovation-space representation that lie on observable
    innovations: convolve the target with the process expansion, drop
    the acausal part, and map the kept window back to data space by
    deconvolution.

    Parameters
    ----------
    target : TargetSpec
    xi : MAExpansion
        Expansion of the observed process.
    delta : int, optional
        Additional forecast shift of the target.
    L : int, optional
        Length of the causal filter; defaults to the expansion length.

    Returns
    -------
    BenchmarkFilter
        Causal filter with ``L`` taps, ``n_out`` rows matching the target.
    """
    if not isinstance(xi, MAExpansion):
        xi = MAExpansion(np.asarray(xi))
    if L is None:
        L = xi.K
    if L > xi.K:
        raise ValidationError("filter length %d exceeds expansion length %d" % (L, xi.K))
    conv = convolve(target.weights, xi, delta=delta, out_len=L, first_lag=target.first_lag)
    return BenchmarkFilter(deconvolve(conv, xi), name="mse(%s)" % (target.name or "target"))

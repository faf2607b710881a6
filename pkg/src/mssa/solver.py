"""Constrained-optimal causal filters trading tracking against smoothness.

Given the innovation-space window ``gamma`` of a target (its convolution
with the process MA expansion, truncated to ``L`` causal lags) and the
innovation covariance ``Sigma``, the solver maximises the covariance
with the target

    maximise   gamma' (Sigma (x) I) b

over causal filters ``b`` of length ``L`` subject to two constraints:

* a *holding-time* constraint fixing the lag-one autocorrelation of the
  filter output, ``b' (Sigma (x) M) b = rho * ell``, where ``M`` is the
  tridiagonal lag-one matrix and ``rho = cos(pi / ht)``;
* a *length* (output variance) constraint ``b' (Sigma (x) I) b = ell``.

The stationarity conditions collapse to a family of decoupled
tridiagonal linear systems indexed by a scalar multiplier ``nu``,

    (2 M - nu I) b_j = -sign(nu) * gamma_j        (one per series j),

whose lag-one autocorrelation ``rho(nu)`` is strictly monotone on each
of the two admissible branches ``nu > 2 rho_max`` (smoother than the
MSE filter) and ``nu < -2 rho_max`` (noisier).  Solving the constraint
therefore reduces to a scalar root finding in ``u = 1/nu``, followed by
a rescaling to meet the length constraint.

All spectral quantities come from the closed-form sine/cosine eigen
system of ``M``; nothing here ever materialises an ``nL x nL`` matrix.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import NoSolutionError, ValidationError
from .metrics import acf_from_ht, ht_from_acf
from .tridiag import NoiseCovariance, TridiagSpectrum, quad_form_I, quad_form_M

__all__ = [
    "HtConstraint",
    "SpectralWeights",
    "MssaSolution",
    "spectral_weights",
    "rho_of_nu",
    "solve_b_of_nu",
    "solve_mssa",
    "solve_boundary",
    "solve_dual",
    "estimator_distribution",
]

#: |rho_target - rho_mse| below which the problem is degenerate and the
#: (rescaled) MSE filter is returned directly
DEGENERATE_TOL = 1e-12

#: guard band around the eigenvalue poles 2*lambda_k of the tridiagonal system
POLE_GUARD = 1e-9

#: convergence tolerance of the bisection on rho(nu)
RHO_TOL = 1e-10

#: iteration cap of the bisection
MAX_BISECT = 200


@dataclass
class HtConstraint:
    """Holding-time constraint, stored as the equivalent lag-one ACF.

    Build from a holding time (``HtConstraint.from_holding_time(8)``)
    or directly from an ACF value.  ``ht > 1`` is required; feasibility
    against the filter length (``|rho| <= rho_max(L)``) is checked at
    solve time where ``L`` is known.
    """

    rho: float

    def __post_init__(self):
        rho = float(self.rho)
        if not -1.0 < rho < 1.0:
            raise ValidationError("constraint ACF must lie strictly inside (-1, 1)")
        self.rho = rho

    @classmethod
    def from_holding_time(cls, ht):
        return cls(acf_from_ht(ht))

    @property
    def holding_time(self):
        return ht_from_acf(self.rho)


@dataclass
class SpectralWeights:
    """Target coordinates in the joint eigen system.

    ``w[j, k]`` is the coefficient of the target window on the
    eigenvector built from covariance eigenvector ``j`` and tridiagonal
    eigenvector ``k``; ``w2`` aggregates them per tridiagonal index,
    ``w2[k] = sum_j sigma_j * w[j, k]**2``, which is all the scalar root
    finding needs.
    """

    w: np.ndarray
    w2: np.ndarray
    lam: np.ndarray
    rho_mse: float
    gamma_norm2: float  # gamma' (Sigma (x) I) gamma

    @property
    def rho_max(self):
        return self.lam[0]


def _as_gamma(gamma):
    g = np.asarray(gamma, dtype=float)
    if g.ndim == 1:
        g = g[None, :]
    if g.ndim != 2:
        raise ValidationError("gamma must be (L,) or (n, L)")
    if g.shape[1] < 2:
        raise ValidationError("filter length must be at least 2")
    return g


def spectral_weights(gamma, sigma=None):
    """Project a target window onto the closed-form joint eigen system.

    Parameters
    ----------
    gamma : array_like, shape (n, L) or (L,)
        Innovation-space target window, series-major blocks.
    sigma : array_like, shape (n, n), optional
        Innovation covariance (identity when omitted).

    Returns
    -------
    SpectralWeights

    Raises
    ------
    NoSolutionError
        If the target has (numerically) zero energy.
    """
    G = _as_gamma(gamma)
    n, L = G.shape
    cov = NoiseCovariance(np.eye(n) if sigma is None else sigma)
    spec = TridiagSpectrum(L)
    V = spec.eigenvector_matrix()
    # w[j, k] = (u_j (x) v_k)' gamma  with u_j covariance eigenvectors
    w = cov.eigenvectors.T @ G @ V
    w2 = cov.eigenvalues @ (w * w)
    total = float(w2.sum())
    if total <= 1e-300:
        raise NoSolutionError("target window has zero energy")
    rho_mse = float((spec.eigenvalues * w2).sum() / total)
    return SpectralWeights(
        w=w, w2=w2, lam=spec.eigenvalues, rho_mse=rho_mse, gamma_norm2=total
    )


def rho_of_nu(nu, weights):
    """Lag-one ACF of the stationary-point filter at multiplier ``nu``.

    Evaluated through the spectral representation

        rho(nu) = sum_k lam_k w2_k / (2 lam_k - nu)^2
                  ----------------------------------
                  sum_k       w2_k / (2 lam_k - nu)^2

    which is strictly decreasing in ``nu`` on each branch outside
    ``[-2 rho_max, 2 rho_max]`` and tends to the MSE filter's ACF as
    ``|nu| -> inf``.
    """
    d = 2.0 * weights.lam - nu
    if np.any(d == 0.0):
        raise NoSolutionError("nu coincides with a spectral pole")
    q = weights.w2 / (d * d)
    s = q.sum()
    if s <= 0:
        raise NoSolutionError("degenerate spectral support at nu=%g" % nu)
    return float((weights.lam * q).sum() / s)


def _tridiag_solve(nu, rhs):
    """Solve ``(2M - nu I) b = rhs`` row-wise for stacked ``(n, L)`` right sides."""
    n, L = rhs.shape
    ab = np.zeros((3, L))
    ab[0, 1:] = 1.0  # upper diagonal of 2M
    ab[1, :] = -nu
    ab[2, :-1] = 1.0  # lower diagonal
    return solve_banded((1, 1), ab, rhs.T).T


def solve_b_of_nu(gamma, nu, spectrum=None):
    """Unit-multiplier filter ``b(nu)`` at a fixed multiplier.

    Solves the decoupled tridiagonal systems

        (2 M - nu I) b_j = D gamma_j ,   D = -sign(nu),

    one per series block; by construction the innovation covariance
    drops out of this step entirely.  The returned filter satisfies the
    stationarity conditions but not yet the length constraint.

    Parameters
    ----------
    gamma : array_like, shape (n, L) or (L,)
    nu : float
        Must stay clear of every spectral pole ``2 cos(k pi/(L+1))``.
    spectrum : TridiagSpectrum, optional
        Pass to reuse an existing spectrum (pole check only).

    Returns
    -------
    ndarray with the shape of ``gamma``
    """
    G = _as_gamma(gamma)
    one_dim = np.asarray(gamma).ndim == 1
    L = G.shape[1]
    if spectrum is None:
        spectrum = TridiagSpectrum(L)
    if nu == 0.0:
        raise NoSolutionError("nu = 0 lies inside the spectral interval")
    gap = np.min(np.abs(2.0 * spectrum.eigenvalues - nu))
    if gap < POLE_GUARD * max(1.0, abs(nu)):
        raise NoSolutionError(
            "nu=%.12g is within the guard band of a spectral pole (gap %.2e)" % (nu, gap)
        )
    b = -np.sign(nu) * _tridiag_solve(nu, G)
    return b[0] if one_dim else b


@dataclass
class MssaSolution:
    """Solved constrained-optimal filter for one target.

    Attributes
    ----------
    b : ndarray, shape (n, L)
        Innovation-space filter weights, series-major blocks, scaled to
        the length constraint.
    nu : float
        Multiplier at the solution (``inf`` for the degenerate case).
    rho : float
        Constrained lag-one ACF (equals ``acf1`` up to solver tolerance).
    acf1, holding_time : float
        Realised lag-one ACF of the filter output and its Gaussian
        holding time.
    criterion : float
        Realised objective ``gamma' (Sigma (x) I) b``.
    mse_correlation : float
        Correlation of the filter output with the MSE filter output
        (the criterion in normalised units).
    branch : str
        ``"smoothing"``, ``"unsmoothing"``, ``"degenerate"`` or ``"boundary"``.
    rho_mse, rho_max : float
        ACF of the MSE filter and the attainable ACF bound.
    scale : float
        Factor applied to ``b(nu)`` to meet the length constraint.
    ell : float
        Length (output variance) constraint value.
    """

    b: np.ndarray
    nu: float
    rho: float
    acf1: float
    holding_time: float
    criterion: float
    mse_correlation: float
    branch: str
    rho_mse: float
    rho_max: float
    scale: float = 1.0
    ell: float = 1.0
    iterations: int = 0
    weights: SpectralWeights = field(default=None, repr=False)


def _finalise(b, nu, sigma, weights, branch, ell, gamma, iterations=0):
    var = quad_form_I(b, sigma)
    if var <= 0:
        raise NoSolutionError("filter has zero output variance")
    scale = np.sqrt(ell / var)
    b = scale * b
    acf1 = quad_form_M(b, sigma) / ell
    G = _as_gamma(gamma)
    sig = np.eye(G.shape[0]) if sigma is None else np.atleast_2d(np.asarray(sigma, float))
    criterion = float(np.sum(sig * (G @ b.T)))
    if criterion <= 1e-12 * np.sqrt(weights.gamma_norm2 * ell):
        raise NoSolutionError(
            "objective is not positive at the stationary point (target "
            "orthogonal to the attainable filter)"
        )
    mse_corr = criterion / np.sqrt(weights.gamma_norm2 * ell)
    return MssaSolution(
        b=b,
        nu=nu,
        rho=acf1,
        acf1=acf1,
        holding_time=ht_from_acf(np.clip(acf1, -1 + 1e-15, 1 - 1e-15)),
        criterion=criterion,
        mse_correlation=mse_corr,
        branch=branch,
        rho_mse=weights.rho_mse,
        rho_max=weights.rho_max,
        scale=scale,
        ell=ell,
        iterations=iterations,
        weights=weights,
    )


def _bisect_u(fun, lo, hi, flo, fhi, what):
    """Plain bisection with the package-wide cap; returns the midpoint."""
    if not flo < 0 < fhi:
        raise NoSolutionError(
            "bisection bracket does not straddle the %s value (f(lo)=%.3e, f(hi)=%.3e)"
            % (what, flo, fhi)
        )
    u, f = lo, flo
    for it in range(1, MAX_BISECT + 1):
        u = 0.5 * (lo + hi)
        f = fun(u)
        if abs(f) < RHO_TOL:
            return u, it
        if f < 0:
            lo = u
        else:
            hi = u
        if hi - lo <= np.finfo(float).eps * max(abs(lo), abs(hi)):
            break
    if abs(f) > 1e-8:
        raise NoSolutionError(
            "bisection on the %s did not converge (residual %.3e after %d iterations)"
            % (what, f, MAX_BISECT)
        )
    return u, MAX_BISECT


def solve_mssa(gamma, sigma=None, ht=None, rho=None, ell=1.0, constraint=None):
    """Solve the holding-time constrained tracking problem for one target.

    Parameters
    ----------
    gamma : array_like, shape (n, L) or (L,)
        Innovation-space target window (convolution of the target with
        the process MA expansion over the causal lags ``0 .. L-1``).
    sigma : array_like, shape (n, n), optional
        Innovation covariance; identity when omitted.
    ht : float, optional
        Holding-time constraint (mutually exclusive with ``rho`` /
        ``constraint``).
    rho : float, optional
        Equivalent lag-one ACF constraint.
    ell : float, optional
        Output variance normalisation (scale only; metrics are
        invariant to it).
    constraint : HtConstraint, optional

    Returns
    -------
    MssaSolution

    Raises
    ------
    NoSolutionError
        When ``|rho| > rho_max(L)`` (no length-``L`` filter attains the
        requested smoothness), when the target window is degenerate, or
        when the root finding fails.

    Notes
    -----
    Branch selection is automatic: constraints smoother than the MSE
    filter (``rho > rho_mse``) are solved on ``nu > 2 rho_max``, noisier
    ones on ``nu < -2 rho_max``.  Exactly at ``rho == rho_mse`` the MSE
    filter itself (rescaled) is returned; exactly at ``|rho| == rho_max``
    the problem collapses to the closed-form eigenvector solution of
    :func:`solve_boundary`.
    """
    got = [ht is not None, rho is not None, constraint is not None]
    if sum(got) != 1:
        raise ValidationError("specify exactly one of ht=, rho= or constraint=")
    if ht is not None:
        constraint = HtConstraint.from_holding_time(ht)
    elif rho is not None:
        constraint = HtConstraint(rho)
    if ell <= 0:
        raise ValidationError("ell must be positive")

    G = _as_gamma(gamma)
    weights = spectral_weights(G, sigma)
    rho_i = constraint.rho
    rmax = weights.rho_max

    if abs(rho_i) > rmax + DEGENERATE_TOL:
        raise NoSolutionError(
            "requested ACF %.6f is outside the attainable range [-%.6f, %.6f] "
            "for L=%d" % (rho_i, rmax, rmax, G.shape[1])
        )
    if abs(abs(rho_i) - rmax) <= DEGENERATE_TOL:
        return solve_boundary(G, sigma, which="top" if rho_i > 0 else "bottom", ell=ell)
    if abs(rho_i - weights.rho_mse) < DEGENERATE_TOL:
        return _finalise(G.copy(), np.inf, sigma, weights, "degenerate", ell, G)

    smoothing = rho_i > weights.rho_mse
    branch = "smoothing" if smoothing else "unsmoothing"
    u_edge = 1.0 / (2.0 * rmax)

    def f(u):
        if u == 0.0:
            return weights.rho_mse - rho_i
        return rho_of_nu(1.0 / u, weights) - rho_i

    # rho is continuous and increasing in u = 1/nu across u = 0; pick the
    # half-interval matching the branch
    edge = u_edge * (1.0 - 1e-13)
    if smoothing:
        lo, hi = 0.0, edge
    else:
        lo, hi = -edge, 0.0
    u0, iters = _bisect_u(f, lo, hi, f(lo), f(hi), "ACF constraint")
    nu0 = 1.0 / u0
    b = solve_b_of_nu(G, nu0)
    sol = _finalise(b, nu0, sigma, weights, branch, ell, G, iterations=iters)
    if abs(sol.acf1 - rho_i) > 1e-8:
        raise NoSolutionError(
            "constraint not met after root finding (|acf - rho| = %.3e)"
            % abs(sol.acf1 - rho_i)
        )
    return sol


def solve_boundary(gamma, sigma=None, which="top", ell=1.0):
    """Closed-form solution at the attainable smoothness boundary.

    At ``rho = +rho_max`` (``which="top"``) or ``rho = -rho_max``
    (``"bottom"``) the feasible set collapses onto the top (resp.
    bottom) eigenspace of the tridiagonal matrix and the optimum is the
    projection of the target onto it, rescaled to the length constraint.
    """
    if which not in ("top", "bottom"):
        raise ValidationError("which must be 'top' or 'bottom'")
    G = _as_gamma(gamma)
    n, L = G.shape
    weights = spectral_weights(G, sigma)
    k = 0 if which == "top" else L - 1
    cov = NoiseCovariance(np.eye(n) if sigma is None else sigma)
    spec = TridiagSpectrum(L)
    wk = weights.w[:, k]  # coordinates across covariance eigenvectors
    energy = float(cov.eigenvalues @ (wk * wk))
    if energy <= 1e-300:
        raise NoSolutionError(
            "target has no energy on the %s eigenspace; boundary problem is degenerate"
            % which
        )
    # b = sum_j w_jk (u_j (x) v_k), scaled to b' I~ b = ell
    b = np.outer(cov.eigenvectors @ wk, spec.eigenvector(k))
    b *= np.sqrt(ell / energy)
    acf1 = quad_form_M(b, cov.sigma) / ell
    criterion = float(np.sum(cov.sigma * (G @ b.T)))
    if criterion <= 0:
        b = -b
        criterion = -criterion
    return MssaSolution(
        b=b,
        nu=2.0 * spec.eigenvalues[k],
        rho=acf1,
        acf1=acf1,
        holding_time=ht_from_acf(np.clip(acf1, -1 + 1e-15, 1 - 1e-15)),
        criterion=criterion,
        mse_correlation=criterion / np.sqrt(weights.gamma_norm2 * ell),
        branch="boundary",
        rho_mse=weights.rho_mse,
        rho_max=weights.rho_max,
        scale=1.0,
        ell=ell,
        weights=weights,
    )


def solve_dual(gamma, sigma=None, mse_correlation=None, ell=1.0, target_variance=None,
               correlation=None):
    """Maximise smoothness at a fixed tracking correlation (dual problem).

    Instead of fixing the holding time and reading off the correlation,
    fix the correlation and let the holding time float: among all
    filters with the requested correlation, return the one with the
    largest lag-one ACF.  On the smoothing branch this is the same
    one-parameter family as :func:`solve_mssa`, so the two problems are
    two parametrisations of the same frontier.

    Parameters
    ----------
    gamma, sigma, ell : as in :func:`solve_mssa`.
    mse_correlation : float, optional
        Requested correlation with the MSE filter output.
    correlation : float, optional
        Requested correlation with the *target*; requires
        ``target_variance`` (the target's true variance) and is
        converted internally, since the two differ by the constant
        factor ``corr(mse, target)``.
    target_variance : float, optional

    Raises
    ------
    NoSolutionError
        When the requested correlation lies outside the open interval
        between the boundary filter's correlation and 1 (the frontier
        does not reach it).
    """
    G = _as_gamma(gamma)
    weights = spectral_weights(G, sigma)
    if (mse_correlation is None) == (correlation is None):
        raise ValidationError("specify exactly one of mse_correlation= or correlation=")
    if correlation is not None:
        if target_variance is None or target_variance <= 0:
            raise ValidationError("correlation= needs a positive target_variance")
        # corr(y, z) = corr(y, y_mse) * corr(y_mse, z)
        corr_mse_z = np.sqrt(weights.gamma_norm2 / target_variance)
        mse_correlation = correlation / corr_mse_z
    rho_target = float(mse_correlation)
    if not 0.0 < rho_target < 1.0:
        raise NoSolutionError(
            "requested correlation %.6f with the MSE filter is outside (0, 1)" % rho_target
        )

    top = solve_boundary(G, sigma, which="top", ell=ell)
    if rho_target <= top.mse_correlation:
        raise NoSolutionError(
            "requested correlation %.6f is at or below the boundary filter's %.6f; "
            "the smooth frontier does not reach it" % (rho_target, top.mse_correlation)
        )

    spec_edge = 1.0 / (2.0 * weights.rho_max)

    def corr_at(u):
        if u == 0.0:
            return 1.0
        b = solve_b_of_nu(G, 1.0 / u)
        num = float(np.sum((np.eye(G.shape[0]) if sigma is None else np.asarray(sigma, float))
                           * (G @ b.T)))
        den = np.sqrt(weights.gamma_norm2 * quad_form_I(b, sigma))
        return num / den

    # corr decreases from 1 (u -> 0+) towards the boundary value; root of
    # corr(u) - rho_target changes sign downward, so negate for _bisect_u.
    # keep the upper end outside the tridiagonal solver's pole guard band
    lo, hi = 1e-12, spec_edge * (1.0 - 1e-7)
    f = lambda u: rho_target - corr_at(u)
    u0, iters = _bisect_u(f, lo, hi, f(lo), f(hi), "dual correlation")
    nu0 = 1.0 / u0
    b = solve_b_of_nu(G, nu0)
    return _finalise(b, nu0, sigma, weights, "smoothing", ell, G, iterations=iters)


def estimator_distribution(gamma_mean, gamma_cov, nu, L=None):
    """Propagate estimation uncertainty of the target window to the filter.

    At a fixed multiplier ``nu`` the filter is a *linear* map of the
    target window, ``b = -sign(nu) (I_n (x) (2M - nu I)^{-1}) gamma``,
    so a (Gaussian) mean/covariance of an estimated window maps exactly
    to the mean/covariance of the implied filter.  The rescaling to the
    length constraint is deliberately not applied -- it is nonlinear and
    scale-free metrics do not feel it.

    Parameters
    ----------
    gamma_mean : ndarray, shape (n, L) or (L,)
    gamma_cov : ndarray, shape (n*L, n*L)
        Covariance of the stacked (series-major) window estimate.
    nu : float
    L : int, optional
        Filter length; inferred from ``gamma_mean`` when omitted.

    Returns
    -------
    (ndarray, ndarray)
        Mean with the shape of ``gamma_mean`` and the ``(nL, nL)``
        covariance of the stacked filter.
    """
    G = _as_gamma(gamma_mean)
    one_dim = np.asarray(gamma_mean).ndim == 1
    n, L_ = G.shape
    if L is not None and L != L_:
        raise ValidationError("L=%d does not match gamma_mean (%d)" % (L, L_))
    cov = np.asarray(gamma_cov, dtype=float)
    if cov.shape != (n * L_, n * L_):
        raise ValidationError(
            "gamma_cov must have shape (%d, %d), got %s" % (n * L_, n * L_, cov.shape)
        )
    mean_b = solve_b_of_nu(G, nu)
    spectrum = TridiagSpectrum(L_)
    # congruence: apply the block solve to each side of the covariance
    half = np.stack(
        [solve_b_of_nu(col.reshape(n, L_), nu, spectrum).reshape(-1) for col in cov.T],
        axis=1,
    )
    cov_b = np.stack(
        [solve_b_of_nu(row.reshape(n, L_), nu, spectrum).reshape(-1) for row in half],
        axis=0,
    )
    return (mean_b[0] if one_dim else mean_b), cov_b

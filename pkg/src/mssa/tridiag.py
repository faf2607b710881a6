"""Lag-one autocovariance quadratic forms and their closed-form spectrum.

The lag-one autocovariance of a length-``L`` moving average ``b`` applied
to white noise is the quadratic form ``b' M b`` where ``M`` is the L x L
symmetric tridiagonal matrix with zero diagonal and constant 0.5 on the
two off-diagonals.  Everything in this module works with that matrix
*implicitly*: products use the three-point stencil and the spectrum uses
the closed-form sine/cosine expressions, so ``M`` is never materialised.

For ``n`` jointly filtered series the relevant forms are
``b' (Sigma (x) M) b`` and ``b' (Sigma (x) I_L) b`` with ``Sigma`` the
innovation covariance and ``(x)`` the Kronecker product.  Stacked
coefficient vectors are stored as ``(n, L)`` arrays, row ``j`` holding
the weights applied to series ``j`` (series-major stacking, consistent
with ``kron(Sigma, M)`` on the flattened vector).
"""

import numpy as np

from .errors import ValidationError

__all__ = [
    "TridiagSpectrum",
    "NoiseCovariance",
    "build_spectrum",
    "quad_form_M",
    "quad_form_I",
    "multiply_M",
    "rho_max",
]


def _as_blocks(b):
    """Coerce a coefficient array to 2-D ``(n, L)`` block layout."""
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[None, :]
    if b.ndim != 2:
        raise ValidationError("coefficient array must be 1-D or 2-D, got ndim=%d" % b.ndim)
    if b.shape[1] < 2:
        raise ValidationError("filter length must be at least 2, got L=%d" % b.shape[1])
    return b


def _check_sigma(sigma, n):
    if sigma is None:
        return np.eye(n)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (n, n):
        raise ValidationError(
            "covariance has shape %s, expected (%d, %d)" % (sigma.shape, n, n)
        )
    if not np.allclose(sigma, sigma.T, atol=1e-12 * max(1.0, np.abs(sigma).max())):
        raise ValidationError("covariance matrix must be symmetric")
    return sigma


class TridiagSpectrum:
    """Closed-form eigen decomposition of the lag-one tridiagonal matrix.

    Parameters
    ----------
    L : int
        Filter length (matrix dimension), at least 2.

    Attributes
    ----------
    eigenvalues : ndarray, shape (L,)
        ``cos(j*pi/(L+1))`` for ``j = 1..L``, strictly decreasing.
    rho_max : float
        Largest eigenvalue ``cos(pi/(L+1))``; the attainable lag-one
        autocorrelation of any length-``L`` filter lies in
        ``[-rho_max, rho_max]``.

    Notes
    -----
    Eigenvector ``j`` has components ``sin(k*j*pi/(L+1))`` for
    ``k = 1..L``; the exact normaliser is ``sqrt(2/(L+1))`` (the sine
    sum-of-squares identity), so no iterative normalisation is needed.
    """

    def __init__(self, L):
        if not isinstance(L, (int, np.integer)) or L < 2:
            raise ValidationError("L must be an integer >= 2, got %r" % (L,))
        self.L = int(L)
        j = np.arange(1, self.L + 1)
        self.omegas = j * np.pi / (self.L + 1)
        self.eigenvalues = np.cos(self.omegas)
        self.rho_max = self.eigenvalues[0]
        self._norm = np.sqrt(2.0 / (self.L + 1))

    def eigenvector(self, j):
        """Return the normalised eigenvector for the j-th largest eigenvalue (0-based)."""
        if not 0 <= j < self.L:
            raise ValidationError("eigenvector index out of range: %d" % j)
        k = np.arange(1, self.L + 1)
        return self._norm * np.sin(k * self.omegas[j])

    def eigenvector_matrix(self):
        """All eigenvectors as columns, shape ``(L, L)``."""
        k = np.arange(1, self.L + 1)
        return self._norm * np.sin(np.outer(k, self.omegas))


class NoiseCovariance:
    """Validated innovation covariance with cached eigen decomposition.

    Parameters
    ----------
    sigma : array_like, shape (n, n)
        Symmetric positive definite covariance of the innovations.
    """

    def __init__(self, sigma):
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise ValidationError("covariance must be square, got shape %s" % (sigma.shape,))
        scale = max(1.0, np.abs(sigma).max())
        if not np.allclose(sigma, sigma.T, atol=1e-12 * scale):
            raise ValidationError("covariance matrix must be symmetric")
        vals, vecs = np.linalg.eigh(sigma)
        if vals.min() <= 1e-12 * max(vals.max(), 1.0):
            raise ValidationError(
                "covariance must be positive definite (min eigenvalue %.3e)" % vals.min()
            )
        self.sigma = sigma
        self.n = sigma.shape[0]
        # descending, to pair naturally with the descending cosine spectrum
        order = np.argsort(vals)[::-1]
        self.eigenvalues = vals[order]
        self.eigenvectors = vecs[:, order]

    def sqrt(self):
        """Symmetric square root ``Sigma^(1/2)`` (eigen route)."""
        return (self.eigenvectors * np.sqrt(self.eigenvalues)) @ self.eigenvectors.T


def build_spectrum(L):
    """Construct the closed-form spectrum for filter length ``L``."""
    return TridiagSpectrum(L)


def rho_max(L):
    """Largest attainable lag-one autocorrelation for a length-``L`` filter."""
    if not isinstance(L, (int, np.integer)) or L < 2:
        raise ValidationError("L must be an integer >= 2, got %r" % (L,))
    return np.cos(np.pi / (L + 1))


def multiply_M(b):
    """Apply the tridiagonal matrix row-wise: ``(M b)_k = (b_{k-1} + b_{k+1}) / 2``.

    Zero boundary conditions are used at both ends.  Accepts ``(L,)`` or
    ``(n, L)`` input and preserves the shape.
    """
    b = np.asarray(b, dtype=float)
    one_dim = b.ndim == 1
    B = _as_blocks(b)
    out = np.zeros_like(B)
    out[:, :-1] += 0.5 * B[:, 1:]
    out[:, 1:] += 0.5 * B[:, :-1]
    return out[0] if one_dim else out


def quad_form_M(b, sigma=None):
    """Quadratic form ``b' (Sigma (x) M) b`` without materialising ``M``.

    Parameters
    ----------
    b : array_like, shape (L,) or (n, L)
        Stacked filter coefficients, row ``j`` acting on series ``j``.
    sigma : array_like, shape (n, n), optional
        Innovation covariance; identity when omitted.

    Returns
    -------
    float
        The lag-one autocovariance of the filter output when driven by
        white noise with covariance ``sigma``.
    """
    B = _as_blocks(b)
    n = B.shape[0]
    sigma = _check_sigma(sigma, n)
    # C[j, l] = sum_k B[j, k] B[l, k+1]; the form is sum sigma_jl (C + C') / 2
    C = B[:, :-1] @ B[:, 1:].T
    return float(np.sum(sigma * 0.5 * (C + C.T)))


def quad_form_I(b, sigma=None):
    """Quadratic form ``b' (Sigma (x) I_L) b`` (output variance under white noise)."""
    B = _as_blocks(b)
    n = B.shape[0]
    sigma = _check_sigma(sigma, n)
    return float(np.sum(sigma * (B @ B.T)))

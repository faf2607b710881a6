import numpy as np
import pytest

from mssa.processes import VarmaModel


@pytest.fixture
def var1_model():
    """Bivariate VAR(1) used throughout the forecasting tests."""
    return VarmaModel(
        ar=[np.array([[0.7, 0.4], [-0.6, 0.9]])],
        sigma=np.array([[1.09, -1.45], [-1.45, 2.58]]),
    )


@pytest.fixture
def var3_model():
    """Three-series VAR(1) used in the smoothing tests."""
    return VarmaModel(
        ar=[np.array([[0.7, 0.4, -0.2], [-0.6, 0.9, 0.3], [0.5, 0.2, -0.3]])],
        sigma=np.array([[3.17, 0.77, -0.5], [0.77, 0.69, 0.0], [-0.5, 0.0, 1.7]]),
    )


@pytest.fixture
def varma31_model():
    """Bivariate VARMA(3,1) driving the nowcast experiment."""
    return VarmaModel(
        ar=[
            np.array([[0.63, 0.32], [-0.28, 1.28]]),
            np.array([[-0.07, -0.44], [-0.05, -0.36]]),
            np.array([[0.02, 0.3], [0.0, 0.09]]),
        ],
        ma=[np.array([[-0.5, 0.43], [0.19, -0.2]])],
        sigma=np.array([[0.562, 0.05414], [0.05414, 0.1494]]),
    )


@pytest.fixture
def arma21_model():
    """Univariate ARMA(2,1) benchmark process."""
    return VarmaModel(
        ar=[np.array([[0.96]]), np.array([[-0.16]])],
        ma=[np.array([[-0.64]])],
        sigma=np.array([[1.0]]),
    )


@pytest.fixture
def white_noise():
    return VarmaModel(sigma=np.array([[1.0]]))


def random_instance(rng, L, n):
    """Random solvable instance: SPD innovation covariance + dense window."""
    A = rng.standard_normal((n, n))
    sigma = A @ A.T + n * np.eye(n)
    gamma = rng.standard_normal((n, L))
    return gamma, sigma

import pytest

from flrlab import DesignSpec, ThetaClass, sample_basis_design
from flrlab.covariance import empirical_covariance


@pytest.fixture(scope="session")
def small_spec():
    """Coarse grid keeps bulk Monte Carlo tests fast; quadrature is still exact
    for every Fourier mode used (J <= 128 on 256 nodes)."""
    return DesignSpec(kind="basis-expansion", alpha=2.0, grid_size=256)


@pytest.fixture(scope="session")
def default_spec():
    return DesignSpec(kind="basis-expansion", alpha=2.0)


@pytest.fixture(scope="session")
def sample25(default_spec):
    return sample_basis_design(default_spec, 25, 7)


@pytest.fixture(scope="session")
def cov25(sample25):
    return empirical_covariance(sample25)


@pytest.fixture(scope="session")
def theta_class22():
    return ThetaClass(beta=2.0, c_theta=1.0)

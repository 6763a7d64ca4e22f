import numpy as np
import pytest

from cavity_cooler.hilbert import HilbertLayout
from cavity_cooler.model import ModelParams


@pytest.fixture()
def cos_params() -> ModelParams:
    """COS in the 350 kHz lattice, red sideband, resonant cavity"""
    return ModelParams(
        delta=-1.0,
        delta_c=0.0,
        omega=0.05,
        g=0.41,
        kappa=14.29,
        gamma=1.93e-4,
        eta=0.0205,
    )


@pytest.fixture()
def damped_params() -> ModelParams:
    """Strongly damped toy point; every L0 mode decays within a few hundred 1/nu"""
    return ModelParams(
        delta=-1.0,
        delta_c=-0.5,
        omega=0.05,
        g=0.5,
        kappa=2.0,
        gamma=0.2,
        eta=0.05,
        layout=HilbertLayout(n_trap=3),
    )


@pytest.fixture()
def small_layout() -> HilbertLayout:
    return HilbertLayout(n_trap=3)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture()
def random_density(rng):
    def make(dim):
        x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = x @ x.conj().T
        return rho / np.trace(rho)

    return make

import numpy as np
import pytest

from qmultimeter import spin_observable


@pytest.fixture
def spin_trio():
    """The three sharp spin observables along x, y, z."""
    return (
        spin_observable((1, 0, 0)),
        spin_observable((0, 1, 0)),
        spin_observable((0, 0, 1)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

import numpy as np
import pytest

from qworlds.statevec import SubsystemLayout


@pytest.fixture
def mode_layout():
    """Just the particle mode register."""
    return SubsystemLayout.of([
        ("neutron", ("up", "down", "inD1", "inD2", "escaped", "absorbed", "source")),
    ])


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)

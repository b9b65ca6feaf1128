from __future__ import annotations

import numpy as np
import pytest

from hybridkit.systems import ObserverParams, catalog


@pytest.fixture(scope="session")
def cat():
    return catalog()


@pytest.fixture(scope="session")
def obs_params():
    return ObserverParams()


@pytest.fixture(scope="session")
def acceptance_arcs():
    """Arcs produced by acceptance runs, re-validated wholesale by the
    semantics-closure criterion.  Each entry is (label, system, arc)."""
    return []


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)

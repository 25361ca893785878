import math

import numpy as np
import pytest

from conformal.services import cayley
from restriction.hulls import perfect_hull
from restriction.schemas import RestrictionLaw


@pytest.fixture
def sle_law() -> RestrictionLaw:
    return RestrictionLaw.sle()


@pytest.fixture(scope='session')
def quarter_hull():
    """Perfect hull aimed at i, run for time 0.2."""
    return perfect_hull(math.pi / 2, 0.2)


@pytest.fixture
def vertical_arc() -> np.ndarray:
    """Cayley preimage of the segment [2, 2 + i]."""
    return cayley(2 + 1j * np.linspace(0.0, 1.0, 41), direction='inverse')

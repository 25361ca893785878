from enum import Enum
from typing import Literal


class MapKind(str, Enum):
    CHORDAL_SLIT = 'chordal-slit'
    RADIAL_SLIT = 'radial-slit'
    HALF_DISC = 'half-disc'
    MOBIUS = 'mobius'


CAYLEY_DIRECTIONS = Literal['disc-to-halfplane', 'inverse']

SWALLOW_TOL = 1e-12
"""Relative distance to a slit base under which a point counts as swallowed."""

FIXED_POINT_TOL = 1e-9

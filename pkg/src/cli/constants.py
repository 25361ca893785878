from enum import Enum, IntEnum
from typing import Literal


class Subcommand(str, Enum):
    EXPONENTS = 'exponents'
    TRACE = 'trace'
    ESTIMATE = 'estimate'
    MARTINGALE = 'martingale'
    SOUP = 'soup'
    KERNELS = 'kernels'
    CHORDAL_LIMIT = 'chordal-limit'
    RESTRICTION_PROPERTY = 'restriction-property'


class ExitCode(IntEnum):
    OK = 0
    VALIDATION = 2
    NUMERICAL = 3


class HullDescriptorKind(str, Enum):
    PERFECT = 'perfect'
    HALF_DISC = 'halfdisc'
    POLYLINE = 'polyline'


class CurveKind(str, Enum):
    PERFECT = 'perfect'
    RADIAL = 'radial'
    CHORDAL = 'chordal'
    RESTRICTION = 'restriction'


FORMATS = Literal['csv', 'json']

KERNEL_TOLERANCE = 1e-9
IDENTITY_TOLERANCE = 1e-12
KERNEL_GRID = (-3.0, -1.0, -0.3, 0.3, 1.0, 3.0)
IDENTITY_THETAS = 64
NEGATIVE_CONTROL_FLOOR = 1e-3

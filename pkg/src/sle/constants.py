from enum import Enum
from typing import Literal


class ForcePointKind(str, Enum):
    NONE = 'none'
    ANGLE = 'angle'
    POINT = 'point'
    LIMIT_RIGHT = 'limit-right'
    LIMIT_LEFT = 'limit-left'


GRIDS = Literal['uniform', 'geometric']

from typing import Literal

INTERPOLATIONS = Literal['linear', 'step']

STIFFNESS_FACTOR = 4.0
"""Sub-step depth grows while |g - W|^2 < STIFFNESS_FACTOR * dt, one halving per factor of 2."""
NEAR_DRIVER_FACTOR = 10.0
"""Points closer than this many swallow tolerances to the driver always get the full depth."""

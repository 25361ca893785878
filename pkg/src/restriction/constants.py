from enum import Enum


class HullKind(str, Enum):
    PERFECT = 'perfect'
    HALF_DISC = 'halfdisc'
    POLYLINE = 'polyline'
    EMPTY = 'empty'


ARC_VERTICES = 256
HALF_DISC_GAP = 1e-3
"""Angular gap left open at the far end of a half-disc arc so that its last vertex stays interior."""

A_EPS_CHUNK = 100_000
DERIVATIVE_TOL = 1e-9

from enum import Enum


class Domain(str, Enum):
    HALF_PLANE = 'half-plane'
    DISC = 'disc'


SLE_KAPPA = 8 / 3
"""Restriction curves throughout are SLE with this parameter."""

ALPHA_SLE = 5 / 48
BETA_SLE = 5 / 8
BETA_MIN_XI = -1 / 24

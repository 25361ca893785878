import math
from typing import NamedTuple

from constants import BETA_MIN_XI
from exceptions import DomainViolationError


class MartingaleExponents(NamedTuple):
    alpha: float
    gamma: float
    beta: float


def xi(beta: float) -> float:
    """xi(beta) = ((sqrt(24 beta + 1) - 1)^2 - 4) / 48, the largest admissible alpha."""
    if beta < BETA_MIN_XI:
        raise DomainViolationError(f'xi is defined for beta >= -1/24, got {beta}')
    return ((math.sqrt(24 * beta + 1) - 1) ** 2 - 4) / 48


def rho_of_beta(beta: float) -> float:
    if beta < 0:
        raise DomainViolationError(f'rho(beta) is defined for beta >= 0, got {beta}')
    return 2 / 3 * (math.sqrt(24 * beta + 1) - 1) - 2


def beta_of_rho(rho: float) -> float:
    """Right-sided exponent (rho + 2)(3 rho + 10)/32; inverse of ``rho_of_beta`` on rho >= -2."""
    if rho < -2:
        raise DomainViolationError(f'beta(rho) is inverted on rho >= -2, got {rho}')
    return (rho + 2) * (3 * rho + 10) / 32


def exponents_of_rho(rho: float) -> MartingaleExponents:
    """
    Exponents (alpha, gamma, beta) of the radial SLE(8/3, rho) martingale.

    alpha = 5/48 + 3 rho (rho + 4)/64, gamma = rho (3 rho + 4)/32 and
    beta = 5/8 + gamma + 3 rho/8; alpha equals xi(beta).
    """
    if rho <= -2:
        raise DomainViolationError(f'rho must exceed -2, got {rho}')
    alpha = 5 / 48 + 3 / 64 * rho * (rho + 4)
    gamma = rho * (3 * rho + 4) / 32
    return MartingaleExponents(alpha=alpha, gamma=gamma, beta=5 / 8 + gamma + 3 / 8 * rho)

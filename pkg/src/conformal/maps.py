"""
Elementary slit maps, vectorised over numpy arrays of points.

Every function returns ``(value, derivative)``. The slit maps are the exact
Loewner flows of a constant driver ``u`` run for time ``delta``:

* chordal: ``z -> u + sqrt((z-u)^2 + 4 delta)`` removes a vertical slit of height ``2 sqrt(delta)``;
* radial: ``k(g) = e^delta k(z)`` with the Koebe-type function ``k(z) = z/(1+z)^2``
  removes a radial slit ending at ``e^{iu}``.
"""
import numpy as np

from conformal.constants import SWALLOW_TOL
from exceptions import DomainViolationError, SwallowedPointError
from settings import settings


def upper_sqrt(q: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Square root on the branch with non-negative imaginary part, sign of ``ref`` on the real line."""
    root = np.sqrt(q.astype(np.complex128))
    flip = (root.imag < 0) | ((root.imag == 0) & (np.real(ref) * root.real < 0))
    return np.where(flip, -root, root)


def chordal_slit(z: np.ndarray, u: float, delta: float) -> tuple[np.ndarray, np.ndarray]:
    shift = z - u
    if np.any(np.abs(shift) <= SWALLOW_TOL * (1 + np.abs(z))):
        raise SwallowedPointError(f'Point at the base of the chordal slit at {u}')
    root = upper_sqrt(shift * shift + 4 * delta, shift)
    return u + root, shift / root


def chordal_slit_inverse(w: np.ndarray, u: float, delta: float) -> tuple[np.ndarray, np.ndarray]:
    shift = w - u
    root = upper_sqrt(shift * shift - 4 * delta, shift)
    with np.errstate(divide='ignore', invalid='ignore'):
        return u + root, shift / root


def koebe(z: np.ndarray) -> np.ndarray:
    return z / (1 + z) ** 2


def koebe_prime(z: np.ndarray) -> np.ndarray:
    return (1 - z) / (1 + z) ** 3


def koebe_inverse(s: np.ndarray) -> np.ndarray:
    """Preimage of ``s`` in the unit disc; ``k`` maps the disc onto the plane minus ``[1/4, inf)``."""
    q = np.sqrt(1 - 4 * s.astype(np.complex128))
    return 4 * s / (1 + q) ** 2


def _on_circle(zeta: np.ndarray) -> np.ndarray:
    return np.abs(zeta) >= 1 - settings.loewner.UNIT_CIRCLE_TOL


def radial_slit(z: np.ndarray, u: float, delta: float) -> tuple[np.ndarray, np.ndarray]:
    rotation = np.exp(1j * u)
    zeta = z / rotation
    value = np.empty_like(zeta)
    deriv = np.empty_like(zeta)

    boundary = _on_circle(zeta)
    inner = ~boundary
    if np.any(inner):
        s = np.exp(delta) * koebe(zeta[inner])
        w = koebe_inverse(s)
        value[inner] = w
        deriv[inner] = np.exp(delta) * koebe_prime(zeta[inner]) / koebe_prime(w)
    if np.any(boundary):
        half = np.mod(np.angle(zeta[boundary]), 2 * np.pi) / 2
        if np.any((half <= SWALLOW_TOL) | (half >= np.pi - SWALLOW_TOL)):
            raise SwallowedPointError(f'Boundary point at the base of the radial slit at {u}')
        moved = np.arccos(np.cos(half) * np.exp(-delta / 2))
        w = np.exp(2j * moved)
        value[boundary] = w
        deriv[boundary] = (w / zeta[boundary]) * np.sin(half) * np.exp(-delta / 2) / np.sin(moved)
    return rotation * value, deriv


def radial_slit_inverse(w: np.ndarray, u: float, delta: float) -> tuple[np.ndarray, np.ndarray]:
    rotation = np.exp(1j * u)
    zeta = w / rotation
    value = np.empty_like(zeta)
    deriv = np.empty_like(zeta)

    boundary = _on_circle(zeta)
    half = np.mod(np.angle(zeta), 2 * np.pi) / 2
    stretched = np.cos(half) * np.exp(delta / 2)
    # boundary points inside the arc that opens the slit fall back onto the slit itself
    stays = boundary & (np.abs(stretched) <= 1)
    inner = ~stays
    if np.any(inner):
        z = koebe_inverse(np.exp(-delta) * koebe(zeta[inner]))
        value[inner] = z
        with np.errstate(divide='ignore', invalid='ignore'):
            deriv[inner] = np.exp(-delta) * koebe_prime(zeta[inner]) / koebe_prime(z)
    if np.any(stays):
        moved = np.arccos(stretched[stays])
        z = np.exp(2j * moved)
        value[stays] = z
        with np.errstate(divide='ignore', invalid='ignore'):
            deriv[stays] = (z / zeta[stays]) * np.sin(half[stays]) * np.exp(delta / 2) / np.sin(moved)
    return rotation * value, deriv


def halfdisc(z: np.ndarray, x: float, eps: float) -> tuple[np.ndarray, np.ndarray]:
    shift = z - x
    if np.any(np.abs(shift) < eps * (1 - 1e-12)):
        raise DomainViolationError(f'Point inside the removed half-disc B({x}, {eps})')
    return z + eps ** 2 / shift, 1 - eps ** 2 / shift ** 2


def halfdisc_inverse(w: np.ndarray, x: float, eps: float) -> tuple[np.ndarray, np.ndarray]:
    shift = w - x
    root = (shift + upper_sqrt(shift * shift - 4 * eps ** 2, shift)) / 2
    other = eps ** 2 / root
    pick_other = (np.abs(other) > np.abs(root)) | (
        np.isclose(np.abs(other), np.abs(root)) & (other.imag > root.imag)
    )
    root = np.where(pick_other, other, root)
    return x + root, 1 / (1 - eps ** 2 / root ** 2)

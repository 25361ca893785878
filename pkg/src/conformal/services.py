import numpy as np

from conformal import maps
from conformal.constants import CAYLEY_DIRECTIONS
from conformal.schemas import HalfDiscRun, MobiusTransform, SlitMapChain
from exceptions import DomainViolationError, PoleError
from utils import as_complex_array

CAYLEY = MobiusTransform.cayley()


def cayley(z, direction: CAYLEY_DIRECTIONS = 'disc-to-halfplane') -> np.ndarray:
    """
    The Cayley map i(1-z)/(1+z) from the unit disc onto the upper half-plane, or its inverse.

    :param z: Point(s) in the source domain.
    :param direction: ``disc-to-halfplane`` or ``inverse``.
    :return: Image point(s), same shape as the input after ``atleast_1d``.
    """
    z = as_complex_array(z)
    if direction == 'disc-to-halfplane':
        if np.any(np.abs(z) > 1 + 1e-9):
            raise DomainViolationError('Cayley map expects points of the closed unit disc')
        if np.any(z == -1):
            raise PoleError('Cayley map has its pole at -1')
        return CAYLEY.apply(z)[0]
    if np.any(z.imag < -1e-9):
        raise DomainViolationError('Inverse Cayley map expects points of the closed upper half-plane')
    if np.any(z == -1j):
        raise PoleError('Inverse Cayley map has its pole at -i')
    return CAYLEY.inverse().apply(z)[0]


def halfdisc_map(x: float, eps: float, z) -> np.ndarray:
    """g_{x,eps}(z) = z + eps^2/(z - x): H minus the half-disc B(x, eps) onto H."""
    _check_halfdisc(x, eps)
    return maps.halfdisc(as_complex_array(z), x, eps)[0]


def normalize_fix_0_i(x: float, eps: float) -> MobiusTransform:
    """
    Mobius map M of H onto itself such that M o g_{x,eps} fixes 0 and i.

    With a = Re g(i), b = Im g(i) and c = g(0),
    M(w) = b (w - c) / (b^2 + (c - a)(w - a)).
    """
    _check_halfdisc(x, eps)
    g_i = complex(maps.halfdisc(np.array([1j]), x, eps)[0][0])
    a, b = g_i.real, g_i.imag
    c = -eps ** 2 / x
    return MobiusTransform(a=b, b=-b * c, c=c - a, d=b ** 2 - a * (c - a))


def halfdisc_step(x: float, eps: float, repeat: int = 1) -> HalfDiscRun:
    """The normalized map f_{x,eps} (optionally iterated) as a chain element."""
    return HalfDiscRun(x=x, eps=eps, repeat=repeat, normalization=normalize_fix_0_i(x, eps))


def eval_chain(chain: SlitMapChain, z) -> tuple[np.ndarray, np.ndarray]:
    return chain.evaluate(z)


def _check_halfdisc(x: float, eps: float) -> None:
    if not 0 < eps < abs(x):
        raise ValueError(f'half-disc needs 0 < eps < |x|, got x={x}, eps={eps}')

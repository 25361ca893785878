import logging
import math
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial

from conformal.schemas import SlitMapChain
from conformal.services import CAYLEY, halfdisc_step
from conformal.zipper import zip_arc
from constants import Domain
from exceptions import DomainViolationError, PoleError, SwallowedPointError
from loewner.schemas import DrivingPath
from loewner.services import radial_flow
from restriction.constants import A_EPS_CHUNK
from restriction.schemas import LambdaParams, RadialHull, RestrictionLaw
from utils import as_complex_array

logger = logging.getLogger(__name__)

DENOMINATOR = Polynomial([0, 0, 1, 0, 2, 0, 1])
"""x^2 (1 + x^2)^2."""


def nu(theta: float, law: RestrictionLaw) -> float:
    """Rate nu(theta) = -alpha + beta / (1 - cos theta) at which K hits the perfect curve aimed at e^{i theta}."""
    if not 0 < theta < 2 * math.pi:
        raise DomainViolationError(f'theta {theta} outside (0, 2 pi)')
    return -law.alpha + law.beta / (1 - math.cos(theta))


def lambda_derivatives(x, params: LambdaParams, order: int = 3) -> np.ndarray:
    """
    lambda and its first ``order`` derivatives at ``x``, stacked along the first axis.

    Differentiates Q lambda = P term by term:
    Q lambda^(n) = P^(n) - sum_{k < n} binom(n, k) Q^(n-k) lambda^(k).
    """
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise PoleError('lambda is singular at x = 0')
    P = Polynomial(params.numerator)
    Q = DENOMINATOR
    q = Q(x)
    values = []
    for n in range(order + 1):
        value = P.deriv(n)(x)
        for k in range(n):
            value = value - math.comb(n, k) * Q.deriv(n - k)(x) * values[k]
        values.append(value / q)
    return np.stack(values)


def lambda_(x, params: LambdaParams):
    """lambda(x) = (c0 + c2 x^2) / (x^2 (1 + x^2)^2)."""
    return lambda_derivatives(x, params, order=0)[0]


def kernels(x: float, y: float) -> tuple[float, float]:
    """
    The kernels F and G of the commutation relation.

    F(x, y) = (1 + x^2 + y^2 + x y) / (x (1 + x^2)) + 1 / (y - x)
    G(x, y) = (x + 2 y) / (x (1 + x^2)) - 1 / (y - x)^2
    """
    if x == 0 or x == y:
        raise PoleError(f'kernels have a pole at x = {x}, y = {y}')
    if y == 0:
        raise DomainViolationError('kernels need y != 0')
    base = x * (1 + x * x)
    F = (1 + x * x + y * y + x * y) / base + 1 / (y - x)
    G = (x + 2 * y) / base - 1 / (y - x) ** 2
    return F, G


def commutation_residual(x: float, y: float, params: LambdaParams) -> float:
    """lambda'(y) F(x,y) + 2 lambda(y) G(x,y) - lambda'(x) F(y,x) - 2 lambda(x) G(y,x)."""
    F_xy, G_xy = kernels(x, y)
    F_yx, G_yx = kernels(y, x)
    lx, dlx = lambda_derivatives(x, params, order=1)
    ly, dly = lambda_derivatives(y, params, order=1)
    return float(dly * F_xy + 2 * ly * G_xy - dlx * F_yx - 2 * lx * G_yx)


def lambda_ode_residual(x: float, params: LambdaParams) -> float:
    l0, l1, l2, l3 = lambda_derivatives(x, params, order=3)
    x2 = x * x
    return float(
        x2 * (1 + x2) ** 2 * l3
        + 6 * x * (1 + x2) * (1 + 3 * x2) * l2
        + 6 * (1 + 12 * x2 + 15 * x2 * x2) * l1
        + 24 * x * (2 + 5 * x2) * l0
    )


def symmetry_residual(x: float, params: LambdaParams) -> float:
    """lambda(x) - lambda(-x); odd terms of P are the only source."""
    values = lambda_(np.array([x, -x]), params)
    return float(values[0] - values[1])


def avoidance_from_derivatives(d0, d1, law: RestrictionLaw):
    return np.power(d0, law.alpha) * np.power(d1, law.beta)


def avoidance_probability(hull: RadialHull, law: RestrictionLaw) -> float:
    """P[K avoids A] = |Phi_A'(0)|^alpha Phi_A'(1)^beta."""
    if not law.admissible:
        logger.warning('evaluating inadmissible law alpha=%.6g beta=%.6g', law.alpha, law.beta)
    return float(avoidance_from_derivatives(hull.d0, hull.d1, law))


def hull_derivatives(encoding: DrivingPath, T: float) -> tuple[float, float]:
    """
    Derivatives (|Phi_A'(0)|, Phi_A'(1)) of the hull generated by ``encoding`` up to ``T``.

    Phi_A = g_T / g_T(1), so |Phi_A'(0)| = e^T and Phi_A'(1) = |g_T'(1)|.
    """
    if T == 0:
        return 1.0, 1.0
    flow = radial_flow(encoding, np.array([1.0 + 0j]), T)
    if flow.swallowed[0]:
        raise SwallowedPointError(f'the hull swallows 1 at time {flow.tau[0]:.6g}')
    return math.exp(T), float(np.exp(flow.log_derivative[0].real))


def x_of_theta(theta: float) -> float:
    """Image tan(theta/2) of e^{i theta} under the Cayley map."""
    return math.sin(theta) / (1 + math.cos(theta))


def theta_of_x(x: float) -> float:
    return (2 * math.atan(x)) % (2 * math.pi)


def perfect_capacity_limit(x: float) -> float:
    """Capacity seen from i of the limit of A_eps(x): 2/(1 + x^2)^2 = (1 + cos theta)^2 / 2."""
    return 2 / (1 + x * x) ** 2


def a_eps_iterations(eps: float) -> int:
    return math.ceil(eps ** -2)


def build_A_eps(x: float, eps: float) -> tuple[SlitMapChain, float]:
    """
    The N(eps)-fold composition of f_{x,eps} and the capacity of A_eps(x) seen from i.

    :param x: Real attachment point, x != 0.
    :param eps: Half-disc radius, 0 < eps < |x|.
    :return: Chain of the composition and log |F'(i)|.
    """
    n = a_eps_iterations(eps)
    chunks = [A_EPS_CHUNK] * (n // A_EPS_CHUNK)
    if n % A_EPS_CHUNK:
        chunks.append(n % A_EPS_CHUNK)
    step = halfdisc_step(x, eps)
    chain = SlitMapChain(
        maps=tuple(step.model_copy(update={'repeat': size}) for size in chunks),
        domain=Domain.HALF_PLANE,
    )
    if len(chunks) > 1:
        logger.debug('A_eps(%.6g) with eps=%.3g split into %d chunks of %d maps', x, eps, len(chunks), A_EPS_CHUNK)
    _, log_deriv = chain.evaluate_log(np.array([1j]))
    return chain, float(log_deriv[0].real)


def a_eps_outline(x: float, eps: float, samples: Optional[int] = None) -> np.ndarray:
    """
    Tips of A_eps(x) in H: the top x + i eps of the k-th half-disc pulled back through the first k - 1 maps.

    Every one of the N(eps) tips is kept unless ``samples`` thins them.
    A single backward sweep serves every sampled k.
    """
    n = a_eps_iterations(eps)
    count = n if samples is None else min(samples, n)
    index = np.unique(np.linspace(1, n, count).astype(int))
    single = halfdisc_step(x, eps)
    points = np.full(index.size, complex(x, eps))
    for j in range(n - 1, 0, -1):
        start = int(np.searchsorted(index, j, side='right'))
        if start < index.size:
            points[start:] = single.apply_inverse(points[start:])[0]
    return np.concatenate([[complex(x)], points])


def chordal_derivative(arc) -> float:
    """
    Psi_A'(1) for the map of the disc minus A fixing -1 and 1 with Psi_A'(-1) = 1.

    After the Cayley map this is g'(0) for the hydrodynamically normalized
    map of H minus the image hull.
    """
    points = as_complex_array(arc)
    image = CAYLEY.apply(points)[0]
    result = zip_arc(image, Domain.HALF_PLANE)
    _, log_deriv = result.chain.evaluate_log(np.array([0j]))
    if not np.isfinite(log_deriv[0]):
        raise SwallowedPointError('the hull touches 1')
    return float(np.exp(log_deriv[0].real))

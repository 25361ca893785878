"""Constructors of the hulls A the avoidance formula is evaluated on."""
import logging
import math
from typing import Optional

import numpy as np

from conformal import maps
from conformal.services import CAYLEY, normalize_fix_0_i
from conformal.zipper import zip_arc
from constants import Domain
from loewner.services import extract_trace
from restriction.constants import ARC_VERTICES, HALF_DISC_GAP, HullKind
from restriction.schemas import RadialHull
from restriction.services import hull_derivatives
from settings import settings
from sle.services import perfect_driver

logger = logging.getLogger(__name__)


def perfect_hull(theta: float, t: float, dt: Optional[float] = None) -> RadialHull:
    """
    Hull of the perfect curve aimed at e^{i theta}, run for radial time ``t``.

    |Phi'(0)| = e^t and Phi'(1) = exp(-t / (1 - cos theta)) are exact.
    """
    if t == 0:
        return RadialHull.empty()
    dt = dt or settings.loewner.DT
    path = perfect_driver(theta, t, dt)
    stride = max(1, (path.times.size - 1) // ARC_VERTICES)
    trace = extract_trace(path, Domain.DISC, stride=stride)
    return RadialHull(
        kind=HullKind.PERFECT,
        path=path,
        T=t,
        d0=math.exp(t),
        d1=math.exp(-t / (1 - math.cos(theta))),
        arc=trace.points,
        parameters={'theta': theta, 't': t},
    )


def _halfdisc_derivatives(x: float, eps: float) -> tuple[float, float]:
    transform = normalize_fix_0_i(x, eps)
    g, dg = maps.halfdisc(np.array([1j, 0j]), x, eps)
    _, dm = transform.apply(g)
    derivative = dg * dm
    return float(abs(derivative[0])), float(derivative[1].real)


def halfdisc_hull(x: float, eps: float, vertices: int = ARC_VERTICES) -> RadialHull:
    """
    Cayley preimage of the half-disc B(x, eps) in H.

    The derivatives are those of f_{x,eps} at i and at 0. The encoding
    zips the half circle from x + eps, stopping just short of x - eps.
    """
    if not 0 < eps < abs(x):
        raise ValueError(f'half-disc needs 0 < eps < |x|, got x={x}, eps={eps}')
    d0, d1 = _halfdisc_derivatives(x, eps)
    phi = np.linspace(0.0, math.pi * (1 - HALF_DISC_GAP), vertices)
    upper = x + eps * np.exp(1j * phi)
    arc = CAYLEY.inverse().apply(upper)[0]
    result = zip_arc(arc, Domain.DISC)
    logger.debug('half-disc hull x=%.4g eps=%.4g: capacity %.6g vs log d0 %.6g', x, eps, result.path.horizon, math.log(d0))
    return RadialHull(
        kind=HullKind.HALF_DISC,
        path=result.path,
        T=result.path.horizon,
        d0=d0,
        d1=d1,
        arc=arc,
        filled=True,
        parameters={'x': x, 'eps': eps},
    )


def polyline_hull(points) -> RadialHull:
    """Zipper-encoded hull of a simple polyline rooted on the unit circle."""
    result = zip_arc(points, Domain.DISC)
    T = result.path.horizon
    d0, d1 = hull_derivatives(result.path, T)
    return RadialHull(
        kind=HullKind.POLYLINE,
        path=result.path,
        T=T,
        d0=d0,
        d1=d1,
        arc=np.asarray(points, dtype=np.complex128),
        parameters={'vertices': int(np.size(points))},
    )

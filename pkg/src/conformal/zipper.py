"""
Discrete Loewner encoding of boundary-attached polylines.

Each vertex, once the previous vertices have been unzipped, sits at some
point w of the domain. A single exact slit map sends w to the boundary:

* half-plane: a vertical slit at Re w of half-plane time (Im w)^2 / 4;
* disc: a radial slit at arg w of radial time log((1 + |w|)^2 / (4 |w|)).

The resulting driver is piecewise constant, so the encoding is a ``step``
driving path whose slit chain reproduces the polyline vertices exactly.
"""
import logging
from dataclasses import dataclass

import numpy as np
from shapely.geometry import LineString

from conformal import maps
from conformal.constants import MapKind
from conformal.schemas import SlitMapChain, SlitRun
from constants import Domain
from exceptions import ZipperError
from loewner.schemas import DrivingPath
from settings import settings
from utils import as_complex_array

logger = logging.getLogger(__name__)

CHECKED_VERTICES = 32


@dataclass(frozen=True)
class ZipperResult:
    path: DrivingPath
    chain: SlitMapChain
    max_vertex_error: float


def _prepare(arc, domain: Domain) -> np.ndarray:
    points = as_complex_array(arc)
    keep = np.concatenate([[True], np.abs(np.diff(points)) > 1e-14])
    points = points[keep]
    if points.size < 2:
        raise ZipperError('arc needs at least two distinct vertices')
    if points.size > 2 and not LineString(np.column_stack([points.real, points.imag])).is_simple:
        raise ZipperError('arc is self-intersecting')
    tol = settings.zipper.TOL_GEO
    if domain == Domain.DISC:
        if abs(abs(points[0]) - 1) > tol:
            raise ZipperError(f'arc root {points[0]} is not on the unit circle')
        if np.any(np.abs(points[1:]) >= 1) or np.any(points[1:] == 0):
            raise ZipperError('arc must stay in the open disc and avoid 0')
        points[0] = points[0] / abs(points[0])
    else:
        if abs(points[0].imag) > tol:
            raise ZipperError(f'arc root {points[0]} is not on the real line')
        if np.any(points[1:].imag <= 0):
            raise ZipperError('arc must stay in the open half-plane')
        points[0] = points[0].real
    return points


def zip_arc(arc, domain: Domain = Domain.DISC) -> ZipperResult:
    points = _prepare(arc, domain)
    radial = domain == Domain.DISC
    forward = maps.radial_slit if radial else maps.chordal_slit
    images = points[1:].copy()
    n = images.size
    drive = np.empty(n)
    step = np.empty(n)
    previous = float(np.angle(points[0])) if radial else float(points[0].real)

    for k in range(n):
        w = images[k]
        if radial:
            r = abs(w)
            if not 0 < r < 1 - settings.loewner.UNIT_CIRCLE_TOL:
                raise ZipperError(f'arc vertex {k + 1} swallowed out of order')
            u = previous + (np.angle(w) - previous + np.pi) % (2 * np.pi) - np.pi
            delta = np.log((1 + r) ** 2 / (4 * r))
        else:
            if not w.imag > 0:
                raise ZipperError(f'arc vertex {k + 1} swallowed out of order')
            u = w.real
            delta = w.imag ** 2 / 4
        drive[k], step[k] = u, delta
        if k + 1 < n:
            images[k + 1:] = forward(images[k + 1:], u, delta)[0]
        previous = u

    kind = MapKind.RADIAL_SLIT if radial else MapKind.CHORDAL_SLIT
    run = SlitRun(kind=kind, drive=drive, step=step)
    start = float(np.angle(points[0])) if radial else float(points[0].real)
    path = DrivingPath(
        times=np.concatenate([[0.0], np.cumsum(step)]),
        values=np.concatenate([[start], drive]),
        interpolation='step',
    )
    error = _vertex_error(points, run, radial)
    if error > settings.zipper.TOL_GEO:
        raise ZipperError(f'encoded hull misses an arc vertex by {error:.3g}')
    logger.debug('zipped %d vertices, capacity %.6g, vertex error %.3g', n, run.capacity, error)
    return ZipperResult(path=path, chain=SlitMapChain(maps=(run,), domain=domain), max_vertex_error=error)


def _vertex_error(points: np.ndarray, run: SlitRun, radial: bool) -> float:
    """Retraces a sample of tips through the inverse slit maps and compares them with the vertices."""
    backward = maps.radial_slit_inverse if radial else maps.chordal_slit_inverse
    n = run.drive.size
    sample = np.unique(np.linspace(0, n - 1, min(n, CHECKED_VERTICES)).astype(int))
    error = 0.0
    for k in sample:
        tip = np.array([np.exp(1j * run.drive[k]) if radial else complex(run.drive[k])])
        for j in range(k, -1, -1):
            tip = backward(tip, run.drive[j], run.step[j])[0]
        error = max(error, float(np.abs(tip[0] - points[k + 1])))
    return error


def zipper_encode(arc, domain: Domain = Domain.DISC) -> DrivingPath:
    """Driving path of the Loewner hull grown along ``arc`` from its boundary root."""
    return zip_arc(arc, domain).path

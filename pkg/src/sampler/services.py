"""
Two-sided construction of radial restriction samples.

The right boundary is a radial SLE(8/3, rho) from 1 to 0 with force point
1-. Given it, the left boundary is a chordal SLE(8/3, rho - 2) in the slit
domain from 1- to 0, simulated in H after sending 1- to 0 and 0 to infinity,
with its force point immediately to its right. K is the closed region
between the two curves; laws below the maximal alpha get an independent
loop soup attached.
"""
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Callable, Optional, Union

import numpy as np
import shapely
from shapely import Geometry
from shapely.geometry import LineString, Polygon, mapping
from shapely.validation import make_valid

from conformal.schemas import MobiusTransform
from constants import SLE_KAPPA, Domain
from exceptions import InadmissibleLawError, NumericalFailureError
from loewner.schemas import DrivingPath, Trace
from loewner.services import extract_trace, hull_maps
from loopsoup.schemas import SoupConfig
from loopsoup.services import attach_soup
from restriction.exponents import rho_of_beta, xi
from restriction.schemas import RadialHull, RestrictionLaw
from sampler.constants import CHUNKS_PER_WORKER, LEFT_STREAM, RIGHT_STREAM
from sampler.schemas import SampleK
from settings import settings
from sle.constants import ForcePointKind
from sle.schemas import ForcePoint, SleParams
from sle.services import chordal_sle_driver, radial_sle_driver
from utils import complex_pairs

logger = logging.getLogger(__name__)


def step_sizes(dt: Optional[float]) -> tuple[float, float, int]:
    """Loewner step, SDE step and the stride between them."""
    dt = dt or settings.loewner.DT
    sde_dt = min(settings.sle.DT, dt)
    return dt, sde_dt, max(1, int(round(dt / sde_dt)))


def _stop_index(trace: Trace) -> int:
    """First point within r_stop of 0, or the tip."""
    close = np.flatnonzero(np.abs(trace.points[1:]) < settings.sampler.R_STOP)
    return int(close[0]) + 1 if close.size else trace.points.size - 1


def _to_zero(trace: Trace) -> Trace:
    return trace.until(_stop_index(trace)).closing_segment(0j)


def slit_uniformizer(w: float, v: float) -> MobiusTransform:
    """Mobius map of the disc onto H sending e^{iv} to 0, e^{iw} to infinity and the arc between them to (0, inf)."""
    ev, ew = np.exp(1j * v), np.exp(1j * w)
    middle = np.exp(0.5j * (v + w))
    u = (middle - ev) / (middle - ew)
    s = abs(u) / u
    return MobiusTransform(a=s, b=-s * ev, c=1, d=-ew)


def _right_boundary(rho: float, dt: Optional[float], seed: int, index: int) -> tuple[DrivingPath, Optional[DrivingPath], Trace]:
    dt, sde_dt, stride = step_sizes(dt)
    force = ForcePoint(kind=ForcePointKind.LIMIT_LEFT) if rho > 0 else ForcePoint()
    params = SleParams(
        kappa=SLE_KAPPA,
        rho=rho,
        force_point=force,
        T=settings.sampler.T_MAX,
        dt=sde_dt,
        seed=seed,
        index=index,
        stream=RIGHT_STREAM,
    )
    pair = radial_sle_driver(params)
    W = pair.W.downsampled(stride)
    V = pair.V.downsampled(stride) if pair.V is not None else None
    trace = extract_trace(W, Domain.DISC, stride=settings.sampler.TRACE_STRIDE)
    return W, V, trace


def _left_boundary(W: DrivingPath, V: DrivingPath, T: float, rho: float, dt: Optional[float], seed: int, index: int) -> Trace:
    dt, sde_dt, stride = step_sizes(dt)
    params = SleParams(
        kappa=SLE_KAPPA,
        rho=rho - 2,
        force_point=ForcePoint(kind=ForcePointKind.LIMIT_RIGHT),
        T=(settings.sampler.CHORDAL_RADIUS / 2) ** 2,
        dt=sde_dt,
        grid='geometric',
        relative_step=settings.sampler.CHORDAL_RELATIVE_STEP,
        seed=seed,
        index=index,
        stream=LEFT_STREAM,
    )
    pair = chordal_sle_driver(params)
    in_halfplane = extract_trace(pair.W.downsampled(stride), Domain.HALF_PLANE, stride=settings.sampler.TRACE_STRIDE)
    uniformizer = slit_uniformizer(float(W.at(T)), float(V.at(T)))
    in_disc = uniformizer.inverse().apply(in_halfplane.points)[0]
    points, _ = hull_maps(W, T, Domain.DISC).invert(in_disc)
    return _to_zero(Trace(times=in_halfplane.times, points=points, domain=Domain.DISC))


def stitch_region(right: Trace, left: Trace) -> Geometry:
    """Polygon bounded by the right boundary from 1 to 0 and the left one back from 0 to 1."""
    ring = np.concatenate([right.points, left.points[::-1]])
    polygon = Polygon(np.column_stack([ring.real, ring.imag]))
    region = make_valid(shapely.set_precision(polygon, settings.sampler.SNAP))
    if region.is_empty or region.area == 0:
        raise NumericalFailureError('degenerate region between the two boundaries')
    return region


def sample_max_restriction(beta: float, dt: Optional[float] = None, seed: int = 0, index: int = 0) -> SampleK:
    """
    Sample of P(xi(beta), beta).

    For beta = 5/8 both boundaries coincide with one radial SLE(8/3) curve
    and the region is that curve.
    """
    if beta < 5 / 8:
        raise InadmissibleLawError(f'beta must be at least 5/8, got {beta}')
    rho = max(rho_of_beta(beta), 0.0)
    W, V, trace = _right_boundary(rho, dt, seed, index)
    stop = _stop_index(trace)
    T = float(trace.times[stop])
    right = trace.until(stop).closing_segment(0j)
    if rho <= 1e-12:
        region = LineString(np.column_stack([right.points.real, right.points.imag]))
        return SampleK(index=index, rho=rho, right=right, region=region)
    left = _left_boundary(W, V, T, rho, dt, seed, index)
    return SampleK(index=index, rho=rho, right=right, left=left, region=stitch_region(right, left))


def sample_restriction(
        law: RestrictionLaw,
        dt: Optional[float] = None,
        seed: int = 0,
        index: int = 0,
        t_min: Optional[float] = None,
) -> SampleK:
    """Sample of P(alpha, beta): the maximal sample for beta with a soup of intensity xi(beta) - alpha attached."""
    if not law.admissible:
        raise InadmissibleLawError(f'law alpha={law.alpha}, beta={law.beta} is not admissible')
    K = sample_max_restriction(law.beta, dt, seed, index)
    intensity = xi(law.beta) - law.alpha
    if intensity <= 1e-12:
        return K
    config = SoupConfig(intensity=intensity, seed=seed)
    if t_min is not None:
        config = config.model_copy(update={'t_min': t_min})
    return attach_soup(K, config)


def hit_test(K: SampleK, A: Union[RadialHull, Geometry]) -> bool:
    geometry = A.geometry if isinstance(A, RadialHull) else A
    if geometry.is_empty:
        return False
    return bool(K.region.intersects(geometry))


def export_region(K: SampleK) -> dict:
    return {
        'index': K.index,
        'rho': K.rho,
        'right': complex_pairs(K.right.points),
        'left': complex_pairs(K.left.points) if K.left is not None else None,
        'region': mapping(K.region),
        'loops': len(K.loops),
    }


def fan_out(task: Callable[..., np.ndarray], n: int, workers: int, *args) -> np.ndarray:
    """
    Runs ``task(indexes, *args)`` over chunks of range(n) and sums the results.

    Partial results are summed in chunk order so the total does not depend
    on which worker finishes first.
    """
    if n <= 0:
        raise ValueError(f'sample count must be positive, got {n}')
    workers = max(1, int(workers))
    chunks = [chunk for chunk in np.array_split(np.arange(n), workers * CHUNKS_PER_WORKER) if chunk.size]
    if workers == 1 or len(chunks) <= 1:
        results = [task(chunk, *args) for chunk in chunks]
    else:
        results = [None] * len(chunks)
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(task, chunk, *args): k for k, chunk in enumerate(chunks)}
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                logger.info('chunk %d/%d finished', futures[future] + 1, len(chunks))
    return np.sum(results, axis=0)

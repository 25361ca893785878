"""
Flatness check of the radial SLE(8/3, rho) restriction martingale.

For a hull A and the curve stopped when it first meets A,

    M_t = |h_t'(0)|^alpha |h_t'(e^{iW_t})|^{5/8} |h_t'(e^{iV_t})|^gamma Z_t^{3 rho / 8}

where h_t maps the disc minus g_t(A) onto the disc fixing 0 and e^{iW_t}
and Z_t = sin(vartheta_t) / sin(theta_t). h_t is rebuilt at every
checkpoint by zipping the image arc g_t(A).
"""
import logging
import math
from typing import Optional

import numpy as np
import shapely

from constants import SLE_KAPPA, Domain
from conformal.zipper import zip_arc
from loewner.schemas import DrivingPath
from loewner.services import extract_trace, hull_maps
from restriction.exponents import exponents_of_rho
from restriction.schemas import RadialHull, RestrictionLaw
from restriction.services import avoidance_probability
from sampler.constants import MARTINGALE_ARC_VERTICES, RIGHT_STREAM
from sampler.schemas import Checkpoint, MartingaleReport, MartingaleState
from sampler.services import fan_out, step_sizes
from settings import settings
from sle.constants import ForcePointKind
from sle.schemas import ForcePoint, SleParams
from sle.services import radial_sle_driver
from utils import stopwatch

logger = logging.getLogger(__name__)


def _coarse_arc(arc: np.ndarray) -> np.ndarray:
    if arc.size <= MARTINGALE_ARC_VERTICES:
        return arc
    index = np.unique(np.linspace(0, arc.size - 1, MARTINGALE_ARC_VERTICES).astype(int))
    return arc[index]


def martingale_state(W: DrivingPath, V: DrivingPath, t: float, arc: np.ndarray, rho: float) -> MartingaleState:
    """
    M_t for the curve driven by ``W`` with force point ``V``.

    :param W: Driving function.
    :param V: Force point process on the same grid.
    :param t: Time, before the curve meets the hull.
    :param arc: Polyline of the hull, rooted on the unit circle.
    :param rho: Weight of the force point.
    :return: The state and the value of M_t.
    """
    exponents = exponents_of_rho(rho)
    w, v = float(W.at(t)), float(V.at(t))
    image_arc = np.array(hull_maps(W, t, Domain.DISC).evaluate(arc)[0])
    image_arc[0] = image_arc[0] / abs(image_arc[0])
    zipped = zip_arc(image_arc, Domain.DISC)
    values, log_deriv = zipped.chain.evaluate_log(np.exp(1j * np.array([w, v])))
    theta = (w - v) / 2
    image_theta = float(np.angle(values[0] / values[1]) % (2 * math.pi)) / 2
    capacity = zipped.path.horizon
    derivative_w, derivative_v = np.exp(log_deriv.real)
    Z = math.sin(image_theta) / math.sin(theta)
    value = math.exp(
        exponents.alpha * capacity
        + 5 / 8 * math.log(derivative_w)
        + exponents.gamma * math.log(derivative_v)
        + 3 * rho / 8 * math.log(Z)
    )
    return MartingaleState(
        t=t,
        theta=theta,
        image_theta=image_theta,
        capacity=capacity,
        derivative_w=float(derivative_w),
        derivative_v=float(derivative_v),
        value=value,
    )


def _hitting_index(W: DrivingPath, geometry) -> Optional[int]:
    """Index k of the first trace segment [t_k, t_{k+1}] meeting ``geometry``."""
    trace = extract_trace(W, Domain.DISC)
    points = np.column_stack([trace.points.real, trace.points.imag])
    segments = shapely.linestrings(np.stack([points[:-1], points[1:]], axis=1))
    hits = np.flatnonzero(shapely.intersects(segments, geometry))
    return int(hits[0]) if hits.size else None


def _martingale_sums(indexes, rho: float, hull: RadialHull, arc: np.ndarray, checkpoints: np.ndarray, dt, seed: int) -> np.ndarray:
    """Per checkpoint sums of M and M^2, then the hit count and the sum of M just before the hit."""
    dt, sde_dt, stride = step_sizes(dt)
    horizon = float(checkpoints[-1])
    k = checkpoints.size
    sums = np.zeros(2 * k + 2)
    for index in indexes:
        params = SleParams(
            kappa=SLE_KAPPA,
            rho=rho,
            force_point=ForcePoint(kind=ForcePointKind.LIMIT_LEFT),
            T=round(horizon / sde_dt) * sde_dt,
            dt=sde_dt,
            seed=seed,
            index=int(index),
            stream=RIGHT_STREAM,
        )
        pair = radial_sle_driver(params)
        W, V = pair.W.downsampled(stride), pair.V.downsampled(stride)
        hit = _hitting_index(W, hull.geometry)
        tau = float(W.times[hit + 1]) if hit is not None else math.inf
        for j, t in enumerate(checkpoints):
            if t >= tau:
                continue
            value = martingale_state(W, V, float(t), arc, rho).value
            sums[j] += value
            sums[k + j] += value * value
        if hit is not None:
            sums[2 * k] += 1
            sums[2 * k + 1] += martingale_state(W, V, float(W.times[hit]), arc, rho).value
    return sums


def verify_martingale(
        rho: float,
        hull: RadialHull,
        T: float = 0.5,
        checkpoints: int = 5,
        n: Optional[int] = None,
        dt: Optional[float] = None,
        seed: Optional[int] = None,
        workers: Optional[int] = None,
) -> MartingaleReport:
    """
    Sample means of M_{t and tau_A} on a checkpoint grid against M_0.

    M_0 is computed both from the avoidance formula and through the same
    zipper evaluation the paths use; the z scores refer to the latter.
    """
    if rho <= 0:
        raise ValueError(f'the martingale is bounded only for rho > 0, got {rho}')
    if hull.is_empty:
        raise ValueError('the martingale needs a non-empty hull')
    sampler = settings.sampler
    n = n or sampler.N_SAMPLES
    seed = sampler.SEED if seed is None else seed
    law = RestrictionLaw.of_rho(rho)
    arc = _coarse_arc(hull.arc)
    grid = np.linspace(0.0, T, checkpoints + 1)[1:]

    origin = DrivingPath(times=[0.0], values=[0.0])
    force = DrivingPath(times=[0.0], values=[-settings.sle.EPS0])
    m0_numeric = martingale_state(origin, force, 0.0, arc, rho).value
    m0 = avoidance_probability(hull, law)
    logger.info('M_0 = %.8f (formula %.8f)', m0_numeric, m0)

    with stopwatch() as watch:
        sums = fan_out(_martingale_sums, n, workers or sampler.WORKERS, rho, hull, arc, grid, dt, seed)
    k = grid.size
    mean = sums[:k] / n
    variance = np.maximum(sums[k:2 * k] / n - mean ** 2, 0.0)
    se = np.sqrt(variance / n)
    rows = [
        Checkpoint(t=float(t), mean=float(m), se=float(s), z=float((m - m0_numeric) / s) if s > 0 else 0.0, paths=n)
        for t, m, s in zip(grid, mean, se)
    ]
    hitting = int(sums[2 * k])
    report = MartingaleReport(
        rho=rho,
        law=law,
        hull=hull.label,
        m0=m0,
        m0_numeric=m0_numeric,
        checkpoints=rows,
        hitting_paths=hitting,
        mean_at_hit=float(sums[2 * k + 1] / hitting) if hitting else None,
        seed=seed,
        wall_ms=watch.elapsed_ms,
    )
    logger.info('martingale rho=%.3g: max |z| %.2f over %d checkpoints, %d paths hit A', rho, report.max_abs_z, k, hitting)
    return report

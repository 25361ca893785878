import logging
from typing import Optional, Sequence

import numpy as np
import shapely

from conformal.schemas import MobiusTransform, SlitMapChain
from constants import Domain
from exceptions import InadmissibleLawError, NumericalFailureError
from loewner.services import hull_maps
from restriction.hulls import polyline_hull
from restriction.schemas import RadialHull, RestrictionLaw
from restriction.services import avoidance_probability, chordal_derivative
from sampler.constants import EPS_LADDER
from sampler.schemas import (
    ChordalLimitReport,
    ChordalLimitRow,
    EstimateReport,
    ExponentFit,
    RestrictionPropertyReport,
    SampleK,
)
from sampler.services import fan_out, hit_test, sample_restriction
from settings import settings
from utils import as_complex_array, stopwatch

logger = logging.getLogger(__name__)


def _sampling_law(law: RestrictionLaw, allow_inadmissible: bool) -> RestrictionLaw:
    if law.admissible:
        return law
    if not allow_inadmissible:
        raise InadmissibleLawError(f'law alpha={law.alpha}, beta={law.beta} is not admissible')
    if law.beta < 5 / 8:
        raise InadmissibleLawError(f'no restriction sample exists for beta={law.beta} < 5/8')
    logger.warning('law alpha=%.6g beta=%.6g is inadmissible; sampling the maximal law instead', law.alpha, law.beta)
    return RestrictionLaw.maximal(law.beta)


def _avoid_counts(indexes, law: RestrictionLaw, hulls: list[RadialHull], dt, seed: int, t_min) -> np.ndarray:
    counts = np.zeros(len(hulls), dtype=np.int64)
    for index in indexes:
        K = sample_restriction(law, dt, seed, int(index), t_min)
        for j, hull in enumerate(hulls):
            if not hit_test(K, hull):
                counts[j] += 1
    return counts


def mc_estimate_avoidance(
        law: RestrictionLaw,
        hulls: Sequence[RadialHull],
        n: Optional[int] = None,
        dt: Optional[float] = None,
        seed: Optional[int] = None,
        workers: Optional[int] = None,
        allow_inadmissible: bool = False,
        t_min: Optional[float] = None,
) -> list[EstimateReport]:
    """
    Monte Carlo estimate of P[K avoids A] for every hull, on the same samples.

    Args:
        law: Law of K; inadmissible laws need ``allow_inadmissible`` and are
            then compared against their formula while sampling the maximal law.
        hulls: Hulls to test.
        n: Number of samples.
        dt: Loewner step of the sampled curves.
        seed: Run seed; sample i uses the streams keyed by (seed, i).
        workers: Worker processes.
        allow_inadmissible: See ``law``.
        t_min: Loop duration cutoff of an attached soup.
    Returns:
        list[EstimateReport]: One report per hull, in input order.
    """
    sampler = settings.sampler
    n = n or sampler.N_SAMPLES
    dt = dt or settings.loewner.DT
    seed = sampler.SEED if seed is None else seed
    workers = workers or sampler.WORKERS
    sampling = _sampling_law(law, allow_inadmissible)
    hulls = list(hulls)

    with stopwatch() as watch:
        counts = fan_out(_avoid_counts, n, workers, sampling, hulls, dt, seed, t_min)
    reports = [
        EstimateReport(
            law=law,
            hull=hull.label,
            n=n,
            avoided=int(avoided),
            target=avoidance_probability(hull, law),
            dt=dt,
            seed=seed,
            wall_ms=watch.elapsed_ms,
        )
        for hull, avoided in zip(hulls, counts)
    ]
    for report in reports:
        logger.info('%s: p_hat=%.5f target=%.5f z=%.2f', report.hull, report.p_hat, report.target, report.z)
    return reports


def fit_exponents(reports: Sequence[EstimateReport], hulls: Sequence[RadialHull]) -> ExponentFit:
    """
    Weighted least squares of log p_hat on (log d0, log d1) without intercept.

    Weights are the inverse delta-method variances (1 - p) / (n p) of log p_hat;
    hulls estimated at 0 or 1 carry no information on the slopes and are dropped.
    """
    rows = [
        (np.log(hull.d0), np.log(hull.d1), np.log(report.p_hat), report.n * report.p_hat / (1 - report.p_hat))
        for report, hull in zip(reports, hulls)
        if 0 < report.p_hat < 1 and not hull.is_empty
    ]
    if len(rows) < 2:
        raise ValueError('fitting two exponents needs at least two informative hulls')
    table = np.array(rows)
    X, y, w = table[:, :2], table[:, 2], table[:, 3]
    information = X.T @ (w[:, None] * X)
    covariance = np.linalg.inv(information)
    alpha, beta = covariance @ (X.T @ (w * y))
    return ExponentFit(alpha=float(alpha), beta=float(beta), covariance=covariance.tolist(), hulls=len(rows))


def normalized_map(hull: RadialHull) -> SlitMapChain:
    """Phi_A = g_A / g_A(1), fixing 0 and 1."""
    chain = hull_maps(hull.path, hull.T, Domain.DISC)
    image_of_one, _ = chain.evaluate(np.array([1.0 + 0j]))
    return chain.normalized(MobiusTransform.rotation(1 / image_of_one[0]))


def map_region(K: SampleK, chain: SlitMapChain) -> SampleK:
    def move(coords: np.ndarray) -> np.ndarray:
        image, _ = chain.evaluate(coords[:, 0] + 1j * coords[:, 1])
        return np.column_stack([image.real, image.imag])

    return K.model_copy(update={'region': shapely.transform(K.region, move)})


def _property_counts(indexes, law: RestrictionLaw, A: RadialHull, B: RadialHull, dt, seed: int, t_min) -> np.ndarray:
    phi = normalized_map(A)
    counts = np.zeros(3, dtype=np.int64)
    for index in indexes:
        K = sample_restriction(law, dt, seed, int(index), t_min)
        if not hit_test(K, B):
            counts[2] += 1
        if hit_test(K, A):
            continue
        try:
            image = map_region(K, phi)
        except NumericalFailureError:
            logger.debug('sample %d touches A numerically; counted as a hit', index)
            continue
        counts[0] += 1
        if not hit_test(image, B):
            counts[1] += 1
    return counts


def restriction_property_test(
        law: RestrictionLaw,
        A: RadialHull,
        B: RadialHull,
        n: Optional[int] = None,
        dt: Optional[float] = None,
        seed: Optional[int] = None,
        workers: Optional[int] = None,
        t_min: Optional[float] = None,
) -> RestrictionPropertyReport:
    """Compares P[Phi_A(K) avoids B | K avoids A] with P[K avoids B]."""
    sampler = settings.sampler
    n = n or sampler.N_SAMPLES
    seed = sampler.SEED if seed is None else seed
    law = _sampling_law(law, allow_inadmissible=False)
    avoided_a, conditional, avoid_b = fan_out(
        _property_counts, n, workers or sampler.WORKERS, law, A, B, dt, seed, t_min
    )
    report = RestrictionPropertyReport(
        n=n, avoided_a=int(avoided_a), conditional_avoid_b=int(conditional), avoid_b=int(avoid_b)
    )
    logger.info('restriction property: conditional %.5f vs %.5f, z=%.2f', report.p_conditional, report.p_unconditional, report.z)
    return report


def chordal_preimage(arc, eps: float, filled: bool = False) -> RadialHull:
    """The hull f_eps^{-1}(A), where f_eps fixes 1 and sends 0 to -1 + eps; a filled A stays filled."""
    f = MobiusTransform.disc_automorphism(-1 + eps)
    points, _ = f.inverse().apply(as_complex_array(arc))
    hull = polyline_hull(points)
    return hull.model_copy(update={'name': f'eps={eps:g}', 'filled': filled})


def chordal_limit_experiment(
        law: RestrictionLaw,
        arc,
        eps_ladder: Sequence[float] = EPS_LADDER,
        n: Optional[int] = None,
        dt: Optional[float] = None,
        seed: Optional[int] = None,
        workers: Optional[int] = None,
        filled: bool = False,
) -> ChordalLimitReport:
    """
    Radial avoidance probabilities of f_eps(K) approaching Psi_A'(1)^beta.

    ``n = 0`` skips the Monte Carlo side and reports the analytic ladder only.
    """
    limit = chordal_derivative(arc) ** law.beta
    hulls = [chordal_preimage(arc, eps, filled) for eps in eps_ladder]
    estimates = [None] * len(hulls)
    if n != 0:
        estimates = mc_estimate_avoidance(law, hulls, n=n, dt=dt, seed=seed, workers=workers)
    rows = []
    for eps, hull, estimate in zip(eps_ladder, hulls, estimates):
        analytic = avoidance_probability(hull, law)
        rows.append(ChordalLimitRow(eps=eps, analytic=analytic, gap=abs(analytic - limit), estimate=estimate))
    return ChordalLimitReport(law=law, limit=limit, rows=rows)

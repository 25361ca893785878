"""
Truncated Brownian loop soup of loops in the unit disc surrounding 0.

Rooted loops carry the intensity dA(z) dt / (2 pi t^2) times the law of a
Brownian bridge of duration t from z to z. The soup keeps loops of duration
in [t_min, t_max] that stay in the disc and wind around 0. Their truncated
mass is estimated once per configuration on a stratified (log t, |z|^2)
grid by quasi-Monte Carlo; loops are then drawn stratum by stratum by
rejection.

That density is proportional to the measure whose escape mass from a
subdomain is log Phi'(0). The same table measures the constant on the
disc of radius CALIBRATION_RADIUS, where Phi'(0) = 1 / CALIBRATION_RADIUS,
and rescales the strata so that c is the intensity of that measure.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import shapely
from scipy.stats import qmc
from shapely import Geometry
from shapely.ops import unary_union
from shapely.validation import make_valid

from exceptions import DomainViolationError, NumericalFailureError, ResourceLimitError
from loopsoup.constants import (
    CALIBRATION_RADIUS,
    MAX_PROPOSAL_ROUNDS,
    PROPOSAL_BATCH,
    SOUP_STREAM_KEY,
    TABLE_STREAM_KEY,
)
from loopsoup.schemas import LoopSample, SoupConfig
from settings import settings
from utils import complex_pairs, rng_stream

if TYPE_CHECKING:
    from sampler.schemas import SampleK

logger = logging.getLogger(__name__)


class EscapeMass(NamedTuple):
    mass: float
    probability: float


@dataclass(frozen=True)
class AcceptanceTable:
    t_edges: np.ndarray
    r2_edges: np.ndarray
    mass: np.ndarray
    acceptance: np.ndarray
    escape: np.ndarray
    """Per stratum, the fraction of proposals accepted that also leave the calibration disc."""

    @property
    def scale(self) -> float:
        """Ratio of the escape-normalized loop measure to the raw rooted density."""
        raw = float((self.mass * self.escape).sum())
        if raw <= 0:
            raise NumericalFailureError('no accepted loop leaves the calibration disc; raise t_max')
        return math.log(1 / CALIBRATION_RADIUS) / raw

    @property
    def weights(self) -> np.ndarray:
        return self.mass * self.acceptance * self.scale

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def stratum(self, flat: int) -> tuple[float, float, float, float]:
        i, j = np.unravel_index(flat, self.mass.shape)
        return self.t_edges[i], self.t_edges[i + 1], self.r2_edges[j], self.r2_edges[j + 1]


def escape_mass(c: float, inner_map_deriv: float) -> EscapeMass:
    """
    Mass c log Phi'(0) of soup loops surrounding 0 that leave a subdomain U' of the disc.

    :param c: Soup intensity.
    :param inner_map_deriv: Phi'(0) >= 1 for the map from U' onto the disc fixing 0.
    :return: Expected number of escaping loops and the probability that none escapes.
    """
    if inner_map_deriv < 1:
        raise DomainViolationError(f'Phi\'(0) of a map onto the disc from a subdomain is >= 1, got {inner_map_deriv}')
    mass = c * math.log(inner_map_deriv)
    return EscapeMass(mass=mass, probability=math.exp(-mass))


def _bridges(roots: np.ndarray, durations: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Closed discrete Brownian bridges: Gaussian increments recentered to sum to zero."""
    m = normals.shape[1]
    increments = np.sqrt(durations / m)[:, None] * (normals[..., 0] + 1j * normals[..., 1])
    increments -= increments.mean(axis=1, keepdims=True)
    paths = roots[:, None] + np.concatenate(
        [np.zeros((roots.size, 1), dtype=np.complex128), np.cumsum(increments, axis=1)], axis=1
    )
    paths[:, -1] = paths[:, 0]
    return paths


def winding_numbers(paths: np.ndarray) -> np.ndarray:
    """Winding number about 0 of each closed polyline (rows); 0 where a vertex hits 0."""
    with np.errstate(divide='ignore', invalid='ignore'):
        turns = np.angle(paths[:, 1:] / paths[:, :-1]).sum(axis=1) / (2 * math.pi)
    winding = np.rint(turns)
    winding[~np.isfinite(turns)] = 0
    return winding.astype(int)


def _propose(stratum: tuple[float, float, float, float], uniforms: np.ndarray, normals: np.ndarray):
    t_a, t_b, r2_a, r2_b = stratum
    r = np.sqrt(r2_a + uniforms[:, 0] * (r2_b - r2_a))
    roots = r * np.exp(2j * math.pi * uniforms[:, 1])
    durations = 1 / (1 / t_a - uniforms[:, 2] * (1 / t_a - 1 / t_b))
    paths = _bridges(roots, durations, normals)
    winding = winding_numbers(paths)
    accepted = (winding != 0) & np.all(np.abs(paths) < 1, axis=1)
    return roots, durations, paths, winding, accepted


@lru_cache(maxsize=16)
def acceptance_table(t_min: float, t_max: float, bridge_points: int) -> AcceptanceTable:
    """
    Stratified estimate of P[bridge surrounds 0 and stays in the disc].

    Root radius squared, angle and duration come from a scrambled Sobol
    sequence; bridge increments from a fixed pseudo-random stream. The
    accepted proposals that also leave the calibration disc fix the scale.
    """
    soup = settings.soup
    t_edges = np.geomspace(t_min, t_max, soup.DURATION_STRATA + 1)
    r2_edges = np.linspace(0.0, 1.0, soup.RADIUS_STRATA + 1)
    mass = np.outer(1 / t_edges[:-1] - 1 / t_edges[1:], np.diff(r2_edges)) / 2
    n = soup.TABLE_SAMPLES
    strata = mass.size
    rng = rng_stream(0, 0, TABLE_STREAM_KEY)
    uniforms = qmc.Sobol(d=3, scramble=True, seed=rng).random(n * strata).reshape(strata, n, 3)
    acceptance = np.empty(strata)
    escape = np.empty(strata)
    layout = AcceptanceTable(t_edges=t_edges, r2_edges=r2_edges, mass=mass, acceptance=acceptance, escape=escape)
    for flat in range(strata):
        normals = rng.standard_normal((n, bridge_points, 2))
        _, _, paths, _, accepted = _propose(layout.stratum(flat), uniforms[flat], normals)
        acceptance[flat] = accepted.mean()
        escape[flat] = (accepted & np.any(np.abs(paths) > CALIBRATION_RADIUS, axis=1)).mean()
    table = AcceptanceTable(
        t_edges=t_edges,
        r2_edges=r2_edges,
        mass=mass,
        acceptance=acceptance.reshape(mass.shape),
        escape=escape.reshape(mass.shape),
    )
    logger.debug(
        'acceptance table t in [%.3g, %.3g], M=%d: scale %.4g, truncated mass %.6g',
        t_min, t_max, bridge_points, table.scale, table.total,
    )
    return table


def _draw_loop(table: AcceptanceTable, flat: int, bridge_points: int, rng: np.random.Generator) -> LoopSample:
    stratum = table.stratum(flat)
    p = max(float(table.acceptance.flat[flat]), 1e-6)
    batch = int(min(PROPOSAL_BATCH, max(8, math.ceil(4 / p))))
    for _ in range(MAX_PROPOSAL_ROUNDS):
        roots, durations, paths, winding, accepted = _propose(
            stratum, rng.random((batch, 3)), rng.standard_normal((batch, bridge_points, 2))
        )
        hits = np.flatnonzero(accepted)
        if hits.size:
            k = hits[0]
            return LoopSample(root=complex(roots[k]), duration=float(durations[k]), points=paths[k], winding=int(winding[k]))
    raise ResourceLimitError(f'no loop accepted in stratum {flat} after {MAX_PROPOSAL_ROUNDS} rounds')


def sample_soup(config: SoupConfig) -> list[LoopSample]:
    """Poisson number of loops with mean c times the truncated mass, each drawn on its own stream."""
    if config.intensity == 0:
        return []
    table = acceptance_table(config.t_min, config.t_max, config.bridge_points)
    expected = config.intensity * table.total
    if expected > settings.soup.MAX_EXPECTED_COUNT:
        raise ResourceLimitError(f'expected loop count {expected:.3g} exceeds the configured guard')
    rng = rng_stream(config.seed, config.index, SOUP_STREAM_KEY)
    count = int(rng.poisson(expected))
    if count == 0:
        return []
    weights = table.weights.ravel()
    strata = rng.choice(weights.size, size=count, p=weights / weights.sum())
    loops = [
        _draw_loop(table, int(flat), config.bridge_points, rng_stream(config.seed, config.index, SOUP_STREAM_KEY, j + 1))
        for j, flat in enumerate(strata)
    ]
    logger.debug('soup sample %d: %d loops (mean %.4g)', config.index, count, expected)
    return loops


def count_escaping(loops: list[LoopSample], geometry: Geometry) -> int:
    """Number of loops meeting ``geometry``."""
    if not loops or geometry.is_empty:
        return 0
    curves = np.array([loop.curve for loop in loops], dtype=object)
    return int(shapely.intersects(curves, geometry).sum())


def attach_soup(K: 'SampleK', config: SoupConfig) -> 'SampleK':
    """Adds an independent soup to K, each loop together with the domain it surrounds."""
    loops = sample_soup(config.for_sample(K.index))
    if not loops:
        return K
    region = make_valid(unary_union([K.region, *(loop.filled() for loop in loops)]))
    return K.model_copy(update={'region': region, 'loops': K.loops + tuple(loops)})


def export_soup(loops: list[LoopSample]) -> list[dict]:
    return [
        {
            'root': complex_pairs([loop.root])[0],
            'duration': loop.duration,
            'winding': loop.winding,
            'vertices': complex_pairs(loop.points),
        }
        for loop in loops
    ]

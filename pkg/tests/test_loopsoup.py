import math

import numpy as np
import pytest
from pydantic import ValidationError
from shapely.geometry import LineString, Point, Polygon

from constants import Domain
from exceptions import DomainViolationError, NumericalFailureError, ResourceLimitError
from loewner.schemas import Trace
from loopsoup.constants import CALIBRATION_RADIUS
from loopsoup.schemas import LoopSample, SoupConfig
from loopsoup.services import (
    acceptance_table,
    attach_soup,
    count_escaping,
    escape_mass,
    export_soup,
    sample_soup,
    winding_numbers,
)
from restriction.hulls import perfect_hull
from sampler.schemas import SampleK

CIRCLE = 0.5 * np.exp(2j * math.pi * np.linspace(0.0, 1.0, 65))
CIRCLE[-1] = CIRCLE[0]


@pytest.fixture(scope='module')
def soup_config() -> SoupConfig:
    return SoupConfig(intensity=1.0, bridge_points=64, seed=5)


def test_escape_mass():
    mass = escape_mass(2.0, math.exp(0.3))
    assert mass.mass == pytest.approx(0.6)
    assert mass.probability == pytest.approx(math.exp(-0.6))
    with pytest.raises(DomainViolationError):
        escape_mass(1.0, 0.9)


def test_winding_numbers():
    paths = np.stack([CIRCLE, CIRCLE[::-1], CIRCLE + 2])
    assert winding_numbers(paths).tolist() == [1, -1, 0]


def test_loops_must_be_closed():
    with pytest.raises(ValidationError):
        LoopSample(root=0.5, duration=0.1, points=[0.5, 0.6], winding=0)


def test_filled_loop_contains_its_interior():
    loop = LoopSample(root=complex(CIRCLE[0]), duration=0.1, points=CIRCLE, winding=1)
    assert loop.surrounds_origin
    assert loop.filled().contains(Point(0, 0))


def test_cutoffs_are_ordered():
    with pytest.raises(ValidationError):
        SoupConfig(intensity=1.0, t_min=1.0, t_max=0.5)


def test_zero_intensity_has_no_loops():
    assert sample_soup(SoupConfig(intensity=0.0)) == []


def test_soup_is_reproducible_and_admissible(soup_config):
    loops = sample_soup(soup_config)
    again = sample_soup(soup_config)
    assert [loop.root for loop in loops] == [loop.root for loop in again]
    for loop in loops:
        assert loop.surrounds_origin
        assert np.all(np.abs(loop.points) < 1)
        assert soup_config.t_min <= loop.duration <= soup_config.t_max
    assert len(export_soup(loops)) == len(loops)


def test_escaping_loops(soup_config):
    loops = sample_soup(soup_config.for_sample(1))
    assert count_escaping(loops, Polygon()) == 0
    whole_disc = Point(0, 0).buffer(1.0)
    assert count_escaping(loops, whole_disc) == len(loops)


def test_expected_count_guard():
    with pytest.raises(ResourceLimitError):
        sample_soup(SoupConfig(intensity=1e9, bridge_points=64))


def _segment_sample(index: int) -> SampleK:
    points = np.linspace(1.0, 0.0, 11).astype(np.complex128)
    right = Trace(times=np.linspace(0.0, 1.0, 11), points=points, domain=Domain.DISC)
    region = LineString(np.column_stack([points.real, points.imag]))
    return SampleK(index=index, rho=0.0, right=right, region=region)


def _escaping_mean(config: SoupConfig, geometry, n: int) -> tuple[float, float]:
    counts = np.array([count_escaping(sample_soup(config.for_sample(i)), geometry) for i in range(n)])
    return counts.mean(), counts.std(ddof=1) / math.sqrt(n)


def test_table_is_calibrated_on_the_disc_of_half_radius():
    table = acceptance_table(1e-2, 10.0, 64)
    escaping = (table.mass * table.escape).sum() * table.scale
    assert escaping == pytest.approx(math.log(1 / CALIBRATION_RADIUS))
    assert np.all(table.escape <= table.acceptance)
    assert table.total > escaping


def test_short_loops_cannot_be_calibrated():
    with pytest.raises(NumericalFailureError):
        sample_soup(SoupConfig(intensity=1.0, t_min=1e-6, t_max=1e-5, bridge_points=64))


def test_attach_soup_fills_surrounding_loops():
    config = SoupConfig(intensity=3.0, t_min=1e-2, bridge_points=64, seed=2)
    K = next(
        _segment_sample(index) for index in range(50) if sample_soup(config.for_sample(index))
    )
    attached = attach_soup(K, config)
    loops = sample_soup(config.for_sample(K.index))
    assert len(attached.loops) == len(loops)
    assert attached.region.area >= max(loop.filled().area for loop in loops) - 1e-12
    for loop in attached.loops:
        assert attached.region.buffer(1e-9).contains(loop.curve)
    assert attach_soup(K, SoupConfig(intensity=0.0)) is K


@pytest.mark.slow
def test_escaping_count_matches_the_escape_mass():
    hull = perfect_hull(math.pi, 0.3)
    target = escape_mass(1.0, hull.d0).mass
    assert target == pytest.approx(0.3, rel=1e-3)
    coarse, coarse_se = _escaping_mean(SoupConfig(intensity=1.0, t_min=1e-2, seed=3), hull.geometry, 2000)
    fine, fine_se = _escaping_mean(SoupConfig(intensity=1.0, t_min=1e-3, seed=4), hull.geometry, 4000)
    assert abs(fine - target) <= 0.1 * target
    assert coarse <= fine + 3 * math.hypot(coarse_se, fine_se)


@pytest.mark.slow
def test_nested_discs_differ_by_their_escape_masses():
    config = SoupConfig(intensity=1.0, t_min=1e-2, bridge_points=128, seed=6)
    n = 2000
    reach = [[np.abs(loop.points).max() for loop in sample_soup(config.for_sample(i))] for i in range(n)]
    inner = np.array([sum(r > 0.5 for r in row) for row in reach])
    outer = np.array([sum(r > 0.7 for r in row) for row in reach])
    difference = inner - outer
    assert abs(difference.mean() - math.log(0.7 / 0.5)) <= 3 * difference.std(ddof=1) / math.sqrt(n) + 0.02
    assert abs(inner.mean() - math.log(2)) <= 3 * inner.std(ddof=1) / math.sqrt(n) + 0.02


@pytest.mark.slow
def test_soup_counts_are_poisson_and_scale_with_intensity():
    base = SoupConfig(intensity=1.0, t_min=1e-2, bridge_points=64, seed=8)
    single = np.array([len(sample_soup(base.for_sample(i))) for i in range(1000)])
    double = np.array([
        len(sample_soup(base.model_copy(update={'intensity': 2.0, 'seed': 9}).for_sample(i))) for i in range(1000)
    ])
    assert 0.8 <= single[:500].var(ddof=1) / single[:500].mean() <= 1.2
    se = math.sqrt(double.var(ddof=1) / double.size + 4 * single.var(ddof=1) / single.size)
    assert abs(double.mean() - 2 * single.mean()) <= 3 * se

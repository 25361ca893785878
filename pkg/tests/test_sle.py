import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from loewner.schemas import DrivingPath
from settings import settings
from sle.constants import ForcePointKind
from sle.schemas import DriverPair, ForcePoint, SleParams
from sle.services import HalfAngleProcess, chordal_sle_driver, perfect_driver, radial_sle_driver


def _params(**kwargs) -> SleParams:
    defaults = {'kappa': 8 / 3, 'T': 0.1, 'dt': 1e-3, 'seed': 3}
    return SleParams(**{**defaults, **kwargs})


def test_perfect_driver():
    path = perfect_driver(math.pi / 3, 0.5, 0.1)
    assert path.values[0] == pytest.approx(math.pi / 3)
    assert path.values[-1] == pytest.approx(math.pi / 3 - 0.5 * math.sqrt(3))
    with pytest.raises(ValueError):
        perfect_driver(0.0, 0.5, 0.1)


@pytest.mark.parametrize('force_point', [
    {'kind': 'angle'},
    {'kind': 'angle', 'value': 7.0},
    {'kind': 'point', 'value': 0.0},
    {'kind': 'limit-left', 'value': 0.1},
])
def test_invalid_force_points(force_point):
    with pytest.raises(ValidationError):
        ForcePoint(**force_point)


def test_horizon_must_be_a_multiple_of_dt():
    with pytest.raises(ValidationError):
        _params(T=0.1, dt=0.03)


def test_rho_needs_a_force_point():
    with pytest.raises(ValueError):
        radial_sle_driver(_params(rho=1.0))


def test_brownian_driver_is_reproducible():
    first = radial_sle_driver(_params(index=4))
    second = radial_sle_driver(_params(index=4))
    other = radial_sle_driver(_params(index=5))
    assert first.V is None
    assert np.array_equal(first.W.values, second.W.values)
    assert not np.array_equal(first.W.values, other.W.values)
    assert first.W.values[0] == 0


def test_radial_limit_left_keeps_half_angle_inside():
    pair = radial_sle_driver(_params(rho=1.0, force_point=ForcePoint(kind=ForcePointKind.LIMIT_LEFT)))
    gap = pair.W.values - pair.V.values
    assert pair.W.values[0] == pytest.approx(0.0, abs=1e-15)
    assert pair.V.values[0] == pytest.approx(-settings.sle.EPS0)
    assert np.all((gap > 0) & (gap < 2 * math.pi))


def test_radial_angle_force_point_starts_at_the_given_point():
    pair = radial_sle_driver(_params(rho=0.5, force_point=ForcePoint(kind=ForcePointKind.ANGLE, value=math.pi)))
    assert np.exp(1j * pair.V.values[0]) == pytest.approx(-1)
    assert pair.W.values[0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize('kind, sign', [(ForcePointKind.LIMIT_RIGHT, -1), (ForcePointKind.LIMIT_LEFT, 1)])
def test_chordal_force_point_stays_on_its_side(kind, sign):
    pair = chordal_sle_driver(_params(rho=-0.5, force_point=ForcePoint(kind=kind)))
    assert np.all(sign * (pair.W.values - pair.V.values) > 0)


def test_chordal_rejects_angles_and_radial_rejects_points():
    with pytest.raises(ValueError):
        chordal_sle_driver(_params(rho=1.0, force_point=ForcePoint(kind=ForcePointKind.ANGLE, value=1.0)))
    with pytest.raises(ValueError):
        radial_sle_driver(_params(rho=1.0, force_point=ForcePoint(kind=ForcePointKind.POINT, value=1.0)))


def test_geometric_grid():
    pair = chordal_sle_driver(_params(T=1.0, grid='geometric', relative_step=0.1))
    steps = np.diff(pair.W.times)
    assert pair.W.times[-1] == pytest.approx(1.0)
    assert np.all(steps[:-1] >= 1e-3 - 1e-15)
    assert steps.size < 1000


def test_half_angle_reflection():
    process = HalfAngleProcess(8 / 3, 0.0)
    assert process.reflect(-0.1) == pytest.approx(0.1)
    assert process.reflect(math.pi + 0.1) == pytest.approx(math.pi - 0.1)


def test_driver_pair_grids_must_match():
    W = DrivingPath.constant(0.0, 1.0, 0.1)
    V = DrivingPath.constant(0.0, 1.0, 0.2)
    with pytest.raises(ValidationError):
        DriverPair(W=W, V=V)


def test_radial_driver_without_weight_is_brownian():
    kappa, T = 8 / 3, 0.1
    force_point = ForcePoint(kind=ForcePointKind.ANGLE, value=math.pi)
    endpoints = np.array([
        radial_sle_driver(_params(T=T, rho=0.0, force_point=force_point, index=i)).W.values[-1] for i in range(1000)
    ])
    assert stats.kstest(endpoints / math.sqrt(kappa * T), 'norm').pvalue > 0.01


@pytest.mark.slow
def test_chordal_force_point_repels_the_driver():
    force_point = ForcePoint(kind=ForcePointKind.POINT, value=1.0)
    early, late = [], []
    for i in range(1000):
        pair = chordal_sle_driver(_params(T=0.5, rho=2.0, force_point=force_point, index=i))
        gap = np.abs(pair.W.values - pair.V.values)
        early.append(gap[100])
        late.append(gap[-1])
    assert np.mean(late) > np.mean(early) > 1.0


@pytest.mark.slow
def test_half_angle_stays_inside_over_long_runs():
    force_point = ForcePoint(kind=ForcePointKind.LIMIT_LEFT)
    for i in range(1000):
        pair = radial_sle_driver(_params(T=2.0, dt=1e-4, rho=2.0, force_point=force_point, index=i))
        theta = (pair.W.values - pair.V.values) / 2
        assert np.all((theta > 0) & (theta < math.pi))

import math

import numpy as np
import pytest
from pydantic import ValidationError

from constants import Domain
from exceptions import HorizonExceededError
from loewner.schemas import DrivingPath
from loewner.services import chordal_flow, default_tip_offset, extract_trace, hull_maps, radial_flow
from sle.services import perfect_driver
from utils import hausdorff


def test_driving_path_must_start_at_zero():
    with pytest.raises(ValidationError):
        DrivingPath(times=[0.1, 0.2], values=[0.0, 0.0])
    with pytest.raises(ValidationError):
        DrivingPath(times=[0.0, 0.0], values=[0.0, 1.0])


def test_driving_path_interpolation():
    linear = DrivingPath(times=[0.0, 1.0, 2.0], values=[0.0, 2.0, 0.0])
    step = linear.model_copy(update={'interpolation': 'step'})
    assert linear.at(0.5) == pytest.approx(1.0)
    assert step.at(0.5) == pytest.approx(2.0)
    with pytest.raises(HorizonExceededError):
        linear.at(2.5)


def test_truncate_shift_and_downsample():
    path = DrivingPath.uniform(np.arange(11.0), 0.1)
    assert path.truncated(0.5).horizon == pytest.approx(0.5)
    assert path.shifted(0.5).values[0] == pytest.approx(5.0)
    coarse = path.downsampled(3)
    assert coarse.times[-1] == path.times[-1]
    assert coarse.times.size == 5


def test_chordal_flow_matches_hydrodynamic_expansion():
    W = DrivingPath.constant(0.0, 1.0, 1e-2)
    flow = chordal_flow(W, np.array([100j]), 1.0)
    g = flow.value[0]
    assert ((g - 100j) * 100j).real == pytest.approx(2.0, abs=1e-3)


def test_radial_flow_capacity_at_origin():
    W = perfect_driver(math.pi / 2, 0.5, 1e-3)
    flow = radial_flow(W, np.array([0j]), 0.5)
    assert flow.value[0] == 0
    _, log_deriv = hull_maps(W, 0.5).evaluate_log(np.array([0j]))
    assert log_deriv[0].real == pytest.approx(0.5, abs=1e-8)


def test_flow_beyond_horizon_raises():
    W = DrivingPath.constant(0.0, 0.1, 1e-2)
    with pytest.raises(HorizonExceededError):
        radial_flow(W, np.array([0.5 + 0j]), 0.2)


def test_boundary_point_at_driver_is_swallowed():
    W = DrivingPath.constant(0.0, 0.1, 1e-2)
    flow = radial_flow(W, np.array([1.0 + 0j, -1.0 + 0j]), 0.1)
    assert flow.swallowed.tolist() == [True, False]
    assert flow.tau[0] == 0.0


def test_chordal_trace_of_constant_driver_is_the_vertical_slit():
    W = DrivingPath.constant(0.0, 1.0, 1e-3)
    trace = extract_trace(W, Domain.HALF_PLANE, stride=50)
    assert trace.points[0] == 0
    assert np.abs(trace.points.real).max() < 1e-9
    assert trace.tip == pytest.approx(2j, abs=1e-2)
    assert trace.times[-1] == pytest.approx(1.0)


def test_radial_trace_of_the_perfect_curve_at_pi():
    t = 0.1
    radius = 2 * math.exp(t) - 1 - 2 * math.sqrt(math.exp(2 * t) - math.exp(t))
    trace = extract_trace(perfect_driver(math.pi, t, 1e-3), Domain.DISC)
    assert np.abs(trace.points.imag).max() < 1e-9
    assert trace.tip.real == pytest.approx(-radius, abs=5e-2)


def test_tip_offset_rejects_non_positive_values():
    with pytest.raises(ValueError):
        extract_trace(DrivingPath.constant(0.0, 0.1, 1e-2), Domain.DISC, tip_offset=0.0)


def test_default_tip_offset_is_capped():
    steps = np.array([1e-4, 1.0])
    offset = default_tip_offset(steps)
    assert offset[0] == pytest.approx(1e-4 ** 0.75)
    assert offset[1] == pytest.approx(math.sqrt(0.1))


def test_perfect_curve_is_self_similar():
    theta, t, s = math.pi / 2, 0.2, 0.2
    W = perfect_driver(theta, t + s, 1e-3)
    trace = extract_trace(W, Domain.DISC)
    later = trace.points[trace.times >= t - 1e-12]
    image, _ = hull_maps(W, t).evaluate(later)
    image = image * np.exp(-1j * (float(W.at(t)) - theta))
    reference = extract_trace(perfect_driver(theta, s, 1e-3), Domain.DISC).points
    assert hausdorff(image, reference) < 1e-2


def test_chordal_flow_of_constant_driver_integrates_to_the_closed_form():
    flow = chordal_flow(DrivingPath.constant(0.0, 1.0, 1e-2), np.array([3j]), 1.0)
    assert not flow.swallowed[0]
    assert flow.value[0] == pytest.approx(1j * math.sqrt(5), abs=1e-8)


def test_flow_started_next_to_the_driver_is_substepped():
    z = np.array([0.01 + 0.01j])
    flow = chordal_flow(DrivingPath.constant(0.0, 0.1, 1e-3), z, 0.1)
    assert not flow.swallowed[0]
    assert flow.value[0] == pytest.approx(np.sqrt(z[0] ** 2 + 0.4), abs=1e-5)


def test_flow_within_ten_tolerances_of_the_driver_uses_full_depth():
    z = np.array([5e-6 + 5e-6j])
    flow = chordal_flow(DrivingPath.constant(0.0, 1e-11, 1e-11), z, 1e-11)
    assert not flow.swallowed[0]
    assert flow.value[0] == pytest.approx(np.sqrt(z[0] ** 2 + 4e-11), rel=1e-8)


def test_radial_flow_of_constant_driver_fixes_the_antipode():
    flow = radial_flow(DrivingPath.constant(0.0, 1.0, 1e-2), np.array([-1.0 + 0j]), 1.0)
    assert flow.value[0] == pytest.approx(-1.0, abs=1e-12)


def test_radial_capacity_is_additive():
    W = perfect_driver(math.pi / 2, 0.4, 1e-3)
    z = np.array([0.3 + 0.2j, -0.5j, 0.1])
    full = radial_flow(W, z, 0.4)
    first = radial_flow(W, z, 0.2)
    second = radial_flow(W.shifted(0.2), first.value, 0.2)
    assert np.abs(second.value - full.value).max() < 1e-7
    assert np.abs(first.log_derivative + second.log_derivative - full.log_derivative).max() < 1e-7
    assert hull_maps(W, 0.4).capacity == pytest.approx(hull_maps(W, 0.2).capacity + hull_maps(W.shifted(0.2), 0.2).capacity)


def test_boundary_points_stay_on_the_unit_circle():
    W = perfect_driver(math.pi / 2, 0.2, 1e-3)
    flow = radial_flow(W, np.exp(1j * np.linspace(2.0, 5.0, 7)), 0.2)
    assert not flow.swallowed.any()
    assert np.abs(np.abs(flow.value) - 1).max() < 1e-8


def test_log_derivative_matches_finite_differences():
    rng = np.random.default_rng(1)
    values = np.concatenate([[0.0], np.cumsum(rng.normal(0.0, 0.1, 50))])
    W = DrivingPath(times=1e-2 * np.arange(values.size), values=values, interpolation='step')
    z = np.array([0.5 + 1j, -1 + 0.3j])
    h = 1e-6
    flow = chordal_flow(W, z, 0.5)
    difference = (chordal_flow(W, z + h, 0.5).value - chordal_flow(W, z - h, 0.5).value) / (2 * h)
    assert np.abs(flow.derivative - difference).max() < 1e-5 * np.abs(difference).max()


def test_swallowing_is_monotone_in_time():
    W = DrivingPath.constant(0.0, 0.1, 1e-3)
    z = np.array([0.8 + 0j, 1.0 + 0j, 0.5 + 0j])
    flows = [radial_flow(W, z, T) for T in (0.005, 0.02, 0.05, 0.1)]
    flags = np.array([flow.swallowed for flow in flows])
    assert np.all(flags[1:] >= flags[:-1])
    assert flags[0].tolist() == [False, True, False]
    assert flags[-1].tolist() == [True, True, False]
    swallowed_at = [flow.tau[0] for flow in flows[1:]]
    assert swallowed_at == pytest.approx([swallowed_at[0]] * 3)
    assert 0.01 < swallowed_at[0] < 0.02

"""
Driving-path generators.

SLE(kappa, rho) with one force point is simulated through the gap between
the driver and the force-point image, which is an autonomous Bessel-type
process:

* radial: the half angle theta = (W - V)/2 solves
  d theta = (sqrt(kappa)/2) dB + ((rho + 2)/4) cot(theta) dt on (0, pi),
  and dV = -cot(theta) dt;
* chordal: Y = s (W - V) > 0 solves dY = s sqrt(kappa) dB + (rho + 2)/Y dt,
  and dV = -2 s / Y dt.

Near the singular boundaries a step is split along its Brownian bridge
until the state is far enough away, then reflected back inside.
"""
import logging
import math

import numpy as np

from loewner.schemas import DrivingPath
from settings import settings
from sle.constants import ForcePointKind
from sle.schemas import DriverPair, SleParams
from utils import rng_stream

logger = logging.getLogger(__name__)


class GapProcess:
    """dx = drift(x) dt + diffusion dB on (lower, upper), with the force-point rate dV = force_rate(x) dt."""
    lower = 0.0
    upper = math.inf

    def __init__(self, kappa: float, rho: float):
        self.kappa = kappa
        self.rho = rho

    @property
    def diffusion(self) -> float:
        raise NotImplementedError

    def drift(self, x: float) -> float:
        raise NotImplementedError

    def force_rate(self, x: float) -> float:
        raise NotImplementedError

    def reflect(self, x: float) -> float:
        if x <= self.lower:
            x = 2 * self.lower - x
        if x >= self.upper:
            x = 2 * self.upper - x
        return x


class HalfAngleProcess(GapProcess):
    upper = math.pi

    @property
    def diffusion(self) -> float:
        return math.sqrt(self.kappa) / 2

    def drift(self, x: float) -> float:
        return (self.rho + 2) / 4 / math.tan(x)

    def force_rate(self, x: float) -> float:
        return -1 / math.tan(x)


class ChordalGapProcess(GapProcess):
    def __init__(self, kappa: float, rho: float, side: float):
        super().__init__(kappa, rho)
        self.side = side

    @property
    def diffusion(self) -> float:
        return self.side * math.sqrt(self.kappa)

    def drift(self, x: float) -> float:
        return (self.rho + 2) / x

    def force_rate(self, x: float) -> float:
        return -2 * self.side / x


class _Integrator:
    """Euler-Maruyama with Brownian-bridge halving and reflection near the singular boundaries."""

    def __init__(self, process: GapProcess, rng: np.random.Generator):
        self.process = process
        self.rng = rng
        self.max_level = settings.sle.MAX_HALVINGS
        self.factor = settings.sle.REFLECTION_FACTOR
        self.scale = math.sqrt(max(process.kappa, 1.0))
        self.reflections = 0
        self.deepest = 0

    def _near(self, x: float, h: float) -> bool:
        room = min(x - self.process.lower, self.process.upper - x)
        return room < self.factor * math.sqrt(h) * self.scale

    def advance(self, x: float, h: float, dB: float, level: int = 0) -> tuple[float, float]:
        """Moves x over a step of length h with Brownian increment dB; returns (x, increment of V)."""
        if level < self.max_level and self._near(x, h):
            self.deepest = max(self.deepest, level + 1)
            first = dB / 2 + math.sqrt(h / 4) * self.rng.standard_normal()
            x, dv_first = self.advance(x, h / 2, first, level + 1)
            x, dv_second = self.advance(x, h / 2, dB - first, level + 1)
            return x, dv_first + dv_second
        process = self.process
        dv = process.force_rate(x) * h
        moved = x + process.drift(x) * h + process.diffusion * dB
        inside = process.reflect(moved)
        if inside != moved:
            self.reflections += 1
        if not process.lower < inside < process.upper:
            inside = min(max(inside, process.lower + 1e-12), process.upper - 1e-12)
        return inside, dv


def _grid(params: SleParams) -> np.ndarray:
    if params.grid == 'uniform':
        return np.linspace(0.0, params.T, params.n_steps + 1)
    times = [0.0]
    while times[-1] < params.T:
        h = max(params.dt, params.relative_step * times[-1])
        times.append(min(times[-1] + h, params.T))
    return np.asarray(times)


def _check_rho(params: SleParams) -> None:
    if params.force_point.kind == ForcePointKind.NONE and params.rho != 0:
        raise ValueError('rho != 0 needs a force point')


def _brownian(params: SleParams, times: np.ndarray) -> DriverPair:
    rng = rng_stream(params.seed, params.index, params.stream)
    increments = np.sqrt(params.kappa * np.diff(times)) * rng.standard_normal(times.size - 1)
    values = params.start + np.concatenate([[0.0], np.cumsum(increments)])
    return DriverPair(W=DrivingPath(times=times, values=values))


def _simulate(process: GapProcess, x0: float, params: SleParams, times: np.ndarray):
    rng = rng_stream(params.seed, params.index, params.stream)
    steps = np.diff(times)
    noise = np.sqrt(steps) * rng.standard_normal(steps.size)
    integrator = _Integrator(process, rng)
    gap = np.empty(times.size)
    force = np.empty(times.size)
    gap[0], force[0] = x0, 0.0
    x, v = x0, 0.0
    for k in range(steps.size):
        x, dv = integrator.advance(x, float(steps[k]), float(noise[k]))
        v += dv
        gap[k + 1], force[k + 1] = x, v
    if integrator.reflections or integrator.deepest:
        logger.debug(
            'path %d: %d reflections, bridge halving depth %d',
            params.index, integrator.reflections, integrator.deepest,
        )
    return gap, force, integrator.reflections


def perfect_driver(theta: float, T: float, dt: float) -> DrivingPath:
    """
    Driver W_t = theta - t cot(theta/2) of the perfect radial curve aimed at e^{i theta}.

    :param theta: Target angle in (0, 2 pi).
    :param T: Horizon.
    :param dt: Grid step.
    :return: Linear driving path on the uniform grid.
    """
    if not 0 < theta < 2 * math.pi:
        raise ValueError(f'theta {theta} outside (0, 2 pi)')
    n = max(int(round(T / dt)), 1)
    times = np.linspace(0.0, T, n + 1)
    return DrivingPath(times=times, values=theta - times / math.tan(theta / 2))


def radial_sle_driver(params: SleParams) -> DriverPair:
    """
    Radial SLE(kappa, rho) driver started at e^{i W_0}.

    The force point ``angle x`` sits at e^{i (W_0 + x)}; ``limit-right`` and
    ``limit-left`` start it eps0 radians counterclockwise or clockwise of the
    starting point.
    """
    _check_rho(params)
    times = _grid(params)
    point = params.force_point
    if point.kind == ForcePointKind.NONE:
        return _brownian(params, times)

    eps0 = settings.sle.EPS0
    if point.kind == ForcePointKind.ANGLE:
        theta0 = math.pi - point.value / 2
    elif point.kind == ForcePointKind.LIMIT_LEFT:
        theta0 = eps0 / 2
    elif point.kind == ForcePointKind.LIMIT_RIGHT:
        theta0 = math.pi - eps0 / 2
    else:
        raise ValueError('radial SLE takes an angle or a limit force point')

    gap, force, reflections = _simulate(HalfAngleProcess(params.kappa, params.rho), theta0, params, times)
    V = params.start - 2 * theta0 + force
    W = V + 2 * gap
    return DriverPair(
        W=DrivingPath(times=times, values=W),
        V=DrivingPath(times=times, values=V),
        reflections=reflections,
    )


def chordal_sle_driver(params: SleParams) -> DriverPair:
    """
    Chordal SLE(kappa, rho) driver started at W_0.

    The force point ``point x`` sits at W_0 + x; the limits start it at
    W_0 + eps0 (``limit-right``) or W_0 - eps0 (``limit-left``).
    """
    _check_rho(params)
    times = _grid(params)
    point = params.force_point
    if point.kind == ForcePointKind.NONE:
        return _brownian(params, times)

    eps0 = settings.sle.EPS0
    if point.kind == ForcePointKind.POINT:
        offset = point.value
    elif point.kind == ForcePointKind.LIMIT_RIGHT:
        offset = eps0
    elif point.kind == ForcePointKind.LIMIT_LEFT:
        offset = -eps0
    else:
        raise ValueError('chordal SLE takes a real or a limit force point')

    side = -math.copysign(1.0, offset)
    gap, force, reflections = _simulate(
        ChordalGapProcess(params.kappa, params.rho, side), abs(offset), params, times
    )
    V = params.start + offset + force
    W = V + side * gap
    return DriverPair(
        W=DrivingPath(times=times, values=W),
        V=DrivingPath(times=times, values=V),
        reflections=reflections,
    )

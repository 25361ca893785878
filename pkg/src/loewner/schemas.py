from typing import Annotated, Optional

import numpy as np
from pydantic import Field, field_validator, model_validator

from constants import Domain
from exceptions import HorizonExceededError
from loewner.constants import INTERPOLATIONS
from schemas import FrozenModel, readonly


class DrivingPath(FrozenModel):
    """
    A sampled real driving function.

    ``linear`` paths interpolate linearly between samples. ``step`` paths are
    constant equal to ``values[k]`` on ``(times[k-1], times[k]]``; ``values[0]``
    is the starting point only.
    """
    times: Annotated[np.ndarray, Field(..., title='Sample times')]
    values: Annotated[np.ndarray, Field(..., title='Driver values', description='Radians in the radial case')]
    interpolation: INTERPOLATIONS = 'linear'

    @field_validator('times', 'values', mode='before')
    @classmethod
    def _as_array(cls, value) -> np.ndarray:
        return readonly(np.atleast_1d(value), dtype=float)

    @model_validator(mode='after')
    def _check_grid(self) -> 'DrivingPath':
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError('times and values must be 1-d arrays of equal length')
        if self.times[0] != 0:
            raise ValueError('driving path must start at t = 0')
        if np.any(np.diff(self.times) <= 0):
            raise ValueError('sample times must be strictly increasing')
        if not np.all(np.isfinite(self.values)):
            raise ValueError('driver values must be finite')
        return self

    @classmethod
    def uniform(cls, values, dt: float) -> 'DrivingPath':
        values = np.atleast_1d(np.asarray(values, dtype=float))
        return cls(times=dt * np.arange(values.size), values=values)

    @classmethod
    def constant(cls, value: float, T: float, dt: float) -> 'DrivingPath':
        n = max(int(round(T / dt)), 1)
        return cls(times=np.linspace(0.0, T, n + 1), values=np.full(n + 1, float(value)))

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def dt(self) -> float:
        return float(self.steps.max()) if self.times.size > 1 else 0.0

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t > self.horizon * (1 + 1e-12) + 1e-15):
            raise HorizonExceededError(f'time {np.max(t)} beyond horizon {self.horizon}')
        if self.interpolation == 'linear':
            return np.interp(t, self.times, self.values)
        index = np.clip(np.searchsorted(self.times, t, side='left'), 0, self.times.size - 1)
        return self.values[index]

    def piece_drivers(self) -> np.ndarray:
        """Constant driver of each grid interval: midpoint for linear paths, the held value for step paths."""
        if self.interpolation == 'step':
            return self.values[1:]
        return (self.values[1:] + self.values[:-1]) / 2

    def index_of(self, T: float) -> int:
        if T > self.horizon * (1 + 1e-12) + 1e-15:
            raise HorizonExceededError(f'time {T} beyond horizon {self.horizon}')
        index = int(np.searchsorted(self.times, T - 1e-12 * max(1.0, T), side='left'))
        return min(index, self.times.size - 1)

    def truncated(self, T: float) -> 'DrivingPath':
        """The path on [0, T]; T is snapped to the nearest grid time at or after it."""
        stop = self.index_of(T)
        return DrivingPath(
            times=self.times[:stop + 1],
            values=self.values[:stop + 1],
            interpolation=self.interpolation,
        )

    def shifted(self, T: float) -> 'DrivingPath':
        """The path s -> W(T + s), starting at grid time T."""
        start = self.index_of(T)
        return DrivingPath(
            times=self.times[start:] - self.times[start],
            values=self.values[start:],
            interpolation=self.interpolation,
        )

    def downsampled(self, stride: int) -> 'DrivingPath':
        if stride <= 1:
            return self
        index = np.unique(np.append(np.arange(0, self.times.size, stride), self.times.size - 1))
        return DrivingPath(times=self.times[index], values=self.values[index], interpolation=self.interpolation)


class FlowResult(FrozenModel):
    """Flow of a batch of points; every field has the shape of the input batch."""
    value: Annotated[np.ndarray, Field(..., title='g_T(z)')]
    swallowed: Annotated[np.ndarray, Field(..., title='Swallowed flags')]
    tau: Annotated[np.ndarray, Field(..., title='Swallowing times', description='NaN where not swallowed')]
    log_derivative: Annotated[np.ndarray, Field(..., title='log g_T\'(z)')]

    @property
    def derivative(self) -> np.ndarray:
        return np.exp(self.log_derivative)


class Trace(FrozenModel):
    times: Annotated[np.ndarray, Field(..., title='Grid times')]
    points: Annotated[np.ndarray, Field(..., title='Curve points')]
    domain: Domain

    @field_validator('times', mode='before')
    @classmethod
    def _times(cls, value) -> np.ndarray:
        return readonly(np.atleast_1d(value), dtype=float)

    @field_validator('points', mode='before')
    @classmethod
    def _points(cls, value) -> np.ndarray:
        return readonly(np.atleast_1d(value), dtype=np.complex128)

    @property
    def tip(self) -> complex:
        return complex(self.points[-1])

    def until(self, index: int) -> 'Trace':
        return Trace(times=self.times[:index + 1], points=self.points[:index + 1], domain=self.domain)

    def closing_segment(self, end: Optional[complex]) -> 'Trace':
        """Appends ``end`` as a final point so the polyline reaches it."""
        if end is None:
            return self
        return Trace(
            times=np.append(self.times, self.times[-1]),
            points=np.append(self.points, end),
            domain=self.domain,
        )

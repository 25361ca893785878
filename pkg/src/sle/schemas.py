import math
from typing import Annotated, Optional

from pydantic import Field, model_validator

from loewner.schemas import DrivingPath
from schemas import ConfiguredModel, FrozenModel
from settings import settings
from sle.constants import GRIDS, ForcePointKind


class ForcePoint(ConfiguredModel):
    """
    Marked boundary point of SLE(kappa, rho).

    ``angle`` takes x in (0, 2 pi) on the circle (radial), ``point`` a real
    x != 0 (chordal). The limits sit just right (1+ / 0+) or just left
    (1- / 0-) of the starting point.
    """
    kind: ForcePointKind = ForcePointKind.NONE
    value: Optional[float] = None

    @model_validator(mode='after')
    def _check_value(self) -> 'ForcePoint':
        if self.kind == ForcePointKind.ANGLE:
            if self.value is None or not 0 < self.value < 2 * math.pi:
                raise ValueError('angle force point needs a value in (0, 2 pi)')
        elif self.kind == ForcePointKind.POINT:
            if self.value is None or self.value == 0:
                raise ValueError('chordal force point needs a real value != 0')
        elif self.value is not None:
            raise ValueError(f'force point of kind {self.kind.value} takes no value')
        return self


class SleParams(ConfiguredModel):
    kappa: Annotated[
        float,
        Field(
            ...,
            ge=0,
            title='kappa',
        )
    ]
    rho: Annotated[
        float,
        Field(
            0.0,
            gt=-2,
            title='rho',
            description='Weight of the force point',
        )
    ]
    force_point: ForcePoint = ForcePoint()
    T: Annotated[
        float,
        Field(
            ...,
            gt=0,
            title='Horizon',
        )
    ]
    dt: Annotated[
        float,
        Field(
            default_factory=lambda: settings.sle.DT,
            gt=0,
            title='Time step',
            description='Initial step on a geometric grid',
        )
    ]
    grid: GRIDS = 'uniform'
    relative_step: Annotated[
        float,
        Field(
            default_factory=lambda: settings.sampler.CHORDAL_RELATIVE_STEP,
            gt=0,
            title='Relative step of a geometric grid',
        )
    ]
    start: Annotated[float, Field(0.0, title='W_0')]
    seed: Annotated[int, Field(0, ge=0, title='Run seed')]
    index: Annotated[int, Field(0, ge=0, title='Path index inside the run')]
    stream: Annotated[int, Field(0, ge=0, title='Sub-stream key', description='Separates curves drawn for the same path index')]

    @model_validator(mode='after')
    def _check_grid(self) -> 'SleParams':
        if self.grid == 'uniform':
            steps = self.T / self.dt
            if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
                raise ValueError('T must be a multiple of dt')
        return self

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


class DriverPair(FrozenModel):
    W: DrivingPath
    V: Optional[DrivingPath] = None
    reflections: Annotated[int, Field(0, ge=0, title='Reflections applied')]

    @model_validator(mode='after')
    def _check_grid(self) -> 'DriverPair':
        if self.V is not None and (
            self.V.times.shape != self.W.times.shape or (self.V.times != self.W.times).any()
        ):
            raise ValueError('W and V must share the same grid')
        return self

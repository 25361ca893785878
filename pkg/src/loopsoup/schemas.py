from typing import Annotated

import numpy as np
from pydantic import Field, field_validator, model_validator
from shapely import Geometry
from shapely.geometry import LineString
from shapely.ops import polygonize, unary_union

from loopsoup.constants import MIN_BRIDGE_POINTS
from schemas import ConfiguredModel, FrozenModel, readonly
from settings import settings


class SoupConfig(ConfiguredModel):
    intensity: Annotated[
        float,
        Field(
            ...,
            ge=0,
            title='Intensity c',
        )
    ]
    t_min: Annotated[
        float,
        Field(
            default_factory=lambda: settings.soup.T_MIN,
            gt=0,
            title='Duration cutoff',
        )
    ]
    t_max: Annotated[
        float,
        Field(
            default_factory=lambda: settings.soup.T_MAX,
            gt=0,
            title='Duration cap',
        )
    ]
    bridge_points: Annotated[
        int,
        Field(
            default_factory=lambda: settings.soup.BRIDGE_POINTS,
            ge=MIN_BRIDGE_POINTS,
            title='Bridge resolution M',
        )
    ]
    seed: Annotated[int, Field(0, ge=0, title='Run seed')]
    index: Annotated[int, Field(0, ge=0, title='Sample index inside the run')]

    @model_validator(mode='after')
    def _check_cutoffs(self) -> 'SoupConfig':
        if not self.t_min < self.t_max:
            raise ValueError('t_min must be smaller than t_max')
        return self

    def for_sample(self, index: int) -> 'SoupConfig':
        return self.model_copy(update={'index': index})


class LoopSample(FrozenModel):
    """A closed bridge polyline in the unit disc; ``points[0] == points[-1]``."""
    root: complex
    duration: Annotated[float, Field(..., gt=0, title='Time length')]
    points: Annotated[np.ndarray, Field(..., title='Closed polyline')]
    winding: Annotated[int, Field(..., title='Winding number about 0')]

    @field_validator('points', mode='before')
    @classmethod
    def _points(cls, value) -> np.ndarray:
        return readonly(np.atleast_1d(value), dtype=np.complex128)

    @model_validator(mode='after')
    def _check_closed(self) -> 'LoopSample':
        if self.points.size < 2 or self.points[0] != self.points[-1]:
            raise ValueError('loop polyline must be closed')
        return self

    @property
    def surrounds_origin(self) -> bool:
        return self.winding != 0

    @property
    def curve(self) -> LineString:
        return LineString(np.column_stack([self.points.real, self.points.imag]))

    def filled(self) -> Geometry:
        """The loop together with every bounded component of its complement."""
        curve = self.curve
        faces = list(polygonize(unary_union(curve)))
        return unary_union([curve, *faces])

from typing import Annotated, Any, Optional

import numpy as np
from pydantic import Field, field_validator, model_validator
from shapely import Geometry
from shapely.geometry import LineString, Point, Polygon

from constants import ALPHA_SLE, BETA_SLE
from loewner.schemas import DrivingPath
from restriction.constants import DERIVATIVE_TOL, HullKind
from restriction.exponents import beta_of_rho, exponents_of_rho, rho_of_beta, xi
from schemas import ConfiguredModel, FrozenModel, readonly


class RestrictionLaw(ConfiguredModel):
    """Law of K with P[K avoids A] = |Phi_A'(0)|^alpha Phi_A'(1)^beta."""
    alpha: Annotated[float, Field(..., title='alpha', allow_inf_nan=False)]
    beta: Annotated[float, Field(..., title='beta', allow_inf_nan=False)]

    @property
    def admissible(self) -> bool:
        return self.beta >= BETA_SLE and self.alpha <= xi(self.beta) + 1e-12

    @property
    def is_maximal(self) -> bool:
        return self.admissible and abs(self.alpha - xi(self.beta)) <= 1e-12

    @property
    def rho(self) -> float:
        """Force-point weight of the maximal law with this beta."""
        return rho_of_beta(self.beta)

    @classmethod
    def sle(cls) -> 'RestrictionLaw':
        return cls(alpha=ALPHA_SLE, beta=BETA_SLE)

    @classmethod
    def maximal(cls, beta: float) -> 'RestrictionLaw':
        return cls(alpha=xi(beta), beta=beta)

    @classmethod
    def of_rho(cls, rho: float) -> 'RestrictionLaw':
        exponents = exponents_of_rho(rho)
        return cls(alpha=exponents.alpha, beta=beta_of_rho(rho))


class LambdaParams(ConfiguredModel):
    """
    Coefficients of lambda(x) = P(x) / (x^2 (1 + x^2)^2).

    The closed form is P = c0 + c2 x^2. ``c1`` and ``c3`` inject odd terms
    into P and are only used as negative controls.
    """
    c0: Annotated[float, Field(..., ge=0, title='c0')]
    c2: Annotated[float, Field(..., ge=0, title='c2')]
    c1: Annotated[float, Field(0.0, title='Injected linear term')]
    c3: Annotated[float, Field(0.0, title='Injected cubic term')]

    @property
    def perturbed(self) -> bool:
        return self.c1 != 0 or self.c3 != 0

    @property
    def law(self) -> RestrictionLaw:
        return RestrictionLaw(alpha=(self.c0 - self.c2) / 4, beta=self.c0 / 2)

    @property
    def numerator(self) -> np.ndarray:
        """Coefficients of P in increasing degree."""
        return np.array([self.c0, self.c1, self.c2, self.c3])

    @classmethod
    def of_law(cls, law: RestrictionLaw) -> 'LambdaParams':
        return cls(c0=2 * law.beta, c2=2 * law.beta - 4 * law.alpha)


class RadialHull(FrozenModel):
    """
    A compact A in the closed disc, attached to the circle away from 1 and avoiding 0.

    ``path`` is the radial Loewner encoding of A grown from its attachment
    point; ``arc`` is the polyline the geometry is built from.
    """
    kind: HullKind
    path: DrivingPath
    T: Annotated[float, Field(..., ge=0, title='Radial capacity')]
    d0: Annotated[float, Field(..., title='|Phi_A\'(0)|')]
    d1: Annotated[float, Field(..., title='Phi_A\'(1)')]
    arc: Annotated[np.ndarray, Field(..., title='Boundary polyline')]
    filled: bool = False
    name: Annotated[Optional[str], Field(None, title='Report label')]
    parameters: Annotated[dict[str, Any], Field(default_factory=dict, title='Analytic tag')]

    @field_validator('arc', mode='before')
    @classmethod
    def _arc(cls, value) -> np.ndarray:
        return readonly(np.atleast_1d(value), dtype=np.complex128)

    @model_validator(mode='after')
    def _check_derivatives(self) -> 'RadialHull':
        if self.d0 < 1 - DERIVATIVE_TOL:
            raise ValueError(f'|Phi_A\'(0)| must be >= 1, got {self.d0}')
        if not 0 < self.d1 <= 1 + DERIVATIVE_TOL:
            raise ValueError(f'Phi_A\'(1) must lie in (0, 1], got {self.d1}')
        return self

    @property
    def is_empty(self) -> bool:
        return self.kind == HullKind.EMPTY

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if not self.parameters:
            return self.kind.value
        return f'{self.kind.value}:' + ','.join(f'{value:.6g}' for value in self.parameters.values())

    @property
    def geometry(self) -> Geometry:
        if self.is_empty or self.arc.size == 0:
            return Polygon()
        coords = np.column_stack([self.arc.real, self.arc.imag])
        if self.arc.size == 1:
            return Point(coords[0])
        if self.filled and self.arc.size >= 3:
            return Polygon(coords)
        return LineString(coords)

    @classmethod
    def empty(cls) -> 'RadialHull':
        return cls(
            kind=HullKind.EMPTY,
            path=DrivingPath(times=[0.0], values=[0.0]),
            T=0.0,
            d0=1.0,
            d1=1.0,
            arc=np.array([], dtype=np.complex128),
        )

    def describe(self) -> dict[str, Any]:
        return {'label': self.label, 'kind': self.kind.value, 'T': self.T, 'd0': self.d0, 'd1': self.d1, **self.parameters}


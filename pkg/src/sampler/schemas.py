from typing import Annotated, Optional

import numpy as np
from pydantic import Field, computed_field
from shapely import Geometry

from loewner.schemas import Trace
from loopsoup.schemas import LoopSample
from restriction.schemas import RestrictionLaw
from schemas import ConfiguredModel, FrozenModel


class SampleK(FrozenModel):
    """
    One restriction sample.

    ``right`` runs from 1 to 0; ``left`` (absent when both boundaries
    coincide) also runs from 1 to 0. ``region`` is the closed set between
    them, with every attached loop and its interior.
    """
    index: Annotated[int, Field(..., ge=0, title='Sample index')]
    rho: float
    right: Trace
    left: Optional[Trace] = None
    region: Geometry
    loops: tuple[LoopSample, ...] = ()


class EstimateReport(ConfiguredModel):
    law: RestrictionLaw
    hull: Annotated[str, Field(..., title='Hull label')]
    n: Annotated[int, Field(..., ge=0)]
    avoided: Annotated[int, Field(..., ge=0, title='Samples avoiding the hull')]
    target: Annotated[float, Field(..., title='Analytic avoidance probability')]
    dt: float
    seed: int
    wall_ms: float

    @computed_field
    @property
    def p_hat(self) -> float:
        return self.avoided / self.n if self.n else float('nan')

    @computed_field
    @property
    def se(self) -> float:
        p = self.p_hat
        return float(np.sqrt(p * (1 - p) / self.n)) if self.n else float('nan')

    @computed_field
    @property
    def z(self) -> float:
        difference = self.p_hat - self.target
        if self.se > 0:
            return difference / self.se
        return 0.0 if abs(difference) < 1e-12 else float(np.copysign(np.inf, difference))


class ExponentFit(ConfiguredModel):
    alpha: float
    beta: float
    covariance: Annotated[list[list[float]], Field(..., title='Covariance of (alpha, beta)')]
    hulls: int

    def distance(self, alpha: float, beta: float) -> float:
        """Mahalanobis distance of (alpha, beta) from the fitted pair, in joint standard errors."""
        delta = np.array([self.alpha - alpha, self.beta - beta])
        return float(np.sqrt(delta @ np.linalg.solve(np.array(self.covariance), delta)))


class RestrictionPropertyReport(ConfiguredModel):
    n: int
    avoided_a: Annotated[int, Field(..., title='Samples avoiding A')]
    conditional_avoid_b: Annotated[int, Field(..., title='Of those, images avoiding B')]
    avoid_b: Annotated[int, Field(..., title='Samples avoiding B')]

    @computed_field
    @property
    def p_conditional(self) -> float:
        return self.conditional_avoid_b / self.avoided_a if self.avoided_a else float('nan')

    @computed_field
    @property
    def p_unconditional(self) -> float:
        return self.avoid_b / self.n

    @computed_field
    @property
    def z(self) -> float:
        """Two-proportion z statistic with the pooled proportion."""
        n1, n2 = self.avoided_a, self.n
        if not n1:
            return float('nan')
        pooled = (self.conditional_avoid_b + self.avoid_b) / (n1 + n2)
        se = np.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
        return float((self.p_conditional - self.p_unconditional) / se) if se > 0 else 0.0


class MartingaleState(FrozenModel):
    t: float
    theta: Annotated[float, Field(..., title='(W - V) / 2')]
    image_theta: Annotated[float, Field(..., title='Half angle between h(e^{iW}) and h(e^{iV})')]
    capacity: Annotated[float, Field(..., title='log |h\'(0)|')]
    derivative_w: Annotated[float, Field(..., title='|h\'(e^{iW})|')]
    derivative_v: Annotated[float, Field(..., title='|h\'(e^{iV})|')]
    value: Annotated[float, Field(..., title='M_t')]

    @property
    def Z(self) -> float:
        return float(np.sin(self.image_theta) / np.sin(self.theta))


class Checkpoint(ConfiguredModel):
    t: float
    mean: float
    se: float
    z: float
    paths: int


class MartingaleReport(ConfiguredModel):
    rho: float
    law: RestrictionLaw
    hull: str
    m0: Annotated[float, Field(..., title='Analytic M_0')]
    m0_numeric: Annotated[float, Field(..., title='M_0 through the zipper')]
    checkpoints: list[Checkpoint]
    hitting_paths: int
    mean_at_hit: Annotated[Optional[float], Field(None, title='Mean of M just before tau_A')]
    seed: int
    wall_ms: float

    @computed_field
    @property
    def max_abs_z(self) -> float:
        return max((abs(c.z) for c in self.checkpoints), default=0.0)


class ChordalLimitRow(ConfiguredModel):
    eps: float
    analytic: float
    gap: Annotated[float, Field(..., title='|analytic - limit|')]
    estimate: Optional[EstimateReport] = None


class ChordalLimitReport(ConfiguredModel):
    law: RestrictionLaw
    limit: Annotated[float, Field(..., title="Psi_A'(1)^beta")]
    rows: list[ChordalLimitRow]

    @computed_field
    @property
    def monotone(self) -> bool:
        gaps = [row.gap for row in self.rows]
        return all(b < a for a, b in zip(gaps, gaps[1:]))

import ast
import math
import operator
from pathlib import Path
from typing import Annotated, Optional

import numpy as np
from pydantic import Field, field_validator, model_validator

from cli.constants import FORMATS, CurveKind, HullDescriptorKind
from constants import SLE_KAPPA
from exceptions import InadmissibleLawError
from restriction.exponents import xi
from restriction.hulls import halfdisc_hull, perfect_hull, polyline_hull
from restriction.schemas import LambdaParams, RadialHull, RestrictionLaw
from sampler.constants import EPS_LADDER
from schemas import ConfiguredModel
from settings import settings
from sle.constants import ForcePointKind
from sle.schemas import ForcePoint

_OPERATORS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}
_NAMES = {'pi': math.pi, 'e': math.e}


def parse_number(text: str) -> float:
    """Evaluates numbers and arithmetic on them, with ``pi`` and ``e``, e.g. ``pi/2`` or ``3*pi/4``."""

    def visit(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return visit(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](visit(node.left), visit(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](visit(node.operand))
        raise ValueError(f'unsupported expression {text!r}')

    try:
        tree = ast.parse(text.strip(), mode='eval')
    except SyntaxError:
        raise ValueError(f'cannot parse number {text!r}')
    return visit(tree)


def read_polyline(path: Path) -> np.ndarray:
    """Points of a CSV polyline: ``re,im`` rows, or ``t,re,im`` rows as written by the trace export."""
    rows = np.genfromtxt(path, delimiter=',', dtype=float)
    rows = np.atleast_2d(rows)
    rows = rows[~np.isnan(rows).any(axis=1)]
    if rows.shape[1] not in (2, 3):
        raise ValueError(f'{path}: expected 2 or 3 columns, got {rows.shape[1]}')
    return rows[:, -2] + 1j * rows[:, -1]


class HullDescriptor(ConfiguredModel):
    """``perfect:<theta>,<t>``, ``halfdisc:<x>,<eps>`` or ``polyline:<file>``."""
    kind: HullDescriptorKind
    values: tuple[float, ...] = ()
    path: Optional[Path] = None

    @classmethod
    def parse(cls, text: str) -> 'HullDescriptor':
        kind, sep, rest = text.partition(':')
        if not sep or not rest:
            raise ValueError(f'hull descriptor {text!r} must look like kind:parameters')
        kind = HullDescriptorKind(kind.strip())
        if kind == HullDescriptorKind.POLYLINE:
            return cls(kind=kind, path=Path(rest.strip()))
        return cls(kind=kind, values=tuple(parse_number(part) for part in rest.split(',')))

    @model_validator(mode='after')
    def _check_arity(self) -> 'HullDescriptor':
        if self.kind == HullDescriptorKind.POLYLINE:
            if self.path is None or not self.path.is_file():
                raise ValueError(f'polyline file {self.path} does not exist')
        elif len(self.values) != 2:
            raise ValueError(f'{self.kind.value} takes two parameters, got {len(self.values)}')
        return self

    def build(self, dt: Optional[float] = None) -> RadialHull:
        if self.kind == HullDescriptorKind.PERFECT:
            return perfect_hull(*self.values, dt=dt)
        if self.kind == HullDescriptorKind.HALF_DISC:
            return halfdisc_hull(*self.values)
        return polyline_hull(read_polyline(self.path))


def _descriptor(value):
    return HullDescriptor.parse(value) if isinstance(value, str) else value


class OutputOptions(ConfiguredModel):
    output: Annotated[Optional[Path], Field(None, title='Output file', description='stdout when absent')]
    format: FORMATS = 'json'


class LawOptions(ConfiguredModel):
    """A law given by ``beta`` (alpha defaulting to xi(beta)) or by the force-point weight ``rho``."""
    alpha: Optional[float] = None
    beta: Optional[float] = None
    rho: Optional[float] = None
    allow_inadmissible: bool = False

    @model_validator(mode='after')
    def _check_law(self) -> 'LawOptions':
        if self.rho is not None and (self.beta is not None or self.alpha is not None):
            raise ValueError('give either rho or (alpha, beta)')
        if self.rho is not None and self.rho <= -2:
            raise ValueError(f'rho must exceed -2, got {self.rho}')
        if self.alpha is not None and self.beta is None:
            raise ValueError('alpha needs beta')
        if self.rho is None and self.beta is None:
            self.beta = 5 / 8
        if self.rho is None and self.alpha is None and self.beta < -1 / 24:
            raise ValueError(f'xi(beta) needs beta >= -1/24, got {self.beta}')
        if not self.allow_inadmissible and not self.law.admissible:
            raise InadmissibleLawError(
                f'law alpha={self.law.alpha:.6g}, beta={self.law.beta:.6g} is not admissible; '
                f'pass --allow-inadmissible to evaluate it anyway'
            )
        return self

    @property
    def law(self) -> RestrictionLaw:
        if self.rho is not None:
            return RestrictionLaw.of_rho(self.rho)
        alpha = xi(self.beta) if self.alpha is None else self.alpha
        return RestrictionLaw(alpha=alpha, beta=self.beta)


class MonteCarloOptions(OutputOptions):
    n: Annotated[int, Field(default_factory=lambda: settings.sampler.N_SAMPLES, gt=0, title='Samples')]
    dt: Annotated[Optional[float], Field(None, gt=0, title='Loewner step')]
    seed: Annotated[int, Field(default_factory=lambda: settings.sampler.SEED, ge=0)]
    workers: Annotated[int, Field(default_factory=lambda: settings.sampler.WORKERS, ge=1)]


class ExponentsConfig(OutputOptions):
    beta: Optional[float] = None
    rho: Optional[float] = None

    @model_validator(mode='after')
    def _check_input(self) -> 'ExponentsConfig':
        if (self.beta is None) == (self.rho is None):
            raise ValueError('give exactly one of beta and rho')
        return self


class TraceConfig(OutputOptions, LawOptions):
    curve: CurveKind
    theta: Optional[float] = None
    t: Annotated[float, Field(1.0, gt=0, title='Horizon')]
    kappa: Annotated[float, Field(SLE_KAPPA, ge=0)]
    sle_rho: Annotated[float, Field(0.0, gt=-2, title='Force point weight of a radial or chordal curve')]
    force: Annotated[Optional[str], Field(None, description='limit-left, limit-right or a number')]
    dt: Annotated[Optional[float], Field(None, gt=0)]
    stride: Annotated[int, Field(1, ge=1)]
    seed: Annotated[int, Field(default_factory=lambda: settings.sampler.SEED, ge=0)]
    index: Annotated[int, Field(0, ge=0)]

    @field_validator('theta', mode='before')
    @classmethod
    def _parse_theta(cls, value):
        return parse_number(value) if isinstance(value, str) else value

    @model_validator(mode='after')
    def _check_curve(self) -> 'TraceConfig':
        if self.curve == CurveKind.PERFECT and self.theta is None:
            raise ValueError('a perfect curve needs --theta')
        return self

    def force_point(self) -> ForcePoint:
        if self.force is None or self.force == ForcePointKind.NONE.value:
            return ForcePoint()
        if self.force in (ForcePointKind.LIMIT_LEFT.value, ForcePointKind.LIMIT_RIGHT.value):
            return ForcePoint(kind=ForcePointKind(self.force))
        kind = ForcePointKind.ANGLE if self.curve == CurveKind.RADIAL else ForcePointKind.POINT
        return ForcePoint(kind=kind, value=parse_number(self.force))


class EstimateConfig(MonteCarloOptions, LawOptions):
    hulls: Annotated[list[HullDescriptor], Field(..., min_length=1)]
    t_min: Annotated[Optional[float], Field(None, gt=0, title='Loop duration cutoff')]
    fit: bool = False

    @field_validator('hulls', mode='before')
    @classmethod
    def _parse_hulls(cls, value):
        return [_descriptor(item) for item in value]


class MartingaleConfig(MonteCarloOptions):
    rho: Annotated[float, Field(..., gt=0)]
    hull: HullDescriptor
    T: Annotated[float, Field(0.5, gt=0, title='Last checkpoint')]
    checkpoints: Annotated[int, Field(5, ge=1)]

    @field_validator('hull', mode='before')
    @classmethod
    def _parse_hull(cls, value):
        return _descriptor(value)


class SoupCommandConfig(OutputOptions):
    intensity: Annotated[float, Field(..., ge=0)]
    t_min: Annotated[float, Field(default_factory=lambda: settings.soup.T_MIN, gt=0)]
    t_max: Annotated[float, Field(default_factory=lambda: settings.soup.T_MAX, gt=0)]
    bridge_points: Annotated[int, Field(default_factory=lambda: settings.soup.BRIDGE_POINTS, ge=64)]
    seed: Annotated[int, Field(default_factory=lambda: settings.sampler.SEED, ge=0)]
    index: Annotated[int, Field(0, ge=0)]
    hull: Optional[HullDescriptor] = None

    @field_validator('hull', mode='before')
    @classmethod
    def _parse_hull(cls, value):
        return _descriptor(value)


class KernelsConfig(OutputOptions, LawOptions):
    check: bool = False
    c1: Annotated[float, Field(0.0, title='Injected linear term')]
    c3: Annotated[float, Field(0.0, title='Injected cubic term')]

    @property
    def params(self) -> LambdaParams:
        return LambdaParams.of_law(self.law).model_copy(update={'c1': self.c1, 'c3': self.c3})


class ChordalLimitConfig(MonteCarloOptions, LawOptions):
    n: Annotated[int, Field(0, ge=0, title='Samples per eps; 0 skips Monte Carlo')]
    hull: HullDescriptor
    eps: Annotated[list[float], Field(default_factory=lambda: list(EPS_LADDER), min_length=1)]

    @field_validator('hull', mode='before')
    @classmethod
    def _parse_hull(cls, value):
        return _descriptor(value)

    @field_validator('eps')
    @classmethod
    def _check_eps(cls, value: list[float]) -> list[float]:
        if not all(0 < eps < 1 for eps in value):
            raise ValueError('every eps must lie in (0, 1)')
        return sorted(value, reverse=True)


class RestrictionPropertyConfig(MonteCarloOptions, LawOptions):
    a: HullDescriptor
    b: HullDescriptor
    t_min: Annotated[Optional[float], Field(None, gt=0)]

    @field_validator('a', 'b', mode='before')
    @classmethod
    def _parse_hulls(cls, value):
        return _descriptor(value)

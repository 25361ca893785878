from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import Field, field_validator, model_validator

from conformal import maps
from conformal.constants import MapKind
from constants import Domain
from exceptions import PoleError
from schemas import FrozenModel, readonly
from utils import as_complex_array


class MobiusTransform(FrozenModel):
    """z -> (a z + b) / (c z + d)."""
    a: Annotated[complex, Field(..., title='Coefficient a')]
    b: Annotated[complex, Field(..., title='Coefficient b')]
    c: Annotated[complex, Field(..., title='Coefficient c')]
    d: Annotated[complex, Field(..., title='Coefficient d')]

    @model_validator(mode='after')
    def _check_determinant(self) -> 'MobiusTransform':
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if abs(self.determinant) <= 1e-300 + 1e-14 * scale ** 2:
            raise ValueError('Mobius transform is degenerate: ad - bc = 0')
        return self

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    @classmethod
    def identity(cls) -> 'MobiusTransform':
        return cls(a=1, b=0, c=0, d=1)

    @classmethod
    def rotation(cls, phase: complex) -> 'MobiusTransform':
        """Multiplication by ``phase`` / ``|phase|``."""
        return cls(a=phase / abs(phase), b=0, c=0, d=1)

    @classmethod
    def cayley(cls) -> 'MobiusTransform':
        """Disc onto half-plane, 1 -> 0 and 0 -> i."""
        return cls(a=-1j, b=1j, c=1, d=1)

    @classmethod
    def disc_automorphism(cls, center: complex) -> 'MobiusTransform':
        """Disc automorphism sending 0 to ``center`` and fixing 1 when ``center`` is real."""
        return cls(a=1, b=center, c=np.conj(center), d=1)

    def apply(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z = as_complex_array(z)
        denominator = self.c * z + self.d
        if np.any(np.abs(denominator) <= 1e-15 * (np.abs(self.c * z) + abs(self.d))):
            raise PoleError('Mobius transform evaluated at its pole')
        return (self.a * z + self.b) / denominator, self.determinant / denominator ** 2

    def inverse(self) -> 'MobiusTransform':
        return MobiusTransform(a=self.d, b=-self.b, c=-self.c, d=self.a)

    def after(self, other: 'MobiusTransform') -> 'MobiusTransform':
        """The composition ``self o other``."""
        return MobiusTransform(
            a=self.a * other.a + self.b * other.c,
            b=self.a * other.b + self.b * other.d,
            c=self.c * other.a + self.d * other.c,
            d=self.c * other.b + self.d * other.d,
        )


class SlitRun(FrozenModel):
    """A run of consecutive slit maps of one kind; entry k is driven by ``drive[k]`` for time ``step[k]``."""
    kind: Literal[MapKind.CHORDAL_SLIT, MapKind.RADIAL_SLIT]
    drive: Annotated[np.ndarray, Field(..., title='Driving values')]
    step: Annotated[np.ndarray, Field(..., title='Loewner time increments')]

    @field_validator('drive', 'step', mode='before')
    @classmethod
    def _as_array(cls, value) -> np.ndarray:
        return readonly(np.atleast_1d(value), dtype=float)

    @model_validator(mode='after')
    def _check_steps(self) -> 'SlitRun':
        if self.drive.shape != self.step.shape:
            raise ValueError('drive and step must have the same length')
        if np.any(self.step <= 0):
            raise ValueError('every capacity increment must be positive')
        return self

    @property
    def capacity(self) -> float:
        return float(np.sum(self.step))

    def _pieces(self):
        if self.kind == MapKind.CHORDAL_SLIT:
            return maps.chordal_slit, maps.chordal_slit_inverse
        return maps.radial_slit, maps.radial_slit_inverse

    def apply(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        forward, _ = self._pieces()
        log_deriv = np.zeros_like(z)
        for u, delta in zip(self.drive, self.step):
            z, d = forward(z, u, delta)
            log_deriv += np.log(d)
        return z, log_deriv

    def apply_inverse(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        _, backward = self._pieces()
        log_deriv = np.zeros_like(w)
        for u, delta in zip(self.drive[::-1], self.step[::-1]):
            w, d = backward(w, u, delta)
            log_deriv += np.log(d)
        return w, log_deriv


class HalfDiscRun(FrozenModel):
    """``repeat`` applications of the half-disc map g_{x,eps}, each followed by ``normalization``."""
    kind: Literal[MapKind.HALF_DISC] = MapKind.HALF_DISC
    x: Annotated[float, Field(..., title='Centre on the real line')]
    eps: Annotated[float, Field(..., gt=0, title='Radius')]
    repeat: Annotated[int, Field(1, ge=1, title='Number of applications')]
    normalization: Optional[MobiusTransform] = None

    @model_validator(mode='after')
    def _check_radius(self) -> 'HalfDiscRun':
        if self.eps >= abs(self.x):
            raise ValueError('half-disc radius must be smaller than |x|')
        return self

    @property
    def capacity(self) -> float:
        return self.repeat * self.eps ** 2 / 2

    def apply(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        log_deriv = np.zeros_like(z)
        for _ in range(self.repeat):
            z, d = maps.halfdisc(z, self.x, self.eps)
            log_deriv += np.log(d)
            if self.normalization is not None:
                z, d = self.normalization.apply(z)
                log_deriv += np.log(d)
        return z, log_deriv

    def apply_inverse(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        log_deriv = np.zeros_like(w)
        undo = self.normalization.inverse() if self.normalization is not None else None
        for _ in range(self.repeat):
            if undo is not None:
                w, d = undo.apply(w)
                log_deriv += np.log(d)
            w, d = maps.halfdisc_inverse(w, self.x, self.eps)
            log_deriv += np.log(d)
        return w, log_deriv


class MobiusStep(FrozenModel):
    kind: Literal[MapKind.MOBIUS] = MapKind.MOBIUS
    transform: MobiusTransform

    @property
    def capacity(self) -> float:
        return 0.0

    def apply(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z, d = self.transform.apply(z)
        return z, np.log(d)

    def apply_inverse(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        w, d = self.transform.inverse().apply(w)
        return w, np.log(d)


ElementaryMap = Annotated[
    Union[SlitRun, HalfDiscRun, MobiusStep],
    Field(discriminator='kind'),
]


class SlitMapChain(FrozenModel):
    """
    A conformal map stored as ``normalization o maps[-1] o ... o maps[0]``.

    Derivatives are accumulated as complex logarithms so long chains neither
    overflow nor underflow.
    """
    maps: Annotated[
        tuple[ElementaryMap, ...],
        Field(
            default=(),
            title='Elementary maps',
            description='Applied first to last',
        )
    ]
    normalization: Optional[MobiusTransform] = None
    domain: Domain = Domain.HALF_PLANE

    @property
    def capacity(self) -> float:
        """Total Loewner time carried by the elementary maps."""
        return float(sum(m.capacity for m in self.maps))

    @property
    def is_identity(self) -> bool:
        return not self.maps and self.normalization is None

    def evaluate_log(self, z) -> tuple[np.ndarray, np.ndarray]:
        z = as_complex_array(z)
        log_deriv = np.zeros_like(z)
        for elementary in self.maps:
            z, step = elementary.apply(z)
            log_deriv += step
        if self.normalization is not None:
            z, d = self.normalization.apply(z)
            log_deriv += np.log(d)
        return z, log_deriv

    def evaluate(self, z) -> tuple[np.ndarray, np.ndarray]:
        value, log_deriv = self.evaluate_log(z)
        return value, np.exp(log_deriv)

    def invert(self, w) -> tuple[np.ndarray, np.ndarray]:
        """Preimage and derivative of the inverse map."""
        w = as_complex_array(w)
        log_deriv = np.zeros_like(w)
        if self.normalization is not None:
            w, d = self.normalization.inverse().apply(w)
            log_deriv += np.log(d)
        for elementary in reversed(self.maps):
            w, step = elementary.apply_inverse(w)
            log_deriv += step
        return w, np.exp(log_deriv)

    def normalized(self, transform: MobiusTransform) -> 'SlitMapChain':
        current = self.normalization or MobiusTransform.identity()
        return self.model_copy(update={'normalization': transform.after(current)})

    def then(self, other: 'SlitMapChain') -> 'SlitMapChain':
        """The composition ``other o self``."""
        steps = list(self.maps)
        if self.normalization is not None:
            steps.append(MobiusStep(transform=self.normalization))
        return SlitMapChain(
            maps=tuple(steps) + other.maps,
            normalization=other.normalization,
            domain=self.domain,
        )

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Sequence, TextIO, Union

import numpy as np
import orjson
from scipy.spatial.distance import directed_hausdorff


def rng_stream(seed: int, index: int, *keys: int) -> np.random.Generator:
    """
    Counter-based random stream for one sample.

    Streams are keyed by ``(seed, index, *keys)`` so a sample draws the same
    numbers whatever worker or order produced it.

    :param seed: Run seed.
    :param index: Sample (path) index inside the run.
    :param keys: Extra sub-stream keys, e.g. to separate the soup from the curves.
    :return: A Philox-backed generator.
    """
    sequence = np.random.SeedSequence([int(seed), int(index), *map(int, keys)])
    return np.random.Generator(np.random.Philox(sequence))


def as_complex_array(z: Any) -> np.ndarray:
    return np.atleast_1d(np.asarray(z, dtype=np.complex128))


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two complex point clouds."""
    pa = np.column_stack([np.real(a), np.imag(a)])
    pb = np.column_stack([np.real(b), np.imag(b)])
    return max(directed_hausdorff(pa, pb)[0], directed_hausdorff(pb, pa)[0])


def richardson(values: Sequence[float], ratio: float = 2.0, order: int = 1) -> float:
    """
    Richardson extrapolation of a sequence computed at step sizes h, h/ratio, h/ratio², ...

    Args:
        values: Sequence values ordered from coarsest to finest step.
        ratio: Step refinement ratio between consecutive values.
        order: Leading error order of the sequence.
    Returns:
        float: The extrapolated limit.
    """
    table = [float(v) for v in values]
    k = order
    while len(table) > 1:
        factor = ratio ** k
        table = [(factor * fine - coarse) / (factor - 1) for coarse, fine in zip(table, table[1:])]
        k += 1
    return table[0]


def clean_errors(errors: list[dict]) -> list[dict]:
    for err in errors:
        if 'ctx' in err and 'error' in err['ctx']:
            err.pop('ctx')
        if 'url' in err:
            err.pop('url', None)
        if 'input' in err and isinstance(err['input'], (np.ndarray, bytes)):
            err.pop('input')
    return errors


def dump_json(data: Any) -> bytes:
    return orjson.dumps(
        data,
        default=str,
        option=orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_SORT_KEYS | orjson.OPT_APPEND_NEWLINE,
    )


def complex_pairs(points: np.ndarray) -> list[list[float]]:
    return [[float(p.real), float(p.imag)] for p in np.asarray(points, dtype=np.complex128)]


def write_trace_csv(path: Union[Path, TextIO], times: np.ndarray, points: np.ndarray) -> None:
    rows = np.column_stack([np.asarray(times, dtype=float), np.real(points), np.imag(points)])
    np.savetxt(path, rows, fmt='%.12g', delimiter=',', header='t,re,im', comments='')


@dataclass
class Stopwatch:
    started: float = field(default_factory=time.perf_counter)

    @property
    def elapsed_ms(self) -> float:
        return (time.perf_counter() - self.started) * 1e3


@contextmanager
def stopwatch() -> Iterator[Stopwatch]:
    yield Stopwatch()

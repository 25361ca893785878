import logging
from typing import Callable, Optional

import numpy as np

from conformal import maps
from conformal.constants import MapKind
from conformal.schemas import SlitMapChain, SlitRun
from constants import Domain
from exceptions import HorizonExceededError
from loewner.constants import NEAR_DRIVER_FACTOR, STIFFNESS_FACTOR
from loewner.schemas import DrivingPath, FlowResult, Trace
from settings import settings
from utils import as_complex_array

logger = logging.getLogger(__name__)

Driver = Callable[[float], float]


def _interval_driver(path: DrivingPath, k: int) -> Driver:
    if path.interpolation == 'step':
        held = float(path.values[k + 1])
        return lambda t: held
    t0, t1 = float(path.times[k]), float(path.times[k + 1])
    w0, w1 = float(path.values[k]), float(path.values[k + 1])
    slope = (w1 - w0) / (t1 - t0)
    return lambda t: w0 + slope * (t - t0)


def _rhs(g: np.ndarray, w: float, radial: bool) -> tuple[np.ndarray, np.ndarray]:
    if radial:
        e = np.exp(1j * w)
        gap = e - g
        return g * (e + g) / gap, (e * e + 2 * e * g - g * g) / gap ** 2
    gap = g - w
    return 2 / gap, -2 / gap ** 2


def _rk4(g: np.ndarray, log_d: np.ndarray, t: float, h: float, driver: Driver, radial: bool):
    w_start, w_mid, w_end = driver(t), driver(t + h / 2), driver(t + h)
    k1g, k1l = _rhs(g, w_start, radial)
    k2g, k2l = _rhs(g + h / 2 * k1g, w_mid, radial)
    k3g, k3l = _rhs(g + h / 2 * k2g, w_mid, radial)
    k4g, k4l = _rhs(g + h * k3g, w_end, radial)
    return (
        g + h / 6 * (k1g + 2 * k2g + 2 * k3g + k4g),
        log_d + h / 6 * (k1l + 2 * k2l + 2 * k3l + k4l),
    )


def _target(w: float, radial: bool) -> complex:
    return np.exp(1j * w) if radial else complex(w)


def _crossed(
        g_new: np.ndarray,
        g_old: np.ndarray,
        w_new: float,
        w_old: float,
        boundary: np.ndarray,
        radial: bool,
) -> np.ndarray:
    if radial:
        a_new = np.angle(g_new * np.exp(-1j * w_new))
        a_old = np.angle(g_old * np.exp(-1j * w_old))
        flipped = (np.sign(a_new) != np.sign(a_old)) & (np.abs(a_old) < np.pi / 2)
        return np.where(boundary, flipped, np.abs(g_new) >= 1)
    flipped = np.sign(g_new.real - w_new) != np.sign(g_old.real - w_old)
    return np.where(boundary, flipped, g_new.imag <= 0)


def _flow(path: DrivingPath, z, T: float, radial: bool) -> FlowResult:
    if T > path.horizon * (1 + 1e-12) + 1e-15:
        raise HorizonExceededError(f'time {T} beyond horizon {path.horizon}')
    z = as_complex_array(z)
    g = z.copy()
    log_d = np.zeros_like(z)
    tau = np.full(z.shape, np.nan)
    if radial:
        boundary = np.abs(z) >= 1 - settings.loewner.UNIT_CIRCLE_TOL
        g = np.where(boundary, z / np.abs(np.where(z == 0, 1, z)), z)
    else:
        boundary = np.abs(z.imag) <= 1e-15
        g = np.where(boundary, z.real + 0j, z)
    swallow_tol = settings.loewner.SWALLOW_TOL * (1 + np.abs(z))
    swallowed = np.abs(g - _target(path.values[0], radial)) < swallow_tol
    tau[swallowed] = 0.0

    max_level = settings.loewner.MAX_HALVINGS
    times = path.times
    k = 0
    while k < times.size - 1 and times[k] < T:
        active = np.flatnonzero(~swallowed)
        if active.size == 0:
            break
        t0 = float(times[k])
        h = float(min(times[k + 1], T)) - t0
        driver = _interval_driver(path, k)
        gap2 = np.abs(g[active] - _target(driver(t0), radial)) ** 2
        level = np.zeros(active.size, dtype=int)
        stiff = gap2 < STIFFNESS_FACTOR * h
        level[stiff] = np.clip(
            np.ceil(np.log2(STIFFNESS_FACTOR * h / np.maximum(gap2[stiff], 1e-300))), 0, max_level
        ).astype(int)
        level[gap2 < (NEAR_DRIVER_FACTOR * swallow_tol[active]) ** 2] = max_level
        for lev in np.unique(level):
            sel = active[level == lev]
            n_sub = 2 ** int(lev)
            sub = h / n_sub
            gs, ls, alive = g[sel], log_d[sel], np.ones(sel.size, dtype=bool)
            bs, tol = boundary[sel], swallow_tol[sel]
            for j in range(n_sub):
                s0 = t0 + j * sub
                w_old, w_new = driver(s0), driver(s0 + sub)
                with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
                    g_new, l_new = _rk4(gs, ls, s0, sub, driver, radial)
                if radial:
                    g_new = np.where(bs, g_new / np.abs(g_new), g_new)
                else:
                    g_new = np.where(bs, g_new.real + 0j, g_new)
                hit = alive & (
                    ~np.isfinite(g_new)
                    | (np.abs(g_new - _target(w_new, radial)) < tol)
                    | _crossed(g_new, gs, w_new, w_old, bs, radial)
                )
                keep = alive & ~hit
                gs = np.where(keep, g_new, gs)
                ls = np.where(keep, l_new, ls)
                if np.any(hit):
                    tau[sel[hit]] = s0 + sub
                    alive &= ~hit
                if not alive.any():
                    break
            g[sel], log_d[sel] = gs, ls
            swallowed[sel] = ~alive
        if level.max(initial=0) > 0:
            logger.debug('interval %d: adaptive halving up to level %d', k, level.max())
        k += 1

    if radial:
        origin = z == 0
        log_d[origin] = T
    return FlowResult(value=g, swallowed=swallowed, tau=tau, log_derivative=log_d)


def chordal_flow(W: DrivingPath, z, T: float) -> FlowResult:
    """Integrates dg/dt = 2/(g - W_t) with the variational equation d log g'/dt = -2/(g - W_t)^2."""
    return _flow(W, z, T, radial=False)


def radial_flow(W: DrivingPath, z, T: float) -> FlowResult:
    """Integrates dg/dt = g (e^{iW} + g)/(e^{iW} - g); boundary points are kept on the unit circle."""
    return _flow(W, z, T, radial=True)


def _run_for(path: DrivingPath, domain: Domain) -> SlitRun:
    kind = MapKind.RADIAL_SLIT if domain == Domain.DISC else MapKind.CHORDAL_SLIT
    return SlitRun(kind=kind, drive=path.piece_drivers(), step=path.steps)


def hull_maps(W: DrivingPath, T: float, domain: Domain = Domain.DISC) -> SlitMapChain:
    """g_T as a chain of exact constant-driver slit maps, one per grid interval."""
    path = W.truncated(T)
    if path.times.size < 2:
        return SlitMapChain(domain=domain)
    return SlitMapChain(maps=(_run_for(path, domain),), domain=domain)


def default_tip_offset(steps: np.ndarray) -> np.ndarray:
    """Local step to the power 0.75, capped at sqrt(step/10) once steps exceed 1e-2."""
    steps = np.maximum(steps, 1e-12)
    return np.minimum(steps ** settings.loewner.TIP_OFFSET_EXPONENT, np.sqrt(steps / 10))


def extract_trace(
        W: DrivingPath,
        domain: Domain = Domain.DISC,
        tip_offset: Optional[float] = None,
        stride: int = 1,
) -> Trace:
    """
    Curve generated by ``W`` at every ``stride``-th grid time.

    The point at grid time t_k is the preimage of the k-th piece's tip,
    displaced by ``tip_offset`` into the domain, under the first k slit maps.
    """
    radial = domain == Domain.DISC
    drive, step = W.piece_drivers(), W.steps
    n = step.size
    index = np.unique(np.append(np.arange(stride, n + 1, max(stride, 1)), n)) if n else np.array([], dtype=int)

    tips = drive[index - 1]
    if tip_offset is None:
        offset = default_tip_offset(step[index - 1])
    elif tip_offset <= 0:
        raise ValueError('tip_offset must be positive')
    else:
        offset = np.full(index.size, float(tip_offset))
    if radial:
        points = np.exp(1j * tips) * (1 - offset)
        inverse = maps.radial_slit_inverse
    else:
        points = tips + 1j * offset
        inverse = maps.chordal_slit_inverse
    points = points.astype(np.complex128)
    for j in range(n - 1, -1, -1):
        start = int(np.searchsorted(index, j, side='right'))
        if start == index.size:
            continue
        points[start:] = inverse(points[start:], drive[j], step[j])[0]

    first = np.exp(1j * W.values[0]) if radial else complex(W.values[0])
    return Trace(
        times=np.concatenate([[0.0], W.times[index]]),
        points=np.concatenate([[first], points]),
        domain=domain,
    )

import csv
import io
import itertools
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from cli.constants import (
    IDENTITY_THETAS,
    IDENTITY_TOLERANCE,
    KERNEL_GRID,
    KERNEL_TOLERANCE,
    NEGATIVE_CONTROL_FLOOR,
    CurveKind,
    Subcommand,
)
from cli.schemas import (
    ChordalLimitConfig,
    EstimateConfig,
    ExponentsConfig,
    KernelsConfig,
    MartingaleConfig,
    OutputOptions,
    RestrictionPropertyConfig,
    SoupCommandConfig,
    TraceConfig,
)
from constants import Domain
from exceptions import NumericalFailureError
from loewner.schemas import Trace
from loewner.services import extract_trace
from loopsoup.schemas import SoupConfig
from loopsoup.services import count_escaping, escape_mass, export_soup, sample_soup
from restriction.exponents import beta_of_rho, exponents_of_rho, rho_of_beta, xi
from restriction.services import (
    commutation_residual,
    lambda_,
    lambda_ode_residual,
    nu,
    symmetry_residual,
    x_of_theta,
)
from sampler.estimation import (
    chordal_limit_experiment,
    fit_exponents,
    mc_estimate_avoidance,
    restriction_property_test,
)
from sampler.martingale import verify_martingale
from sampler.services import export_region, sample_restriction, step_sizes
from sle.schemas import SleParams
from sle.services import chordal_sle_driver, perfect_driver, radial_sle_driver
from utils import complex_pairs, dump_json, write_trace_csv

logger = logging.getLogger(__name__)


@dataclass
class CommandOutput:
    payload: Any
    rows: list[dict] = field(default_factory=list)
    trace: Optional[Trace] = None


def _trace_payload(trace: Trace) -> dict:
    return {'domain': trace.domain.value, 'times': trace.times, 'points': complex_pairs(trace.points)}


def exponents(config: ExponentsConfig) -> CommandOutput:
    if config.rho is not None:
        triple = exponents_of_rho(config.rho)
        payload = {
            'rho': config.rho,
            'alpha': triple.alpha,
            'gamma': triple.gamma,
            'beta': triple.beta,
            'xi': xi(triple.beta),
            'beta_of_rho': beta_of_rho(config.rho),
        }
    else:
        payload = {'beta': config.beta, 'xi': xi(config.beta)}
        if config.beta >= 0:
            rho = rho_of_beta(config.beta)
            payload.update(rho=rho, gamma=exponents_of_rho(rho).gamma if rho > -2 else None)
    return CommandOutput(payload=payload, rows=[payload])


def trace(config: TraceConfig) -> CommandOutput:
    dt, sde_dt, stride = step_sizes(config.dt)
    if config.curve == CurveKind.RESTRICTION:
        K = sample_restriction(config.law, dt, config.seed, config.index)
        return CommandOutput(payload=export_region(K), trace=K.right)
    if config.curve == CurveKind.PERFECT:
        path = perfect_driver(config.theta, config.t, dt)
        result = extract_trace(path, Domain.DISC, stride=config.stride)
        return CommandOutput(payload=_trace_payload(result), trace=result)

    params = SleParams(
        kappa=config.kappa,
        rho=config.sle_rho,
        force_point=config.force_point(),
        T=round(config.t / sde_dt) * sde_dt,
        dt=sde_dt,
        seed=config.seed,
        index=config.index,
    )
    radial = config.curve == CurveKind.RADIAL
    pair = radial_sle_driver(params) if radial else chordal_sle_driver(params)
    domain = Domain.DISC if radial else Domain.HALF_PLANE
    result = extract_trace(pair.W.downsampled(stride), domain, stride=config.stride)
    payload = _trace_payload(result)
    payload['reflections'] = pair.reflections
    return CommandOutput(payload=payload, trace=result)


def _report_row(report) -> dict:
    row = report.model_dump(mode='json', exclude={'law'})
    row.update(alpha=report.law.alpha, beta=report.law.beta)
    return row


def estimate(config: EstimateConfig) -> CommandOutput:
    hulls = [descriptor.build(config.dt) for descriptor in config.hulls]
    reports = mc_estimate_avoidance(
        config.law,
        hulls,
        n=config.n,
        dt=config.dt,
        seed=config.seed,
        workers=config.workers,
        allow_inadmissible=config.allow_inadmissible,
        t_min=config.t_min,
    )
    payload = {
        'reports': [report.model_dump(mode='json') for report in reports],
        'hulls': [hull.describe() for hull in hulls],
    }
    if config.fit:
        payload['fit'] = fit_exponents(reports, hulls).model_dump(mode='json')
    return CommandOutput(payload=payload, rows=[_report_row(report) for report in reports])


def martingale(config: MartingaleConfig) -> CommandOutput:
    report = verify_martingale(
        config.rho,
        config.hull.build(config.dt),
        T=config.T,
        checkpoints=config.checkpoints,
        n=config.n,
        dt=config.dt,
        seed=config.seed,
        workers=config.workers,
    )
    return CommandOutput(
        payload=report.model_dump(mode='json'),
        rows=[checkpoint.model_dump(mode='json') for checkpoint in report.checkpoints],
    )


def soup(config: SoupCommandConfig) -> CommandOutput:
    soup_config = SoupConfig(
        intensity=config.intensity,
        t_min=config.t_min,
        t_max=config.t_max,
        bridge_points=config.bridge_points,
        seed=config.seed,
        index=config.index,
    )
    loops = sample_soup(soup_config)
    payload = {'count': len(loops), 'loops': export_soup(loops)}
    if config.hull is not None:
        hull = config.hull.build()
        mass = escape_mass(config.intensity, hull.d0)
        payload['escape'] = {
            'hull': hull.label,
            'escaping': count_escaping(loops, hull.geometry),
            'expected': mass.mass,
            'probability_none': mass.probability,
        }
    rows = [
        {'root_re': loop.root.real, 'root_im': loop.root.imag, 'duration': loop.duration, 'winding': loop.winding}
        for loop in loops
    ]
    return CommandOutput(payload=payload, rows=rows)


def _identity_residual(theta: float, params, law) -> float:
    """Relative gap between lambda(x) and nu(theta)(1 + cos theta)^2 at x = tan(theta / 2)."""
    expected = nu(theta, law) * (1 + math.cos(theta)) ** 2
    return abs(lambda_(x_of_theta(theta), params) - expected) / max(1.0, abs(expected))


def kernels(config: KernelsConfig) -> CommandOutput:
    """
    Residuals of the commutation relation, the lambda ODE and the lambda(x) = nu(theta)(1 + cos theta)^2 identity.

    With ``check`` the closed form must pass every tolerance; a perturbed
    lambda must break the commutation relation, the ODE or the x -> -x symmetry
    by a clear margin.
    """
    params = config.params
    law = config.law
    pairs = [(x, y) for x, y in itertools.permutations(KERNEL_GRID, 2)]
    commutation = max(abs(commutation_residual(x, y, params)) for x, y in pairs)
    ode = max(abs(lambda_ode_residual(x, params)) for x in KERNEL_GRID)
    symmetry = max(abs(symmetry_residual(x, params)) for x in KERNEL_GRID)
    thetas = np.linspace(0, math.pi, IDENTITY_THETAS + 2)[1:-1]
    identity = max(_identity_residual(theta, params, law) for theta in thetas)
    payload = {
        'law': law.model_dump(),
        'params': params.model_dump(),
        'commutation': commutation,
        'ode': ode,
        'symmetry': symmetry,
        'identity': identity,
    }
    if config.check:
        if params.perturbed:
            passed = max(commutation, ode, symmetry) > NEGATIVE_CONTROL_FLOOR
        else:
            passed = commutation < KERNEL_TOLERANCE and ode < KERNEL_TOLERANCE and identity < IDENTITY_TOLERANCE
        payload['passed'] = passed
        if not passed:
            raise NumericalFailureError(f'kernel check failed: {payload}')
    return CommandOutput(payload=payload, rows=[{key: payload[key] for key in ('commutation', 'ode', 'symmetry', 'identity')}])


def chordal_limit(config: ChordalLimitConfig) -> CommandOutput:
    hull = config.hull.build(config.dt)
    report = chordal_limit_experiment(
        config.law,
        hull.arc,
        eps_ladder=config.eps,
        n=config.n,
        dt=config.dt,
        seed=config.seed,
        workers=config.workers,
        filled=hull.filled,
    )
    rows = [
        {
            'eps': row.eps,
            'analytic': row.analytic,
            'gap': row.gap,
            'p_hat': row.estimate.p_hat if row.estimate else None,
            'se': row.estimate.se if row.estimate else None,
        }
        for row in report.rows
    ]
    return CommandOutput(payload=report.model_dump(mode='json'), rows=rows)


def restriction_property(config: RestrictionPropertyConfig) -> CommandOutput:
    report = restriction_property_test(
        config.law,
        config.a.build(config.dt),
        config.b.build(config.dt),
        n=config.n,
        dt=config.dt,
        seed=config.seed,
        workers=config.workers,
        t_min=config.t_min,
    )
    payload = report.model_dump(mode='json')
    return CommandOutput(payload=payload, rows=[payload])


COMMANDS: dict[Subcommand, tuple[type[OutputOptions], Callable[..., CommandOutput]]] = {
    Subcommand.EXPONENTS: (ExponentsConfig, exponents),
    Subcommand.TRACE: (TraceConfig, trace),
    Subcommand.ESTIMATE: (EstimateConfig, estimate),
    Subcommand.MARTINGALE: (MartingaleConfig, martingale),
    Subcommand.SOUP: (SoupCommandConfig, soup),
    Subcommand.KERNELS: (KernelsConfig, kernels),
    Subcommand.CHORDAL_LIMIT: (ChordalLimitConfig, chordal_limit),
    Subcommand.RESTRICTION_PROPERTY: (RestrictionPropertyConfig, restriction_property),
}


def _csv_text(rows: list[dict]) -> str:
    buffer = io.StringIO()
    if rows:
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator='\n')
        writer.writeheader()
        writer.writerows(rows)
    return buffer.getvalue()


def emit(output: CommandOutput, options: OutputOptions) -> None:
    """Writes the result to ``options.output`` or stdout."""
    if options.format == 'csv' and output.trace is not None:
        target = options.output or sys.stdout
        write_trace_csv(target, output.trace.times, output.trace.points)
        return
    if options.format == 'csv':
        data = _csv_text(output.rows).encode()
    else:
        data = dump_json(output.payload)
    if options.output is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        options.output.write_bytes(data)
        logger.info('wrote %s', options.output)


def execute(subcommand: Subcommand, arguments: dict) -> None:
    schema, handler = COMMANDS[subcommand]
    config = schema.model_validate(arguments)
    logger.debug('%s with %s', subcommand.value, config.model_dump(exclude_none=True))
    emit(handler(config), config)

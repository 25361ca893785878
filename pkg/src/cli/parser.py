import argparse
from pathlib import Path

from cli.constants import CurveKind, Subcommand
from settings import settings


def _output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--output', type=Path, help='Write here instead of stdout.')
    parser.add_argument('--format', choices=['csv', 'json'])


def _law(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--alpha', type=float)
    parser.add_argument('--beta', type=float, help='alpha defaults to xi(beta).')
    parser.add_argument('--rho', type=float, help='Maximal law of the force point weight rho.')
    parser.add_argument('--allow-inadmissible', action='store_true', default=None)


def _monte_carlo(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--n', type=int, help=f'Samples (default {settings.sampler.N_SAMPLES}).')
    parser.add_argument('--dt', type=float, help=f'Loewner step (default {settings.loewner.DT}).')
    parser.add_argument('--seed', type=int)
    parser.add_argument('--workers', type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description='Simulation and Monte Carlo checks of radial conformal restriction measures.',
    )
    parser.add_argument('--log-level', help=f'Overrides the configured level ({settings.LOG_LEVEL}).')
    commands = parser.add_subparsers(dest='subcommand', required=True)

    exponents = commands.add_parser(Subcommand.EXPONENTS.value, help='xi, rho and the martingale exponents.')
    exponents.add_argument('--beta', type=float)
    exponents.add_argument('--rho', type=float)
    _output(exponents)

    trace = commands.add_parser(Subcommand.TRACE.value, help='Trace of a perfect or SLE curve, or a restriction sample.')
    trace.add_argument('--curve', choices=[kind.value for kind in CurveKind], required=True)
    trace.add_argument('--theta', help='Target angle of a perfect curve, e.g. pi/2.')
    trace.add_argument('--t', type=float, help='Horizon.')
    trace.add_argument('--kappa', type=float)
    trace.add_argument('--sle-rho', type=float, help='Force point weight of a radial or chordal curve.')
    trace.add_argument('--force', help='limit-left, limit-right, none, or an angle (radial) or offset (chordal).')
    trace.add_argument('--dt', type=float)
    trace.add_argument('--stride', type=int)
    trace.add_argument('--seed', type=int)
    trace.add_argument('--index', type=int)
    _law(trace)
    _output(trace)

    estimate = commands.add_parser(Subcommand.ESTIMATE.value, help='Monte Carlo avoidance probabilities.')
    _law(estimate)
    estimate.add_argument('--hull', dest='hulls', action='append', required=True,
                          help='perfect:<theta>,<t> | halfdisc:<x>,<eps> | polyline:<file>; repeatable.')
    estimate.add_argument('--t-min', type=float, help='Loop duration cutoff of an attached soup.')
    estimate.add_argument('--fit', action='store_true', default=None, help='Also regress the exponents.')
    _monte_carlo(estimate)
    _output(estimate)

    martingale = commands.add_parser(Subcommand.MARTINGALE.value, help='Flatness of the restriction martingale.')
    martingale.add_argument('--rho', type=float, required=True)
    martingale.add_argument('--hull', required=True)
    martingale.add_argument('--T', type=float)
    martingale.add_argument('--checkpoints', type=int)
    _monte_carlo(martingale)
    _output(martingale)

    soup = commands.add_parser(Subcommand.SOUP.value, help='One sample of the truncated loop soup around 0.')
    soup.add_argument('--intensity', type=float, required=True)
    soup.add_argument('--t-min', type=float)
    soup.add_argument('--t-max', type=float)
    soup.add_argument('--bridge-points', type=int)
    soup.add_argument('--seed', type=int)
    soup.add_argument('--index', type=int)
    soup.add_argument('--hull', help='Also count the loops meeting this hull.')
    _output(soup)

    kernels = commands.add_parser(Subcommand.KERNELS.value, help='Residuals of the kernel relations.')
    _law(kernels)
    kernels.add_argument('--check', action='store_true', default=None)
    kernels.add_argument('--c1', type=float, help='Injected linear term (negative control).')
    kernels.add_argument('--c3', type=float, help='Injected cubic term (negative control).')
    _output(kernels)

    chordal = commands.add_parser(Subcommand.CHORDAL_LIMIT.value, help='Radial probabilities approaching the chordal limit.')
    _law(chordal)
    chordal.add_argument('--hull', required=True)
    chordal.add_argument('--eps', type=float, action='append')
    _monte_carlo(chordal)
    _output(chordal)

    restriction = commands.add_parser(Subcommand.RESTRICTION_PROPERTY.value, help='Conditional restriction property.')
    _law(restriction)
    restriction.add_argument('--a', required=True)
    restriction.add_argument('--b', required=True)
    restriction.add_argument('--t-min', type=float)
    _monte_carlo(restriction)
    _output(restriction)
    return parser

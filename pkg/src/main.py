import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from cli.constants import ExitCode, Subcommand
from cli.parser import build_parser
from cli.services import execute
from exceptions import NumericalFailureError
from settings import settings
from utils import clean_errors, dump_json

logger = logging.getLogger(__name__)


def _fail(code: ExitCode, payload) -> int:
    sys.stderr.buffer.write(dump_json(payload))
    sys.stderr.flush()
    return code


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=(args.log_level or settings.LOG_LEVEL).upper(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    arguments = {key: value for key, value in vars(args).items() if value is not None}
    subcommand = Subcommand(arguments.pop('subcommand'))
    arguments.pop('log_level', None)
    try:
        execute(subcommand, arguments)
    except ValidationError as e:
        return _fail(ExitCode.VALIDATION, clean_errors(e.errors()))
    except NumericalFailureError as e:
        logger.error('%s failed: %s', subcommand.value, e)
        return _fail(ExitCode.NUMERICAL, {'error': type(e).__name__, 'detail': str(e)})
    except ValueError as e:
        return _fail(ExitCode.VALIDATION, [{'type': type(e).__name__, 'msg': str(e)}])
    return ExitCode.OK


if __name__ == '__main__':
    sys.exit(run())

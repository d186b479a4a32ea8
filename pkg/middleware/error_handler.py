import logging
import sys
from argparse import Namespace
from typing import Any, Callable, Dict, List, Optional

from pydantic import ValidationError

from core.exceptions import EXIT_COMPUTATION_ERROR, EXIT_INPUT_ERROR, EXIT_OK, PocketError

logger = logging.getLogger(__name__)


def validation_error_details(exc: ValidationError) -> List[Dict[str, Any]]:
    """
    Compact view of pydantic validation errors.
    """
    errors = []
    for error in exc.errors():
        errors.append({
            "loc": list(error.get("loc", [])),
            "msg": error.get("msg", ""),
            "type": error.get("type", "")
        })
    return errors


def report_error(detail: str) -> None:
    print(f"error: {detail}", file=sys.stderr)


def run_command(handler: Callable[[Namespace], Optional[int]], args: Namespace) -> int:
    """
    Run a command handler and turn exceptions into exit codes.

    Args:
        handler (Callable): Command entry point; returns an exit code or None.
        args (Namespace): Parsed command-line arguments.

    Returns:
        int: 0 success, 1 input error, 2 computation error.
    """
    try:
        code = handler(args)
        return EXIT_OK if code is None else code
    except PocketError as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        report_error(e.detail)
        return e.exit_code
    except ValidationError as e:
        errors = validation_error_details(e)
        logger.warning(f"Validation error: {errors}")
        report_error(f"invalid input: {'; '.join(err['msg'] for err in errors)}")
        return EXIT_INPUT_ERROR
    except OSError as e:
        logger.error(f"File error: {e}")
        report_error(str(e))
        return EXIT_INPUT_ERROR
    except Exception:
        logger.exception(f"Unhandled exception in command {getattr(args, 'command', '?')}")

        # Don't expose the traceback on stdout
        report_error("internal error, see the log for details")
        return EXIT_COMPUTATION_ERROR

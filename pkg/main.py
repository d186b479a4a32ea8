import logging
import sys
from typing import List, Optional

from cli.router import build_parser
from core.config import ENVIRONMENT, LOG_LEVEL
from core.exceptions import EXIT_INPUT_ERROR, EXIT_OK
from middleware.error_handler import run_command

logger = logging.getLogger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    # Configure logging
    logging.basicConfig(
        level=LOG_LEVEL,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 0 for --help/--version and 2 for usage errors
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT_ERROR

    logger.info(f"Running {args.command} ({ENVIRONMENT})")
    return run_command(args.handler, args)


if __name__ == "__main__":
    sys.exit(main())

"""Console entry point for vopqkd."""

import sys
from collections.abc import Sequence

from pydantic import ValidationError

from vopqkd import __version__
from vopqkd.cli.commands import EXIT_USAGE, run
from vopqkd.config import get_settings
from vopqkd.utils.logging import get_logger, setup_logging


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return its exit code."""
    try:
        settings = get_settings()
    except ValidationError as e:
        sys.stderr.write(f"vopqkd: invalid environment configuration\n{e}\n")
        return EXIT_USAGE
    setup_logging(settings.log_level, settings.log_format)
    logger = get_logger(__name__)
    logger.debug("vopqkd starting", version=__version__)
    return run(argv, settings)


if __name__ == "__main__":
    sys.exit(main())

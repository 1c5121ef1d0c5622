"""Console platform abstraction."""
# pyright: strict, reportAny=false

import logging
from functools import lru_cache

from rich.console import Console
from rich.logging import RichHandler
from rich.theme import Theme

theme = Theme(
    {
        "header": "bold",
        "message_footer": "dim white",
        "warning": "yellow",
        "error": "bold red",
    }
)


@lru_cache(maxsize=None)
def get_console() -> Console:
    """Get a console instance."""
    return Console(theme=theme)


@lru_cache(maxsize=None)
def get_error_console() -> Console:
    """Get the stderr console used for logs."""
    return Console(theme=theme, stderr=True)


def setup_logging(verbose: bool) -> None:
    """Route `gqla` loggers to a rich handler on stderr.

    Level is DEBUG with `verbose`, INFO otherwise. Safe to call more than once.
    """
    logger = logging.getLogger("gqla")
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(
            console=get_error_console(), show_path=verbose, markup=False
        )
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
    logger.propagate = False

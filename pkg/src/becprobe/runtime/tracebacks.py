import io
import os

import numpy
import scipy
from rich.console import Console
from rich.traceback import Traceback
from rich.traceback import install as install_rich_traceback

# Frames inside the numerical stack are collapsed; failures are reported from our call site.
_SUPPRESSED = (numpy, scipy)


def _traceback(exc: BaseException, width: int | None) -> Traceback:
    return Traceback.from_exception(
        type(exc),
        exc,
        exc.__traceback__,
        width=width,
        extra_lines=3,
        theme="monokai",
        word_wrap=False,
        show_locals=False,
        suppress=_SUPPRESSED,
    )


def format_traceback(exc: BaseException, width: int = 120) -> str:
    """Plain-text rendering for the run log."""
    console = Console(file=io.StringIO(), record=True, width=width)
    console.print(_traceback(exc, width))
    return console.export_text(styles=False).rstrip()


def print_colored_traceback(exc: BaseException) -> None:
    Console(stderr=True).print(_traceback(exc, None))


def install_rich_uncaught_exceptions() -> bool:
    """Install the rich excepthook unless BECPROBE_RICH_UNCAUGHT_TRACEBACKS is off."""
    flag = os.getenv("BECPROBE_RICH_UNCAUGHT_TRACEBACKS", "").strip().lower()
    if flag not in {"", "1", "true", "yes"}:
        return False
    install_rich_traceback(show_locals=False, suppress=_SUPPRESSED)
    return True

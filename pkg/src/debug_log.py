import os
import sys
from typing import Optional

from termcolor import colored

_log_path: Optional[str] = None
_verbose: bool = False


def configure_debug_log(path: Optional[str] = None, verbose: bool = False) -> None:
    """
    Point the debug log at `path` (truncating it) and optionally echo every line
    to stderr. With no path and verbose off, logging is a no-op.
    """
    global _log_path, _verbose
    _log_path = path
    _verbose = verbose
    if path is not None:
        folder = os.path.dirname(os.path.abspath(path))
        os.makedirs(folder, exist_ok=True)
        with open(path, "w") as fl:
            fl.write("")


def print_to_debug_log(message, *args, color: Optional[str] = None, **kwargs):
    text = str(message)
    if _log_path is not None:
        with open(_log_path, "a") as fl:
            print(text, *args, file=fl, flush=True, **kwargs)
    if _verbose:
        # color only on the terminal echo; the file stays plain text
        print(colored(text, color) if color else text, *args, file=sys.stderr, flush=True, **kwargs)

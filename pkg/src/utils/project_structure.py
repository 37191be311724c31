import os
from pathlib import Path
from typing import Optional, Sequence

PROJECT_MARKERS = (".git", "requirements.txt")


def is_filesystem_or_drive_root(path: str) -> bool:
    p = Path(path).resolve(strict=False)
    return p.parent == p


def find_project_root(starting_path=None, markers: Sequence[str] = PROJECT_MARKERS) -> Optional[str]:
    """
    Walk up from `starting_path` (default: the working directory) and return the
    first directory holding one of `markers`, or None at the filesystem root.
    """
    if starting_path is None:
        starting_path = os.getcwd()
    elif not os.path.isabs(starting_path):
        raise ValueError("Argument `starting_path` must be an absolute path.")
    full_path = os.path.abspath(starting_path)
    if os.path.isfile(full_path):
        full_path = os.path.dirname(full_path)
    if not os.path.isdir(full_path):
        return None
    while not any(os.path.exists(os.path.join(full_path, marker)) for marker in markers):
        if is_filesystem_or_drive_root(full_path):
            return None
        full_path = os.path.dirname(full_path)
    return full_path

"""
CSV helpers shared by the trainer and the experiment harness.
"""

import sys
from pathlib import Path
from typing import Optional, TextIO, Union

import pandas as pd

PathLike = Union[str, Path]


def write_csv(frame: pd.DataFrame, path: Optional[PathLike] = None, stream: Optional[TextIO] = None) -> None:
    """
    Write a frame as CSV with a header and no index.

    Args:
        frame: Table to write
        path: Destination file; parent directories are created
        stream: Text stream used when no path is given (stdout by default)
    """
    if path is None:
        frame.to_csv(stream or sys.stdout, index=False, lineterminator="\n")
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")


def read_csv(path: PathLike, required_columns: Optional[list] = None) -> pd.DataFrame:
    """
    Read a CSV written by write_csv.

    Raises:
        ValueError: A required column is missing
    """
    frame = pd.read_csv(path)
    missing = [c for c in (required_columns or []) if c not in frame.columns]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    return frame

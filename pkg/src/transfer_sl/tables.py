"""Small CSV reader for the spectra and scattering files."""

import csv
import math
from pathlib import Path

import numpy as np

from .errors import ConfigurationError


def read_csv_columns(path):
    """Numeric CSV with a header row; lines starting with '#' are skipped. Blank cells become NaN."""
    path = Path(path)
    try:
        lines = [ln for ln in path.read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise ConfigurationError(f"{path}: no header row")
    rows = list(csv.reader(lines))
    header = [h.strip() for h in rows[0]]
    data = {h: [] for h in header}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ConfigurationError(f"{path}: data row {lineno} has {len(row)} fields, expected {len(header)}")
        for h, v in zip(header, row):
            try:
                data[h].append(float(v) if v.strip() else math.nan)
            except ValueError as exc:
                raise ConfigurationError(f"{path}: data row {lineno}: bad number {v!r}") from exc
    return {h: np.asarray(v, dtype=float) for h, v in data.items()}

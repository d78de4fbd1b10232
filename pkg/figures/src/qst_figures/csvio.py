"""Reading and validating the simulator's CSV output contract.

Two file shapes are consumed, both plain comma-separated text with a
header row:

* time series ``{scenario}_v{v}.csv`` with columns
  ``t,p_phi1,p_phi2,p_phi3[,fidelity],norm_or_trace``, time strictly
  increasing;
* sweep grid ``{scenario}_grid.csv`` with columns
  ``kappa,gamma_q,peak_fidelity``.

This module deliberately shares no code with the simulator: the CSV
layout is the whole interface.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

TIMESERIES_REQUIRED = ("t", "p_phi1", "p_phi2", "p_phi3")
GRID_COLUMNS = ("kappa", "gamma_q", "peak_fidelity")


class SchemaError(Exception):
    """Input file does not satisfy the CSV contract."""


@dataclass(frozen=True)
class TimeSeries:
    path: Path
    columns: tuple
    data: np.ndarray  # (rows, columns)

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    @property
    def has_fidelity(self) -> bool:
        return "fidelity" in self.columns


@dataclass(frozen=True)
class Grid:
    path: Path
    kappa: np.ndarray
    gamma_q: np.ndarray
    peak_fidelity: np.ndarray

    @property
    def n_cells(self) -> int:
        return len(self.peak_fidelity)


def _read_rows(path: Path):
    lines = [line for line in path.read_text().splitlines() if line.strip()]
    if not lines:
        raise SchemaError(f"{path}: file is empty")
    header = tuple(name.strip() for name in lines[0].split(","))
    if len(lines) == 1:
        raise SchemaError(f"{path}: no data rows")
    try:
        data = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric cell ({exc})") from None
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: row width does not match header")
    return header, data


def load_timeseries(path) -> TimeSeries:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: no such file")
    header, data = _read_rows(path)
    for name in TIMESERIES_REQUIRED + ("norm_or_trace",):
        if name not in header:
            raise SchemaError(f"{path}: missing column {name!r}")
    t = data[:, header.index("t")]
    if not np.all(np.diff(t) > 0):
        raise SchemaError(f"{path}: time column is not strictly increasing")
    return TimeSeries(path=path, columns=header, data=data)


def load_grid(path) -> Grid:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: no such file")
    header, data = _read_rows(path)
    if header != GRID_COLUMNS:
        missing = [name for name in GRID_COLUMNS if name not in header]
        if missing:
            raise SchemaError(f"{path}: missing column {missing[0]!r}")
        raise SchemaError(f"{path}: unexpected header {header}")
    return Grid(path=path, kappa=data[:, 0], gamma_q=data[:, 1], peak_fidelity=data[:, 2])

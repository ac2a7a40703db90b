"""The ``Dataset`` container and its on-disk formats.

A dataset holds ``n`` rows in ``R^d`` plus a scale tag:

``raw-xi``
    rows are the summands ``xi_i`` themselves, so ``W = sum_i rows[i]``.
``x-over-sqrt-n``
    rows are ``X_i`` and the summands are ``X_i / sqrt(n)``.

Binary files are little-endian float64, row-major, with a JSON sidecar
(``<stem>.json``) recording shape, scale tag, generator spec and seed.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_data
from .exceptions import ContractError, DataError

SCALES = ("raw-xi", "x-over-sqrt-n")


@dataclass(frozen=True, eq=False)
class Dataset:
    rows: np.ndarray
    scale: str = "raw-xi"
    spec: dict = field(default=None, compare=False)
    seed: int = field(default=None, compare=False)

    def __post_init__(self):
        if self.scale not in SCALES:
            raise ContractError(f"unknown scale convention {self.scale!r}; expected one of {SCALES}")
        rows = np.array(check_data(self.rows, name="dataset rows"), copy=True)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def d(self):
        return self.rows.shape[1]

    def summands(self):
        """Rows on the ``xi`` scale."""
        if self.scale == "raw-xi":
            return self.rows
        return self.rows * (1.0 / math.sqrt(self.n))

    def raw(self):
        """Rows on the ``X`` scale (``X_i = sqrt(n) xi_i``)."""
        if self.scale == "x-over-sqrt-n":
            return self.rows
        return self.rows * math.sqrt(self.n)

    def total(self):
        """The sum ``W = sum_i xi_i``."""
        return self.summands().sum(axis=0)

    def with_rows(self, rows, scale=None):
        return Dataset(rows, scale or self.scale, spec=self.spec, seed=self.seed)


def save_dataset(dataset, path):
    """Write ``<path>`` (binary rows) and ``<path>.json`` (sidecar)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.ascontiguousarray(dataset.rows, dtype="<f8").tofile(path)
    meta = {
        "n": dataset.n,
        "d": dataset.d,
        "dtype": "float64-le",
        "order": "row-major",
        "scale": dataset.scale,
        "spec": dataset.spec,
        "seed": dataset.seed,
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True))


def load_dataset(path):
    path = Path(path)
    sidecar = path.with_suffix(path.suffix + ".json")
    if not sidecar.exists():
        raise DataError(f"missing sidecar {sidecar}")
    meta = json.loads(sidecar.read_text())
    flat = np.fromfile(path, dtype="<f8")
    n, d = int(meta["n"]), int(meta["d"])
    if flat.size != n * d:
        raise DataError(f"{path}: expected {n * d} values, found {flat.size}")
    return Dataset(flat.reshape(n, d).astype(np.float64), meta["scale"],
                   spec=meta.get("spec"), seed=meta.get("seed"))

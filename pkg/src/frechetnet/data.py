"""Functional data: grid samples <-> Fourier coefficients, and file persistence.

The basis on ``[0, 1]`` is ``e_1 = 1``, ``e_{2m} = sqrt(2) cos(2 pi m t)``,
``e_{2m+1} = sqrt(2) sin(2 pi m t)``. Coefficients are trapezoid-rule inner
products on the caller's grid.

File formats (UTF-8, LF, ``.`` decimal point, floats in shortest round-trip
form):

* function-sample CSV: header row, then one function per row as ``|grid|``
  values followed by one target column;
* coefficient CSV (written by :func:`save_dataset_csv`): header
  ``x1,...,xD,target`` then one coefficient vector per row;
* model documents: JSON, see :mod:`frechetnet.network`;
* metrics CSV: ``epoch,loss,sup_error[,wall_ms]``;
* projection-sweep CSV: ``N,sup_deviation``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .network import Network, deserialize, serialize
from .training import Dataset, EpochRecord


@dataclass(frozen=True, eq=False)
class Grid:
    points: np.ndarray

    def __post_init__(self):
        t = np.array(self.points, dtype=float)
        if t.ndim != 1 or len(t) < 2:
            raise ValidationError("a grid needs at least two points")
        if not np.all(np.isfinite(t)) or t[0] < 0.0 or t[-1] > 1.0:
            raise ValidationError("grid points must lie in [0, 1]")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("grid points must be strictly increasing")
        t.flags.writeable = False
        object.__setattr__(self, "points", t)

    @classmethod
    def uniform(cls, n: int) -> "Grid":
        return cls(np.linspace(0.0, 1.0, n))

    def __len__(self) -> int:
        return len(self.points)

    def trapezoid_weights(self) -> np.ndarray:
        h = np.diff(self.points)
        w = np.zeros(len(self.points))
        w[:-1] += h / 2
        w[1:] += h / 2
        return w


@dataclass(frozen=True)
class BasisSpec:
    dim: int
    kind: str = "fourier"

    def __post_init__(self):
        if self.kind != "fourier":
            raise ValidationError(f"unsupported basis {self.kind!r}")
        if self.dim < 1:
            raise ValidationError("basis dimension must be >= 1")


def eval_basis(spec: BasisSpec, grid: Grid) -> np.ndarray:
    """Matrix with entry ``(i, k) = e_k(t_i)``, shape ``(|grid|, dim)``."""
    t = grid.points
    out = np.empty((len(t), spec.dim))
    out[:, 0] = 1.0
    for k in range(2, spec.dim + 1):
        m = k // 2
        trig = np.cos if k % 2 == 0 else np.sin
        out[:, k - 1] = math.sqrt(2.0) * trig(2.0 * math.pi * m * t)
    return out


def gram_matrix(spec: BasisSpec, grid: Grid) -> np.ndarray:
    """Discrete Gram matrix ``E^T W E``; the identity up to quadrature error."""
    e = eval_basis(spec, grid)
    return np.einsum("ik,i,il->kl", e, grid.trapezoid_weights(), e)


def function_to_coeffs(values, spec: BasisSpec, grid: Grid, return_bound: bool = False):
    """Trapezoid inner products ``x_k = int f e_k``.

    ``values`` may hold one function or a batch (last axis over the grid).
    With ``return_bound`` the result is ``(coeffs, bound)`` where ``bound``
    dominates ``||coeffs(reconstruct(coeffs)) - coeffs||``; it equals
    ``||G - I||_2 ||coeffs||`` with ``G`` the discrete Gram matrix.
    """
    f = np.asarray(values, dtype=float)
    if f.shape[-1] != len(grid):
        raise ValidationError(f"{f.shape[-1]} values for a grid of {len(grid)} points")
    e = eval_basis(spec, grid)
    coeffs = np.einsum("...i,i,ik->...k", f, grid.trapezoid_weights(), e)
    if not return_bound:
        return coeffs
    defect = np.linalg.norm(gram_matrix(spec, grid) - np.eye(spec.dim), 2)
    bound = defect * np.sqrt(np.einsum("...k,...k->...", coeffs, coeffs))
    return coeffs, bound


def coeffs_to_function(x, spec: BasisSpec, grid: Grid) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.dim:
        raise ValidationError(f"{x.shape[-1]} coefficients for a basis of size {spec.dim}")
    return np.einsum("...k,ik->...i", x, eval_basis(spec, grid))


# -- CSV ------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def _write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def _read_rows(path, width: int) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise ParseError("file is empty; a header row is mandatory", "row 1")
    body = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            raise ParseError(f"expected {width} columns, found {len(row)}", f"row {lineno}")
        try:
            vals = [float(cell) for cell in row]
        except ValueError:
            raise ParseError("non-numeric cell", f"row {lineno}") from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("NaN or infinite value", f"row {lineno}")
        body.append(vals)
    if not body:
        raise ParseError("no data rows after the header", "row 2")
    return np.array(body)


def load_dataset_csv(path, spec: BasisSpec | None = None, grid: Grid | None = None) -> Dataset:
    """Read a dataset.

    With ``spec`` and ``grid`` the file holds grid samples that are converted
    to coefficients; without them it is a coefficient CSV whose width sets
    the ambient dimension.
    """
    if (spec is None) != (grid is None):
        raise ValueError("pass both spec and grid, or neither")
    if spec is None:
        with open(path, encoding="utf-8") as fh:
            header = next(csv.reader(fh), None)
        if not header:
            raise ParseError("file is empty; a header row is mandatory", "row 1")
        table = _read_rows(path, len(header))
        return Dataset(table[:, :-1], table[:, -1])
    table = _read_rows(path, len(grid) + 1)
    return Dataset(function_to_coeffs(table[:, :-1], spec, grid), table[:, -1])


def save_dataset_csv(path, data: Dataset) -> None:
    if data.targets.ndim != 1:
        raise ValidationError("CSV datasets carry one scalar target per row")
    dim = data.inputs.shape[1]
    header = [f"x{k}" for k in range(1, dim + 1)] + ["target"]
    rows = ([_fmt(v) for v in x] + [_fmt(y)] for x, y in zip(data.inputs, data.targets))
    _write_csv(path, header, rows)


def save_function_csv(path, values, targets, grid: Grid) -> None:
    """Write grid samples in the function-sample layout."""
    header = [f"f({_fmt(t)})" for t in grid.points] + ["target"]
    rows = ([_fmt(v) for v in f] + [_fmt(y)] for f, y in zip(np.atleast_2d(values), targets))
    _write_csv(path, header, rows)


def save_metrics_csv(path, history: list[EpochRecord], include_wall_ms: bool = False) -> None:
    """Per-epoch metrics; wall-clock time is opt-in so bodies stay reproducible."""
    header = ["epoch", "loss", "sup_error"] + (["wall_ms"] if include_wall_ms else [])
    rows = []
    for rec in history:
        row = [str(rec.epoch), _fmt(rec.loss), "" if rec.sup_error is None else _fmt(rec.sup_error)]
        if include_wall_ms:
            row.append(f"{rec.wall_ms:.3f}")
        rows.append(row)
    _write_csv(path, header, rows)


def save_sweep_csv(path, rows) -> None:
    """Projection-sweep table ``N,sup_deviation``."""
    _write_csv(path, ["N", "sup_deviation"], ([str(n), _fmt(d)] for n, d in rows))


def save_model(path, net: Network) -> None:
    Path(path).write_text(serialize(net), encoding="utf-8", newline="")


def load_model(path) -> Network:
    return deserialize(Path(path).read_text(encoding="utf-8"))

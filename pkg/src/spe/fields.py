"""Uniform grids, sampled fields, and the trapezoidal norms used by every estimate.

All integrals in this package are composite trapezoid sums on the nodes of a
uniform grid over [0, L].  The half-line is truncated at L; fields are treated
as zero beyond L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "make_uniform_grid",
    "lp_norm",
    "windowed_l1",
    "mean",
]


@dataclass(frozen=True)
class Grid:
    """Uniform discretization of [0, L] with nodes x_i = i*dx, i = 0..n."""

    length: float
    cell_count: int

    def __post_init__(self) -> None:
        if not (self.length > 0.0 and math.isfinite(self.length)):
            raise ValueError("grid length must be positive and finite")
        if self.cell_count < 2:
            raise ValueError("grid needs at least 2 cells")

    @property
    def dx(self) -> float:
        return self.length / self.cell_count

    @property
    def node_count(self) -> int:
        return self.cell_count + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.cell_count + 1)


def make_uniform_grid(length: float, cell_count: int) -> Grid:
    """Build the uniform grid with nodes 0, dx, ..., L."""
    return Grid(length=float(length), cell_count=int(cell_count))


@dataclass(frozen=True)
class Field:
    """Real-valued samples on the nodes of a grid.

    Values are stored read-only; every operation returns a new Field.  All
    values must be finite - producing NaN/Inf is treated as a solver failure
    upstream, never silently stored.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.node_count,):
            raise ValueError(
                f"field needs {self.grid.node_count} values, got {vals.shape}"
            )
        if not np.isfinite(vals).all():
            raise ValueError("field contains non-finite values")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Field":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.node_count))


def _trapz(values: np.ndarray, dx: float) -> float:
    # composite trapezoid with half weights at both ends
    return float(dx * (0.5 * values[0] + values[1:-1].sum() + 0.5 * values[-1]))


def lp_norm(f: Field, p) -> float:
    """Trapezoidal approximation of the L^p norm over [0, L], p in {1, 2, 4, inf}.

    For p = inf the node-wise maximum of |f| is returned; no inter-node
    reconstruction is attempted.
    """
    vals = f.values
    if p == math.inf:
        return float(np.abs(vals).max())
    if p not in (1, 2, 4):
        raise ValueError(f"unsupported norm exponent {p!r}; use 1, 2, 4 or inf")
    if p == 1:
        return _trapz(np.abs(vals), f.grid.dx)
    peak = float(np.abs(vals).max())
    if peak == 0.0:
        return 0.0
    # rescale by the peak so the higher powers cannot underflow or overflow
    integ = _trapz(np.abs(vals / peak) ** p, f.grid.dx)
    return float(peak * integ ** (1.0 / p))


def windowed_l1(f: Field, window: float) -> float:
    """Trapezoidal approximation of the integral of |f| over [0, R].

    When R falls between nodes, |f| is interpolated linearly at the cut point
    and the last partial cell is integrated by the trapezoid rule.
    """
    L = f.grid.length
    if not (0.0 < window <= L):
        raise ValueError(f"window must lie in (0, {L}], got {window}")
    dx = f.grid.dx
    av = np.abs(f.values)
    i = int(math.floor(window / dx + 1e-12))
    i = min(i, f.grid.cell_count)
    total = _trapz(av[: i + 1], dx) if i >= 1 else 0.0
    x_i = i * dx
    if window > x_i + 1e-15 * max(1.0, L) and i + 1 <= f.grid.cell_count:
        frac = (window - x_i) / dx
        cut_val = av[i] + (av[i + 1] - av[i]) * frac
        total += 0.5 * (av[i] + cut_val) * (window - x_i)
    return float(total)


def mean(f: Field) -> float:
    """Signed trapezoidal integral of f over [0, L]."""
    return _trapz(f.values, f.grid.dx)

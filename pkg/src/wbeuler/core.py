"""Grids, run configuration and discrete norms.

Fields are plain numpy arrays. A scalar field on a grid has the shape
``grid.shape`` (ghost cells included); a state field carries a leading
component axis, ``(d + 2, *grid.shape)`` with components ordered
``rho, m_1, ..., m_d, E``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ORDERS_1D = (1, 2, 3, 5)
ORDERS_2D = (1, 3)
BOUNDARY_MODES = ("periodic", "equilibrium", "exact", "extrapolation")


@dataclass(frozen=True)
class CartesianGrid:
    """Uniform 1D or 2D mesh with a ghost layer of width ``ghost`` on every side."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    n: tuple[int, ...]
    ghost: int = 1

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        n = tuple(int(v) for v in np.atleast_1d(self.n))
        if not (len(lo) == len(hi) == len(n)) or len(n) not in (1, 2):
            raise ValueError("lo, hi and n must all have length 1 or 2")
        if any(k < 1 for k in n):
            raise ValueError(f"need at least one cell per direction, got n={n}")
        if any(b <= a for a, b in zip(lo, hi)):
            raise ValueError("hi must exceed lo in every direction")
        if self.ghost < 0:
            raise ValueError("ghost width must be non-negative")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "n", n)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple((b - a) / k for a, b, k in zip(self.lo, self.hi, self.n))

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape including ghosts."""
        return tuple(k + 2 * self.ghost for k in self.n)

    @property
    def interior(self) -> tuple[slice, ...]:
        g = self.ghost
        return tuple(slice(g, g + k) for k in self.n)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.dx)

    def coords(self, axis: int, xi: float = 0.0) -> np.ndarray:
        """Coordinates ``lo + (j + 1/2 + xi) dx`` of the point at local offset ``xi``
        in every cell (ghosts included) along ``axis``.

        Computed multiplicatively from the index so that the same physical point
        seen from two neighbouring cells gets bitwise the same coordinate.
        """
        j = np.arange(-self.ghost, self.n[axis] + self.ghost, dtype=float)
        return self.lo[axis] + (j + 0.5 + xi) * self.dx[axis]

    def centers(self, axis: int = 0) -> np.ndarray:
        return self.coords(axis, 0.0)

    def interfaces(self, axis: int = 0) -> np.ndarray:
        """The ``n + 1`` interface coordinates of the physical domain."""
        j = np.arange(self.n[axis] + 1, dtype=float)
        return self.lo[axis] + j * self.dx[axis]

    def mesh(self, xi: Sequence[float] | None = None) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays of the local point ``xi`` in every cell."""
        if xi is None:
            xi = (0.0,) * self.dim
        axes = [self.coords(k, xi[k]) for k in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij")) if self.dim > 1 else (axes[0],)

    def with_ghost(self, ghost: int) -> "CartesianGrid":
        return CartesianGrid(self.lo, self.hi, self.n, ghost)


def gauss_legendre(npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on the reference cell [-1/2, 1/2].

    Weights sum to one, so a weighted sum of point values is a cell average.
    """
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * x, 0.5 * w


def project_cell_averages(fn, grid: CartesianGrid, order: int) -> np.ndarray:
    """Cell averages of ``fn`` on every cell (ghosts included).

    Uses the tensor Gauss-Legendre rule with ``ceil(order / 2)`` nodes per
    direction, exact for polynomials of degree ``2 * ceil(order / 2) - 1``.
    ``fn`` takes one coordinate array per direction and may return an array
    with extra leading component axes.
    """
    npts = max(1, math.ceil(order / 2))
    xs, ws = gauss_legendre(npts)
    total = None
    for idx in np.ndindex(*([npts] * grid.dim)):
        xi = tuple(xs[i] for i in idx)
        w = math.prod(ws[i] for i in idx)
        val = w * np.asarray(fn(*grid.mesh(xi)), dtype=float)
        total = val if total is None else total + val
    return np.broadcast_to(total, total.shape[:-grid.dim] + grid.shape).copy()


def l1_norm(a: np.ndarray, b: np.ndarray, grid: CartesianGrid) -> np.ndarray | float:
    """Discrete L1 distance ``cell_volume * sum |a - b|`` over interior cells.

    Works per component when the arrays carry leading component axes; the sum
    over cells is a fixed-order sequential reduction so results are reproducible.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.shape[a.ndim - grid.dim:] != grid.shape:
        raise ValueError(f"fields of shape {a.shape} and {b.shape} do not match grid {grid.shape}")
    diff = np.abs(a - b)[(Ellipsis,) + grid.interior]
    flat = diff.reshape(diff.shape[: diff.ndim - grid.dim] + (-1,))
    out = np.add.reduce(flat, axis=-1) * grid.cell_volume
    return float(out) if out.ndim == 0 else out


def convergence_rate(err_coarse: float, err_fine: float) -> float:
    """Observed order between a grid and its refinement by two."""
    if not (err_coarse > 0 and err_fine > 0):
        raise ValueError(f"errors must be positive, got {err_coarse}, {err_fine}")
    return math.log2(err_coarse / err_fine)


def fitted_order(ns: Sequence[int], errors: Sequence[float]) -> float:
    """Least-squares slope of ``-log(error)`` against ``log(N)``."""
    ns = np.asarray(ns, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        raise ValueError("errors must be positive")
    slope = np.polyfit(np.log(ns), np.log(errors), 1)[0]
    return float(-slope)


@dataclass
class RunConfig:
    """Scheme and run settings shared by the solver and the experiment harness.

    ``None`` for ``boundary``, ``equilibrium`` or ``t_final`` means "use the
    scenario's default". ``reconstruction`` overrides the default operator
    for the order (for instance ``"minmod"`` at second order).
    """

    order: int = 3
    flux: str = "rusanov"
    cfl: float = 0.45
    gamma: float = 1.4
    boundary: str | None = None
    equilibrium: str | None = None
    equilibrium_params: dict = field(default_factory=dict)
    t_final: float | None = None
    mode: str = "wb"
    time_scaling: bool = False
    reconstruction: str | None = None
    output_dir: str | None = None

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise ValueError(f"CFL number must lie in (0, 1), got {self.cfl}")
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if self.t_final is not None and not self.t_final >= 0:
            raise ValueError("final time must be non-negative")
        if self.order not in ORDERS_1D:
            raise ValueError(f"unsupported order {self.order}")
        if self.mode not in ("wb", "unb"):
            raise ValueError(f"mode must be 'wb' or 'unb', got {self.mode!r}")
        if self.boundary is not None and self.boundary not in BOUNDARY_MODES:
            raise ValueError(f"unknown boundary mode {self.boundary!r}")
        if self.flux != "rusanov":
            raise ValueError(f"unknown flux {self.flux!r}")
        if self.reconstruction is not None:
            from .reconstruction import KINDS

            if self.reconstruction not in KINDS:
                raise ValueError(f"unknown reconstruction {self.reconstruction!r}")

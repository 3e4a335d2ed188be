"""Error tables, CSV reports and plain-text field dumps."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import CartesianGrid, convergence_rate


def _num(v: float) -> str:
    """Scientific notation with six significant digits."""
    return f"{v:.5e}"


def component_names(dim: int) -> tuple[str, ...]:
    return ("rho", "mx", "E") if dim == 1 else ("rho", "mx", "my", "E")


@dataclass
class ErrorTable:
    """Rows of ``(N, per-component error)``; rates come from consecutive rows."""

    components: tuple[str, ...]
    rows: list = field(default_factory=list)

    def add(self, N: int, errors) -> None:
        errors = tuple(float(e) for e in np.atleast_1d(errors))
        if len(errors) != len(self.components):
            raise ValueError(f"expected {len(self.components)} errors, got {len(errors)}")
        self.rows.append((int(N), errors))

    @property
    def ns(self) -> list[int]:
        return [n for n, _ in self.rows]

    def errors(self, component: str | int = 0) -> list[float]:
        i = component if isinstance(component, int) else self.components.index(component)
        return [e[i] for _, e in self.rows]

    def rates(self, component: str | int = 0) -> list[float | None]:
        """``None`` for the first row; ``nan`` where an error is not positive."""
        errs = self.errors(component)
        out: list[float | None] = [None]
        for a, b in zip(errs, errs[1:]):
            out.append(convergence_rate(a, b) if a > 0 and b > 0 else math.nan)
        return out

    def header(self) -> list[str]:
        cols = ["N"]
        for c in self.components:
            cols += [f"err_{c}", f"rate_{c}"]
        return cols

    def csv_rows(self) -> list[list[str]]:
        rates = [self.rates(i) for i in range(len(self.components))]
        out = []
        for r, (n, errs) in enumerate(self.rows):
            row = [str(n)]
            for i, e in enumerate(errs):
                rate = rates[i][r]
                row += [_num(e), "" if rate is None else _num(rate)]
            out.append(row)
        return out

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        w.writerows(self.csv_rows())
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def format(self) -> str:
        """Aligned text version for terminals."""
        lines = ["  ".join(f"{h:>12}" for h in self.header())]
        for row in self.csv_rows():
            lines.append("  ".join(f"{v:>12}" for v in row))
        return "\n".join(lines)


def read_error_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_field_dump(path, grid: CartesianGrid, U: np.ndarray, p_fluct: np.ndarray,
                     t: float, gamma: float) -> None:
    """Plain-text dump of interior cell averages.

    2D layout: a header line ``nx ny x0 y0 dx dy t gamma`` (``x0, y0`` is the
    first cell centre), then one line ``rho mx my E p_fluctuation`` per cell
    with x varying slowest (C order of an ``(nx, ny)`` array).
    1D layout: header ``nx x0 dx t gamma``, lines ``rho mx E p_fluctuation``.
    """
    inner = (slice(None),) + grid.interior
    U = np.asarray(U)[inner]
    pf = np.asarray(p_fluct)
    if pf.shape == grid.shape:
        pf = pf[grid.interior]
    x0 = [lo + 0.5 * h for lo, h in zip(grid.lo, grid.dx)]
    if grid.dim == 1:
        head = [str(grid.n[0]), repr(x0[0]), repr(grid.dx[0])]
    else:
        head = [str(grid.n[0]), str(grid.n[1]), repr(x0[0]), repr(x0[1]),
                repr(grid.dx[0]), repr(grid.dx[1])]
    head += [repr(float(t)), repr(float(gamma))]
    cols = np.concatenate([U.reshape(U.shape[0], -1), pf.reshape(1, -1)]).T
    with open(path, "w") as fh:
        fh.write(" ".join(head) + "\n")
        np.savetxt(fh, cols, fmt="%.17e")


def read_field_dump(path):
    """Inverse of :func:`write_field_dump`: ``(header dict, values of shape (ncomp, *n))``."""
    with open(path) as fh:
        head = fh.readline().split()
        data = np.loadtxt(fh, ndmin=2)
    if len(head) == 5:
        meta = dict(nx=int(head[0]), x0=float(head[1]), dx=float(head[2]),
                    t=float(head[3]), gamma=float(head[4]))
        shape = (meta["nx"],)
    else:
        meta = dict(nx=int(head[0]), ny=int(head[1]), x0=float(head[2]), y0=float(head[3]),
                    dx=float(head[4]), dy=float(head[5]), t=float(head[6]), gamma=float(head[7]))
        shape = (meta["nx"], meta["ny"])
    return meta, data.T.reshape((data.shape[1],) + shape)


def write_profile_csv(path, x, columns: dict) -> None:
    """Columns of 1D profiles (for example perturbation fields) against ``x``."""
    names = ["x"] + list(columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for i, xi in enumerate(np.asarray(x)):
            w.writerow([_num(xi)] + [_num(float(np.asarray(v)[i])) for v in columns.values()])

"""Conservative piecewise-polynomial reconstruction from cell averages.

Every operator returns one polynomial per cell, written in the local
coordinates ``xi = (x - x_j) / dx`` of that cell (``xi`` in ``[-1/2, 1/2]``
per direction), so the same reconstruction can be evaluated at interface
nodes, Gauss nodes and quadrature nodes without recomputing weights.

Kinds: ``constant``, the limited linear ``minmod`` and ``mc`` (1D), ``cweno3``
and ``cweno5`` (1D) and ``cweno3_2d``, a genuinely two-dimensional third-order
CWENO built from a constrained least-squares quadratic and four bilinear
quadrant polynomials.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

KINDS = ("constant", "minmod", "mc", "cweno3", "cweno5", "cweno3_2d")


# -- exact moment algebra -------------------------------------------------------------

def _moment(e: int, s: int) -> Fraction:
    """Integral of ``xi**e`` over the unit cell centred at integer offset ``s``."""
    a = Fraction(2 * s - 1, 2)
    b = Fraction(2 * s + 1, 2)
    return (b ** (e + 1) - a ** (e + 1)) / (e + 1)


def _solve(A, B):
    """Gauss-Jordan elimination in exact arithmetic: returns ``A^-1 B``."""
    n = len(A)
    M = [list(A[i]) + list(B[i]) for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def _exponents(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    if dim == 1:
        return tuple((k,) for k in range(degree + 1))
    return tuple((a, t - a) for t in range(degree + 1) for a in range(t, -1, -1))


def _moment_row(offset, exps):
    return [np.prod([_moment(e, s) for e, s in zip(ex, offset)]) for ex in exps]


def _interpolation_matrix(offsets, exps) -> np.ndarray:
    """Map stencil averages to coefficients of the polynomial matching them all."""
    A = [_moment_row(o, exps) for o in offsets]
    ident = [[Fraction(int(i == j)) for j in range(len(offsets))] for i in range(len(offsets))]
    return np.array(_solve(A, ident), dtype=float)


def _constrained_ls_matrix(offsets, exps) -> np.ndarray:
    """Least-squares fit of the neighbour averages, exact on ``offsets[0]``."""
    A = [_moment_row(o, exps) for o in offsets]
    n, m = len(exps), len(offsets)
    # KKT system [2 An^T An, a0^T; a0, 0] [c; lam] = [2 An^T u_n; u_0]
    K = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
    B = [[Fraction(0)] * m for _ in range(n + 1)]
    for i in range(n):
        for j in range(n):
            K[i][j] = 2 * sum(A[c][i] * A[c][j] for c in range(1, m))
        K[i][n] = A[0][i]
        K[n][i] = A[0][i]
        for c in range(1, m):
            B[i][c] = 2 * A[c][i]
    B[n][0] = Fraction(1)
    return np.array(_solve(K, B)[:n], dtype=float)


def _falling(e: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= e - i
    return out


def _indicator_matrix(exps) -> np.ndarray:
    """Quadratic form of the smoothness indicator sum_{1<=|a|<=deg} int (d^a P)^2 over the cell."""
    dim = len(exps[0])
    deg = max(sum(e) for e in exps)
    derivs = [a for a in itertools.product(range(deg + 1), repeat=dim) if 1 <= sum(a) <= deg]
    n = len(exps)
    M = [[Fraction(0)] * n for _ in range(n)]
    for i, ei in enumerate(exps):
        for j, ej in enumerate(exps):
            tot = Fraction(0)
            for a in derivs:
                term = Fraction(1)
                for k in range(dim):
                    fi, fj = _falling(ei[k], a[k]), _falling(ej[k], a[k])
                    if fi == 0 or fj == 0:
                        term = Fraction(0)
                        break
                    term *= fi * fj * _moment(ei[k] + ej[k] - 2 * a[k], 0)
                tot += term
            M[i][j] = tot
    return np.array(M, dtype=float)


# -- polynomial container -------------------------------------------------------------

class CellPolynomials:
    """A batch of per-cell polynomials in local cell coordinates.

    ``coeffs`` has shape ``(n_monomials, *batch, *cells)``; monomial ``i`` is
    ``prod_k xi_k ** exponents[i][k]``. ``offset`` is the ghosted-grid index of
    the first cell covered.
    """

    def __init__(self, coeffs: np.ndarray, exponents, offset):
        self.coeffs = coeffs
        self.exponents = tuple(tuple(e) for e in exponents)
        self.offset = tuple(int(o) for o in offset)

    @property
    def dim(self) -> int:
        return len(self.exponents[0])

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[self.coeffs.ndim - self.dim:]

    @property
    def degree(self) -> int:
        return max(sum(e) for e in self.exponents)

    def at(self, *xi: float) -> np.ndarray:
        """Values at local point ``xi`` in every cell."""
        if len(xi) != self.dim:
            raise ValueError(f"expected {self.dim} local coordinates")
        out = None
        for c, ex in zip(self.coeffs, self.exponents):
            w = 1.0
            for x, e in zip(xi, ex):
                w *= x**e
            if ex == (0,) * self.dim:
                term = c.copy() if out is None else c
            elif w == 0.0:
                continue
            else:
                term = w * c
            out = term if out is None else out + term
        return out

    def cell_averages(self) -> np.ndarray:
        out = np.zeros(self.coeffs.shape[1:])
        for c, ex in zip(self.coeffs, self.exponents):
            w = float(np.prod([_moment(e, 0) for e in ex]))
            if w:
                out = out + w * c
        return out

    def __getitem__(self, key) -> "CellPolynomials":
        """Select along the batch axes."""
        key = key if isinstance(key, tuple) else (key,)
        return CellPolynomials(self.coeffs[(slice(None),) + key], self.exponents, self.offset)

    def restrict(self, offset, shape) -> "CellPolynomials":
        sl = tuple(
            slice(o - s, o - s + n) for o, s, n in zip(offset, self.offset, shape)
        )
        if any(s.start < 0 or s.stop > m for s, m in zip(sl, self.shape)):
            raise ValueError("requested region not covered by the reconstruction")
        return CellPolynomials(self.coeffs[(Ellipsis,) + sl], self.exponents, offset)

    def evaluate(self, index, point, grid) -> np.ndarray:
        """Value of the polynomial of cell ``index`` (ghosted indexing) at physical ``point``.

        Points farther than half a cell outside the cell are rejected.
        """
        index = tuple(np.atleast_1d(index))
        point = tuple(np.atleast_1d(point))
        xi = []
        for k in range(self.dim):
            center = grid.coords(k)[index[k]]
            xi.append((point[k] - center) / grid.dx[k])
        if any(abs(x) > 1.0 + 1e-12 for x in xi):
            raise ValueError(f"point {point} lies outside cell {index}")
        local = tuple(i - o for i, o in zip(index, self.offset))
        if any(i < 0 or i >= n for i, n in zip(local, self.shape)):
            raise ValueError(f"cell {index} has no reconstruction")
        vals = self.at(*xi)
        return vals[(Ellipsis,) + local]


def boundary_extrapolated_pair(polys: CellPolynomials, axis: int = 0, transverse=()):
    """Left/right values at every interface between consecutive cells along ``axis``.

    ``transverse`` holds the local coordinates along the other directions. The
    returned arrays have one entry fewer than ``polys`` along ``axis``.
    """
    transverse = list(transverse)
    left_xi = transverse[:axis] + [0.5] + transverse[axis:]
    right_xi = transverse[:axis] + [-0.5] + transverse[axis:]
    ax = polys.coeffs.ndim - 1 - polys.dim + axis
    left = polys.at(*left_xi)
    right = polys.at(*right_xi)
    n = left.shape[ax]
    take = lambda a, s: a[(slice(None),) * ax + (s,)]  # noqa: E731
    return take(left, slice(0, n - 1)), take(right, slice(1, n))


# -- operators ------------------------------------------------------------------------

def minmod(a, b):
    return 0.5 * (np.sign(a) + np.sign(b)) * np.minimum(np.abs(a), np.abs(b))


def monotonized_central(a, b):
    """MC limiter: central slope unless it exceeds twice either one-sided slope."""
    lim = np.minimum(2.0 * np.minimum(np.abs(a), np.abs(b)), 0.5 * np.abs(a + b))
    return 0.5 * (np.sign(a) + np.sign(b)) * lim


@dataclass(frozen=True)
class _Candidate:
    offsets: tuple
    matrix: np.ndarray  # (n_mono_full, len(offsets))


@dataclass(frozen=True)
class ReconstructionOperator:
    """Reconstruction kind plus CWENO parameters.

    ``epsilon=None`` means ``epsilon = prod(dx)`` (``dx^2`` on square cells).
    """

    kind: str = "cweno3"
    epsilon: float | None = None
    power: int = 2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown reconstruction {self.kind!r}; choose from {KINDS}")

    @property
    def dim(self) -> int:
        return 2 if self.kind.endswith("_2d") else 1

    @property
    def radius(self) -> int:
        return {"constant": 0, "minmod": 1, "mc": 1, "cweno3": 1, "cweno5": 2, "cweno3_2d": 1}[self.kind]

    @property
    def degree(self) -> int:
        return {"constant": 0, "minmod": 1, "mc": 1, "cweno3": 2, "cweno5": 4, "cweno3_2d": 2}[self.kind]

    @property
    def order(self) -> int:
        return self.degree + 1

    @property
    def _tables(self):
        return _tables(self.kind)

    def __call__(self, averages, dx, offset=None) -> CellPolynomials:
        return reconstruct(self, averages, dx, offset)


@lru_cache(maxsize=None)
def _tables(kind: str):
    if kind == "cweno3":
        exps = _exponents(1, 2)
        opt = ((-1,), (0,), (1,))
        cands = [((-1,), (0,)), ((0,), (1,))]
        weights = (0.5, 0.25, 0.25)
        opt_matrix = _interpolation_matrix(opt, exps)
    elif kind == "cweno5":
        exps = _exponents(1, 4)
        opt = tuple((s,) for s in range(-2, 3))
        cands = [((-2,), (-1,), (0,)), ((-1,), (0,), (1,)), ((0,), (1,), (2,))]
        weights = (0.75, 1 / 12, 1 / 12, 1 / 12)
        opt_matrix = _interpolation_matrix(opt, exps)
    elif kind == "cweno3_2d":
        exps = _exponents(2, 2)
        opt = ((0, 0),) + tuple(
            (a, b) for a in (-1, 0, 1) for b in (-1, 0, 1) if (a, b) != (0, 0)
        )
        # bilinear candidates on the four 2x2 quadrant blocks around the cell
        cands = [
            ((0, 0), (sx, 0), (0, sy), (sx, sy)) for sx, sy in ((1, 1), (-1, 1), (-1, -1), (1, -1))
        ]
        weights = (0.5, 0.125, 0.125, 0.125, 0.125)
        opt_matrix = _constrained_ls_matrix(opt, exps)
    else:
        return None
    dim = len(exps[0])
    candidates = []
    for offs in cands:
        if dim == 1:
            sub = _exponents(1, len(offs) - 1)
        else:
            sub = ((0, 0), (1, 0), (0, 1), (1, 1))
        G = _interpolation_matrix(offs, sub)
        full = np.zeros((len(exps), len(offs)))
        for i, e in enumerate(sub):
            full[exps.index(e)] = G[i]
        candidates.append(_Candidate(offs, full))
    return {
        "exponents": exps,
        "optimal": _Candidate(opt, opt_matrix),
        "candidates": candidates,
        "weights": weights,
        "indicator": _indicator_matrix(exps),
    }


# 1D CWENO uses a fixed epsilon; the 2D operator scales it with the cell area
CWENO_EPSILON_1D = 1e-6


def operator_for(order: int, dim: int = 1) -> ReconstructionOperator:
    """Default reconstruction for a target order of accuracy."""
    if dim == 1:
        kinds = {1: "constant", 2: "mc", 3: "cweno3", 5: "cweno5"}
        eps = CWENO_EPSILON_1D
    else:
        kinds = {1: "constant", 3: "cweno3_2d"}
        eps = None
    try:
        kind = kinds[order]
        return ReconstructionOperator(kind, epsilon=eps if kind.startswith("cweno") else None)
    except KeyError:
        raise ValueError(f"no {dim}D reconstruction of order {order}") from None


def _shifted(u, radius, dim, offset):
    """View of ``u`` shifted by the integer stencil ``offset`` on the reduced region."""
    sl = []
    for k in range(dim):
        n = u.shape[u.ndim - dim + k]
        sl.append(slice(radius + offset[k], n - radius + offset[k]))
    return u[(Ellipsis,) + tuple(sl)]


def _apply(matrix, offsets, views):
    out = []
    for row in matrix:
        acc = None
        for w, o in zip(row, offsets):
            if w == 0.0:
                continue
            t = w * views[o]
            acc = t if acc is None else acc + t
        out.append(acc if acc is not None else np.zeros_like(views[offsets[0]]))
    return np.stack(out)


def _indicator(coeffs, M):
    n = M.shape[0]
    out = 0.0
    for i in range(n):
        if not M[i, i] and not M[i].any():
            continue
        row = None
        for j in range(n):
            if M[i, j]:
                t = M[i, j] * coeffs[j]
                row = t if row is None else row + t
        if row is not None:
            out = out + coeffs[i] * row
    return out


def reconstruct(op: ReconstructionOperator, averages, dx, offset=None) -> CellPolynomials:
    """Reconstruct every cell whose full stencil lies inside ``averages``.

    ``averages`` may carry leading batch axes; the last ``op.dim`` axes are
    spatial. The result covers the array shrunk by ``op.radius`` on each side.
    """
    u = np.asarray(averages, dtype=float)
    dx = tuple(np.atleast_1d(dx).astype(float))
    # the constant reconstruction works in any dimension
    dim = len(dx) if op.kind == "constant" else op.dim
    if len(dx) != dim:
        raise ValueError(f"{op.kind} needs {dim} grid spacing(s)")
    if not np.all(np.isfinite(u)):
        raise ValueError("averages contain non-finite values (unpopulated ghosts?)")
    r = op.radius
    if any(u.shape[u.ndim - dim + k] <= 2 * r for k in range(dim)):
        raise ValueError("array too small for the reconstruction stencil")
    base = tuple(offset) if offset is not None else (0,) * dim
    out_offset = tuple(b + r for b in base)

    if op.kind == "constant":
        return CellPolynomials(u[None].copy(), _exponents(dim, 0), out_offset)

    if op.kind in ("minmod", "mc"):
        limiter = minmod if op.kind == "minmod" else monotonized_central
        c = _shifted(u, 1, 1, (0,))
        slope = limiter(_shifted(u, 1, 1, (1,)) - c, c - _shifted(u, 1, 1, (-1,)))
        return CellPolynomials(np.stack([c.copy(), slope]), _exponents(1, 1), out_offset)

    tab = op._tables
    exps = tab["exponents"]
    M = tab["indicator"]
    allofs = set(tab["optimal"].offsets)
    for cand in tab["candidates"]:
        allofs.update(cand.offsets)
    views = {o: _shifted(u, r, dim, o) for o in allofs}

    p_opt = _apply(tab["optimal"].matrix, tab["optimal"].offsets, views)
    polys = [_apply(c.matrix, c.offsets, views) for c in tab["candidates"]]
    d = tab["weights"]
    p0 = (p_opt - sum(dk * pk for dk, pk in zip(d[1:], polys))) / d[0]

    eps = op.epsilon if op.epsilon is not None else float(np.prod(dx))
    indicators = [_indicator(p_opt, M)] + [_indicator(pk, M) for pk in polys]
    alphas = [dk / (eps + ik) ** op.power for dk, ik in zip(d, indicators)]
    total = sum(alphas)
    coeffs = (alphas[0] / total) * p0
    for a, pk in zip(alphas[1:], polys):
        coeffs = coeffs + (a / total) * pk
    return CellPolynomials(coeffs, exps, out_offset)

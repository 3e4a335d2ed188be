"""Well-balanced quadrature of the gravity source.

The source ``-rho grad(Phi)`` is rewritten as ``(rho / alpha) grad(beta)``, and
its average along a segment is approximated by

    Q(y) = (y(a)/alpha(a) + y(b)/alpha(b)) / 2 * (beta(b) - beta(a)) / |b - a|

For ``y = alpha`` this is the exact average of ``grad(beta)``, which is what
cancels the pressure flux at equilibrium. Composite versions over ``2**level``
subsegments telescope in the same way; Richardson extrapolation between them
raises the order to ``2 + 2 * level``.
"""

from __future__ import annotations

import math

import numpy as np

from .core import gauss_legendre
from .equilibrium import EquilibriumPair


def romberg_level(order: int) -> int:
    """Smallest level with ``2 + 2 * level >= order``."""
    return max(0, math.ceil((order - 2) / 2))


def face_nodes(order: int):
    """Gauss rule (local nodes, weights) across a face, matched to the scheme order."""
    xs, ws = gauss_legendre(max(1, math.ceil(order / 2)))
    return [(float(x), float(w)) for x, w in zip(xs, ws)]


def composite_wb(ratio, beta, level: int, length: float = 1.0):
    """Composite rule over ``2**level`` equal subsegments.

    ``ratio`` and ``beta`` are sequences of ``2**level + 1`` node values
    (``y / alpha`` and ``beta``), arrays allowed.
    """
    m = 2 ** level
    if len(ratio) != m + 1 or len(beta) != m + 1:
        raise ValueError(f"need {m + 1} node values for level {level}")
    acc = 0.0
    for i in range(m):
        acc = acc + 0.5 * (ratio[i] + ratio[i + 1]) * (beta[i + 1] - beta[i])
    return acc / length


def romberg_from_nodes(ratio, beta, level: int, length: float = 1.0):
    """Richardson-extrapolated well-balanced rule from values at the finest nodes.

    Row ``k`` of the tableau combines composites with ``2**l`` and ``2**(l-1)``
    subsegments as ``(4**k T[l] - T[l-1]) / (4**k - 1)``.
    """
    m = 2 ** level
    if len(ratio) != m + 1 or len(beta) != m + 1:
        raise ValueError(f"need {m + 1} node values for level {level}")
    table = []
    for lev in range(level + 1):
        step = 2 ** (level - lev)
        table.append(composite_wb(ratio[::step], beta[::step], lev, length))
    for k in range(1, level + 1):
        f = 4.0 ** k
        table = [(f * table[i] - table[i - 1]) / (f - 1.0) for i in range(1, len(table))]
    return table[-1]


def _as_point(x):
    return tuple(float(v) for v in np.atleast_1d(x))


def _pair_at(pair: EquilibriumPair, pt):
    a = float(pair.alpha(*pt))
    if not a > 0:
        raise ValueError(f"alpha must be positive at quadrature node {pt}, got {a}")
    return a, float(pair.beta(*pt))


def _segment_nodes(a, b, level):
    a, b = _as_point(a), _as_point(b)
    if len(a) != len(b):
        raise ValueError("segment endpoints differ in dimension")
    m = 2 ** level
    pts = [tuple(ai + (bi - ai) * (i / m) for ai, bi in zip(a, b)) for i in range(m + 1)]
    return pts, math.dist(a, b)


def wb_rule_segment(y, pair: EquilibriumPair, a, b) -> float:
    """Second-order well-balanced average of ``(y / alpha) d(beta)`` along ``[a, b]``.

    ``y`` is a callable of the coordinates, ``a`` and ``b`` are points.
    """
    return romberg_wb(y, pair, a, b, 0)


def romberg_wb(y, pair: EquilibriumPair, a, b, level: int) -> float:
    """Well-balanced average along ``[a, b]`` with accuracy ``2 + 2 * level``."""
    if level < 0:
        raise ValueError("level must be non-negative")
    pts, length = _segment_nodes(a, b, level)
    if length == 0:
        raise ValueError("degenerate segment")
    ratio, beta = [], []
    for pt in pts:
        al, be = _pair_at(pair, pt)
        ratio.append(float(y(*pt)) / al)
        beta.append(be)
    return float(romberg_from_nodes(ratio, beta, level, length))


def _line_sources(pv, direction: int, transverse: tuple, level: int, dx: float):
    """Romberg averages of ``(rho / alpha) d(beta)`` and ``(m_k / alpha) d(beta)``
    along the cell segment in ``direction`` through transverse local point(s)."""
    m = 2 ** level
    r_rho, r_m, bet = [], [], []
    for i in range(m + 1):
        xi = list(transverse)
        xi.insert(direction, -0.5 + i / m)
        rho, mom, _ = pv.state_at(*xi)
        a, b = pv.equilibrium_at(*xi)
        r_rho.append(rho / a)
        r_m.append(mom[direction] / a)
        bet.append(b)
    return (romberg_from_nodes(r_rho, bet, level, dx),
            romberg_from_nodes(r_m, bet, level, dx))


def source_terms(pv, dx, order: int):
    """Cell-averaged source on every cell of the point-value block.

    Returns an array shaped like the conserved state on the block:
    zero density source, one momentum source per direction and the energy
    source summed over directions. In 2D each direction is averaged over the
    transverse face Gauss nodes.
    """
    dim = len(dx)
    level = romberg_level(order)
    out = np.zeros((dim + 2,) + tuple(pv.shape))
    trans = face_nodes(order) if dim > 1 else [(None, 1.0)]
    for k in range(dim):
        for eta, w in trans:
            t = () if eta is None else (eta,)
            s_mom, s_en = _line_sources(pv, k, t, level, dx[k])
            out[1 + k] += w * s_mom
            out[-1] += w * s_en
    return out


def source_cell_1d(pv, dx: float, order: int):
    """1D source ``(0, Q[rho], Q[m])`` on every cell of the block."""
    return source_terms(pv, (dx,), order)


def source_cell_2d(pv, dx, order: int):
    """2D source ``(0, Q_1, Q_2, Q^E)`` on every cell of the block."""
    if len(dx) != 2:
        raise ValueError("source_cell_2d needs two cell sizes")
    return source_terms(pv, tuple(dx), order)

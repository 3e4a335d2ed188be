"""Well-balanced reconstruction of point values from cell averages.

The reconstruction is applied to fluctuations from the prescribed equilibrium,
``r = rho - alpha``, ``mu = m - (U alpha, 0)``, ``pi = p - beta``, and the
equilibrium is added back pointwise. At equilibrium all fluctuation averages
vanish, every reconstruction returns zero, and both sides of each interface
see exactly the same state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CartesianGrid, gauss_legendre, project_cell_averages
from .equilibrium import EquilibriumPair
from .physics import check_physical
from .reconstruction import CellPolynomials, ReconstructionOperator, operator_for


def kinetic_nodes(order: int, dim: int):
    """Tensor Gauss rule (local nodes, weights) for the kinetic-energy averages.

    Uses ``ceil((q + 2) / 2)`` points per direction, the same rule that
    projects the equilibrium energy. On a moving equilibrium the kinetic
    average then cancels the projected ``U^2 alpha / 2`` term to round-off,
    so the moving state is an exact fixed point.
    """
    npts = max(1, math.ceil((order + 2) / 2))
    xs, ws = gauss_legendre(npts)
    nodes = []
    for idx in np.ndindex(*([npts] * dim)):
        nodes.append((tuple(float(xs[i]) for i in idx), float(np.prod([ws[i] for i in idx]))))
    return nodes


def required_ghost(op: ReconstructionOperator, order: int) -> int:
    """Ghost width so that point values exist on the interior plus one ring of cells.

    From third order on, the pressure averages themselves need reconstructed
    density and momentum, which doubles the stencil.
    """
    r = op.radius
    return 2 * r + 1 if order >= 3 else r + 1


class EquilibriumSampler:
    """Values of alpha and beta at a fixed local node of every (ghosted) cell, cached."""

    def __init__(self, pair: EquilibriumPair, grid: CartesianGrid):
        self.pair = pair
        self.grid = grid
        self._cache: dict = {}

    def at(self, *xi: float):
        key = tuple(float(v) for v in xi)
        hit = self._cache.get(key)
        if hit is None:
            X = self.grid.mesh(key)
            a = np.broadcast_to(self.pair.alpha(*X), self.grid.shape).astype(float)
            b = np.broadcast_to(self.pair.beta(*X), self.grid.shape).astype(float)
            hit = self._cache[key] = (a, b)
        return hit


def _region_slice(offset, shape):
    return tuple(slice(o, o + n) for o, n in zip(offset, shape))


@dataclass
class FluctuationAverages:
    """Cell averages of the equilibrium fluctuations.

    ``r`` and ``mu`` cover the whole ghosted grid; ``pi`` covers the region
    starting at ``pi_offset`` (the whole grid up to second order, a reduced
    region from third order on where it depends on reconstructions).
    """

    r: np.ndarray
    mu: np.ndarray
    pi: np.ndarray
    pi_offset: tuple
    density_momentum: CellPolynomials | None = None


class PointValues:
    """Evaluable reconstructions of density, momentum and pressure on a block of cells.

    ``state_at(*xi)`` returns ``(rho, m, p)`` at local point ``xi`` in every
    cell of the block; ``conserved_at`` adds the total energy.
    """

    gamma: float
    offset: tuple
    shape: tuple

    def __init__(self):
        self._cache: dict = {}

    def _compute(self, xi):
        raise NotImplementedError

    def state_at(self, *xi: float):
        key = tuple(float(v) for v in xi)
        hit = self._cache.get(key)
        if hit is None:
            rho, m, p = self._compute(key)
            check_physical(rho, p, f"reconstruction at local point {key}")
            hit = self._cache[key] = (rho, m, p)
        return hit

    def conserved_at(self, *xi: float):
        """Conserved state with ``E = p / (gamma - 1) + |m|^2 / (2 rho)`` at the same point, and ``p``."""
        rho, m, p = self.state_at(*xi)
        U = np.empty((m.shape[0] + 2,) + rho.shape)
        U[0] = rho
        U[1:-1] = m
        U[-1] = p / (self.gamma - 1.0) + 0.5 * np.sum(m * m, axis=0) / rho
        return U, p

    def equilibrium_at(self, *xi: float):
        """``(alpha, beta)`` at local point ``xi`` on this block (UNB blocks use the pair too)."""
        a, b = self.sampler.at(*xi)
        sl = _region_slice(self.offset, self.shape)
        return a[sl], b[sl]


class WBPointValues(PointValues):
    """``rho = r + alpha``, ``m = mu + (U alpha, 0)``, ``p = pi + beta`` pointwise."""

    def __init__(self, fluct: CellPolynomials, pressure: CellPolynomials,
                 sampler: EquilibriumSampler, U: float, gamma: float):
        super().__init__()
        self.fluct = fluct
        self.pressure = pressure
        self.sampler = sampler
        self.U = U
        self.gamma = gamma
        self.offset = pressure.offset
        self.shape = pressure.shape

    def _compute(self, xi):
        a, b = self.equilibrium_at(*xi)
        vals = self.fluct.at(*xi)
        rho = vals[0] + a
        m = vals[1:].copy()
        if self.U != 0.0:
            m[0] += self.U * a
        p = self.pressure.at(*xi) + b
        return rho, m, p


class UNBPointValues(PointValues):
    """Direct reconstruction of ``(rho, m, E)``; pressure from the pointwise conversion."""

    def __init__(self, polys: CellPolynomials, sampler: EquilibriumSampler, gamma: float):
        super().__init__()
        self.polys = polys
        self.sampler = sampler
        self.gamma = gamma
        self.offset = polys.offset
        self.shape = polys.shape

    def _compute(self, xi):
        vals = self.polys.at(*xi)
        rho, m, E = vals[0], vals[1:-1], vals[-1]
        p = (self.gamma - 1.0) * (E - 0.5 * np.sum(m * m, axis=0) / rho)
        return rho, m, p


class WBReconstructor:
    """The well-balanced reconstruction pipeline for one grid, pair and order.

    Cell averages of alpha and beta are projected once, with a Gauss rule two
    orders above the scheme. ``mode='unb'`` reconstructs the conservative
    variables directly instead (the deliberately unbalanced comparison scheme).
    """

    def __init__(self, grid: CartesianGrid, pair: EquilibriumPair, order: int,
                 gamma: float = 1.4, op: ReconstructionOperator | None = None,
                 mode: str = "wb"):
        if pair.dim != grid.dim:
            raise ValueError(f"{pair.dim}D equilibrium on a {grid.dim}D grid")
        self.grid = grid
        self.pair = pair
        self.order = order
        self.gamma = gamma
        self.op = op if op is not None else operator_for(order, grid.dim)
        if self.op.kind != "constant" and self.op.dim != grid.dim:
            raise ValueError(f"{self.op.kind} does not match a {grid.dim}D grid")
        if mode not in ("wb", "unb"):
            raise ValueError(f"mode must be 'wb' or 'unb', got {mode!r}")
        self.mode = mode
        need = required_ghost(self.op, order)
        if grid.ghost < need:
            raise ValueError(f"ghost width {grid.ghost} too small, need {need}")
        self.sampler = EquilibriumSampler(pair, grid)
        self.alpha_bar = project_cell_averages(pair.alpha, grid, order + 2)
        self.beta_bar = project_cell_averages(pair.beta, grid, order + 2)
        self.kinetic = kinetic_nodes(order, grid.dim)
        # point values are needed on the interior plus one ring
        self.block_offset = (grid.ghost - 1,) * grid.dim
        self.block_shape = tuple(n + 2 for n in grid.n)

    @property
    def U(self) -> float:
        return self.pair.U

    def fluctuation_averages(self, cons: np.ndarray) -> FluctuationAverages:
        g, d = self.gamma, self.grid.dim
        rho, m, E = cons[0], cons[1:1 + d], cons[1 + d]
        r = rho - self.alpha_bar
        mu = m.copy()
        if self.U != 0.0:
            mu[0] -= self.U * self.alpha_bar
        if self.order <= 2:
            p = (g - 1.0) * (E - 0.5 * np.sum(m * m, axis=0) / rho)
            return FluctuationAverages(r, mu, p - self.beta_bar, (0,) * d)
        polys = self.op(np.concatenate([r[None], mu]), self.grid.dx)
        sl = _region_slice(polys.offset, polys.shape)
        K = 0.0
        for xi, w in self.kinetic:
            a, _ = self.sampler.at(*xi)
            vals = polys.at(*xi)
            rho_k = vals[0] + a[sl]
            m_k = vals[1:]
            if self.U != 0.0:
                m_k = m_k.copy()
                m_k[0] += self.U * a[sl]
            check_physical(rho_k, np.ones_like(rho_k), "kinetic energy quadrature")
            K = K + w * (0.5 * np.sum(m_k * m_k, axis=0) / rho_k)
        p = (g - 1.0) * (E[sl] - K)
        return FluctuationAverages(r, mu, p - self.beta_bar[sl], polys.offset, polys)

    def reconstruct(self, cons: np.ndarray) -> PointValues:
        """Point values on the interior plus one ring of ghost cells."""
        if self.mode == "unb":
            polys = self.op(cons, self.grid.dx)
            pv = UNBPointValues(polys.restrict(self.block_offset, self.block_shape),
                                self.sampler, self.gamma)
            return pv
        fl = self.fluctuation_averages(cons)
        dx = self.grid.dx
        if self.order <= 2:
            both = self.op(np.concatenate([fl.r[None], fl.mu, fl.pi[None]]), dx)
            fluct, pres = both[:-1], both[-1]
        else:
            fluct = fl.density_momentum
            pres = self.op(fl.pi, dx, offset=fl.pi_offset)
        fluct = fluct.restrict(self.block_offset, self.block_shape)
        pres = pres.restrict(self.block_offset, self.block_shape)
        return WBPointValues(fluct, pres, self.sampler, self.U, self.gamma)


def fluctuation_averages(cons, pair, grid, order, gamma=1.4, op=None) -> FluctuationAverages:
    """One-shot form of :meth:`WBReconstructor.fluctuation_averages`."""
    return WBReconstructor(grid, pair, order, gamma, op).fluctuation_averages(cons)


def wb_reconstruct(cons, pair, grid, order, gamma=1.4, op=None) -> WBPointValues:
    """One-shot form of :meth:`WBReconstructor.reconstruct`."""
    return WBReconstructor(grid, pair, order, gamma, op).reconstruct(cons)

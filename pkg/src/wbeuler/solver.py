"""Semidiscrete right-hand side, boundary conditions, time step and SSP Runge-Kutta evolution.

A :class:`Scheme` owns a grid (with a ghost layer wide enough for its
reconstruction), an equilibrium pair, and the precomputed equilibrium cell
averages. States are full ghosted arrays ``(d + 2, *grid.shape)``; ghosts are
refilled from the boundary description before every right-hand-side call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BOUNDARY_MODES, CartesianGrid, project_cell_averages
from .equilibrium import EquilibriumPair
from .physics import FLUXES, NonPhysicalStateError, check_physical, max_wave_speed, pressure
from .reconstruction import ReconstructionOperator, operator_for
from .source import face_nodes, source_terms
from .wellbalance import WBReconstructor, required_ghost


def _side_modes(boundary, dim):
    """Normalise to one mode per side: ``[(lo, hi) for each axis]``."""
    if isinstance(boundary, str):
        modes = [(boundary, boundary)] * dim
    else:
        flat = list(boundary)
        if len(flat) == dim and all(isinstance(b, (tuple, list)) for b in flat):
            modes = [tuple(b) for b in flat]
        elif len(flat) == 2 * dim:
            modes = [(flat[2 * k], flat[2 * k + 1]) for k in range(dim)]
        else:
            raise ValueError(f"cannot read boundary description {boundary!r}")
    for lo, hi in modes:
        for m in (lo, hi):
            if m not in BOUNDARY_MODES:
                raise ValueError(f"unknown boundary mode {m!r}")
        if (lo == "periodic") != (hi == "periodic"):
            raise ValueError("periodic boundaries must be used on both sides of an axis")
    return modes


def _axis_slice(ndim_lead, axis, sl):
    return (slice(None),) * ndim_lead + (slice(None),) * axis + (sl,)


class Scheme:
    """Well-balanced (or deliberately unbalanced) finite-volume scheme on one grid.

    ``exact`` is a pointwise conserved-state function ``exact(t, *coords)``
    used by the ``exact`` boundary mode. The grid's ghost width is raised to
    what the reconstruction needs.
    """

    def __init__(self, grid: CartesianGrid, pair: EquilibriumPair, order: int = 3,
                 gamma: float = 1.4, mode: str = "wb", boundary="equilibrium",
                 exact=None, flux: str = "rusanov", cfl: float = 0.45,
                 time_scaling: bool = False, op: ReconstructionOperator | None = None):
        op = op if op is not None else operator_for(order, grid.dim)
        need = required_ghost(op, order)
        self.grid = grid if grid.ghost >= need else grid.with_ghost(need)
        self.pair = pair
        self.order = order
        self.gamma = gamma
        self.mode = mode
        self.cfl = cfl
        self.time_scaling = time_scaling
        if flux not in FLUXES:
            raise ValueError(f"unknown flux {flux!r}")
        self.flux = FLUXES[flux]
        self.boundary = _side_modes(boundary, self.grid.dim)
        if exact is None and any("exact" in s for s in self.boundary):
            raise ValueError("exact boundary mode needs an exact solution")
        self.exact = exact
        self.recon = WBReconstructor(self.grid, pair, order, gamma, op, mode)
        self.faces = face_nodes(order) if self.grid.dim > 1 else [(None, 1.0)]
        self.equilibrium = self._equilibrium_state()

    @property
    def dim(self) -> int:
        return self.grid.dim

    def _equilibrium_state(self) -> np.ndarray:
        g, d, U = self.gamma, self.dim, self.pair.U
        eq = np.zeros((d + 2,) + self.grid.shape)
        eq[0] = self.recon.alpha_bar
        if U != 0.0:
            eq[1] = U * self.recon.alpha_bar
            eq[-1] = project_cell_averages(self.pair.energy(g), self.grid, self.order + 2)
        else:
            eq[-1] = self.recon.beta_bar / (g - 1.0)
        return eq

    def project(self, fn, t: float | None = None) -> np.ndarray:
        """Cell averages of a pointwise conserved-state function, two orders above the scheme."""
        f = fn if t is None else (lambda *X: fn(t, *X))
        return project_cell_averages(f, self.grid, self.order + 2)

    # boundaries

    def apply_boundary(self, U: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Fill the ghost cells of ``U`` in place and return it."""
        g, n = self.grid.ghost, self.grid.n
        exact_avg = None
        for k, (lo_mode, hi_mode) in enumerate(self.boundary):
            lo_sl = _axis_slice(1, k, slice(0, g))
            hi_sl = _axis_slice(1, k, slice(n[k] + g, n[k] + 2 * g))
            if lo_mode == "periodic":
                U[lo_sl] = U[_axis_slice(1, k, slice(n[k], n[k] + g))]
                U[hi_sl] = U[_axis_slice(1, k, slice(g, 2 * g))]
                continue
            for mode, sl, edge in ((lo_mode, lo_sl, g), (hi_mode, hi_sl, n[k] + g - 1)):
                if mode == "equilibrium":
                    U[sl] = self.equilibrium[sl]
                elif mode == "exact":
                    if exact_avg is None:
                        exact_avg = self.project(self.exact, t)
                    U[sl] = exact_avg[sl]
                else:
                    U[sl] = U[_axis_slice(1, k, slice(edge, edge + 1))]
        return U

    # spatial operator

    def rhs(self, U: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Cell-average time derivative on the interior (ghost entries are zero)."""
        work = self.apply_boundary(np.array(U, dtype=float, copy=True), t)
        if not np.all(np.isfinite(work)):
            raise NonPhysicalStateError("non-finite values in the state")
        pv = self.recon.reconstruct(work)
        d, n, dx = self.dim, self.grid.n, self.grid.dx
        inner = tuple(slice(1, m + 1) for m in n)
        div = 0.0
        for k in range(d):
            left_cells = list(inner)
            right_cells = list(inner)
            left_cells[k] = slice(0, n[k] + 1)
            right_cells[k] = slice(1, n[k] + 2)
            lsl = (slice(None),) + tuple(left_cells)
            rsl = (slice(None),) + tuple(right_cells)
            face_flux = 0.0
            for eta, w in self.faces:
                t_pt = [] if eta is None else [eta]
                xl = list(t_pt)
                xr = list(t_pt)
                xl.insert(k, 0.5)
                xr.insert(k, -0.5)
                UL, pL = pv.conserved_at(*xl)
                UR, pR = pv.conserved_at(*xr)
                F = self.flux(UL[lsl], UR[rsl], pL[lsl[1:]], pR[rsl[1:]], self.gamma, k)
                face_flux = face_flux + w * F
            hi = _axis_slice(1, k, slice(1, None))
            lo = _axis_slice(1, k, slice(0, -1))
            div = div + (face_flux[hi] - face_flux[lo]) / dx[k]
        src = source_terms(pv, dx, self.order)[(slice(None),) + inner]
        out = np.zeros_like(work)
        out[(slice(None),) + self.grid.interior] = src - div
        return out

    def stable_dt(self, U: np.ndarray) -> float:
        """CFL step ``c * min(dx) / max(sum_k (|v_k| + c_s))`` over interior cells."""
        inner = U[(slice(None),) + self.grid.interior]
        check_physical(inner[0], pressure(inner, self.gamma), "time-step estimate")
        speed = sum(max_wave_speed(inner, self.gamma, k) for k in range(self.dim))
        smax = float(np.max(speed))
        if not smax > 0:
            return math.inf
        h = min(self.grid.dx)
        dt = self.cfl * h / smax
        if self.time_scaling and self.order > 3:
            dt *= h ** (self.order / 3.0 - 1.0)
        return dt

    def initial_state(self, fn=None) -> np.ndarray:
        """Cell averages of ``fn(*coords)`` (or the equilibrium when ``fn`` is None), ghosts filled."""
        U = self.equilibrium.copy() if fn is None else self.project(fn)
        return self.apply_boundary(U, 0.0)


@dataclass(frozen=True)
class TimeIntegrator:
    """Shu-Osher form: stage ``i`` is ``a_i U^n + (1 - a_i)(U_i + dt L(U_i, t + c_i dt))``."""

    kind: str
    a: tuple
    c: tuple

    @property
    def stages(self) -> int:
        return len(self.a)


FORWARD_EULER = TimeIntegrator("forward-euler", (0.0,), (0.0,))
SSP_RK2 = TimeIntegrator("ssp-rk2", (0.0, 0.5), (0.0, 1.0))
SSP_RK3 = TimeIntegrator("ssp-rk3", (0.0, 0.75, 1.0 / 3.0), (0.0, 1.0, 0.5))
INTEGRATORS = {ti.kind: ti for ti in (FORWARD_EULER, SSP_RK2, SSP_RK3)}


def integrator_for(order: int) -> TimeIntegrator:
    """Forward Euler for first order, Heun for second, SSP-RK3 above."""
    if order <= 1:
        return FORWARD_EULER
    if order == 2:
        return SSP_RK2
    return SSP_RK3


def advance(scheme: Scheme, integrator: TimeIntegrator, U: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One SSP Runge-Kutta step of size ``dt``."""
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    stage = U
    for i, (a, c) in enumerate(zip(integrator.a, integrator.c)):
        try:
            L = scheme.rhs(stage, t + c * dt)
        except NonPhysicalStateError as err:
            raise NonPhysicalStateError(
                f"{integrator.kind} stage {i + 1} at t={t + c * dt:.6g}: {err}") from err
        euler = stage + dt * L
        stage = euler if a == 0.0 else a * U + (1.0 - a) * euler
    inner = stage[(slice(None),) + scheme.grid.interior]
    rho = inner[0]
    p = (scheme.gamma - 1.0) * (inner[-1] - 0.5 * np.sum(inner[1:-1] ** 2, axis=0) / rho)
    check_physical(rho, p, f"cell averages after step at t={t + dt:.6g}")
    return stage


@dataclass
class EvolutionResult:
    state: np.ndarray
    t: float
    steps: int


def evolve(scheme: Scheme, U0: np.ndarray, t_final: float,
           integrator: TimeIntegrator | None = None, callback=None,
           max_steps: int | None = None) -> EvolutionResult:
    """Integrate from ``t = 0`` to ``t_final``; the last step is clipped to land on it."""
    integ = integrator if integrator is not None else integrator_for(scheme.order)
    U = scheme.apply_boundary(np.array(U0, dtype=float, copy=True), 0.0)
    t, steps = 0.0, 0
    while t < t_final:
        dt = scheme.stable_dt(U)
        last = t + dt >= t_final
        if last:
            dt = t_final - t
        U = advance(scheme, integ, U, t, dt)
        t = t_final if last else t + dt
        steps += 1
        if callback is not None:
            callback(U, t, steps)
        if max_steps is not None and steps >= max_steps and t < t_final:
            break
    scheme.apply_boundary(U, t)
    return EvolutionResult(U, t, steps)

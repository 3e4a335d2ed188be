"""Equilibrium pairs (alpha, beta) with grad(beta) = -alpha grad(Phi).

A pair fixes the hydrostatic (or, with ``U != 0``, transversally moving) steady
state the scheme preserves: density ``alpha``, pressure ``beta``, velocity
``(U, 0)``. All callables take one coordinate array per space direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import CartesianGrid, project_cell_averages

__all__ = [
    "Potential",
    "EquilibriumPair",
    "EquilibriumCheck",
    "POTENTIALS",
    "potential",
    "isothermal_pair",
    "polytropic_pair",
    "radial_general_pair",
    "nonisothermal_1d_pair",
    "constant_density_pair",
    "verify_equilibrium_identity",
    "project_cell_averages",
    "make_pair",
    "PAIRS",
]


@dataclass(frozen=True)
class Potential:
    name: str
    dim: int
    phi: Callable
    grad: Callable


def _radius(x, y):
    return np.sqrt(x * x + y * y)


def _radial_grad(dphi_dr):
    def grad(x, y):
        r = _radius(x, y)
        safe = np.where(r > 0, r, 1.0)
        g = np.where(r > 0, dphi_dr(r) / safe, 0.0)
        return g * x, g * y
    return grad


POTENTIALS: dict[str, Potential] = {
    p.name: p
    for p in [
        Potential("zero", 1, lambda x: np.zeros_like(x), lambda x: (np.zeros_like(x),)),
        Potential("x", 1, lambda x: 1.0 * x, lambda x: (np.ones_like(x),)),
        Potential("x2", 1, lambda x: x * x, lambda x: (2.0 * x,)),
        Potential("x2half", 1, lambda x: 0.5 * x * x, lambda x: (1.0 * x,)),
        Potential("-x2half", 1, lambda x: -0.5 * x * x, lambda x: (-1.0 * x,)),
        Potential(
            "sin2pix",
            1,
            lambda x: np.sin(2 * np.pi * x),
            lambda x: (2 * np.pi * np.cos(2 * np.pi * x),),
        ),
        Potential(
            "zero2d", 2, lambda x, y: np.zeros_like(x + y),
            lambda x, y: (np.zeros_like(x + y), np.zeros_like(x + y)),
        ),
        Potential(
            "x+y", 2, lambda x, y: x + y,
            lambda x, y: (np.ones_like(x + y), np.ones_like(x + y)),
        ),
        Potential(
            "y", 2, lambda x, y: y + 0.0 * x,
            lambda x, y: (np.zeros_like(x + y), np.ones_like(x + y)),
        ),
        Potential("r", 2, _radius, _radial_grad(lambda r: np.ones_like(r))),
        Potential(
            "r2half", 2, lambda x, y: 0.5 * (x * x + y * y),
            lambda x, y: (x + 0.0 * y, y + 0.0 * x),
        ),
        Potential(
            "r2", 2, lambda x, y: x * x + y * y,
            lambda x, y: (2.0 * x + 0.0 * y, 2.0 * y + 0.0 * x),
        ),
    ]
}


def potential(name_or_obj) -> Potential:
    if isinstance(name_or_obj, Potential):
        return name_or_obj
    try:
        return POTENTIALS[name_or_obj]
    except KeyError:
        raise ValueError(
            f"unknown potential {name_or_obj!r}; choose from {sorted(POTENTIALS)}"
        ) from None


@dataclass(frozen=True)
class EquilibriumPair:
    """Target steady state: density ``alpha``, pressure ``beta``, velocity ``(U, 0)``."""

    alpha: Callable
    beta: Callable
    phi: Callable
    grad_phi: Callable
    dim: int
    U: float = 0.0
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def check_moving(self) -> None:
        """A moving equilibrium needs d = 2 and gravity aligned with y."""
        if self.U == 0.0:
            return
        if self.dim != 2:
            raise ValueError("a moving equilibrium needs two space dimensions")
        pts = np.linspace(-2.0, 2.0, 9)
        gx, _ = self.grad_phi(*np.meshgrid(pts, pts, indexing="ij"))
        if np.any(np.asarray(gx) != 0):
            raise ValueError("a moving equilibrium needs gravity aligned with y")

    def moving(self, U: float, allow_skew: bool = False) -> "EquilibriumPair":
        """Same (alpha, beta) with transverse equilibrium speed ``U``.

        ``allow_skew`` skips the alignment check; the result is then only a
        change of reconstruction variables, not a steady state.
        """
        pair = replace(self, U=float(U), params={**self.params, "U": float(U)})
        if not allow_skew:
            pair.check_moving()
        return pair

    def scaled(self, K: float) -> "EquilibriumPair":
        """The pair ``(K alpha, K beta)``, also an equilibrium for the same potential."""
        a, b = self.alpha, self.beta
        return replace(
            self,
            alpha=lambda *x: K * a(*x),
            beta=lambda *x: K * b(*x),
            name=f"{self.name}*{K:g}",
        )

    def energy(self, gamma: float) -> Callable:
        """Total energy density ``beta / (gamma - 1) + U^2 alpha / 2`` of the steady state."""
        U = self.U
        return lambda *x: self.beta(*x) / (gamma - 1.0) + 0.5 * U * U * self.alpha(*x)

    def state(self, gamma: float) -> Callable:
        """Pointwise conserved equilibrium state ``(rho, m, E)``."""
        def fn(*x):
            a = np.asarray(self.alpha(*x), dtype=float)
            out = np.zeros((self.dim + 2,) + a.shape)
            out[0] = a
            if self.U != 0.0:
                out[1] = self.U * a
            out[-1] = self.energy(gamma)(*x)
            return out
        return fn


def isothermal_pair(phi="x", T_eq: float = 1.0, U: float = 0.0,
                    allow_skew: bool = False) -> EquilibriumPair:
    """``alpha = exp(-Phi/T) / T``, ``beta = exp(-Phi/T)``."""
    if not T_eq > 0:
        raise ValueError(f"temperature must be positive, got {T_eq}")
    pot = potential(phi)
    T = float(T_eq)
    pair = EquilibriumPair(
        alpha=lambda *x: np.exp(-pot.phi(*x) / T) / T,
        beta=lambda *x: np.exp(-pot.phi(*x) / T),
        phi=pot.phi,
        grad_phi=pot.grad,
        dim=pot.dim,
        U=float(U),
        name="isothermal",
        params={"potential": pot.name, "T_eq": T, "U": float(U)},
    )
    if not allow_skew:
        pair.check_moving()
    return pair


def polytropic_pair(phi="x2", nu: float = 1.2, U: float = 0.0,
                    allow_skew: bool = False) -> EquilibriumPair:
    """``alpha = (1 - (nu - 1)/nu Phi)^(1/(nu - 1))``, ``beta = alpha^nu``."""
    if not nu > 1:
        raise ValueError(f"polytropic exponent must exceed 1, got {nu}")
    pot = potential(phi)
    c = (nu - 1.0) / nu

    def alpha(*x):
        base = 1.0 - c * pot.phi(*x)
        if np.any(base <= 0):
            raise ValueError("polytropic equilibrium undefined: 1 - (nu-1)/nu * Phi <= 0")
        return base ** (1.0 / (nu - 1.0))

    pair = EquilibriumPair(
        alpha=alpha,
        beta=lambda *x: alpha(*x) ** nu,
        phi=pot.phi,
        grad_phi=pot.grad,
        dim=pot.dim,
        U=float(U),
        name="polytropic",
        params={"potential": pot.name, "nu": float(nu), "U": float(U)},
    )
    if not allow_skew:
        pair.check_moving()
    return pair


def radial_general_pair(phi_scale: float = 0.5) -> EquilibriumPair:
    """``alpha = exp(-r)``, ``beta = (1 + r) exp(-r)`` around ``Phi = phi_scale * r^2``.

    Only ``phi_scale = 1/2`` satisfies the equilibrium identity; other values
    are accepted so the mismatch can be demonstrated.
    """
    s = float(phi_scale)
    return EquilibriumPair(
        alpha=lambda x, y: np.exp(-_radius(x, y)),
        beta=lambda x, y: (1.0 + _radius(x, y)) * np.exp(-_radius(x, y)),
        phi=lambda x, y: s * (x * x + y * y),
        grad_phi=lambda x, y: (2 * s * x + 0.0 * y, 2 * s * y + 0.0 * x),
        dim=2,
        name="radial",
        params={"phi_scale": s},
    )


def nonisothermal_1d_pair(phi_sign: float = 1.0) -> EquilibriumPair:
    """``alpha = exp(-x)``, ``beta = (1 + x) exp(-x)``, temperature ``1 + x``.

    The consistent potential is ``+x^2/2``; ``phi_sign=-1`` builds the
    inconsistent variant for diagnostics.
    """
    pot = potential("x2half" if phi_sign > 0 else "-x2half")
    return EquilibriumPair(
        alpha=lambda x: np.exp(-x),
        beta=lambda x: (1.0 + x) * np.exp(-x),
        phi=pot.phi,
        grad_phi=pot.grad,
        dim=1,
        name="nonisothermal",
        params={"phi_sign": float(np.sign(phi_sign))},
    )


def constant_density_pair(phi="x", rho0: float = 1.0, p_ref: float = 10.0) -> EquilibriumPair:
    """Constant density ``rho0`` with ``beta = p_ref - rho0 Phi``."""
    pot = potential(phi)
    return EquilibriumPair(
        alpha=lambda *x: rho0 + 0.0 * pot.phi(*x),
        beta=lambda *x: p_ref - rho0 * pot.phi(*x),
        phi=pot.phi,
        grad_phi=pot.grad,
        dim=pot.dim,
        name="constant_density",
        params={"potential": pot.name, "rho0": rho0, "p_ref": p_ref},
    )


PAIRS = {
    "isothermal": isothermal_pair,
    "polytropic": polytropic_pair,
    "radial": radial_general_pair,
    "nonisothermal": nonisothermal_1d_pair,
    "constant_density": constant_density_pair,
}


def make_pair(name: str, **params) -> EquilibriumPair:
    """Build a registered pair by name, e.g. ``make_pair("isothermal", phi="x2", T_eq=1)``."""
    try:
        factory = PAIRS[name]
    except KeyError:
        raise ValueError(f"unknown equilibrium {name!r}; choose from {sorted(PAIRS)}") from None
    return factory(**params)


@dataclass(frozen=True)
class EquilibriumCheck:
    max_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


def verify_equilibrium_identity(pair: EquilibriumPair, points, h: float = 1e-4,
                                tol: float | None = None) -> EquilibriumCheck:
    """Compare a central-difference gradient of ``beta`` with ``-alpha grad(Phi)``.

    ``points`` has shape ``(npts, dim)`` (or ``(npts,)`` in 1D). The default
    tolerance ``100 h^2 max|alpha grad Phi|`` dominates the truncation error of
    the check itself.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    pts = np.asarray(points, dtype=float).reshape(-1, pair.dim)
    coords = [pts[:, k] for k in range(pair.dim)]
    a = pair.alpha(*coords)
    grads = pair.grad_phi(*coords)
    resid = np.zeros(len(pts))
    scale = 0.0
    for k in range(pair.dim):
        plus = list(coords)
        minus = list(coords)
        plus[k] = coords[k] + h
        minus[k] = coords[k] - h
        dbeta = (pair.beta(*plus) - pair.beta(*minus)) / (2 * h)
        rhs = -a * grads[k]
        resid = np.maximum(resid, np.abs(dbeta - rhs))
        scale = max(scale, float(np.max(np.abs(rhs))))
    if tol is None:
        # floor covers round-off of the difference quotient
        tol = 100 * h * h * max(scale, 1.0) + 1e-13 / h
    return EquilibriumCheck(float(np.max(resid)), float(tol))


def equilibrium_averages(pair: EquilibriumPair, grid: CartesianGrid, gamma: float,
                         order: int) -> np.ndarray:
    """Cell averages of the equilibrium conserved state on every cell."""
    return project_cell_averages(pair.state(gamma), grid, order)


def minimum_on(pair: EquilibriumPair, grid: CartesianGrid) -> float:
    vals = [np.min(pair.alpha(*grid.mesh())), np.min(pair.beta(*grid.mesh()))]
    return float(min(vals))


def average_temperature(rho_fn, p_fn, grid: CartesianGrid, order: int = 5) -> float:
    """Mean of ``p / rho`` over the physical domain."""
    T = project_cell_averages(lambda *x: p_fn(*x) / rho_fn(*x), grid, order)
    return float(np.mean(T[grid.interior]))


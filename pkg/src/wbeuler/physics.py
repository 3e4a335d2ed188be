"""Ideal-gas Euler equations: pressure, physical flux, wave speeds, numerical flux.

States are arrays with the component axis first: ``U = (rho, m_1, ..., m_d, E)``.
Any trailing shape is allowed, so the same functions serve single states and
whole fields.
"""

from __future__ import annotations

import numpy as np


class NonPhysicalStateError(ValueError):
    """Raised when a density or pressure is not strictly positive."""


def _check_density(rho):
    if np.any(~(rho > 0)):
        raise NonPhysicalStateError(f"non-positive density (min {np.min(rho):.3e})")


def pressure(U, gamma: float) -> np.ndarray:
    """Ideal-gas pressure ``(gamma - 1)(E - |m|^2 / (2 rho))``.

    Raises on non-positive density. A non-positive result is returned as is;
    use :func:`check_physical` when it must abort.
    """
    U = np.asarray(U, dtype=float)
    rho, m, E = U[0], U[1:-1], U[-1]
    _check_density(rho)
    return (gamma - 1.0) * (E - 0.5 * np.sum(m * m, axis=0) / rho)


def check_physical(rho, p, where: str = "") -> None:
    if np.any(~(rho > 0)) or np.any(~(p > 0)):
        loc = f" in {where}" if where else ""
        raise NonPhysicalStateError(
            f"non-physical state{loc}: min rho {np.min(rho):.3e}, min p {np.min(p):.3e}"
        )


def conserved_from_primitive(rho, v, p, gamma: float) -> np.ndarray:
    """``(rho, rho v, p / (gamma - 1) + rho |v|^2 / 2)`` with ``v`` of shape ``(d, ...)``."""
    rho = np.asarray(rho, dtype=float)
    p = np.asarray(p, dtype=float)
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim == 1:
        v = v.reshape(v.shape + (1,) * rho.ndim)
    shape = np.broadcast_shapes(rho.shape, v.shape[1:], p.shape)
    U = np.empty((v.shape[0] + 2,) + shape)
    U[0] = rho
    U[1:-1] = rho * v
    U[-1] = p / (gamma - 1.0) + 0.5 * rho * np.sum(v * v, axis=0)
    return U


def primitive_from_conserved(U, gamma: float):
    """Return ``(rho, v, p)``."""
    U = np.asarray(U, dtype=float)
    p = pressure(U, gamma)
    return U[0], U[1:-1] / U[0], p


def _flux_with_pressure(U, p, k: int) -> np.ndarray:
    rho, m, E = U[0], U[1:-1], U[-1]
    vk = m[k] / rho
    f = np.empty_like(U)
    f[0] = m[k]
    f[1:-1] = vk * m
    f[1 + k] += p
    f[-1] = vk * (E + p)
    return f


def euler_flux(U, gamma: float, k: int = 0) -> np.ndarray:
    """Physical flux in direction ``k``: ``(rho v_k, rho v_k v + p e_k, v_k (E + p))``."""
    U = np.asarray(U, dtype=float)
    return _flux_with_pressure(U, pressure(U, gamma), k)


def _speed_with_pressure(U, p, gamma, k):
    return np.abs(U[1 + k] / U[0]) + np.sqrt(gamma * p / U[0])


def max_wave_speed(U, gamma: float, k: int = 0) -> np.ndarray:
    """``|v_k| + c`` with ``c = sqrt(gamma p / rho)``."""
    U = np.asarray(U, dtype=float)
    return _speed_with_pressure(U, pressure(U, gamma), gamma, k)


def rusanov_flux(UL, UR, gamma: float, k: int = 0) -> np.ndarray:
    """Local Lax-Friedrichs flux between a left and a right state.

    ``F = (f(UL) + f(UR)) / 2 - mu (UR - UL) / 2`` with ``mu`` the larger of the
    two local wave speeds. For identical inputs the dissipation is exactly zero
    and ``F`` equals the physical flux bit for bit.
    """
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    return rusanov_flux_p(UL, UR, pressure(UL, gamma), pressure(UR, gamma), gamma, k)


def rusanov_flux_p(UL, UR, pL, pR, gamma: float, k: int = 0) -> np.ndarray:
    """:func:`rusanov_flux` with pressures already known (no re-derivation from E)."""
    fL = _flux_with_pressure(UL, pL, k)
    fR = _flux_with_pressure(UR, pR, k)
    mu = np.maximum(
        _speed_with_pressure(UL, pL, gamma, k), _speed_with_pressure(UR, pR, gamma, k)
    )
    return 0.5 * (fL + fR) - 0.5 * mu * (UR - UL)


FLUXES = {"rusanov": rusanov_flux_p}

"""Closed-form initial data and reference solutions for the experiment suite.

Primitive-state functions return ``(rho, v, p)`` with ``v`` shaped
``(d, ...)``; :func:`conserved` turns any of them into a pointwise conserved
state usable by :func:`wbeuler.core.project_cell_averages`.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import gauss_legendre
from ..physics import conserved_from_primitive


def conserved(prim_fn, gamma: float):
    """Wrap a primitive-state function ``f(*x) -> (rho, v, p)`` as a conserved-state function."""
    def fn(*x):
        rho, v, p = prim_fn(*x)
        return conserved_from_primitive(rho, v, p, gamma)
    return fn


def manufactured_1d(x, t: float = 0.0, k: float = 5.0, u0: float = 1.0):
    """Smooth travelling solution with ``Phi = x``.

    ``rho = 1 + sin(k pi s) / 5``, ``v = u0``,
    ``p = 9/2 - s + cos(k pi s) / (5 k pi)`` with ``s = x - u0 t``, so that
    ``p_x = -rho`` holds exactly.
    """
    x = np.asarray(x, dtype=float)
    s = x - u0 * t
    rho = 1.0 + 0.2 * np.sin(k * np.pi * s)
    p = 4.5 - s + np.cos(k * np.pi * s) / (5.0 * k * np.pi)
    return rho, np.full((1,) + x.shape, float(u0)), p


def manufactured_2d(x, y, t: float = 0.0, k: float = 1.0, u0: float = 1.0, v0: float = 1.0):
    """Oblique version of :func:`manufactured_1d` for ``Phi = x + y``, velocity ``(u0, v0)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = x + y - (u0 + v0) * t
    rho = 1.0 + 0.2 * np.sin(k * np.pi * s)
    p = 4.5 - s + np.cos(k * np.pi * s) / (5.0 * k * np.pi)
    v = np.stack(np.broadcast_arrays(np.full(s.shape, float(u0)), np.full(s.shape, float(v0))))
    return rho, v, p


def pressure_bump_1d(x, A: float, center: float = 0.5, width: float = 100.0):
    """``A exp(-width (x - center)^2)``."""
    x = np.asarray(x, dtype=float)
    return A * np.exp(-width * (x - center) ** 2)


def pressure_bump_2d(x, y, A: float, T_eq: float = 1 / 1.21, center=(0.3, 0.3),
                     width: float = 100.0):
    """``A exp(-width ((x - cx)^2 + (y - cy)^2) / T_eq)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return A * np.exp(-width * ((x - center[0]) ** 2 + (y - center[1]) ** 2) / T_eq)


def perturbed_isothermal_1d(x, A: float):
    """Isothermal state for ``Phi = x^2``, ``T = 1`` with a Gaussian pressure bump at ``x = 1/2``."""
    x = np.asarray(x, dtype=float)
    base = np.exp(-x * x)
    return base, np.zeros((1,) + x.shape), base + pressure_bump_1d(x, A)


def perturbed_isothermal_2d(x, y, A: float, T_eq: float = 1 / 1.21):
    """Isothermal state for ``Phi = x + y`` with a Gaussian pressure bump at ``(0.3, 0.3)``."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    base = np.exp(-(x + y) / T_eq)
    return base / T_eq, np.zeros((2,) + x.shape), base + pressure_bump_2d(x, y, A, T_eq)


def rayleigh_taylor(x, y, r0: float = 0.5, k: int = 20, eta: float = 0.02, drho: float = 0.1):
    """Radial Rayleigh-Taylor data around the isothermal state ``rho = p = exp(-r)`` (``Phi = r``).

    Outside, the gas is isothermal with temperature ``a = e^{-r0} / (e^{-r0} + drho)``.
    The pressure switches branch at ``r0``, where both branches equal
    ``e^{-r0}``, so it is continuous. The density jumps by ``drho`` across the
    wiggled interface ``r = r0 (1 + eta cos(k theta))``.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    r = np.hypot(x, y)
    theta = np.arctan2(y, x)
    a = math.exp(-r0) / (math.exp(-r0) + drho)
    outer_p = np.exp((-r + r0 * (1.0 - a)) / a)
    r_interface = r0 * (1.0 + eta * np.cos(k * theta))
    rho = np.where(r < r_interface, np.exp(-r), outer_p / a)
    p = np.where(r < r0, np.exp(-r), outer_p)
    return rho, np.zeros((2,) + r.shape), p


def sound_crossing_time(c_fn, a: float, b: float, cells: int = 64, nodes: int = 4) -> float:
    """``2 * integral_a^b dx / c(x)`` by composite Gauss-Legendre quadrature."""
    if not b > a:
        raise ValueError("need b > a")
    xs, ws = gauss_legendre(nodes)
    h = (b - a) / cells
    centres = a + (np.arange(cells) + 0.5) * h
    pts = centres[:, None] + h * xs[None, :]
    c = np.asarray(c_fn(pts), dtype=float) * np.ones_like(pts)
    if np.any(~(c > 0)):
        raise ValueError("sound speed must be positive (vacuum?)")
    return float(2.0 * h * np.sum(ws[None, :] / c))


def isothermal_sound_speed(T: float, gamma: float = 1.4):
    """Sound speed ``sqrt(gamma T)`` of an isothermal ideal gas (``R = 1``)."""
    return lambda x: math.sqrt(gamma * T) + 0.0 * np.asarray(x, dtype=float)

"""The experiment suite: scenario definitions, runners and reports.

An :class:`Experiment` names a scenario, its parameters, a grid list and a
:class:`~wbeuler.core.RunConfig`. :func:`run_experiment` executes it on every
grid and returns an :class:`ExperimentResult` holding an error table and/or
scalar metrics, plus the paths of any files written.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from ..core import ORDERS_2D, CartesianGrid, RunConfig, l1_norm, project_cell_averages
from ..equilibrium import EquilibriumPair, average_temperature, isothermal_pair, make_pair
from ..physics import NonPhysicalStateError
from ..reconstruction import ReconstructionOperator
from ..solver import Scheme, evolve
from . import scenarios as sc
from .io import ErrorTable, component_names, write_field_dump, write_profile_csv

DEFAULT_PAIR_PARAMS = {
    1: {
        "isothermal": {"phi": "x"},
        "polytropic": {"phi": "x2", "nu": 1.2},
        "nonisothermal": {},
        "constant_density": {"phi": "x"},
    },
    2: {
        "isothermal": {"phi": "x+y", "T_eq": 1 / 1.21},
        "polytropic": {"phi": "x+y", "nu": 1.2},
        "radial": {},
        "constant_density": {"phi": "x+y"},
    },
}


@dataclass
class Scenario:
    name: str
    dim: int | None  # None: taken from the ``dim`` parameter
    defaults: dict
    t_final: float
    grids: tuple
    runner: Callable


@dataclass
class Experiment:
    """One scenario run over a list of grids (cells per direction or per unit length)."""

    scenario: str
    config: RunConfig = field(default_factory=RunConfig)
    params: dict = field(default_factory=dict)
    grids: tuple | None = None
    name: str | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {sorted(SCENARIOS)}")
        definition = SCENARIOS[self.scenario]
        unknown = set(self.params) - set(definition.defaults)
        if unknown:
            raise ValueError(f"unknown parameter(s) for {self.scenario}: {sorted(unknown)}")
        dim = definition.dim or int(self.parameters().get("dim", 1))
        if dim not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {dim}")
        if dim == 2 and self.config.order not in ORDERS_2D:
            raise ValueError(f"2D scenarios support orders {ORDERS_2D}, got {self.config.order}")
        if self.grids is not None:
            self.grids = tuple(int(n) for n in self.grids)
            if not self.grids or any(n < 1 for n in self.grids):
                raise ValueError("grid list must contain positive cell counts")
        if self.name is None:
            self.name = f"{self.scenario}-q{self.config.order}-{self.config.mode}"

    @property
    def definition(self) -> Scenario:
        return SCENARIOS[self.scenario]

    def parameters(self) -> dict:
        return {**self.definition.defaults, **self.params}

    def grid_list(self) -> tuple:
        return self.grids if self.grids is not None else self.definition.grids

    def t_final(self) -> float:
        t = self.config.t_final
        return self.definition.t_final if t is None else t


@dataclass
class ExperimentResult:
    name: str
    scenario: str
    table: ErrorTable | None = None
    metrics: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    fields: dict = field(default_factory=dict)

    def summary(self) -> str:
        lines = [f"[{self.scenario}] {self.name}"]
        if self.table is not None:
            lines.append(self.table.format())
        for k, v in self.metrics.items():
            lines.append(f"{k}: {v}")
        for f in self.files:
            lines.append(f"wrote {f}")
        return "\n".join(lines)


# -- helpers ------------------------------------------------------------------------

def _operator(cfg: RunConfig) -> ReconstructionOperator | None:
    return ReconstructionOperator(cfg.reconstruction) if cfg.reconstruction else None


def _pair_from_config(cfg: RunConfig, dim: int, default: str, **overrides) -> EquilibriumPair:
    name = cfg.equilibrium or default
    base = DEFAULT_PAIR_PARAMS.get(dim, {}).get(name, {})
    pair = make_pair(name, **{**base, **overrides, **cfg.equilibrium_params})
    if pair.dim != dim:
        raise ValueError(f"equilibrium {name!r} is {pair.dim}D, scenario needs {dim}D")
    return pair


def _scheme(cfg: RunConfig, grid: CartesianGrid, pair: EquilibriumPair, boundary: str,
            exact=None, time_scaling: bool | None = None, order=None, mode=None) -> Scheme:
    return Scheme(
        grid, pair,
        order=cfg.order if order is None else order,
        gamma=cfg.gamma,
        mode=cfg.mode if mode is None else mode,
        boundary=cfg.boundary or boundary,
        exact=exact,
        flux=cfg.flux,
        cfl=cfg.cfl,
        time_scaling=cfg.time_scaling if time_scaling is None else time_scaling,
        op=_operator(cfg) if order is None else None,
    )


def _box(lo, hi, n, dim) -> CartesianGrid:
    lo = tuple(np.broadcast_to(np.asarray(lo, dtype=float), (dim,)))
    hi = tuple(np.broadcast_to(np.asarray(hi, dtype=float), (dim,)))
    return CartesianGrid(lo, hi, (n,) * dim)


def pressure_fluctuation(scheme: Scheme, U: np.ndarray) -> np.ndarray:
    """``p - beta`` from cell averages (second-order pressure), on the full grid."""
    g = scheme.gamma
    p = (g - 1.0) * (U[-1] - 0.5 * np.sum(U[1:-1] ** 2, axis=0) / U[0])
    return p - scheme.recon.beta_bar


def perturbed_equilibrium(scheme: Scheme, bump) -> np.ndarray:
    """Equilibrium cell averages plus the projected energy of a pressure bump ``bump(*x)``.

    A zero bump returns the equilibrium averages bit for bit.
    """
    extra = project_cell_averages(lambda *x: bump(*x) / (scheme.gamma - 1.0),
                                  scheme.grid, scheme.order + 2)
    U = scheme.equilibrium.copy()
    U[-1] = U[-1] + extra
    return scheme.apply_boundary(U, 0.0)


def _dump_name(exp: Experiment, n: int, suffix: str) -> Path:
    out = Path(exp.config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / f"{exp.name}_N{n}{suffix}"


def _finish_table(exp: Experiment, result: ExperimentResult) -> ExperimentResult:
    if exp.config.output_dir and result.table is not None:
        out = Path(exp.config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{exp.name}.csv"
        result.table.to_csv(path)
        result.files.append(str(path))
    return result


def _mean_temperature(prim, grid) -> float:
    return average_temperature(lambda *x: prim(*x)[0], lambda *x: prim(*x)[2], grid)


# -- runners ------------------------------------------------------------------------

def _run_convergence_1d(exp: Experiment) -> ExperimentResult:
    P, cfg = exp.parameters(), exp.config
    k, u0 = P["k"], P["u0"]

    def prim(t):
        return lambda x: sc.manufactured_1d(x, t, k, u0)

    T_eq = _mean_temperature(prim(0.0), CartesianGrid(P["lo"], P["hi"], 256))
    pair = _pair_from_config(cfg, 1, "isothermal", **({} if cfg.equilibrium else {"T_eq": T_eq}))
    exact = lambda t, x: sc.conserved(prim(t), cfg.gamma)(x)  # noqa: E731
    table = ErrorTable(component_names(1))
    tf = exp.t_final()
    for n in exp.grid_list():
        s = _scheme(cfg, CartesianGrid(P["lo"], P["hi"], n), pair, "exact", exact,
                    time_scaling=True)
        res = evolve(s, s.project(exact, 0.0), tf)
        table.add(n, l1_norm(res.state, s.project(exact, tf), s.grid))
    return ExperimentResult(exp.name, exp.scenario, table, {"T_eq": T_eq})


def _run_wellbalance(exp: Experiment) -> ExperimentResult:
    P, cfg = exp.parameters(), exp.config
    dim = exp.definition.dim or int(P["dim"])
    pair = _pair_from_config(cfg, dim, "isothermal")
    table = ErrorTable(component_names(dim))
    fields_out, files = {}, []
    for n in exp.grid_list():
        s = _scheme(cfg, _box(P["lo"], P["hi"], n, dim), pair, "equilibrium")
        A = P.get("A", 0.0)
        if A:
            bump = (lambda x: sc.pressure_bump_1d(x, A)) if dim == 1 else \
                (lambda x, y: sc.pressure_bump_2d(x, y, A))
            U0 = perturbed_equilibrium(s, bump)
        else:
            U0 = s.initial_state()
        res = evolve(s, U0, exp.t_final())
        table.add(n, l1_norm(res.state, U0, s.grid))
        fields_out[n] = res.state
        if cfg.output_dir:
            path = _dump_name(exp, n, ".txt")
            write_field_dump(path, s.grid, res.state, pressure_fluctuation(s, res.state),
                             res.t, cfg.gamma)
            files.append(str(path))
    return ExperimentResult(exp.name, exp.scenario, table, {}, files, fields_out)


@functools.lru_cache(maxsize=8)
def _reference_1d(A: float, cells_per_unit: int, lo: float, hi: float, t_final: float,
                  cfl: float, gamma: float):
    pair = isothermal_pair("x2", 1.0)
    n = int(round(cells_per_unit * (hi - lo)))
    s = Scheme(CartesianGrid(lo, hi, n), pair, order=5, gamma=gamma, cfl=cfl)
    res = evolve(s, perturbed_equilibrium(s, lambda x: sc.pressure_bump_1d(x, A)), t_final)
    x = s.grid.centers()[s.grid.interior]
    U = res.state[(slice(None),) + s.grid.interior]
    return x, pressure_fluctuation(s, res.state)[s.grid.interior], U[1] / U[0]


def relative_l1(values, reference) -> float:
    ref = np.abs(np.asarray(reference))
    return float(np.sum(np.abs(np.asarray(values) - np.asarray(reference))) / np.sum(ref))


def _run_perturb_1d(exp: Experiment) -> ExperimentResult:
    """Pressure bump on the isothermal ``Phi = x^2`` state, compared with a fine order-5 run."""
    P, cfg = exp.parameters(), exp.config
    A, lo, hi = P["A"], P["lo"], P["hi"]
    pair = isothermal_pair("x2", 1.0)
    tf = exp.t_final()
    distances, files, fields_out = {}, [], {}
    if A > 0:
        xr, ref_p, ref_v = _reference_1d(A, P["ref_cells_per_unit"], lo, hi, tf, cfg.cfl,
                                         cfg.gamma)
    for cpu in exp.grid_list():
        n = int(round(cpu * (hi - lo)))
        s = _scheme(cfg, CartesianGrid(lo, hi, n), pair, "equilibrium")
        res = evolve(s, perturbed_equilibrium(s, lambda x: sc.pressure_bump_1d(x, A)), tf)
        x = s.grid.centers()[s.grid.interior]
        U = res.state[(slice(None),) + s.grid.interior]
        dp = pressure_fluctuation(s, res.state)[s.grid.interior]
        fields_out[cpu] = res.state
        view = (x > P["view_lo"]) & (x < P["view_hi"])
        columns = {"p_fluctuation": dp[view], "v": (U[1] / U[0])[view]}
        if A > 0:
            ref_here = np.interp(x[view], xr, ref_p)
            distances[cpu] = relative_l1(dp[view], ref_here)
            columns["reference_p_fluctuation"] = ref_here
            columns["reference_v"] = np.interp(x[view], xr, ref_v)
        else:
            distances[cpu] = float(np.max(np.abs(dp)))
        if cfg.output_dir:
            path = _dump_name(exp, cpu, "_profile.csv")
            write_profile_csv(path, x[view], columns)
            files.append(str(path))
    key = "relative_l1_distance" if A > 0 else "max_pressure_fluctuation"
    return ExperimentResult(exp.name, exp.scenario, None, {key: distances}, files, fields_out)


def _run_accuracy_2d(exp: Experiment) -> ExperimentResult:
    """Oblique manufactured solution, optionally with a moving (``U != 0``) equilibrium."""
    P, cfg = exp.parameters(), exp.config
    k, u0, v0, U = P["k"], P["u0"], P["v0"], P["U"]

    def prim(t):
        return lambda x, y: sc.manufactured_2d(x, y, t, k, u0, v0)

    T_eq = average_temperature(lambda x, y: prim(0.0)(x, y)[0], lambda x, y: prim(0.0)(x, y)[2],
                               _box(P["lo"], P["hi"], 64, 2))
    pair = isothermal_pair("x+y", T_eq, U=U, allow_skew=True)
    exact = lambda t, x, y: sc.conserved(prim(t), cfg.gamma)(x, y)  # noqa: E731
    table = ErrorTable(component_names(2))
    tf = exp.t_final()
    for n in exp.grid_list():
        s = _scheme(cfg, _box(P["lo"], P["hi"], n, 2), pair, "exact", exact)
        res = evolve(s, s.project(exact, 0.0), tf)
        table.add(n, l1_norm(res.state, s.project(exact, tf), s.grid))
    return ExperimentResult(exp.name, exp.scenario, table, {"T_eq": T_eq})


def _run_moving_wellbalance(exp: Experiment) -> ExperimentResult:
    """Moving isothermal equilibrium under gravity along y.

    ``balance='moving'`` uses the scheme balanced on the moving state;
    ``balance='stationary'`` the one balanced on the resting state with the
    same density and pressure, fed the moving state through its boundaries.
    """
    P, cfg = exp.parameters(), exp.config
    if P["balance"] not in ("moving", "stationary"):
        raise ValueError("balance must be 'moving' or 'stationary'")
    moving = isothermal_pair("y", P["T_eq"], U=P["U"])
    pair = moving if P["balance"] == "moving" else isothermal_pair("y", P["T_eq"])
    state = moving.state(cfg.gamma)
    exact = lambda t, *x: state(*x)  # noqa: E731
    table = ErrorTable(component_names(2))
    files = []
    for n in exp.grid_list():
        grid = _box(P["lo"], P["hi"], n, 2)
        if P["balance"] == "moving":
            s = _scheme(cfg, grid, pair, "equilibrium")
            U0 = s.initial_state()
        else:
            s = _scheme(cfg, grid, pair, "exact", exact)
            U0 = Scheme(s.grid, moving, order=cfg.order, gamma=cfg.gamma).equilibrium
            U0 = s.apply_boundary(U0.copy(), 0.0)
        res = evolve(s, U0, exp.t_final())
        table.add(n, l1_norm(res.state, U0, s.grid))
        if cfg.output_dir:
            path = _dump_name(exp, n, ".txt")
            write_field_dump(path, s.grid, res.state, pressure_fluctuation(s, res.state),
                             res.t, cfg.gamma)
            files.append(str(path))
    return ExperimentResult(exp.name, exp.scenario, table, {}, files)


def _block_average(a: np.ndarray, factor: int) -> np.ndarray:
    nx, ny = a.shape
    return a.reshape(nx // factor, factor, ny // factor, factor).mean(axis=(1, 3))


def _run_perturb_2d(exp: Experiment) -> ExperimentResult:
    """Gaussian pressure bump on the isothermal ``Phi = x + y`` state.

    Well-balanced runs use the unit square, unbalanced runs the enlarged
    ``[-1, 2]^2``. With ``compare=True`` the density perturbation on the unit
    square is compared with a fine well-balanced reference run.
    """
    P, cfg = exp.parameters(), exp.config
    A, T_eq = P["A"], P["T_eq"]
    pair = isothermal_pair("x+y", T_eq)
    lo, hi = (0.0, 1.0) if cfg.mode == "wb" else (-1.0, 2.0)
    tf = exp.t_final()
    bump = lambda x, y: sc.pressure_bump_2d(x, y, A, T_eq)  # noqa: E731
    files, metrics, fields_out = [], {}, {}
    ref = None
    if P["compare"]:
        rs = Scheme(_box(0.0, 1.0, P["ref_cells_per_unit"], 2), pair, order=3,
                    gamma=cfg.gamma, cfl=cfg.cfl)
        rres = evolve(rs, perturbed_equilibrium(rs, bump), tf)
        ref = (rres.state[0] - rs.equilibrium[0])[rs.grid.interior]
    for cpu in exp.grid_list():
        n = int(round(cpu * (hi - lo)))
        s = _scheme(cfg, _box(lo, hi, n, 2), pair, "equilibrium")
        res = evolve(s, perturbed_equilibrium(s, bump), tf)
        drho = (res.state[0] - s.equilibrium[0])[s.grid.interior]
        off = int(round(-lo * cpu))
        unit = drho[off:off + cpu, off:off + cpu]
        fields_out[cpu] = unit
        if ref is not None:
            factor = P["ref_cells_per_unit"] // cpu
            if factor * cpu != P["ref_cells_per_unit"]:
                raise ValueError("reference resolution must be a multiple of the grid")
            metrics.setdefault("relative_l1_density", {})[cpu] = relative_l1(
                unit, _block_average(ref, factor))
        if cfg.output_dir:
            path = _dump_name(exp, cpu, ".txt")
            write_field_dump(path, s.grid, res.state, pressure_fluctuation(s, res.state),
                             res.t, cfg.gamma)
            files.append(str(path))
    return ExperimentResult(exp.name, exp.scenario, None, metrics, files, fields_out)


def _run_rayleigh_taylor(exp: Experiment) -> ExperimentResult:
    P, cfg = exp.parameters(), exp.config
    prim = lambda x, y: sc.rayleigh_taylor(x, y, P["r0"], P["k"], P["eta"], P["drho"])  # noqa: E731
    state = sc.conserved(prim, cfg.gamma)
    exact = lambda t, x, y: state(x, y)  # noqa: E731
    pair = isothermal_pair("r", 1.0)
    metrics = {"annulus_max_density_deviation": {}, "max_deviation": {}}
    files, fields_out = [], {}
    for n in exp.grid_list():
        s = _scheme(cfg, _box(P["lo"], P["hi"], n, 2), pair, "exact", exact)
        U0 = s.apply_boundary(s.project(state), 0.0)
        res = evolve(s, U0, exp.t_final())
        X, Y = s.grid.mesh()
        ring = (np.hypot(X, Y) > P["annulus_r"])[s.grid.interior]
        dev = np.abs(res.state - U0)[(slice(None),) + s.grid.interior]
        metrics["annulus_max_density_deviation"][n] = float(np.max(dev[0][ring]))
        metrics["max_deviation"][n] = float(np.max(dev))
        fields_out[n] = res.state
        if cfg.output_dir:
            path = _dump_name(exp, n, ".txt")
            write_field_dump(path, s.grid, res.state, pressure_fluctuation(s, res.state),
                             res.t, cfg.gamma)
            files.append(str(path))
    return ExperimentResult(exp.name, exp.scenario, None, metrics, files, fields_out)


SCENARIOS = {
    s.name: s
    for s in [
        Scenario("convergence-1d", 1, dict(k=5.0, u0=1.0, lo=0.0, hi=2.0), 0.1,
                 (40, 80, 160, 320), _run_convergence_1d),
        Scenario("wellbalance-1d", 1, dict(lo=0.0, hi=1.0), 2.0, (40,), _run_wellbalance),
        Scenario("perturb-1d", 1,
                 dict(A=1e-5, lo=-1.0, hi=2.0, ref_cells_per_unit=270, view_lo=0.0, view_hi=1.0),
                 0.25, (40,), _run_perturb_1d),
        Scenario("accuracy-2d", 2, dict(k=1.0, u0=1.0, v0=1.0, U=0.0, lo=0.0, hi=2.0), 0.1,
                 (20, 40, 80), _run_accuracy_2d),
        Scenario("wellbalance-2d", 2, dict(lo=0.0, hi=1.0), 0.1, (20, 40), _run_wellbalance),
        Scenario("perturb-2d", 2,
                 dict(A=1e-5, T_eq=1 / 1.21, compare=False, ref_cells_per_unit=200),
                 0.15, (50,), _run_perturb_2d),
        Scenario("rayleigh-taylor", 2,
                 dict(r0=0.5, k=20, eta=0.02, drho=0.1, lo=-1.0, hi=1.0, annulus_r=0.9),
                 1.0, (100,), _run_rayleigh_taylor),
        Scenario("moving-accuracy", 2, dict(k=1.0, u0=1.0, v0=1.0, U=1.0, lo=0.0, hi=2.0), 0.1,
                 (20, 40, 80), _run_accuracy_2d),
        Scenario("moving-wellbalance", 2,
                 dict(U=1.0, T_eq=1 / 1.21, balance="moving", lo=0.0, hi=2.0), 0.1,
                 (20, 40), _run_moving_wellbalance),
        Scenario("custom", None, dict(dim=1, lo=0.0, hi=1.0, A=0.0), 1.0, (40,),
                 _run_wellbalance),
    ]
}


def run_experiment(exp: Experiment) -> ExperimentResult:
    """Run every grid of ``exp``; solver aborts are re-raised with the scenario name."""
    try:
        result = exp.definition.runner(exp)
    except NonPhysicalStateError as err:
        raise NonPhysicalStateError(f"{exp.scenario} ({exp.name}): {err}") from err
    return _finish_table(exp, result)


# -- configuration files ------------------------------------------------------------

CONFIG_FIELDS = {f.name for f in fields(RunConfig)}
EXPERIMENT_KEYS = {"scenario", "params", "grids", "name"}


def experiment_from_dict(data: dict) -> Experiment:
    """Build an experiment from a flat mapping of run settings plus scenario keys.

    Unknown keys are rejected.
    """
    unknown = set(data) - CONFIG_FIELDS - EXPERIMENT_KEYS
    if unknown:
        raise ValueError(f"unknown configuration key(s): {sorted(unknown)}")
    if "scenario" not in data:
        raise ValueError("configuration needs a 'scenario'")
    cfg = RunConfig(**{k: v for k, v in data.items() if k in CONFIG_FIELDS})
    return Experiment(
        scenario=data["scenario"],
        config=cfg,
        params=dict(data.get("params", {})),
        grids=data.get("grids"),
        name=data.get("name"),
    )


def load_experiment(path) -> Experiment:
    with open(path) as fh:
        return experiment_from_dict(json.load(fh))

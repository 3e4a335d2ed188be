"""Command-line front end: ``wbeuler <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import sys

from ..core import ORDERS_1D, RunConfig
from ..physics import FLUXES, NonPhysicalStateError
from .experiments import Experiment, load_experiment, run_experiment


def _grids(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _param(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--order", type=int, choices=ORDERS_1D, default=3)
    p.add_argument("--flux", choices=sorted(FLUXES), default="rusanov")
    p.add_argument("--cfl", type=float, default=0.45)
    p.add_argument("--grids", type=_grids, default=None, help="comma-separated grid sizes")
    p.add_argument("--mode", choices=("wb", "unb"), default="wb")
    p.add_argument("--equilibrium", default=None, help="equilibrium pair name")
    p.add_argument("--equilibrium-param", type=_param, action="append", default=[],
                   metavar="KEY=VALUE", help="equilibrium pair parameter (repeatable)")
    p.add_argument("--reconstruction", default=None, help="override the reconstruction operator")
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE",
                   help="scenario parameter (repeatable)")
    p.add_argument("--name", default=None)
    p.add_argument("--out", default=None, help="directory for CSV tables and field dumps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wbeuler", description="Well-balanced Euler-with-gravity experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment described by a JSON config file")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="override output_dir from the file")

    p = sub.add_parser("convergence", help="accuracy study on a smooth travelling solution")
    _common(p)
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)

    p = sub.add_parser("wellbalance", help="evolve an equilibrium and report its drift")
    _common(p)
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)

    p = sub.add_parser("perturb", help="small pressure bump on an isothermal equilibrium")
    _common(p)
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)

    p = sub.add_parser("rt", help="radial Rayleigh-Taylor instability")
    _common(p)

    p = sub.add_parser("moving", help="moving isothermal equilibrium tests")
    _common(p)
    p.add_argument("--test", choices=("wellbalance", "accuracy"), default="wellbalance")
    p.add_argument("--balance", choices=("moving", "stationary"), default="moving")
    return parser


def _scenario(args) -> tuple[str, dict]:
    params = dict(args.param)
    if args.command == "convergence":
        return ("convergence-1d" if args.dim == 1 else "accuracy-2d"), params
    if args.command == "wellbalance":
        return f"wellbalance-{args.dim}d", params
    if args.command == "perturb":
        return f"perturb-{args.dim}d", params
    if args.command == "rt":
        return "rayleigh-taylor", params
    if args.test == "accuracy":
        return "moving-accuracy", params
    return "moving-wellbalance", {"balance": args.balance, **params}


def experiment_from_args(args) -> Experiment:
    if args.command == "run":
        exp = load_experiment(args.config)
        if args.out:
            exp.config.output_dir = args.out
        return exp
    scenario, params = _scenario(args)
    cfg = RunConfig(order=args.order, flux=args.flux, cfl=args.cfl, mode=args.mode,
                    equilibrium=args.equilibrium,
                    equilibrium_params=dict(args.equilibrium_param),
                    reconstruction=args.reconstruction, t_final=args.t_final,
                    output_dir=args.out)
    return Experiment(scenario, cfg, params, args.grids, args.name)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        exp = experiment_from_args(args)
        result = run_experiment(exp)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except NonPhysicalStateError as err:
        print(f"solver aborted: {err}", file=sys.stderr)
        return 1
    print(result.summary())
    return 0

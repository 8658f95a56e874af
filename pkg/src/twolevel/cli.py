"""Command-line interface.

Subcommands:

* ``params``      -- print derived quantities for a parameter set
* ``simulate``    -- run seeded replications, one CSV per replication
* ``fluid``       -- integrate a fluid system and write its path as CSV
* ``experiment``  -- run an experiment suite and write its report

Configuration is a flat JSON object (keys p, mu01, mu11, mu02, n, c2,
horizon, burn_in, replications, seed, grid_dt); command-line flags
override file values.  The TWOLEVEL_OUT environment variable supplies
the default output directory.

Exit codes: 0 success (or experiment pass), 1 experiment verdict fail,
2 configuration/validation error, 3 I/O error.
"""

import argparse
import json
import math
import os
import sys

from . import experiments, fluid, model, oracle, sim
from .errors import (
    DomainError,
    GridMismatch,
    InvalidState,
    NoConvergence,
    NotIrreducible,
    RegimeError,
    RegimeMismatch,
    TooLarge,
)

CONFIG_KEYS = ("p", "mu01", "mu11", "mu02", "n", "c2", "horizon",
               "burn_in", "replications", "seed", "grid_dt")

DEFAULTS = {
    "p": 0.5, "mu01": 1.0, "mu11": 1.0, "mu02": 1.0,
    "n": 100, "c2": None, "horizon": 50.0, "burn_in": 10.0,
    "replications": 1, "seed": None, "grid_dt": 0.01,
}

EXPERIMENT_NAMES = ("phase-scan", "convergence", "no-blocking",
                    "saturation", "oracle-check", "martingale-decay")

_INT_KEYS = {"n", "c2", "replications", "seed"}


class ConfigError(Exception):
    pass


def _load_config(args):
    cfg = dict(DEFAULTS)
    if args.config is not None:
        try:
            with open(args.config) as fp:
                loaded = json.load(fp)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a flat JSON object")
        for key, value in loaded.items():
            if key not in CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = value
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    if cfg["c2"] is None:
        cfg["c2"] = max(1, int(cfg["n"]) // 2)
    for key in _INT_KEYS:
        if cfg[key] is not None:
            cfg[key] = int(cfg[key])
    for key in ("p", "mu01", "mu11", "mu02", "horizon", "burn_in", "grid_dt"):
        cfg[key] = float(cfg[key])
    return cfg


def _params_of(cfg):
    params = model.ModelParams(cfg["p"], cfg["mu01"], cfg["mu11"], cfg["mu02"])
    scaling = model.ScalingParams(cfg["n"], cfg["c2"])
    model.validate(params, scaling)
    return params, scaling


def _out_dir(args):
    if args.out is not None:
        return args.out
    return os.environ.get("TWOLEVEL_OUT", ".")


def _dump(cfg):
    sys.stdout.write(json.dumps(cfg, sort_keys=True, indent=2) + "\n")


def _require_seed(cfg):
    if cfg["seed"] is None:
        raise ConfigError("seed is required (pass --seed or set it in the config file)")


def _fmt(x):
    return f"{x:.12g}"


def _cmd_params(args):
    cfg = _load_config(args)
    if args.dump_config:
        _dump(cfg)
        return 0
    params, scaling = _params_of(cfg)
    r = scaling.r
    r_c = model.critical_ratio(params)
    regime = model.classify_regime(params, r)
    lines = [
        f"p = {_fmt(params.p)}",
        f"mu01 = {_fmt(params.mu01)}",
        f"mu11 = {_fmt(params.mu11)}",
        f"mu02 = {_fmt(params.mu02)}",
        f"n = {scaling.n}",
        f"c2 = {scaling.c2}",
        f"capacity_ratio r = {_fmt(r)}",
        f"critical_ratio r_c = {_fmt(r_c)}",
        f"regime = {regime.name}",
    ]
    if regime is model.Regime.Overloaded:
        ys, y = model.overloaded_fixed_point(params, r)
        lines.append(f"overloaded_fixed_point (y_star, y) = ({_fmt(ys)}, {_fmt(y)})")
        lines.append(
            f"blocked_fraction_limit = {_fmt(model.blocked_fraction_limit(params, r))}"
        )
    elif regime is model.Regime.Underloaded:
        y, z = model.underloaded_fixed_point(params, r)
        lines.append(f"underloaded_fixed_point (y, z) = ({_fmt(y)}, {_fmt(z)})")
    else:
        lines.append(
            "fixed_point = omitted: the capacity ratio sits at the critical value,"
            " where neither fluid fixed point applies"
        )
    minimal = int(math.floor(r_c * scaling.n + 1e-12)) + 1
    lines.append(f"minimal_c2_without_congestion = {minimal}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _cmd_simulate(args):
    cfg = _load_config(args)
    _require_seed(cfg)
    if args.dump_config:
        _dump(cfg)
        return 0
    params, scaling = _params_of(cfg)
    process = args.process
    if args.init is not None:
        init = tuple(int(part) for part in args.init.split(","))
    else:
        init = (0, 0, 0) if process == "main" else (0, 0)
    out_dir = _out_dir(args)
    os.makedirs(out_dir, exist_ok=True)
    files = []
    for i in range(cfg["replications"]):
        seed = cfg["seed"] + i
        if process == "main":
            traj = sim.simulate(init, params, scaling, cfg["horizon"], seed)
        elif process == "aux-saturated":
            traj = sim.simulate_aux_saturated(init, params, scaling, cfg["horizon"], seed)
        else:
            traj = sim.simulate_aux_noblock(init, params, scaling, cfg["horizon"], seed)
        name = f"sim_{process}_seed{seed}.csv"
        with open(os.path.join(out_dir, name), "w") as fp:
            sim.write_trajectory_csv(traj, fp)
        files.append(name)
    manifest = {
        "process": process,
        "init": list(init),
        "config": cfg,
        "seeds": [cfg["seed"] + i for i in range(cfg["replications"])],
        "files": files,
    }
    manifest_name = f"sim_{process}_seed{cfg['seed']}_manifest.json"
    with open(os.path.join(out_dir, manifest_name), "w") as fp:
        fp.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    sys.stdout.write(
        f"wrote {len(files)} trajectory file(s) and {manifest_name} to {out_dir}\n"
    )
    return 0


def _fluid_table(system, params, r, init, horizon, dt):
    """Columns (t, y_star, y, z, u) for the requested fluid system."""
    if system == "hybrid":
        path = fluid.hybrid_fluid(params, r, model.FluidState(*init), horizon, dt)
        u = [0.0] * len(path)
        return path.times, path.values[:, 0], path.values[:, 1], path.values[:, 2], u
    if system == "aux-saturated":
        sol = fluid.aux_saturated_fluid(params, r, (init[0], init[1]), horizon, dt)
        t = sol.path.times
        return t, sol.y_star, sol.y, sol.z, sol.regulator.values
    if system == "aux-noblock":
        sol = fluid.aux_noblock_fluid(params, r, (init[1], init[2]), horizon, dt)
        t = sol.path.times
        return t, sol.y_star, sol.y, sol.z, sol.regulator.values
    regime = model.classify_regime(params, r)
    if system == "overloaded-ode":
        if regime is not model.Regime.Overloaded:
            raise RegimeMismatch(
                f"overloaded-ode needs an overloaded ratio; r={r!r} is {regime.name}"
            )
        path = fluid.integrate(
            lambda t, s: fluid.overloaded_rhs(s, params, r),
            (init[0], init[1]), horizon, dt,
        )
        zeros = [0.0] * len(path)
        return path.times, path.values[:, 0], path.values[:, 1], zeros, zeros
    if regime is not model.Regime.Underloaded:
        raise RegimeMismatch(
            f"underloaded-ode needs an underloaded ratio; r={r!r} is {regime.name}"
        )
    path = fluid.integrate(
        lambda t, s: fluid.underloaded_rhs(s, params, r),
        (init[1], init[2]), horizon, dt,
    )
    zeros = [0.0] * len(path)
    return path.times, zeros, path.values[:, 0], path.values[:, 1], zeros


def _cmd_fluid(args):
    cfg = _load_config(args)
    if args.dump_config:
        _dump(cfg)
        return 0
    params, scaling = _params_of(cfg)
    init = tuple(float(part) for part in args.init.split(","))
    if len(init) != 3:
        raise ConfigError("--init must be a comma-separated triple y_star,y,z")
    t, ys, y, z, u = _fluid_table(
        args.system, params, scaling.r, init, cfg["horizon"], args.dt
    )
    out_dir = _out_dir(args)
    os.makedirs(out_dir, exist_ok=True)
    name = f"fluid_{args.system}.csv"
    with open(os.path.join(out_dir, name), "w") as fp:
        fp.write("t,y_star,y,z,u\n")
        for k in range(len(t)):
            fp.write(
                f"{t[k]:.9g},{ys[k]:.9g},{y[k]:.9g},{z[k]:.9g},{u[k]:.9g}\n"
            )
    sys.stdout.write(f"wrote {name} to {out_dir}\n")
    return 0


def _experiment_config(cfg, n_list):
    params, _ = _params_of(cfg)
    return experiments.ExperimentConfig(
        params=params,
        r=cfg["c2"] / cfg["n"],
        n_list=n_list,
        horizon=cfg["horizon"],
        burn_in=cfg["burn_in"],
        replications=cfg["replications"],
        base_seed=cfg["seed"],
        grid_dt=cfg["grid_dt"],
    )


def _cmd_experiment(args):
    cfg = _load_config(args)
    _require_seed(cfg)
    if args.dump_config:
        _dump(cfg)
        return 0
    params, scaling = _params_of(cfg)
    n_list = ([int(part) for part in args.n_list.split(",")]
              if args.n_list else [cfg["n"]])
    workers = args.workers
    name = args.experiment
    if name == "phase-scan":
        if args.r_grid:
            r_grid = [float(part) for part in args.r_grid.split(",")]
        else:
            r_grid = [round(0.10 + 0.05 * i, 2) for i in range(17)]
        report = experiments.phase_scan(
            params, r_grid, cfg["n"], cfg["horizon"], cfg["burn_in"],
            cfg["replications"], cfg["seed"], grid_dt=cfg["grid_dt"],
            workers=workers,
        )
    elif name == "convergence":
        report = experiments.convergence_sweep(
            _experiment_config(cfg, n_list), args.target, workers=workers
        )
    elif name == "no-blocking":
        report = experiments.no_blocking_certificate(
            _experiment_config(cfg, n_list),
            fixed_point_band=args.band, workers=workers,
        )
    elif name == "saturation":
        report = experiments.saturation_certificate(
            _experiment_config(cfg, n_list),
            band=args.band if args.band is not None else 0.05,
            workers=workers,
        )
    elif name == "oracle-check":
        report = experiments.oracle_cross_check(
            params, scaling, cfg["horizon"], cfg["seed"]
        )
    else:
        report = experiments.martingale_decay(
            params, cfg["c2"] / cfg["n"], n_list, cfg["horizon"],
            cfg["replications"], cfg["seed"], workers=workers,
        )
    json_path, csv_path = experiments.save_report(report, _out_dir(args))
    verdict = "PASS" if report.passed else "FAIL"
    sys.stdout.write(f"{report.name}: {verdict}\n")
    for key, ok in report.criteria.items():
        sys.stdout.write(f"  {key}: {'ok' if ok else 'violated'}\n")
    sys.stdout.write(f"report: {json_path}\ntable: {csv_path}\n")
    return 0 if report.passed else 1


def build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    for key in ("p", "mu01", "mu11", "mu02", "horizon", "burn_in", "grid_dt"):
        shared.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
    for key in ("n", "c2", "replications", "seed"):
        shared.add_argument(f"--{key}", dest=key, type=int)
    shared.add_argument("--config", help="flat JSON config file")
    shared.add_argument("--dump-config", action="store_true",
                        help="print the effective config as JSON and exit")
    shared.add_argument("--out", help="output directory (default: $TWOLEVEL_OUT or .)")

    parser = argparse.ArgumentParser(
        prog="twolevel",
        description="Two-level blocking network: simulation, fluid limits, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("params", parents=[shared],
                   help="print derived quantities for a parameter set")

    p_sim = sub.add_parser("simulate", parents=[shared],
                           help="run seeded replications and write CSV trajectories")
    p_sim.add_argument("--process", choices=("main", "aux-saturated", "aux-noblock"),
                       default="main")
    p_sim.add_argument("--init", help="comma-separated integer start state")

    p_fluid = sub.add_parser("fluid", parents=[shared],
                             help="integrate a fluid system and write its path")
    p_fluid.add_argument("--system", required=True,
                         choices=("hybrid", "aux-saturated", "aux-noblock",
                                  "overloaded-ode", "underloaded-ode"))
    p_fluid.add_argument("--init", default="0,0,0",
                         help="comma-separated y_star,y,z start point")
    p_fluid.add_argument("--dt", type=float, default=1e-3)

    p_exp = sub.add_parser("experiment", parents=[shared],
                           help="run an experiment suite and write its report")
    p_exp.add_argument("--experiment", required=True, choices=EXPERIMENT_NAMES)
    p_exp.add_argument("--target", choices=experiments.TARGETS, default="main",
                       help="process compared against its fluid (convergence)")
    p_exp.add_argument("--n-list", help="comma-separated scale parameters")
    p_exp.add_argument("--r-grid", help="comma-separated capacity ratios (phase-scan)")
    p_exp.add_argument("--band", type=float,
                       help="tolerance band for certificate level checks")
    p_exp.add_argument("--workers", type=int, default=1)
    return parser


_HANDLERS = {
    "params": _cmd_params,
    "simulate": _cmd_simulate,
    "fluid": _cmd_fluid,
    "experiment": _cmd_experiment,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, DomainError, RegimeError, RegimeMismatch, GridMismatch,
            InvalidState, TooLarge, NotIrreducible, NoConvergence, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Subcommands: solve, simulate, welfare, sweep, platform, verify. Parameters
come from flags or a JSON config file (flags override the file). Every command
writes JSON plus, where tabular, CSV and plot-data artifacts into the output
directory; identical config and seed reproduce the files byte for byte.

Exit codes: 0 ok, 2 config error, 3 solver failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import distributions
from .attention import MarketParams
from .equilibrium import solve_reasonable_equilibrium
from .errors import SubsearchError
from .pricing import build_platform_sweep, default_bracket
from .search import simulate_market
from .welfare import comparative_statics_sweep, welfare_report

OUTPUT_DIR_ENV = "SUBSEARCH_OUTPUT_DIR"
COMMANDS = ("solve", "simulate", "welfare", "sweep", "platform", "verify")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


@dataclass
class RunConfig:
    command: str
    params: MarketParams
    dist_spec: dict
    seed: int = 42
    replications: int = 100_000
    output_dir: Path = Path(".")
    plot: bool = False
    workers: int = 1
    axis: str = "price"
    values: list[float] = field(default_factory=list)
    p_min: float | None = None
    p_max: float | None = None
    grid_size: int = 100

    @property
    def distribution(self):
        return distributions.from_spec(self.dist_spec)


def _write_json(obj: dict, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_schedule_plot_data(sol, path: Path) -> None:
    """Two-column (t, sigma) file; jump points repeat the abscissa with the
    open value first, mirroring the schedule's open/closed dots."""
    lines = []
    t0, t1 = sol.t_lower, sol.t_upper
    grid = sol.schedule.grid
    if t0 > 0.0:
        lines.append((0.0, 0.0))
        lines.append((t0, 0.0))
    if len(grid) > 1:
        for t, s in grid:
            lines.append((float(t), float(s)))
    if sol.pooling_active and t1 < 1.0:
        lines.append((t1, sol.params.c))
        lines.append((1.0, sol.params.c))
    with path.open("w") as fh:
        for t, s in lines:
            fh.write(f"{t:.12g} {s:.12g}\n")


def _cmd_solve(cfg: RunConfig) -> int:
    d = cfg.distribution
    sol = solve_reasonable_equilibrium(cfg.params, d)
    _write_json(sol.to_dict(), cfg.output_dir / "solution.json")
    write_schedule_plot_data(sol, cfg.output_dir / "schedule_data.txt")
    if cfg.plot:
        from . import figures

        figures.render_schedule(sol, d, cfg.output_dir / "schedule.png")
    print(f"t_lower={sol.t_lower:.10g} t_upper={sol.t_upper:.10g} "
          f"pooling_active={sol.pooling_active}")
    return EXIT_OK


def _cmd_simulate(cfg: RunConfig) -> int:
    d = cfg.distribution
    sol = solve_reasonable_equilibrium(cfg.params, d)
    report = simulate_market(sol, d, cfg.replications, cfg.seed)
    _write_json(report.to_dict(), cfg.output_dir / "simulation.json")
    _write_csv(
        cfg.output_dir / "attention_bins.csv",
        ["bin_center", "empirical", "closed_form", "stderr"],
        report.attention_csv_rows(),
    )
    if cfg.plot:
        from . import figures

        figures.render_attention(report, cfg.output_dir / "attention.png")
    print(f"match_rate={report.match_rate:.6f} (se {report.match_rate_se:.6f}) "
          f"replications={report.replications}")
    return EXIT_OK


def _cmd_welfare(cfg: RunConfig) -> int:
    d = cfg.distribution
    sol = solve_reasonable_equilibrium(cfg.params, d)
    rep = welfare_report(sol, d)
    _write_json(rep.to_dict(), cfg.output_dir / "welfare.json")
    header = ["n", "c", "p", "u", "Q", "phi", "m", "C", "CS", "PS", "W",
              "D", "t_lower", "t_upper", "pooling_active"]
    row = [cfg.params.n, cfg.params.c, cfg.params.p, cfg.params.u,
           rep.Q, rep.phi, rep.m, rep.C, rep.CS, rep.PS, rep.W,
           rep.D, rep.t_lower, rep.t_upper, rep.pooling_active]
    _write_csv(cfg.output_dir / "welfare.csv", header, [row])
    print(f"W={rep.W:.8f} CS={rep.CS:.8f} PS={rep.PS:.8f} m={rep.m:.8f}")
    return EXIT_OK


_SWEEP_COLUMNS = ["axis_value", "n", "c", "p", "u", "t_lower", "t_upper", "pooling_active",
                  "Q", "search_intensity", "match_probability", "phi", "C",
                  "consumer_surplus", "producer_surplus", "producer_surplus_per_firm",
                  "total_welfare"]


def _cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.values:
        print("sweep requires --values", file=sys.stderr)
        return EXIT_CONFIG
    d = cfg.distribution
    result = comparative_statics_sweep(cfg.params, d, cfg.axis, cfg.values, workers=cfg.workers)
    _write_json(result.to_dict(), cfg.output_dir / "sweep.json")
    _write_csv(cfg.output_dir / "sweep.csv", _SWEEP_COLUMNS,
               ([row[k] for k in _SWEEP_COLUMNS] for row in result.rows))
    if cfg.plot:
        from . import figures

        figures.render_sweep(result, cfg.output_dir / "sweep.png")
    for name, verdict in result.verdicts.items():
        print(f"{name}: expected {verdict['expected']}, monotone={verdict['monotone']}")
    if result.errors:
        print(f"{len(result.errors)} grid point(s) failed", file=sys.stderr)
    return EXIT_OK


def _cmd_platform(cfg: RunConfig) -> int:
    d = cfg.distribution
    lo, hi = default_bracket(cfg.params)
    lo = cfg.p_min if cfg.p_min is not None else lo
    hi = cfg.p_max if cfg.p_max is not None else hi
    import numpy as np

    prices = np.linspace(lo, hi, cfg.grid_size)
    sweep = build_platform_sweep(cfg.params, d, prices, workers=cfg.workers)
    _write_json(sweep.to_dict(), cfg.output_dir / "platform.json")
    _write_csv(
        cfg.output_dir / "platform_sweep.csv",
        ["p", "D", "R", "sep_branch", "pool_branch", "t_lower", "t_upper"],
        sweep.csv_rows(),
    )
    if cfg.plot:
        from . import figures

        figures.render_platform(sweep, cfg.output_dir / "revenue.png")
    print(f"p_star={sweep.p_star:.6g} t_bar={sweep.t_bar_at_star:.6g} t_psi={sweep.t_psi:.6g}")
    return EXIT_OK


def _cmd_verify(cfg: RunConfig) -> int:
    from .verify import run_verification

    d = cfg.distribution
    checks = run_verification(cfg.params, d, seed=cfg.seed, replications=cfg.replications)
    _write_json(
        {"checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]},
        cfg.output_dir / "verification.json",
    )
    failed = 0
    for check in checks:
        print(check.line())
        failed += 0 if check.passed else 1
    if failed:
        print(f"{failed} verification check(s) failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


_DISPATCH = {
    "solve": _cmd_solve,
    "simulate": _cmd_simulate,
    "welfare": _cmd_welfare,
    "sweep": _cmd_sweep,
    "platform": _cmd_platform,
    "verify": _cmd_verify,
}


def run(cfg: RunConfig) -> int:
    """Dispatch one configured command; returns the process exit code."""
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    try:
        return _DISPATCH[cfg.command](cfg)
    except SubsearchError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subsearch",
        description="Equilibrium, simulation, and pricing for subsidized-inspection search",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", type=Path, help="JSON config file; flags override it")
        cmd.add_argument("--dist", choices=["uniform", "beta", "piecewise"])
        cmd.add_argument("--alpha", type=float, help="beta shape alpha")
        cmd.add_argument("--beta", type=float, help="beta shape beta")
        cmd.add_argument("--knots", type=str, help='piecewise CDF knots, e.g. "[[0,0],[1,1]]"')
        cmd.add_argument("--n", type=int)
        cmd.add_argument("--c", type=float)
        cmd.add_argument("--p", type=float)
        cmd.add_argument("--u", type=float)
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--replications", type=int)
        cmd.add_argument("--output-dir", type=Path)
        cmd.add_argument("--plot", action="store_true", default=None,
                         help="also render matplotlib figures next to the data files")
        cmd.add_argument("--workers", type=int)
        if name == "sweep":
            cmd.add_argument("--axis", choices=["price", "cost", "firms"])
            cmd.add_argument("--values", type=str, help="comma-separated grid values")
        if name == "platform":
            cmd.add_argument("--p-min", type=float, dest="p_min")
            cmd.add_argument("--p-max", type=float, dest="p_max")
            cmd.add_argument("--grid-size", type=int, dest="grid_size")
    return parser


_DEFAULT_PARAMS = {"n": 10, "c": 0.5, "p": 1.0, "u": 1.0}


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge config file and flags (flags win) into a validated RunConfig."""
    file_cfg: dict = {}
    if args.config is not None:
        file_cfg = json.loads(Path(args.config).read_text())

    params_cfg = dict(_DEFAULT_PARAMS)
    params_cfg.update(file_cfg.get("params", {}))
    for key in ("n", "c", "p", "u"):
        val = getattr(args, key, None)
        if val is not None:
            params_cfg[key] = val
    params = MarketParams(**params_cfg)

    dist_spec = file_cfg.get("distribution", {"kind": "uniform"})
    if getattr(args, "dist", None) is not None:
        if args.dist == "uniform":
            dist_spec = {"kind": "uniform"}
        elif args.dist == "beta":
            alpha = args.alpha if args.alpha is not None else dist_spec.get("alpha", 2.0)
            beta = args.beta if args.beta is not None else dist_spec.get("beta", 2.0)
            dist_spec = {"kind": "beta", "alpha": alpha, "beta": beta}
        else:
            knots = json.loads(args.knots) if args.knots else dist_spec.get("knots")
            if knots is None:
                raise SubsearchError("piecewise distribution requires --knots")
            dist_spec = {"kind": "piecewise", "knots": knots}
    distributions.from_spec(dist_spec)  # validate early

    def pick(flag, key, default):
        val = getattr(args, flag, None)
        if val is not None:
            return val
        return file_cfg.get(key, default)

    out_default = os.environ.get(OUTPUT_DIR_ENV, ".")
    values_raw = pick("values", "values", "")
    if isinstance(values_raw, str):
        values = [float(v) for v in values_raw.split(",") if v.strip()]
    else:
        values = [float(v) for v in values_raw]

    replications = int(pick("replications", "replications", 100_000))
    if args.command == "simulate" and replications < 1:
        raise SubsearchError("replications must be >= 1")

    return RunConfig(
        command=args.command,
        params=params,
        dist_spec=dist_spec,
        seed=int(pick("seed", "seed", 42)),
        replications=replications,
        output_dir=Path(pick("output_dir", "output_dir", out_default)),
        plot=bool(pick("plot", "plot", False)),
        workers=int(pick("workers", "workers", 1)),
        axis=pick("axis", "axis", "price"),
        values=values,
        p_min=pick("p_min", "p_min", None),
        p_max=pick("p_max", "p_max", None),
        grid_size=int(pick("grid_size", "grid_size", 100)),
    )


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
    except (SubsearchError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

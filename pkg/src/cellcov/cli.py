"""Command-line front end.

Configuration is layered: built-in defaults, then a YAML file given with
``--config``, then command-line flags. Every CSV written to a file gets a
``<path>.meta`` sidecar holding the fully resolved configuration; passing
that sidecar back through ``--config`` reproduces the CSV byte for byte.

Exit codes: 0 ok, 2 bad input, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import logging
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass, fields, replace
from typing import Any, Iterator

import yaml

from . import __version__, analytic, montecarlo, optimizer
from .analytic import CostParams, ModelParams
from .errors import InvalidParameterError, NumericalError
from .montecarlo import SimConfig, fmt
from .optimizer import OptimizeSpec
from .pointprocess import Window

log = logging.getLogger("cellcov")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

FIG2_GRID = [round(0.02 * k, 2) for k in range(2, 21)]
FIG3_GRID = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]
FIG2_TRIALS = 100_000

DEFAULTS: dict[str, Any] = {
    "model": {
        "lambda_b": 0.2, "lambda_u": 0.02, "lambda_s": 1.0, "theta": 10 ** 0.3,
        "alpha": 3.0, "mu": 1.0, "pa_A": 1.0, "pa_B": 0.0,
    },
    "costs": {"c1": 0.0, "c2": 1.0, "c3": 0.0, "phi": 1.0},
    "sim": {
        "window": [50.0, 50.0], "torus": True, "trials": 10_000, "seed": 0,
        "ci_level": 0.95, "mode": "silent-empty-cells",
        "estimator": "one-typical-per-realization", "typical": "palm",
        "tail_correction": True, "min_expected_bs": 100.0, "workers": 1, "chunk_size": 1000,
    },
    "optimize": {"search_low": None, "search_high": None, "rel_tol": 1e-8, "max_iters": 500},
    "grids": {"lambda_b": None, "k": None},
    "out": None,
}


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    costs: CostParams
    sim: SimConfig
    optimize: OptimizeSpec
    lambda_b_grid: list[float] | None
    k_grid: list[float] | None
    out: str | None
    raw: dict

    @classmethod
    def from_dict(cls, cfg: dict) -> "RunConfig":
        m = dict(cfg["model"])
        s = dict(cfg["sim"])
        w, h = s.pop("window")
        s["window"] = Window(float(w), float(h), bool(s.pop("torus")))
        grids = cfg.get("grids") or {}
        _check_keys(m, ModelParams, "model")
        _check_keys(cfg["costs"], CostParams, "costs")
        _check_keys(s, SimConfig, "sim")
        _check_keys(cfg["optimize"], OptimizeSpec, "optimize")
        return cls(
            model=ModelParams(**{k: float(v) for k, v in m.items()}),
            costs=CostParams(**{k: float(v) for k, v in cfg["costs"].items()}),
            sim=SimConfig(**s),
            optimize=OptimizeSpec(**cfg["optimize"]),
            lambda_b_grid=_floats(grids.get("lambda_b")),
            k_grid=_floats(grids.get("k")),
            out=cfg.get("out"),
            raw=cfg,
        )


def _check_keys(d: dict, cls, section: str) -> None:
    allowed = {f.name for f in fields(cls) if f.init}
    unknown = set(d) - allowed
    if unknown:
        raise InvalidParameterError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")


def _floats(xs) -> list[float] | None:
    return None if xs is None else [float(x) for x in xs]


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config_file(path: str) -> dict:
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise InvalidParameterError(f"config file {path} must hold a mapping")
    data.pop("meta", None)
    model = data.get("model") or {}
    if "theta_db" in model:
        if "theta" in model:
            raise InvalidParameterError("give model.theta or model.theta_db, not both")
        model["theta"] = analytic.db_to_linear(float(model.pop("theta_db")))
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise InvalidParameterError(f"unknown config section(s): {', '.join(sorted(unknown))}")
    return data


# ---------------------------------------------------------------- argument parsing


def _window(text: str) -> list[float]:
    try:
        w, h = (float(p) for p in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like 50x50, got {text!r}")
    return [w, h]


def _float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


# flag dest -> (section, key)
_FLAG_MAP = {
    "seed": ("sim", "seed"), "trials": ("sim", "trials"), "window": ("sim", "window"),
    "torus": ("sim", "torus"), "ci_level": ("sim", "ci_level"), "workers": ("sim", "workers"),
    "chunk_size": ("sim", "chunk_size"), "mode": ("sim", "mode"), "estimator": ("sim", "estimator"),
    "typical": ("sim", "typical"), "tail_correction": ("sim", "tail_correction"),
    "min_expected_bs": ("sim", "min_expected_bs"),
    "theta": ("model", "theta"), "alpha": ("model", "alpha"), "lambda_b": ("model", "lambda_b"),
    "lambda_u": ("model", "lambda_u"), "lambda_s": ("model", "lambda_s"), "mu": ("model", "mu"),
    "pa_A": ("model", "pa_A"), "pa_B": ("model", "pa_B"),
    "c1": ("costs", "c1"), "c2": ("costs", "c2"), "c3": ("costs", "c3"), "phi": ("costs", "phi"),
    "search_low": ("optimize", "search_low"), "search_high": ("optimize", "search_high"),
    "rel_tol": ("optimize", "rel_tol"), "max_iters": ("optimize", "max_iters"),
    "lambda_b_grid": ("grids", "lambda_b"), "k": ("grids", "k"),
}


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("global options")
    g.add_argument("--config", help="YAML config file (or a .meta sidecar)")
    g.add_argument("--out", help="output CSV path (stdout if omitted)")
    g.add_argument("--seed", type=_u64)
    g.add_argument("--trials", type=int)
    g.add_argument("--window", type=_window, metavar="WxH")
    g.add_argument("--torus", action=argparse.BooleanOptionalAction)
    g.add_argument("--ci-level", type=float)
    g.add_argument("--workers", type=int)
    g.add_argument("--chunk-size", type=int)
    th = g.add_mutually_exclusive_group()
    th.add_argument("--theta-db", type=float, help="SIR threshold in dB")
    th.add_argument("--theta", type=float, help="SIR threshold, linear")
    g.add_argument("--alpha", type=float, help="path-loss exponent (> 2)")
    g.add_argument("--lambda-b", type=float)
    g.add_argument("--lambda-u", type=float)
    g.add_argument("--lambda-s", type=float)
    g.add_argument("--mu", type=float)
    g.add_argument("--pa-a", dest="pa_A", type=float)
    g.add_argument("--pa-b", dest="pa_B", type=float)
    g.add_argument("--c1", type=float)
    g.add_argument("--c2", type=float)
    g.add_argument("--c3", type=float)
    g.add_argument("--phi", type=float)
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="cellcov",
        description="Coverage and cost of cellular networks with Poisson BSs and silent empty cells.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analytic", parents=[common], help="evaluate the closed-form quantities")

    sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimators")
    sim.add_argument("quantity", choices=["outage", "empty-cells", "link-distance", "cable"])
    sim.add_argument("--mode", choices=["silent-empty-cells", "all-transmit"], default=argparse.SUPPRESS)
    sim.add_argument("--estimator", choices=["one-typical-per-realization", "all-served-per-realization"],
                     default=argparse.SUPPRESS)
    sim.add_argument("--typical", choices=["palm", "served"], default=argparse.SUPPRESS)
    sim.add_argument("--tail-correction", action=argparse.BooleanOptionalAction, default=argparse.SUPPRESS)
    sim.add_argument("--min-expected-bs", type=float, default=argparse.SUPPRESS)
    sim.add_argument("--lambda-b-grid", type=_float_list, default=argparse.SUPPRESS,
                     help="comma-separated BS densities")

    opt = sub.add_parser("optimize", parents=[common], help="optimal BS density")
    opt.add_argument("--k", type=_float_list, default=argparse.SUPPRESS,
                     help="comma-separated cost ratios K (normalized costs)")
    opt.add_argument("--search-low", type=float, default=argparse.SUPPRESS)
    opt.add_argument("--search-high", type=float, default=argparse.SUPPRESS)
    opt.add_argument("--rel-tol", type=float, default=argparse.SUPPRESS)
    opt.add_argument("--max-iters", type=int, default=argparse.SUPPRESS)

    rep = sub.add_parser("reproduce", parents=[common], help="regenerate figure data")
    rep.add_argument("figure", choices=["fig2", "fig3"])
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults, recipe defaults, config file and explicit flags."""
    cfg = copy.deepcopy(DEFAULTS)
    if args.command == "reproduce":
        recipe = {"model": {"theta": analytic.db_to_linear(3.0), "alpha": 3.0, "lambda_u": 0.02}}
        if args.figure == "fig2":
            recipe["sim"] = {"trials": FIG2_TRIALS}
            recipe["grids"] = {"lambda_b": FIG2_GRID}
        else:
            recipe["grids"] = {"k": FIG3_GRID}
        cfg = _merge(cfg, recipe)
    if getattr(args, "config", None):
        cfg = _merge(cfg, load_config_file(args.config))
    given = vars(args)
    if "theta_db" in given:
        cfg["model"]["theta"] = analytic.db_to_linear(given["theta_db"])
    for dest, (section, key) in _FLAG_MAP.items():
        if dest in given:
            cfg[section][key] = given[dest]
    if "out" in given:
        cfg["out"] = given["out"]
    return cfg


def _canonical(rc: RunConfig) -> dict:
    """Resolved config with theta stored linearly, suitable for a sidecar."""
    out = copy.deepcopy(rc.raw)
    out["model"] = {f.name: getattr(rc.model, f.name) for f in fields(ModelParams)}
    out["sim"]["window"] = [rc.sim.window.width, rc.sim.window.height]
    out["sim"]["torus"] = rc.sim.window.torus
    return out


# ---------------------------------------------------------------- commands


@contextmanager
def _output(path: str | None) -> Iterator[io.TextIOBase]:
    if path is None:
        yield sys.stdout
        return
    buf = io.StringIO()
    yield buf
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def _write_sidecar(rc: RunConfig, argv: list[str]) -> None:
    if rc.out is None:
        return
    doc = _canonical(rc)
    doc["meta"] = {"tool": "cellcov", "version": __version__, "argv": list(argv)}
    with open(rc.out + ".meta", "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=True)


def cmd_analytic(rc: RunConfig, args) -> list[tuple[str, Any]]:
    m, c = rc.model, rc.costs
    q = analytic.QuadratureSpec()
    beta = analytic.beta_integral_detailed(m.theta, m.alpha, q)
    p = analytic.empty_cell_probability(m.lambda_b, m.lambda_u)
    p_asym = analytic.empty_cell_probability_asymptotic(m.lambda_b, m.lambda_u)
    record: list[tuple[str, Any]] = [
        ("lambda_b", m.lambda_b), ("lambda_u", m.lambda_u), ("lambda_s", m.lambda_s),
        ("theta", m.theta), ("theta_db", analytic.linear_to_db(m.theta)), ("alpha", m.alpha),
        ("mu", m.mu), ("pa_A", m.pa_A), ("pa_B", m.pa_B),
        ("c1", c.c1), ("c2", c.c2), ("c3", c.c3), ("phi", c.phi),
        ("asymptotic_regime", analytic.in_asymptotic_regime(m.lambda_b, m.lambda_u)),
        ("p_exact", p), ("p_asymptotic", p_asym.value), ("p_asymptotic_clamped", p_asym.clamped),
        ("beta", beta.value), ("beta_abs_error", beta.abs_error),
        ("pout_exact", analytic.outage_from_densities(m.lambda_b, m.lambda_u, beta.value)),
        ("pout_asymptotic", analytic.outage_asymptotic(m.lambda_b, m.lambda_u, beta.value)),
        ("pout_all_transmit", analytic.outage_all_transmit(beta.value)),
        ("cable_length", analytic.cable_length_density(m.lambda_b, m.lambda_s)),
        ("power_exact", analytic.network_power(m, p)),
        ("power_asymptotic", analytic.network_power(m, p, asymptotic=True)),
        ("cost_exact", analytic.cost(m.lambda_b, m, c, "exact", beta.value)),
        ("cost_asymptotic", analytic.cost(m.lambda_b, m, c, "asymptotic", beta.value)),
    ]
    try:
        record.append(("lambda_b_star", analytic.optimal_density_closed_form(m, c, beta.value)))
        record.append(("K", analytic.k_ratio(c, m.lambda_s, m.pa_B)))
    except analytic.ZeroDenominatorError:
        record += [("lambda_b_star", math.nan), ("K", math.nan)]
    return record


def _value(v: Any) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return fmt(v)
    return str(v)


def _estimate_cols(e: montecarlo.Estimate) -> list[str]:
    return [fmt(e.mean), fmt(e.std_error), fmt(e.ci_low), fmt(e.ci_high), str(e.trials_used), str(e.discards)]


def cmd_simulate(rc: RunConfig, args, fh) -> None:
    m, sim = rc.model, rc.sim
    grid = rc.lambda_b_grid or [m.lambda_b]
    w = csv.writer(fh, lineterminator="\n")
    est_cols = ["mean", "std_error", "ci_low", "ci_high", "trials_used", "discards"]
    if args.quantity == "outage":
        beta = analytic.beta_integral(m.theta, m.alpha)
        w.writerow(["lambda_b", "mode", *est_cols, "analytic"])
        for i, lb in enumerate(grid):
            mi = replace(m, lambda_b=lb)
            e = montecarlo.estimate_outage(mi, sim, stream_id=i)
            ref = (analytic.outage_from_densities(lb, m.lambda_u, beta)
                   if sim.mode == "silent-empty-cells" else analytic.outage_all_transmit(beta))
            w.writerow([fmt(lb), sim.mode, *_estimate_cols(e), fmt(ref)])
    elif args.quantity == "empty-cells":
        w.writerow(["lambda_b", "lambda_u", *est_cols, "analytic"])
        for i, lb in enumerate(grid):
            e = montecarlo.estimate_empty_cell_prob(lb, m.lambda_u, sim, stream_id=i)
            w.writerow([fmt(lb), fmt(m.lambda_u), *_estimate_cols(e),
                        fmt(analytic.empty_cell_probability(lb, m.lambda_u))])
    elif args.quantity == "link-distance":
        w.writerow(["lambda_b", *est_cols, "analytic"])
        for i, lb in enumerate(grid):
            e = montecarlo.estimate_link_distance(lb, sim, stream_id=i)
            w.writerow([fmt(lb), *_estimate_cols(e), fmt(0.5 / math.sqrt(lb))])
    else:
        w.writerow(["lambda_b", "lambda_s", "per_unit_area_mean", "per_unit_area_stderr",
                    "per_sc_cell_mean", "per_sc_cell_stderr", "trials_used", "discards",
                    "expected_per_unit_area", "cable_length_density"])
        for i, lb in enumerate(grid):
            ce = montecarlo.estimate_cable_length(lb, m.lambda_s, sim, stream_id=i)
            a, s = ce.per_unit_area, ce.per_sc_cell
            w.writerow([fmt(lb), fmt(m.lambda_s), fmt(a.mean), fmt(a.std_error), fmt(s.mean),
                        fmt(s.std_error), a.trials_used, a.discards,
                        fmt(lb / (2 * math.sqrt(m.lambda_s))),
                        fmt(analytic.cable_length_density(lb, m.lambda_s))])


def cmd_optimize(rc: RunConfig, args, fh) -> None:
    m = rc.model
    beta = analytic.beta_integral(m.theta, m.alpha)
    if rc.k_grid:
        reports = optimizer.gap_study(rc.k_grid, m, beta, rc.optimize)
    else:
        reports = [optimizer.gap_report(m, rc.costs, beta, rc.optimize)]
    optimizer.write_gap_csv(reports, fh)


def cmd_reproduce(rc: RunConfig, args, fh) -> None:
    if args.figure == "fig2":
        rows = montecarlo.sweep_outage(rc.model, rc.lambda_b_grid, rc.sim)
        montecarlo.write_sweep_csv(rows, fh)
    else:
        beta = analytic.beta_integral(rc.model.theta, rc.model.alpha)
        optimizer.write_gap_csv(optimizer.gap_study(rc.k_grid, rc.model, beta, rc.optimize), fh)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = RunConfig.from_dict(resolve_config(args))
        if args.command == "analytic":
            record = cmd_analytic(rc, args)
            width = max(len(k) for k, _ in record)
            for k, v in record:
                print(f"{k:<{width}}  {_value(v)}")
            if rc.out:
                with _output(rc.out) as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow([k for k, _ in record])
                    w.writerow([_value(v) for _, v in record])
        else:
            handler = {"simulate": cmd_simulate, "optimize": cmd_optimize,
                       "reproduce": cmd_reproduce}[args.command]
            with _output(rc.out) as fh:
                handler(rc, args, fh)
        _write_sidecar(rc, argv)
    except (InvalidParameterError, yaml.YAMLError, TypeError) as exc:
        print(f"cellcov: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"cellcov: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"cellcov: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

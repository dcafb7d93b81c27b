"""``tmes`` command line: simulate, estimate, bootstrap, oracle, window.

Every output embeds the fully resolved run config (``# config: {...}`` in
CSV, a ``config`` key in JSON). Passing such a file back through
``--config`` reproduces it byte for byte. Precedence is flags > config file
> defaults.

Exit codes: 0 success, 2 usage or parameter error, 1 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .bootstrap import bootstrap_tmes_replicates, percentile_ci, qq_against_normal
from .core import TimeSeriesPair, TmesError, centered_empirical_tmes, empirical_tmes, select_threshold
from .csvio import read_columns, read_config, render_csv, render_json, write_csv, open_output
from .models import (
    MMA,
    ArmaCopula,
    GarchCopula,
    GaussianCopula,
    StudentTCopula,
    simulate_pair,
    spec_to_dict,
)
from .oracles import (
    arma_extremogram_closed_form,
    copula_tmes_from_extremogram,
    mma_marginal_cdf,
    mma_tmes_oracle,
    monte_carlo_delta0,
    OracleResult,
)
from .rng import resolve_seed
from .rolling import align, ingest_csv, rolling_tmes, window_rows

# Run-independent settings that never enter the embedded config.
_NOT_CONFIG = {"command", "config", "out", "threads", "replicates_out", "qq_out", "func"}

DEFAULTS = {
    "simulate": {"model": "mma", "n": 2000, "seed": None, "xi": None, "phi": None, "L": None,
                 "theta_ma": None, "rho": None, "df": None, "omega": None, "alpha": None,
                 "beta": None, "burn_in": None},
    "estimate": {"input": None, "x_col": "x", "y_col": "y", "m_n": 20, "h_max": 9,
                 "centered": False},
    "bootstrap": {"input": None, "x_col": "x", "y_col": "y", "m_n": 20, "h_max": 9,
                  "centered": False, "theta": 0.1, "B": 300, "level": 0.90,
                  "method": "percentile", "seed": None},
    "oracle": {"kind": None, "h": 0, "xi": None, "phi": None, "theta_ma": None, "m_n": 20,
               "x": None, "rho_h": None, "mean_x": 0.0, "delta0": None, "centered": False,
               "model": "arma", "rho": None, "df": None, "paths": 100, "path_len": 2000,
               "seed": None},
    "window": {"x_csv": None, "y_csv": None, "date_col": "date", "value_col": "value",
               "policy": "intersect", "window": 200, "lags": "0,1,3,7", "m_n": 20,
               "theta": 0.1, "B": 300, "level": 0.90, "seed": None, "format": "csv"},
}


class UsageError(Exception):
    pass


def _build_model(cfg: dict):
    model = cfg["model"]
    pick = {k: cfg[k] for k in ("xi", "phi", "L", "theta_ma", "omega", "alpha", "beta", "burn_in")
            if cfg.get(k) is not None}
    if model == "mma":
        unknown = set(pick) - {"xi", "phi", "L"}
        if unknown:
            raise TmesError(f"options not valid for the mma model: {', '.join(sorted(unknown))}")
        return MMA(**pick)
    if model == "arma":
        unknown = set(pick) - {"xi", "phi", "theta_ma", "burn_in"}
        if unknown:
            raise TmesError(f"options not valid for the arma model: {', '.join(sorted(unknown))}")
        cop = {} if cfg.get("rho") is None else {"rho": cfg["rho"]}
        return ArmaCopula(copula=GaussianCopula(**cop), **pick)
    if model == "garch":
        unknown = set(pick) - {"omega", "alpha", "beta", "burn_in"}
        if unknown:
            raise TmesError(f"options not valid for the garch model: {', '.join(sorted(unknown))}")
        cop = {k: cfg[k] for k in ("rho", "df") if cfg.get(k) is not None}
        return GarchCopula(copula=StudentTCopula(**cop), **pick)
    raise TmesError(f"unknown model {model!r}")


def _load_pair(cfg: dict) -> TimeSeriesPair:
    if not cfg.get("input"):
        raise UsageError("--input is required")
    x, y = read_columns(cfg["input"], [cfg["x_col"], cfg["y_col"]])
    return TimeSeriesPair(x, y)


def _check_h_max(h_max: int, n: int) -> None:
    if h_max < 0 or h_max >= n:
        raise TmesError(f"lag {h_max} out of range for series of length {n}")


# -- subcommands -----------------------------------------------------------

def cmd_simulate(cfg: dict, args) -> None:
    spec = _build_model(cfg)
    ts = simulate_pair(spec, cfg["n"], cfg["seed"])
    meta = dict(cfg, resolved_model=spec_to_dict(spec))
    rows = zip(range(1, ts.n + 1), ts.x, ts.y)
    write_csv(args.out, ["t", "x", "y"], rows, meta)


def cmd_estimate(cfg: dict, args) -> None:
    ts = _load_pair(cfg)
    _check_h_max(cfg["h_max"], ts.n)
    spec = select_threshold(ts.y, cfg["m_n"])
    est = centered_empirical_tmes if cfg["centered"] else empirical_tmes
    col = "delta0" if cfg["centered"] else "delta"
    rows = [(h, est(ts, spec, h)) for h in range(cfg["h_max"] + 1)]
    write_csv(args.out, ["lag", col], rows, cfg)


def cmd_bootstrap(cfg: dict, args) -> None:
    ts = _load_pair(cfg)
    _check_h_max(cfg["h_max"], ts.n)
    spec = select_threshold(ts.y, cfg["m_n"])
    shift = float(np.mean(ts.x)) if cfg["centered"] else 0.0
    col = "delta0" if cfg["centered"] else "delta"
    rows, rep_rows, qq_rows = [], [], []
    for h in range(cfg["h_max"] + 1):
        reps = bootstrap_tmes_replicates(ts, spec, h, theta=cfg["theta"], B=cfg["B"],
                                         seed=cfg["seed"], threads=args.threads)
        lo, hi = percentile_ci(reps, cfg["level"], method=cfg["method"])
        rows.append((h, reps.point - shift, lo - shift, hi - shift))
        rep_rows.extend((h, b, v - shift) for b, v in enumerate(reps.values))
        if args.qq_out:
            qq_rows.extend((h, q, s) for q, s in qq_against_normal(reps))
    write_csv(args.out, ["lag", col, "lo", "hi"], rows, cfg)
    if args.replicates_out:
        write_csv(args.replicates_out, ["lag", "replicate_index", "value"], rep_rows, cfg)
    if args.qq_out:
        write_csv(args.qq_out, ["lag", "theoretical", "sample"], qq_rows, cfg)


def _oracle(cfg: dict) -> OracleResult:
    kind = cfg["kind"]
    h = cfg["h"]
    if kind == "arma-extremogram":
        params = {"h": h, "phi": cfg["phi"] if cfg["phi"] is not None else 0.2,
                  "theta_ma": cfg["theta_ma"] if cfg["theta_ma"] is not None else 0.8,
                  "xi": cfg["xi"] if cfg["xi"] is not None else 6.0}
        return OracleResult(arma_extremogram_closed_form(**params), "closed_form", None, params)
    if kind == "mma-delta":
        return mma_tmes_oracle(h, xi=cfg["xi"] if cfg["xi"] is not None else 4.0,
                               phi=cfg["phi"] if cfg["phi"] is not None else 0.8, m_n=cfg["m_n"])
    if kind == "mma-cdf":
        if cfg["x"] is None:
            raise UsageError("mma-cdf needs --x")
        params = {"x": cfg["x"], "xi": cfg["xi"] if cfg["xi"] is not None else 4.0,
                  "phi": cfg["phi"] if cfg["phi"] is not None else 0.8}
        return OracleResult(mma_marginal_cdf(**params), "closed_form", None, params)
    if kind == "copula-tmes":
        if cfg["rho_h"] is None or cfg["delta0"] is None:
            raise UsageError("copula-tmes needs --rho-h and --delta0")
        params = {"rho_h": cfg["rho_h"], "mean_x": cfg["mean_x"], "delta0": cfg["delta0"],
                  "centered": cfg["centered"]}
        return OracleResult(copula_tmes_from_extremogram(**params), "closed_form", None, params)
    if kind == "mc-delta0":
        model = _build_model(cfg)
        return monte_carlo_delta0(model, m_n=cfg["m_n"], paths=cfg["paths"],
                                  path_len=cfg["path_len"], seed=cfg["seed"])
    raise UsageError(f"unknown oracle kind {kind!r}")


def cmd_oracle(cfg: dict, args) -> None:
    res = _oracle(cfg)
    payload = dict(res.to_dict(), config=cfg)
    with open_output(args.out) as fh:
        fh.write(render_json(payload))


def _parse_lags(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise TmesError(f"cannot parse lag list {text!r}") from None


def cmd_window(cfg: dict, args) -> None:
    if not cfg.get("x_csv") or not cfg.get("y_csv"):
        raise UsageError("--x-csv and --y-csv are required")
    xs = ingest_csv(cfg["x_csv"], cfg["date_col"], cfg["value_col"], name="x")
    ys = ingest_csv(cfg["y_csv"], cfg["date_col"], cfg["value_col"], name="y")
    dates, ts = align(xs, ys, cfg["policy"])
    results = rolling_tmes(ts, window=cfg["window"], lags=_parse_lags(cfg["lags"]), m_n=cfg["m_n"],
                           theta=cfg["theta"], B=cfg["B"], level=cfg["level"], seed=cfg["seed"],
                           dates=dates, threads=args.threads)
    header = ["end_date", "lag", "delta0", "lo", "hi"]
    if cfg["format"] == "json":
        payload = {"config": cfg, "columns": header,
                   "rows": [list(r) for r in window_rows(results)]}
        text = render_json(payload)
    else:
        text = render_csv(header, window_rows(results), cfg)
    with open_output(args.out) as fh:
        fh.write(text)


# -- parser ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_common(p: argparse.ArgumentParser, *, seed: bool = True, threads: bool = False) -> None:
    p.add_argument("--config", help="JSON config, or an earlier output file to re-run")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    if seed:
        p.add_argument("--seed", type=int, help="64-bit seed (default $TMES_SEED or entropy)")
    if threads:
        p.add_argument("--threads", type=int, default=1, help="worker cap; never changes results")


def _add_pair_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="CSV with x and y columns")
    p.add_argument("--x-col")
    p.add_argument("--y-col")
    p.add_argument("--m-n", type=int, help="extremal level (default 20)")
    p.add_argument("--h-max", type=int, help="largest lag (default 9)")
    p.add_argument("--centered", action="store_true", default=None,
                   help="subtract the sample mean of x")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tmes", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"tmes {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a model path to CSV (t, x, y)")
    _add_common(p)
    p.add_argument("--model", choices=["mma", "arma", "garch"])
    p.add_argument("--n", type=int)
    p.add_argument("--xi", type=float, help="Fréchet tail index (mma, arma)")
    p.add_argument("--phi", type=float, help="MMA decay or AR coefficient")
    p.add_argument("--L", type=int, help="MMA truncation radius (default: weights < 1e-6)")
    p.add_argument("--theta-ma", type=float, help="MA coefficient (arma)")
    p.add_argument("--rho", type=float, help="copula correlation")
    p.add_argument("--df", type=float, help="t-copula degrees of freedom (garch)")
    p.add_argument("--omega", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--burn-in", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="empirical TMES curve")
    _add_common(p, seed=False)
    _add_pair_input(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bootstrap", help="TMES with stationary-bootstrap bands")
    _add_common(p, threads=True)
    _add_pair_input(p)
    p.add_argument("--theta", type=float, help="geometric block parameter (default 0.1)")
    p.add_argument("--B", type=int, help="replicates per lag (default 300)")
    p.add_argument("--level", type=float, help="confidence level (default 0.90)")
    p.add_argument("--method", choices=["percentile", "basic"])
    p.add_argument("--replicates-out", help="CSV of (lag, replicate_index, value)")
    p.add_argument("--qq-out", help="CSV of (lag, theoretical, sample) QQ pairs")
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("oracle", help="theoretical values as JSON")
    _add_common(p)
    p.add_argument("kind", nargs="?",
                   choices=["arma-extremogram", "mma-delta", "mma-cdf", "copula-tmes", "mc-delta0"])
    p.add_argument("--h", type=int)
    p.add_argument("--xi", type=float)
    p.add_argument("--phi", type=float)
    p.add_argument("--theta-ma", type=float)
    p.add_argument("--m-n", type=int)
    p.add_argument("--x", type=float)
    p.add_argument("--rho-h", type=float)
    p.add_argument("--mean-x", type=float)
    p.add_argument("--delta0", type=float)
    p.add_argument("--centered", action="store_true", default=None)
    p.add_argument("--model", choices=["mma", "arma", "garch"])
    p.add_argument("--rho", type=float)
    p.add_argument("--df", type=float)
    p.add_argument("--paths", type=int)
    p.add_argument("--path-len", type=int)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("window", help="moving-window centered TMES with bands")
    _add_common(p, threads=True)
    p.add_argument("--x-csv", help="dated CSV of the response series")
    p.add_argument("--y-csv", help="dated CSV of the systemic-event series")
    p.add_argument("--date-col")
    p.add_argument("--value-col")
    p.add_argument("--policy", choices=["intersect", "error_on_gap"])
    p.add_argument("--window", type=int)
    p.add_argument("--lags", help="comma-separated lags (default 0,1,3,7)")
    p.add_argument("--m-n", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--B", type=int)
    p.add_argument("--level", type=float)
    p.add_argument("--format", choices=["csv", "json"])
    p.set_defaults(func=cmd_window)
    return parser


def resolve_config(args) -> dict:
    """Defaults, overlaid by ``--config``, overlaid by explicit flags."""
    cfg = dict(DEFAULTS[args.command])
    if getattr(args, "config", None):
        loaded = read_config(args.config)
        unknown = set(loaded) - set(cfg) - {"command", "resolved_model"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if loaded.get("command", args.command) != args.command:
            raise UsageError(f"config is for {loaded['command']!r}, not {args.command!r}")
        cfg.update({k: v for k, v in loaded.items() if k in cfg})
    for key, value in vars(args).items():
        if key in _NOT_CONFIG or value is None:
            continue
        cfg[key] = value
    if "seed" in cfg:
        cfg["seed"] = resolve_seed(cfg["seed"])
    if "lags" in cfg:
        cfg["lags"] = ",".join(str(h) for h in _parse_lags(cfg["lags"]))
    if args.command == "oracle" and cfg["kind"] is None:
        raise UsageError("oracle: a kind is required")
    cfg["command"] = args.command
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(args)
        args.func(cfg, args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TmesError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line front end: rank, eval, tune and trace subcommands.

Option precedence is explicit flags, then the JSON config file given with
--config, then built-in defaults.  All randomness flows through --seed, so
identical invocations produce byte-identical output files.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .datasets import DatasetError, load_dataset, normalize_views
from .evaluation import cross_validated_sweep, save_results_csv, save_summary_json
from .fusion import compute_view_weights, save_view_weights_json, uniform_view_weights
from .ranking import rank_features, save_ranking_csv
from .solver import ABLATIONS, Hyperparams, fit, save_confidence_csv, save_trace_csv

DEFAULTS = {
    "alpha": 1.0, "beta": 1.0, "gamma": 1.0, "delta": 1.0,
    "q": 5, "sigma": 1.0, "tol": 1e-3, "max_iters": 100, "seed": 42,
    "ablation": "full",
    "folds": 5, "p_min": 1, "p_max": 20,
    "mlknn_k": 10, "mlknn_s": 1.0,
    "grid_params": "alpha,beta,gamma,delta",
    "grid_values": "0.001,0.01,0.1,1,10,100,1000",
}

_ABLATION_SHORT = {"full": "full", "v1": "v1_no_confidence",
                   "v2": "v2_uniform_view_weights", "v3": "v3_no_reconstruction"}

_HP_FIELDS = ("alpha", "beta", "gamma", "delta", "q", "sigma", "tol",
              "max_iters", "seed", "ablation")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvmlfs",
        description="Multi-view multi-label feature selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--manifest", help="dataset manifest JSON")
        p.add_argument("--config", help="JSON config file with default options")
        p.add_argument("--out", help="output directory")
        p.add_argument("--alpha", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--q", type=int, help="neighbor count for all graphs")
        p.add_argument("--sigma", type=float, help="Gaussian bandwidth")
        p.add_argument("--tol", type=float, help="relative-change stopping threshold")
        p.add_argument("--max-iters", dest="max_iters", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--ablation",
                       choices=sorted(set(list(_ABLATION_SHORT) + list(ABLATIONS))))

    p_rank = sub.add_parser("rank", help="fit on the full dataset and rank features")
    add_common(p_rank)

    p_eval = sub.add_parser("eval", help="cross-validated feature-sweep evaluation")
    add_common(p_eval)
    p_eval.add_argument("--folds", type=int)
    p_eval.add_argument("--p-min", dest="p_min", type=int)
    p_eval.add_argument("--p-max", dest="p_max", type=int)
    p_eval.add_argument("--mlknn-k", dest="mlknn_k", type=int)
    p_eval.add_argument("--mlknn-s", dest="mlknn_s", type=float)
    p_eval.add_argument("--jobs", type=int, help="worker pool size")

    p_tune = sub.add_parser("tune", help="grid search over trade-off parameters")
    add_common(p_tune)
    p_tune.add_argument("--folds", type=int)
    p_tune.add_argument("--p-min", dest="p_min", type=int)
    p_tune.add_argument("--p-max", dest="p_max", type=int)
    p_tune.add_argument("--mlknn-k", dest="mlknn_k", type=int)
    p_tune.add_argument("--mlknn-s", dest="mlknn_s", type=float)
    p_tune.add_argument("--jobs", type=int)
    p_tune.add_argument("--grid-params", dest="grid_params",
                        help="comma list of parameters to vary")
    p_tune.add_argument("--grid-values", dest="grid_values",
                        help="comma list of values each varied parameter takes")

    p_trace = sub.add_parser("trace", help="single fit, write the convergence trace")
    add_common(p_trace)
    return parser


def _merge_options(args: argparse.Namespace) -> dict:
    """Apply flag > config > default precedence and validate field types."""
    merged = dict(DEFAULTS)
    if args.config is not None:
        cfg_path = Path(args.config)
        if not cfg_path.is_file():
            raise ValueError(f"config: file not found: {cfg_path}")
        try:
            cfg = json.loads(cfg_path.read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"config: invalid JSON ({exc})") from None
        if not isinstance(cfg, dict):
            raise ValueError("config: top level must be an object")
        for key, value in cfg.items():
            if key not in DEFAULTS and key not in ("manifest", "out", "jobs"):
                raise ValueError(f"config: unknown field {key!r}")
            merged[key] = value
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None:
            merged[key] = value
    if "jobs" not in merged or merged.get("jobs") is None:
        merged["jobs"] = int(os.environ.get("MVMLFS_JOBS", "1"))
    ablation = merged["ablation"]
    merged["ablation"] = _ABLATION_SHORT.get(ablation, ablation)
    return merged


def _hyperparams(opts: dict) -> Hyperparams:
    try:
        return Hyperparams(**{k: opts[k] for k in _HP_FIELDS})
    except (TypeError, ValueError) as exc:
        raise ValueError(str(exc)) from None


def _load_normalized(opts: dict):
    manifest = opts.get("manifest")
    if not manifest:
        raise ValueError("manifest: required (flag --manifest or config field)")
    return normalize_views(load_dataset(manifest))


def _out_dir(opts: dict) -> Path:
    out = opts.get("out")
    if not out:
        raise ValueError("out: required (flag --out or config field)")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cmd_rank(opts: dict) -> int:
    ds = _load_normalized(opts)
    hp = _hyperparams(opts)
    out = _out_dir(opts)
    state, _ = fit(ds, hp)
    if hp.ablation == "v2_uniform_view_weights":
        weights = uniform_view_weights(ds.n_views)
    else:
        weights = compute_view_weights(ds, q=hp.q, sigma=hp.sigma)
    save_ranking_csv(rank_features(state), out / "ranking.csv")
    save_view_weights_json(weights, ds.view_names, out / "view_weights.json")
    save_confidence_csv(state, ds.view_names, out / "confidence.csv")
    return 0


def _cmd_trace(opts: dict) -> int:
    ds = _load_normalized(opts)
    hp = _hyperparams(opts)
    out = _out_dir(opts)
    _, trace = fit(ds, hp)
    save_trace_csv(trace, out / "trace.csv")
    return 0


def _p_range(opts: dict):
    p_min, p_max = int(opts["p_min"]), int(opts["p_max"])
    if not 0 < p_min <= p_max <= 100:
        raise ValueError(f"p range: need 0 < p_min <= p_max <= 100, "
                         f"got [{p_min}, {p_max}]")
    return range(p_min, p_max + 1)


def _cmd_eval(opts: dict) -> int:
    ds = _load_normalized(opts)
    hp = _hyperparams(opts)
    out = _out_dir(opts)
    result = cross_validated_sweep(
        ds, hp, k_folds=int(opts["folds"]), p_range=_p_range(opts),
        mlknn_k=int(opts["mlknn_k"]), mlknn_s=float(opts["mlknn_s"]),
        jobs=int(opts["jobs"]),
    )
    save_results_csv(result, out / "results.csv")
    save_summary_json(result, out / "summary.json")
    return 0


def _grid_points(opts: dict):
    params = [p.strip() for p in str(opts["grid_params"]).split(",") if p.strip()]
    for p in params:
        if p not in ("alpha", "beta", "gamma", "delta"):
            raise ValueError(f"grid_params: unknown parameter {p!r}")
    try:
        values = [float(v) for v in str(opts["grid_values"]).split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"grid_values: not a comma list of numbers: "
                         f"{opts['grid_values']!r}") from None
    if not params or not values:
        raise ValueError("grid: need at least one parameter and one value")
    points = []
    for combo in itertools.product(values, repeat=len(params)):
        point = {k: float(opts[k]) for k in ("alpha", "beta", "gamma", "delta")}
        point.update(dict(zip(params, combo)))
        points.append(point)
    return points


def _tune_point(args):
    ds, hp, folds, p_range, mlknn_k, mlknn_s = args
    result = cross_validated_sweep(ds, hp, k_folds=folds, p_range=p_range,
                                   mlknn_k=mlknn_k, mlknn_s=mlknn_s, jobs=1)
    return result.summary


def _cmd_tune(opts: dict) -> int:
    ds = _load_normalized(opts)
    base_hp = _hyperparams(opts)
    out = _out_dir(opts)
    points = _grid_points(opts)
    p_range = _p_range(opts)
    folds = int(opts["folds"])
    mlknn_k, mlknn_s = int(opts["mlknn_k"]), float(opts["mlknn_s"])
    jobs = int(opts["jobs"])

    work = []
    for point in points:
        hp = Hyperparams(**{**{k: getattr(base_hp, k) for k in _HP_FIELDS},
                            **point})
        work.append((ds, hp, folds, p_range, mlknn_k, mlknn_s))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_tune_point, work))
    else:
        summaries = [_tune_point(w) for w in work]

    rows = sorted(zip(points, summaries),
                  key=lambda ps: (-ps[1]["ap"][0],
                                  tuple(ps[0][k] for k in ("alpha", "beta",
                                                           "gamma", "delta"))))
    with open(out / "tune.csv", "w", newline="") as fh:
        fh.write("alpha,beta,gamma,delta,"
                 "ap_mean,ap_std,coverage_mean,coverage_std,"
                 "hl_mean,hl_std,rl_mean,rl_std\n")
        for point, summary in rows:
            vals = [point["alpha"], point["beta"], point["gamma"], point["delta"]]
            for name in ("ap", "coverage", "hamming_loss", "ranking_loss"):
                vals.extend(summary[name])
            fh.write(",".join(repr(float(v)) for v in vals) + "\n")
    return 0


_COMMANDS = {"rank": _cmd_rank, "eval": _cmd_eval, "tune": _cmd_tune,
             "trace": _cmd_trace}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _merge_options(args)
        return _COMMANDS[args.command](opts)
    except (DatasetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

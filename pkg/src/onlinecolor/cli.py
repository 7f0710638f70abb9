"""Experiment runner CLI.

    onlinecolor run|sweep|enumerate|validate --config FILE [--set k=v]...
                [--jobs N] [--out DIR]

Configs are JSON with a versioned schema; any scalar field can be overridden
from the command line with dotted ``--set`` keys.  Runs write one CSV row per
(seed, repetition); sweeps add a per-axis summary CSV.  All numeric output is
full-precision decimal, no locale formatting.  Exit codes: 0 success,
1 validity failure, 2 config error, 3 I/O error, 4 enumeration budget.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional

from . import adversaries, algorithms, diagnostics
from .adversaries import ArrivalStream, BiasTreeConfig, gen_bias_tree
from .core import (
    BudgetExceeded,
    GenerationFailure,
    InvalidParams,
    Params,
    RngHandle,
    derive_params,
    validate_coloring,
)

SCHEMA_VERSION = 1

RESULT_COLUMNS = [
    "schema",
    "run_id",
    "seed",
    "repetition",
    "instance",
    "algorithm",
    "n",
    "delta",
    "eps",
    "cap",
    "total_colors",
    "greedy_palette_size",
    "max_marked_degree",
    "failed",
    "failure_index",
    "bad_vertex_count",
    "dangerous_vertex_count",
    "final_layer_bias",
    "wall_time_s",
]

SUMMARY_COLUMNS = [
    "schema",
    "axis",
    "value",
    "runs",
    "failure_rate",
    "failure_rate_ci95",
    "mean_total_colors",
    "mean_greedy_palette_size",
    "mean_final_layer_bias",
]


class ConfigError(ValueError):
    pass


def _fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def load_config(path: str, overrides: list[str]) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except OSError as err:
        raise OSError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from err
    if not isinstance(config, dict):
        raise ConfigError("config root must be an object")
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set path {key!r} crosses a scalar")
        node[parts[-1]] = value
    return config


def _seed_list(config: dict) -> list[int]:
    seeds = config.get("seeds")
    if seeds is None:
        env = os.environ.get("ONLINECOLOR_SEED")
        return [int(env)] if env else [0]
    if isinstance(seeds, dict):
        start = int(seeds.get("start", 0))
        count = int(seeds.get("count", 1))
        return list(range(start, start + count))
    if isinstance(seeds, list) and seeds:
        return [int(s) for s in seeds]
    raise ConfigError("seeds must be a non-empty list or {start, count}")


def build_instance(spec: dict, seed: int) -> ArrivalStream:
    if "file" in spec:
        stream = adversaries.read_instance(spec["file"])
    else:
        gen_name = spec.get("generator")
        rng = RngHandle(seed, stream=0)
        if gen_name == "two_star_bridge":
            stream = adversaries.gen_two_star_bridge(int(spec["delta"]))
        elif gen_name == "gadget_farm":
            stream = adversaries.gen_gadget_farm(
                int(spec["delta"]),
                int(spec["copies"]),
                bool(spec.get("interleaved", False)),
            )
        elif gen_name == "random_graph":
            stream = adversaries.gen_random_graph(
                int(spec["n"]), int(spec["delta"]), int(spec["m"]), rng
            )
        elif gen_name == "list_lb_deterministic":
            stream = adversaries.gen_list_lb_deterministic(int(spec["delta"]))
        elif gen_name == "list_lb_randomized":
            stream = adversaries.gen_list_lb_randomized(
                int(spec["delta"]),
                int(spec["copies"]),
                rng,
                spec.get("star_palette_size"),
            )
        else:
            raise ConfigError(f"unknown generator {gen_name!r}")
    if spec.get("shuffle"):
        stream = adversaries.wrap_random_order(stream, RngHandle(seed, stream=2))
    return stream


def build_params(config: dict, n: int, delta: int) -> Params:
    spec = dict(config.get("params") or {})
    mode = spec.pop("mode", "adaptive")
    allowed = {"eps", "cap", "alpha", "badness_threshold", "dangerous_threshold"}
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigError(f"unknown params overrides: {sorted(unknown)}")
    return derive_params(n, delta, mode, **spec)


SCALING_COLUMNS = [
    "edge_u",
    "edge_v",
    "t_e",
    "identity_residual",
    "p_bound_excess",
    "max_r_minus_p",
]


def _write_diagnostics(result, config: dict, out_dir: str, run_id: str) -> None:
    spec = config.get("diagnostics", {})
    tracked = int(spec.get("tracked_edges", 5))
    edges = [e for e in result.edges if e in result.state.assignment][-tracked:]
    if spec.get("trajectories"):
        rows = []
        for e in edges:
            rows.extend(diagnostics.trajectory_rows(
                diagnostics.compute_trajectory(result.trace, e)
            ))
        path = os.path.join(out_dir, f"trajectories_{run_id}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(diagnostics.TRAJECTORY_COLUMNS)
            writer.writerows(rows)
    if spec.get("scaling_factors"):
        path = os.path.join(out_dir, f"scaling_{run_id}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SCALING_COLUMNS)
            for e in edges:
                sf = diagnostics.compute_scaling_factors(result.trace, e)
                writer.writerow([
                    e.u, e.v, sf.t_e,
                    repr(sf.identity_residual()),
                    repr(sf.max_p_bound_excess()),
                    repr(sf.max_r_minus_p()),
                ])


def run_single(config: dict, seed: int, rep: int, out_dir: str = ".") -> dict:
    """Execute one run; returns a ResultRow dict (worker-pool friendly)."""
    algorithm = config.get("algorithm", "alg1")
    started = time.perf_counter()

    if algorithm == "biastree":
        spec = config.get("instance", {})
        cfg = BiasTreeConfig(
            delta=int(spec["delta"]),
            palette_ratio=float(spec["palette_ratio"]),
            layers=int(spec.get("layers", 6)),
            pool_size=int(spec.get("pool_size", 1024)),
            rng=RngHandle(seed, stream=1 + rep),
        )
        result = gen_bias_tree(cfg).run()
        wall = time.perf_counter() - started
        return {
            "schema": SCHEMA_VERSION,
            "run_id": f"{seed}r{rep}",
            "seed": seed,
            "repetition": rep,
            "instance": f"bias_tree(delta={cfg.delta},ratio={cfg.palette_ratio})",
            "algorithm": algorithm,
            "n": "",
            "delta": cfg.delta,
            "eps": "",
            "cap": "",
            "total_colors": "",
            "greedy_palette_size": "",
            "max_marked_degree": "",
            "failed": int(result.total_failed_edges > 0),
            "failure_index": "",
            "bad_vertex_count": "",
            "dangerous_vertex_count": "",
            "final_layer_bias": result.layers[-1].mean_bias,
            "wall_time_s": wall,
            "_valid": True,
        }

    stream = build_instance(config.get("instance", {}), seed)
    rng = RngHandle(seed, stream=1 + rep)
    params: Optional[Params] = None
    if algorithm == "greedy":
        result = algorithms.run_greedy(stream)
    elif algorithm == "randgreedy":
        result = algorithms.run_randomized_greedy(
            stream,
            int(config["palette_size"]),
            rng,
            bool(config.get("continue_after_failure", False)),
        )
    elif algorithm == "listgreedy":
        result = algorithms.run_list_greedy(
            stream, rng, bool(config.get("continue_after_failure", False))
        )
    elif algorithm in ("alg1", "alg2"):
        params = build_params(config, stream.n, stream.delta)
        runner = algorithms.run_alg1 if algorithm == "alg1" else algorithms.run_alg2
        diag = config.get("diagnostics", {})
        keep = bool(
            diag.get("keep_trace")
            or diag.get("trajectories")
            or diag.get("scaling_factors")
        )
        result = runner(stream, params, rng, keep_trace=keep)
        if diag.get("trajectories") or diag.get("scaling_factors"):
            _write_diagnostics(result, config, out_dir, f"{seed}r{rep}")
    else:
        raise ConfigError(f"unknown algorithm {algorithm!r}")

    report = validate_coloring(result.colored_edges, result.state)
    wall = time.perf_counter() - started
    m = result.metrics
    return {
        "schema": SCHEMA_VERSION,
        "run_id": f"{seed}r{rep}",
        "seed": seed,
        "repetition": rep,
        "instance": stream.name or "file",
        "algorithm": algorithm,
        "n": m.n,
        "delta": m.delta,
        "eps": params.eps if params else "",
        "cap": params.cap if params else "",
        "total_colors": m.total_colors,
        "greedy_palette_size": m.greedy_palette_size,
        "max_marked_degree": m.max_marked_degree,
        "failed": int(bool(result.failures)),
        "failure_index": result.failure.index if result.failure else "",
        "bad_vertex_count": m.bad_vertex_count,
        "dangerous_vertex_count": m.dangerous_vertex_count,
        "final_layer_bias": "",
        "wall_time_s": wall,
        "_valid": report.ok,
    }


def _execute_runs(config: dict, jobs: int, out_dir: str = ".") -> tuple[list[dict], bool]:
    seeds = _seed_list(config)
    reps = int(config.get("repetitions", 1))
    tasks = [(seed, rep) for seed in seeds for rep in range(reps)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_star, [(config, s, r, out_dir) for s, r in tasks]))
    else:
        rows = [run_single(config, s, r, out_dir) for s, r in tasks]
    rows.sort(key=lambda row: (row["seed"], row["repetition"]))
    all_valid = all(row.pop("_valid") for row in rows)
    return rows, all_valid


def _run_star(args: tuple) -> dict:
    return run_single(*args)


def write_csv(path: str, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in columns])


def cmd_run(config: dict, out_dir: str, jobs: int) -> int:
    rows, all_valid = _execute_runs(config, jobs, out_dir)
    results_path = os.path.join(
        out_dir, config.get("output", {}).get("results", "results.csv")
    )
    write_csv(results_path, RESULT_COLUMNS, rows)
    print(f"wrote {len(rows)} rows to {results_path}")
    return 0 if all_valid else 1


def _set_by_path(config: dict, key: str, value: Any) -> None:
    node = config
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def cmd_sweep(config: dict, out_dir: str, jobs: int) -> int:
    sweep = config.get("sweep")
    if not sweep or "key" not in sweep or not sweep.get("values"):
        raise ConfigError("sweep needs {'key': ..., 'values': [...]} with values")
    key = sweep["key"]
    values = sweep["values"]
    all_rows: list[dict] = []
    summary: list[dict] = []
    ok = True
    for value in values:
        point = json.loads(json.dumps(config))  # deep copy
        point.pop("sweep", None)
        _set_by_path(point, key, value)
        rows, valid = _execute_runs(point, jobs, out_dir)
        ok = ok and valid
        for row in rows:
            row["run_id"] = f"{key}={value}:{row['run_id']}"
        all_rows.extend(rows)
        n = len(rows)
        failure_rate = sum(r["failed"] for r in rows) / n if n else 0.0
        ci95 = 1.96 * math.sqrt(failure_rate * (1 - failure_rate) / n) if n else 0.0
        colors = [r["total_colors"] for r in rows if r["total_colors"] != ""]
        palettes = [
            r["greedy_palette_size"] for r in rows if r["greedy_palette_size"] != ""
        ]
        biases = [r["final_layer_bias"] for r in rows if r["final_layer_bias"] != ""]
        summary.append(
            {
                "schema": SCHEMA_VERSION,
                "axis": key,
                "value": value,
                "runs": n,
                "failure_rate": failure_rate,
                "failure_rate_ci95": ci95,
                "mean_total_colors": sum(colors) / len(colors) if colors else "",
                "mean_greedy_palette_size": (
                    sum(palettes) / len(palettes) if palettes else ""
                ),
                "mean_final_layer_bias": sum(biases) / len(biases) if biases else "",
            }
        )
    out = config.get("output", {})
    write_csv(os.path.join(out_dir, out.get("results", "results.csv")),
              RESULT_COLUMNS, all_rows)
    write_csv(os.path.join(out_dir, out.get("summary", "summary.csv")),
              SUMMARY_COLUMNS, summary)
    print(f"wrote {len(all_rows)} rows and {len(summary)} summary rows")
    return 0 if ok else 1


def cmd_enumerate(config: dict, out_dir: str) -> int:
    spec = config.get("instance", {})
    if "file" in spec:
        stream = adversaries.read_instance(spec["file"])
    else:
        stream = build_instance(spec, _seed_list(config)[0])
    algorithm = config.get("algorithm", "alg1")
    report_kwargs: dict[str, Any] = {
        "budget": int(config.get("budget", 10**6)),
        "track_q": bool(config.get("track_q", False)),
    }
    if algorithm == "randgreedy":
        report_kwargs["palette_size"] = int(config["palette_size"])
        report_kwargs.pop("track_q")
        params = derive_params(max(stream.n, 2), stream.delta, eps=0.5)
    else:
        params = build_params(config, stream.n, stream.delta)
    report = diagnostics.enumerate_exact(stream, params, algorithm, **report_kwargs)

    def finite(x):
        return x if math.isfinite(x) else None

    payload = {
        "schema": SCHEMA_VERSION,
        "algorithm": report.algorithm,
        "branches": report.branches,
        "n_leaves": len(report.leaves),
        "total_probability": report.total_probability,
        "failure_probability": report.failure_probability,
        "max_conditional_z_drift": finite(report.max_conditional_z_drift),
        "max_abs_conditional_y_drift": report.max_abs_conditional_y_drift,
        "max_abs_z_step": report.max_abs_z_step,
        "step_bound": report.step_bound,
        "step_bound_violations": report.step_bound_violations,
        "max_decomposition_residual": report.max_decomposition_residual,
    }
    if report_kwargs.get("track_q"):
        payload["max_conditional_q_drift"] = finite(report.max_conditional_q_drift)
        payload["max_abs_q_step"] = report.max_abs_q_step
        payload["q_step_violations"] = report.q_step_violations
    text = json.dumps(payload, indent=2)
    target = config.get("output", {}).get("report")
    if target:
        with open(os.path.join(out_dir, target), "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_validate(config: dict) -> int:
    spec = config.get("instance", {})
    if "file" not in spec:
        raise ConfigError("validate needs instance.file")
    if "assignment_file" not in config:
        raise ConfigError("validate needs assignment_file")
    stream = adversaries.read_instance(spec["file"])
    assignment = adversaries.read_assignment(config["assignment_file"])
    from .core import ColoringState

    state = ColoringState()
    for edge, color in assignment.items():
        state.assign(edge, color)
    report = validate_coloring(stream.edges(), state)
    if report.ok:
        print("valid")
        return 0
    print(report.summary())
    return 1


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="onlinecolor",
        description="online edge-coloring experiment runner",
    )
    parser.add_argument("command", choices=["run", "sweep", "enumerate", "validate"])
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument(
        "--set", action="append", default=[], metavar="K=V",
        help="override a config field (dotted path, JSON value)",
    )
    parser.add_argument("--jobs", type=int, default=1, help="worker pool size")
    parser.add_argument("--out", default=".", help="output directory")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config, args.set)
        os.makedirs(args.out, exist_ok=True)
        if args.command == "run":
            return cmd_run(config, args.out, args.jobs)
        if args.command == "sweep":
            return cmd_sweep(config, args.out, args.jobs)
        if args.command == "enumerate":
            return cmd_enumerate(config, args.out)
        return cmd_validate(config)
    except (ConfigError, InvalidParams, KeyError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 3
    except BudgetExceeded as err:
        print(f"budget exceeded: {err}", file=sys.stderr)
        return 4
    except GenerationFailure as err:
        print(f"instance generation failed: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

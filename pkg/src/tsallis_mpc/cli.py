"""Command-line entry point: ``run``, ``sweep`` and ``check``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import subprocess
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from . import analysis
from .config import (ConfigError, ExperimentConfig, build_mpc_config, build_objective, build_system, config_hash,
                     load_config)
from .mpc import run_trial_set

log = logging.getLogger("tsallis_mpc")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
THREADS_ENV = "TSALLIS_MPC_THREADS"
TRIAL_HEADER = ["trial", "realized_cost", "crashed", "steps_to_goal"]


def resolve_threads(flag: Optional[int]) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    elif flag is not None:
        n = flag
    else:
        n = os.cpu_count() or 1
    if n < 1:
        raise ConfigError("thread count must be at least 1")
    return n


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
                             cwd=Path(__file__).resolve().parent, timeout=10)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _out_dir(cfg: ExperimentConfig, flag: Optional[str]) -> Path:
    path = Path(flag) if flag else Path(cfg.output.dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _seeded(cfg: ExperimentConfig, offset: int) -> ExperimentConfig:
    if offset == 0:
        return cfg
    seeds = cfg.seeds.model_copy(update={"trial_seed": cfg.seeds.trial_seed + offset})
    return cfg.model_copy(update={"seeds": seeds})


# --------------------------------------------------------------------------- run

def run_experiment(cfg: ExperimentConfig, threads: int = 1):
    """Returns ``(rows, mean, std, seeds)`` for either task family."""
    if cfg.task == "single_stage":
        ss = cfg.single_stage
        samples = analysis.draw_single_stage_samples(ss.n_seeds, ss.n_samples, cfg.seeds.trial_seed)
        res = analysis.run_single_stage(analysis.make_transform(cfg.method, cfg.transform.as_dict()),
                                        samples=samples, objective=build_objective(cfg))
        rows = [[int(s), float(c), 0, -1] for s, c in zip(samples.seeds, res.costs)]
        return rows, res.mean, res.std, [int(s) for s in samples.seeds]
    model = build_system(cfg)
    mpc = build_mpc_config(cfg, model)
    summary = run_trial_set(mpc, model, cfg.seeds.n_trials, threads=threads)
    rows = [[r.trial_seed, r.total_cost, int(r.crashed), r.steps_to_goal] for r in summary.records]
    return rows, summary.mean, summary.std, [r.trial_seed for r in summary.records]


def cmd_run(args) -> int:
    cfg = _seeded(load_config(args.config), args.seed_offset)
    threads = resolve_threads(args.threads)
    out = _out_dir(cfg, args.out_dir)
    t0 = time.perf_counter()
    rows, mean, std, seeds = run_experiment(cfg, threads)
    analysis.write_csv(out / "trials.csv", TRIAL_HEADER, rows)
    analysis.write_json(out / "summary.json", {
        "task": cfg.task,
        "method": cfg.method,
        "mean": mean,
        "std": std,
        "config_hash": config_hash(cfg),
        "git_describe": git_describe(),
        "seeds": seeds,
    })
    log.info("wrote %s (%.1fs)", out, time.perf_counter() - t0)
    print(f"mean {mean:.6g} std {std:.6g} over {len(rows)} trials -> {out}")
    return EXIT_OK


# --------------------------------------------------------------------------- sweep

def _load_grid(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read grid {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"grid is not valid JSON: {e}") from None
    if not isinstance(data, dict) or "params" not in data:
        raise ConfigError("grid: expected an object with a 'params' entry")
    return data


class _Checkpoint:
    """Append-only JSON-lines store of finished grid points."""

    def __init__(self, path: Path):
        self.path = path
        self.done = {}
        if path.exists():
            for line in path.read_text().splitlines():
                if line.strip():
                    rec = json.loads(line)
                    self.done[rec["key"]] = tuple(rec["result"])

    def get(self, key):
        return self.done.get(key)

    def put(self, key, result):
        self.done[key] = tuple(result)
        with open(self.path, "a") as fh:
            fh.write(json.dumps({"key": key, "result": [float(x) for x in result]}) + "\n")


def make_evaluator(cfg: ExperimentConfig, threads: int, checkpoint: Optional[_Checkpoint] = None):
    """Config-point -> (mean, std, control error) for the experiment's task."""
    if cfg.task == "single_stage":
        ss = cfg.single_stage
        samples = analysis.draw_single_stage_samples(ss.n_seeds, ss.n_samples, cfg.seeds.trial_seed)
        base = analysis.single_stage_evaluator(cfg.method, samples, build_objective(cfg))
    else:
        model = build_system(cfg)

        def base(point):
            point_cfg = cfg.with_transform(point)
            s = run_trial_set(build_mpc_config(point_cfg, model), model, cfg.seeds.n_trials, threads=threads)
            return s.mean, s.std, math.nan

    def evaluate(point):
        key = config_hash(cfg.with_transform(point))
        if checkpoint is not None:
            hit = checkpoint.get(key)
            if hit is not None:
                return hit
        res = base(point)
        if checkpoint is not None:
            checkpoint.put(key, res)
        return res

    return evaluate


def cmd_sweep(args) -> int:
    cfg = _seeded(load_config(args.config), args.seed_offset)
    grid = _load_grid(args.grid)
    threads = resolve_threads(args.threads)
    out = _out_dir(cfg, args.out_dir)
    ckpt = _Checkpoint(out / f"sweep_{args.mode}.checkpoint.jsonl")
    evaluator = make_evaluator(cfg, threads, ckpt)
    summary = {"task": cfg.task, "method": cfg.method, "mode": args.mode,
               "config_hash": config_hash(cfg), "git_describe": git_describe()}
    if args.mode == "grid":
        params = grid["params"]
        if not isinstance(params, dict):
            raise ConfigError("grid.params: expected a mapping of parameter name to value list")
        try:
            spec = analysis.GridSpec(cfg.method, params, int(grid.get("budget", 4096)))
            spec.configs()
        except ValueError as e:
            raise ConfigError(f"grid: {e}") from None
        result = analysis.grid_search(spec, evaluator)
        header, rows = analysis.sweep_rows(result)
        summary.update(best_by_mean=result.best_by_mean.__dict__, best_by_std=result.best_by_std.__dict__,
                       n_configs=len(result.rows))
    else:
        params = grid["params"]
        if not isinstance(params, list):
            raise ConfigError("grid.params: expected a list of parameter names for sensitivity mode")
        base = cfg.transform.as_dict()
        try:
            entries = analysis.sensitivity_sweep(base, params, evaluator, cfg.method, float(grid.get("delta", 0.1)))
        except ValueError as e:
            raise ConfigError(f"grid: {e}") from None
        header, rows = analysis.sensitivity_rows(entries, cfg.method)
        summary["variation_percent"] = {e.param: {"mean": e.mean_variation, "std": e.std_variation}
                                        for e in entries}
    analysis.write_csv(out / f"sweep_{args.mode}.csv", header, rows)
    analysis.write_json(out / f"sweep_{args.mode}.json", summary)
    print(f"{len(rows)} rows -> {out}")
    return EXIT_OK


# --------------------------------------------------------------------------- check

def cmd_check(args) -> int:
    from .checks import run_checks

    t0 = time.perf_counter()
    results = run_checks()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    ok = all(r.passed for r in results)
    print(f"{'all checks passed' if ok else 'checks failed'} in {time.perf_counter() - t0:.2f}s")
    return EXIT_OK if ok else EXIT_RUNTIME


# --------------------------------------------------------------------------- entry

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsallis-mpc", description="Sampling-based MPC with deformed cost transforms.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="experiment config (JSON)")
        sp.add_argument("--out-dir", help="output directory (default: output.dir of the config)")
        sp.add_argument("--threads", type=int, help=f"worker processes (env {THREADS_ENV} wins)")
        sp.add_argument("--seed-offset", type=int, default=0, help="added to the trial seed")

    common(sub.add_parser("run", help="run trials for one config"))
    sw = sub.add_parser("sweep", help="grid search or sensitivity sweep")
    common(sw)
    sw.add_argument("--grid", required=True, help="grid / sensitivity spec (JSON)")
    sw.add_argument("--mode", choices=["grid", "sensitivity"], default="grid")
    sub.add_parser("check", help="fast invariant suite")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": cmd_run, "sweep": cmd_sweep, "check": cmd_check}
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        print(f"invalid config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

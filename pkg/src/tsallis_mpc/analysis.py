"""Single-stage transform comparison, grid sweeps and sensitivity tables."""
from __future__ import annotations

import csv
import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .rollout import normalize_costs, stream
from .systems.single_stage import U_RANGE, SingleStageObjective
from .transforms import Cem, CostTransform, EliteFraction, EliteThreshold, Mppi, Tsallis, likelihood, resolve_gamma

SINGLE_STAGE_STREAM = 3
METHODS = ("tsallis", "mppi", "cem")

Config = Dict[str, float]
Evaluator = Callable[[Config], Tuple[float, float, float]]


# --------------------------------------------------------------------------- transforms from flat configs

def make_transform(method: str, params: Mapping[str, float]) -> CostTransform:
    """Build a cost transform from a flat parameter mapping.

    Keys: ``r``, ``elite_fraction`` or ``gamma`` for tsallis; ``inv_lambda``
    (or ``lam``) for mppi; ``elite_fraction`` or ``gamma`` and optional
    ``smoothing_alpha`` for cem. Invalid values raise ``ValueError``.
    """
    params = dict(params)

    def elite():
        if "elite_fraction" in params:
            return EliteFraction(float(params.pop("elite_fraction")))
        if "gamma" in params:
            return EliteThreshold(float(params.pop("gamma")))
        raise ValueError(f"{method} needs elite_fraction or gamma")

    if method == "tsallis":
        if "r" not in params:
            raise ValueError("tsallis needs r")
        t = Tsallis(float(params.pop("r")), elite())
    elif method == "mppi":
        if "inv_lambda" in params:
            inv = float(params.pop("inv_lambda"))
        elif "lam" in params:
            lam = float(params.pop("lam"))
            if not lam > 0:
                raise ValueError(f"lam must be positive, got {lam}")
            inv = 1.0 / lam
        else:
            raise ValueError("mppi needs inv_lambda or lam")
        t = Mppi(inv)
    elif method == "cem":
        t = Cem(elite(), float(params.pop("smoothing_alpha", 0.0)))
    else:
        raise ValueError(f"unknown method {method!r}")
    if params:
        raise ValueError(f"unused parameters for {method}: {sorted(params)}")
    return t


# --------------------------------------------------------------------------- single-stage experiment

@dataclass(frozen=True)
class SingleStageSamples:
    """Shared control samples ``u`` and noise draws ``xi``, one row per seed."""

    u: np.ndarray  # (S, n)
    xi: np.ndarray  # (S, n)
    seeds: np.ndarray  # (S,)

    @property
    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for a in (self.seeds, self.u, self.xi):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()


def draw_single_stage_samples(n_seeds: int, n_samples: int = 64, seed_offset: int = 0) -> SingleStageSamples:
    """Uniform controls on [-5, 5] and standard normal noise, per seed."""
    if n_seeds < 1 or n_samples < 1:
        raise ValueError("need at least one seed and one sample")
    seeds = np.arange(seed_offset, seed_offset + n_seeds)
    u = np.empty((n_seeds, n_samples))
    xi = np.empty((n_seeds, n_samples))
    for i, s in enumerate(seeds):
        rng = stream(int(s), SINGLE_STAGE_STREAM)
        u[i] = rng.uniform(*U_RANGE, size=n_samples)
        xi[i] = rng.standard_normal(n_samples)
    return SingleStageSamples(u, xi, seeds)


@dataclass(frozen=True)
class SingleStageResult:
    mean: float
    std: float
    control_error: float
    updated: np.ndarray  # (S,) updated mean control per seed
    costs: np.ndarray  # (S,) noiseless cost at the updated control


def single_stage_weights(costs: np.ndarray, transform: CostTransform) -> np.ndarray:
    """Row-wise normalized weights for a (S, n) block of noisy costs.

    Costs are min-max scaled per row before the shape function is applied,
    as in the rollout path. A row whose likelihoods all vanish gets uniform
    weights.
    """
    costs = np.asarray(costs, dtype=float)
    lo = costs.min(axis=1, keepdims=True)
    span = costs.max(axis=1, keepdims=True) - lo
    flat = span == 0
    J = np.where(flat, 0.0, (costs - lo) / np.where(flat, 1.0, span))
    gamma = None if isinstance(transform, Mppi) else resolve_gamma(J, transform.elite, axis=-1)
    lik = likelihood(transform, J, gamma)
    tot = lik.sum(axis=1, keepdims=True)
    n = costs.shape[1]
    return np.where(tot > 0, lik / np.where(tot > 0, tot, 1.0), 1.0 / n)


def run_single_stage(method: CostTransform, n_seeds: int = 1024, n_samples: int = 64,
                     samples: Optional[SingleStageSamples] = None,
                     objective: Optional[SingleStageObjective] = None) -> SingleStageResult:
    """One fixed-variance Gaussian mean update per seed from shared samples.

    The updated control is the weighted sample mean; its noiseless cost is
    aggregated over seeds (std with ddof=1). The control error is the mean
    of ``|u_updated - u*|``.
    """
    objective = objective or SingleStageObjective()
    if samples is None:
        samples = draw_single_stage_samples(n_seeds, n_samples)
    J = objective(samples.u, samples.xi)
    w = single_stage_weights(J, method)
    updated = np.sum(w * samples.u, axis=1)
    cost = objective.noiseless(updated)
    std = float(cost.std(ddof=1)) if cost.size > 1 else 0.0
    err = float(np.mean(np.abs(updated - objective.argmin)))
    return SingleStageResult(float(cost.mean()), std, err, updated, cost)


# --------------------------------------------------------------------------- grid search

def _config_key(config: Mapping[str, float]) -> Tuple:
    return tuple(sorted((k, float(v)) for k, v in config.items()))


@dataclass(frozen=True)
class GridSpec:
    """Cartesian grid over named parameters for one method."""

    method: str
    params: Mapping[str, Sequence[float]]
    budget: int = 4096

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.size > self.budget:
            raise ValueError(f"grid has {self.size} points, budget is {self.budget}")

    @property
    def size(self) -> int:
        if not self.params:
            return 0
        return math.prod(len(v) for v in self.params.values())

    def configs(self) -> List[Config]:
        names = sorted(self.params)
        out = [dict(zip(names, map(float, vals)))
               for vals in itertools.product(*(self.params[n] for n in names))]
        for c in out:
            make_transform(self.method, c)  # validity check
        return out


def default_grid(method: str, budget: int = 4096) -> GridSpec:
    """Log-spaced grids: r in [1.05, 64], elite fraction in [0.01, 0.8],
    inverse temperature in [0.1, 100]."""
    if method == "tsallis":
        return GridSpec(method, {"r": np.geomspace(1.05, 64, 32).tolist(),
                                 "elite_fraction": np.geomspace(0.01, 0.8, 16).tolist()}, budget)
    if method == "cem":
        return GridSpec(method, {"elite_fraction": np.geomspace(0.01, 0.8, 512).tolist()}, budget)
    if method == "mppi":
        return GridSpec(method, {"inv_lambda": np.geomspace(0.1, 100, 512).tolist()}, budget)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class SweepRow:
    config: Config
    mean: float
    std: float
    control_error: float


@dataclass
class SweepResult:
    method: str
    rows: List[SweepRow]
    best_by_mean: SweepRow = field(init=False)
    best_by_std: SweepRow = field(init=False)

    def __post_init__(self):
        if not self.rows:
            raise ValueError("empty sweep")
        self.rows = sorted(self.rows, key=lambda r: _config_key(r.config))
        # ties resolve to the lexicographically smallest config
        self.best_by_mean = min(self.rows, key=lambda r: (r.mean, _config_key(r.config)))
        self.best_by_std = min(self.rows, key=lambda r: (r.std, _config_key(r.config)))


def grid_search(spec: GridSpec, evaluator: Evaluator,
                map_fn: Callable[[Callable, Iterable], Iterable] = map) -> SweepResult:
    """Evaluate every grid point; ``map_fn`` may be a parallel map."""
    configs = spec.configs()
    if not configs:
        raise ValueError("empty grid")
    results = list(map_fn(evaluator, configs))
    rows = [SweepRow(c, float(m), float(s), float(e)) for c, (m, s, e) in zip(configs, results)]
    return SweepResult(spec.method, rows)


def single_stage_evaluator(method: str, samples: SingleStageSamples,
                           objective: Optional[SingleStageObjective] = None) -> Evaluator:
    def evaluate(config: Config):
        res = run_single_stage(make_transform(method, config), samples=samples, objective=objective)
        return res.mean, res.std, res.control_error
    return evaluate


# --------------------------------------------------------------------------- sensitivity

@dataclass(frozen=True)
class SensitivityEntry:
    """Baseline and +/- perturbed statistics for one parameter."""

    param: str
    values: Tuple[float, float, float]  # (+delta, baseline, -delta)
    means: Tuple[float, float, float]
    stds: Tuple[float, float, float]

    @property
    def mean_variation(self) -> float:
        return variation_percent(self.means)

    @property
    def std_variation(self) -> float:
        return variation_percent(self.stds)


def variation_percent(stats: Sequence[float]) -> float:
    """``(average of the two perturbed values / baseline - 1) * 100``.

    ``stats`` is ordered (+delta, baseline, -delta).
    """
    plus, base, minus = stats
    return (0.5 * (plus + minus) / base - 1.0) * 100.0


def sensitivity_sweep(base: Config, params: Sequence[str], evaluator: Evaluator,
                      method: Optional[str] = None, delta: float = 0.1) -> List[SensitivityEntry]:
    """Evaluate each parameter at ``(1 +/- delta)`` times its baseline.

    With ``method`` given, each perturbed config must build a valid transform,
    otherwise ``ValueError`` names the offending parameter.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    base = {k: float(v) for k, v in base.items()}
    if method is not None:
        make_transform(method, base)
    m0, s0, _ = evaluator(dict(base))
    out = []
    for p in params:
        if p not in base:
            raise ValueError(f"parameter {p!r} is not in the baseline config")
        stats = {}
        for sign in (1, -1):
            cfg = dict(base)
            cfg[p] = base[p] * (1 + sign * delta)
            if method is not None:
                try:
                    make_transform(method, cfg)
                except ValueError as e:
                    raise ValueError(f"perturbing {p} to {cfg[p]} is invalid: {e}") from e
            stats[sign] = (cfg[p],) + tuple(evaluator(cfg)[:2])
        out.append(SensitivityEntry(
            p,
            (stats[1][0], base[p], stats[-1][0]),
            (stats[1][1], m0, stats[-1][1]),
            (stats[1][2], s0, stats[-1][2]),
        ))
    return out


# --------------------------------------------------------------------------- statistics and output

def mean_std(x) -> Tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1)) if x.size > 1 else 0.0


def fmt_float(x: float) -> str:
    """Round-trippable 17 significant digit representation."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    return format(x, ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def sweep_rows(result: SweepResult) -> Tuple[List[str], List[list]]:
    names = sorted({k for r in result.rows for k in r.config})
    header = ["method"] + names + ["mean", "std", "control_error"]
    rows = [[result.method] + [r.config.get(n, float("nan")) for n in names] + [r.mean, r.std, r.control_error]
            for r in result.rows]
    return header, rows


def sensitivity_rows(entries: Sequence[SensitivityEntry], method: str) -> Tuple[List[str], List[list]]:
    """One row per (parameter, setting) plus a variation row, mirroring the
    +10% / baseline / -10% / variation layout."""
    header = ["method", "param", "setting", "value", "mean", "std"]
    rows = []
    for e in entries:
        for label, v, m, s in zip(("+delta", "baseline", "-delta"), e.values, e.means, e.stds):
            rows.append([method, e.param, label, v, m, s])
        rows.append([method, e.param, "variation_percent", float("nan"), e.mean_variation, e.std_variation])
    return header, rows

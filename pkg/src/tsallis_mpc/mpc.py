"""Receding-horizon variational-inference MPC and trial bookkeeping."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .policies import Policy, update_policy
from .rollout import EVAL_NOISE_STREAM, POLICY_STREAM, NoiseConfig, rollout_batch, stream, weigh_batch
from .systems.base import SystemModel
from .transforms import Cem, CostTransform

log = logging.getLogger(__name__)

GOAL_TOLERANCE = 1.0


@dataclass(frozen=True)
class MpcConfig:
    horizon: int  # T
    n_steps: int  # T', executed controls per episode
    iters: int  # K
    warmup_iters: int
    n_samples: int  # N
    n_state_samples: int  # M
    noise: NoiseConfig
    transform: CostTransform
    policy: Policy  # initial policy
    smoothing_alpha: float = 0.0
    trial_seed: int = 0
    em_iters: int = 5

    def __post_init__(self):
        if self.horizon < 1 or self.n_steps < 1 or self.iters < 1:
            raise ValueError("horizon, n_steps and iters must be at least 1")
        if self.warmup_iters < self.iters:
            raise ValueError("warmup_iters must be >= iters")
        if self.n_samples < 2 or self.n_state_samples < 1:
            raise ValueError("need n_samples >= 2 and n_state_samples >= 1")
        if self.policy.horizon != self.horizon:
            raise ValueError("initial policy horizon does not match the config")
        if not 0.0 <= self.smoothing_alpha < 1.0:
            raise ValueError("smoothing_alpha must lie in [0, 1)")

    @property
    def effective_smoothing(self) -> float:
        if isinstance(self.transform, Cem) and self.smoothing_alpha == 0.0:
            return self.transform.smoothing_alpha
        return self.smoothing_alpha


@dataclass
class StepDiagnostics:
    gamma: Optional[float]
    degenerate: bool
    effective_sample_size: float


@dataclass
class TrialRecord:
    trial_seed: int
    eval_seed: int
    states: np.ndarray  # (T'+1, n_x)
    controls: np.ndarray  # (T', n_u)
    total_cost: float
    crashed: bool
    steps_to_goal: int  # -1 if the goal region was never reached
    diagnostics: List[StepDiagnostics] = field(default_factory=list)


def optimize(policy: Policy, model: SystemModel, x: np.ndarray, config: MpcConfig,
             mpc_step: int, n_iters: int, seed: int):
    """Run ``n_iters`` sample-rollout-update iterations from state ``x``."""
    N, M = config.n_samples, config.n_state_samples
    x0 = np.broadcast_to(x, (N, M, model.state_dim))
    batch = None
    for k in range(n_iters):
        samples = policy.sample(N, stream(seed, POLICY_STREAM, mpc_step, k))
        shape = (N, M) + samples.controls.shape[1:]
        eps = config.noise.draw(seed, mpc_step, k, shape)
        costs = rollout_batch(model, x0, samples.controls, eps)
        batch = weigh_batch(samples.controls, costs, config.transform)
        policy = update_policy(policy, samples, batch.weights, config.effective_smoothing, config.em_iters)
    return policy, batch


def run_mpc_trial(config: MpcConfig, model: SystemModel, eval_seed: Optional[int] = None) -> TrialRecord:
    """Closed-loop episode: optimize, execute the selected control, recede.

    The first MPC step uses ``warmup_iters`` iterations. The executed control
    is perturbed by evaluation noise from its own stream keyed by
    ``eval_seed`` (default ``trial_seed``).
    """
    seed = config.trial_seed
    eval_seed = seed if eval_seed is None else eval_seed
    n_u = model.control_dim
    states = np.empty((config.n_steps + 1, model.state_dim))
    controls = np.empty((config.n_steps, n_u))
    states[0] = model.x0
    policy = config.policy
    diags = []
    for step in range(config.n_steps):
        n_iters = config.warmup_iters if step == 0 else config.iters
        policy, batch = optimize(policy, model, states[step], config, step, n_iters, seed)
        u = policy.select_control()
        eps = config.noise.sigma_eps * stream(eval_seed, EVAL_NOISE_STREAM, step).standard_normal(n_u)
        controls[step] = u
        states[step + 1] = model.step(states[step][None], (u + eps)[None])[0]
        diags.append(StepDiagnostics(batch.gamma, batch.degenerate, batch.weights.effective_sample_size))
        policy = policy.recede()
    total = float(model.trajectory_cost(states, controls))
    crashed = bool(np.any(model.is_crashed(states)))
    reached = np.flatnonzero(model.goal_distance(states) < GOAL_TOLERANCE)
    return TrialRecord(seed, eval_seed, states, controls, total, crashed,
                       int(reached[0]) if reached.size else -1, diags)


@dataclass
class TrialSetSummary:
    mean: float
    std: float
    records: List[TrialRecord]

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.total_cost for r in self.records])


def _run_one(args):
    config, model, eval_seed = args
    return run_mpc_trial(config, model, eval_seed)


def run_trial_set(config: MpcConfig, model: SystemModel, n_trials: int, threads: int = 1,
                  eval_seed_offset: int = 0) -> TrialSetSummary:
    """Repeat the episode for trial seeds ``trial_seed + i``.

    Trials are independent; ``threads > 1`` farms them out to worker
    processes without changing any result.
    """
    from dataclasses import replace

    jobs = []
    for i in range(n_trials):
        s = config.trial_seed + i
        jobs.append((replace(config, trial_seed=s), model, s + eval_seed_offset))
    if threads > 1 and n_trials > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            records = list(ex.map(_run_one, jobs))
    else:
        records = [_run_one(j) for j in jobs]
    costs = np.array([r.total_cost for r in records])
    std = float(costs.std(ddof=1)) if n_trials > 1 else 0.0
    log.info("%d trials: mean %.2f std %.2f", n_trials, costs.mean(), std)
    return TrialSetSummary(float(costs.mean()), std, records)

"""N x M Monte Carlo rollouts, cost normalization and sample weighting."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .policies.weights import EmpiricalWeights, normalize_weights
from .systems.base import SystemModel
from .transforms import Cem, CostTransform, Mppi, likelihood, resolve_gamma

# spawn-key tags separating the independent streams of one trial
POLICY_STREAM = 0
ROLLOUT_NOISE_STREAM = 1
EVAL_NOISE_STREAM = 2


def stream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the tuple ``(seed, *key)``; equal tuples give equal draws."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class NoiseConfig:
    """Zero-mean Gaussian noise injected through the control channel."""

    sigma_eps: float

    def __post_init__(self):
        if self.sigma_eps < 0:
            raise ValueError("sigma_eps must be non-negative")

    def draw(self, trial_seed: int, mpc_step: int, opt_iter: int, shape) -> np.ndarray:
        """Noise ``(N, M, T, n_u)`` for one optimization iteration.

        Rollout ``(n, m)`` always reads slice ``[n, m]`` of the block keyed by
        ``(trial_seed, mpc_step, opt_iter)``.
        """
        if self.sigma_eps == 0:
            return np.zeros(shape)
        rng = stream(trial_seed, ROLLOUT_NOISE_STREAM, mpc_step, opt_iter)
        return self.sigma_eps * rng.standard_normal(shape)


@dataclass(frozen=True)
class RolloutBatch:
    controls: np.ndarray  # (N, T, n_u)
    costs: np.ndarray  # (N, M)
    normalized_costs: np.ndarray  # (N, M)
    likelihood: np.ndarray  # (N,)
    weights: EmpiricalWeights
    gamma: Optional[float]
    degenerate: bool


def rollout_batch(model: SystemModel, x0_samples: np.ndarray, controls: np.ndarray,
                  noise: np.ndarray) -> np.ndarray:
    """Costs ``(N, M)`` of rolling each control sequence out under M noise draws.

    The cost is charged on the nominal controls; the dynamics see
    ``controls + noise``. Rollouts that leave the finite range cost +inf.
    """
    N, T, n_u = controls.shape
    M = x0_samples.shape[1]
    if x0_samples.shape[0] != N or noise.shape != (N, M, T, n_u):
        raise ValueError("inconsistent rollout dimensions")
    U = np.broadcast_to(controls[:, None], (N, M, T, n_u))
    applied = (U + noise).reshape(N * M, T, n_u)
    with np.errstate(all="ignore"):
        X = model.simulate(x0_samples.reshape(N * M, -1), applied)
        costs = model.trajectory_cost(X, U.reshape(N * M, T, n_u)).reshape(N, M)
        bad = ~np.all(np.isfinite(X.reshape(N, M, -1)), axis=-1)
    costs = np.where(bad | ~np.isfinite(costs), np.inf, costs)
    return costs


def normalize_costs(costs: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Min-max scale the finite part of the batch to [0, 1]; +inf maps to 1.

    Returns ``(normalized, degenerate)`` where ``degenerate`` flags a batch
    whose finite costs are all equal (normalized to 0).
    """
    costs = np.asarray(costs, dtype=float)
    finite = np.isfinite(costs)
    if not finite.any():
        raise ValueError("every rollout in the batch is non-finite")
    lo = costs[finite].min()
    hi = costs[finite].max()
    if hi == lo:
        return np.where(finite, 0.0, 1.0), True
    return np.where(finite, (costs - lo) / (hi - lo), 1.0), False


def compute_likelihoods(normalized: np.ndarray, transform: CostTransform) -> Tuple[np.ndarray, Optional[float]]:
    """M-averaged likelihood per control sample and the threshold used.

    The shape function is applied to every rollout before averaging over
    the M state samples.
    """
    gamma = None
    if not isinstance(transform, Mppi):
        gamma = resolve_gamma(normalized, transform.elite)
    return np.mean(likelihood(transform, normalized, gamma), axis=1), gamma


def weigh_batch(controls: np.ndarray, costs: np.ndarray, transform: CostTransform) -> RolloutBatch:
    normalized, flat = normalize_costs(costs)
    lik, gamma = compute_likelihoods(normalized, transform)
    weights = normalize_weights(lik)
    return RolloutBatch(controls, costs, normalized, lik, weights, gamma, flat or weights.degenerate)


def elite_count(batch: RolloutBatch, transform: CostTransform) -> int:
    """Samples with non-zero weight (diagnostic)."""
    if isinstance(transform, Cem):
        return int(np.count_nonzero(batch.weights.w))
    return int(np.count_nonzero(batch.likelihood > 0))

"""Policy classes over length-T control sequences and their update laws."""
from typing import Union

import numpy as np

from .gaussian import GaussianPolicy, gaussian_update
from .gmm import GmmPolicy, gmm_em, gmm_update, responsibilities, em_objective
from .stein import SteinPolicy, median_bandwidths, stein_kernel, stein_update
from .weights import ControlBatch, EmpiricalWeights, normalize_weights

Policy = Union[GaussianPolicy, GmmPolicy, SteinPolicy]

__all__ = [
    "ControlBatch", "EmpiricalWeights", "normalize_weights",
    "GaussianPolicy", "GmmPolicy", "SteinPolicy", "Policy",
    "gaussian_update", "gmm_update", "gmm_em", "responsibilities", "em_objective",
    "stein_kernel", "stein_update", "median_bandwidths",
    "sample_controls", "update_policy", "select_control", "recede",
]


def sample_controls(policy: Policy, n: int, rng: np.random.Generator) -> ControlBatch:
    return policy.sample(n, rng)


def update_policy(policy: Policy, samples: ControlBatch, weights: EmpiricalWeights,
                  smoothing_alpha: float = 0.0, em_iters: int = 5) -> Policy:
    if isinstance(policy, GmmPolicy):
        return gmm_update(samples, weights, policy, em_iters, smoothing_alpha)
    if isinstance(policy, GaussianPolicy):
        return gaussian_update(samples, weights, policy, smoothing_alpha)
    return stein_update(policy, samples, weights)


def select_control(policy: Policy) -> np.ndarray:
    """Control to execute: Gaussian mean, heaviest mixture mean or heaviest particle."""
    return policy.select_control()


def recede(policy: Policy) -> Policy:
    return policy.recede()

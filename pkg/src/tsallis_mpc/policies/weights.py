from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class ControlBatch:
    """Sampled control sequences.

    Attributes:
        controls: ``(N, T, n_u)`` array.
        groups: ``(N,)`` mixture component (GMM) or particle index (Stein) each
            sequence was drawn from; ``None`` for a unimodal Gaussian.
    """

    controls: np.ndarray
    groups: Optional[np.ndarray] = None

    def __len__(self):
        return self.controls.shape[0]


@dataclass(frozen=True)
class EmpiricalWeights:
    """Normalized sample weights; ``degenerate`` marks the uniform fallback."""

    w: np.ndarray
    degenerate: bool = False

    @property
    def effective_sample_size(self) -> float:
        return float(1.0 / np.sum(self.w**2))


def normalize_weights(likelihoods) -> EmpiricalWeights:
    """Normalize non-negative likelihoods onto the simplex.

    An all-zero batch (every sample at or beyond the threshold) falls back to
    uniform weights with ``degenerate=True`` instead of failing.
    """
    lik = np.asarray(likelihoods, dtype=float)
    if lik.ndim != 1 or lik.size == 0:
        raise ValueError("likelihoods must be a non-empty 1-d array")
    if np.any(~np.isfinite(lik)) or np.any(lik < 0):
        raise ValueError("likelihoods must be finite and non-negative")
    total = lik.sum()
    if total <= 0.0:
        return EmpiricalWeights(np.full(lik.size, 1.0 / lik.size), degenerate=True)
    w = lik / total
    # one more pass keeps the sum at 1 to ~1 ulp
    return EmpiricalWeights(w / w.sum())

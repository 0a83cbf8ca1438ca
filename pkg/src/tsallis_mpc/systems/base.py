from __future__ import annotations

import abc

import numpy as np


class SystemModel(abc.ABC):
    """Deterministic discrete-time system with a trajectory cost.

    All methods are batched over leading axes. Stochasticity is injected by
    the caller through the control channel, ``step(x, u + eps)``.
    """

    state_dim: int
    control_dim: int
    dt: float
    x0: np.ndarray
    episode_length: int
    sigma_eps: float

    @property
    def nominal_control(self):
        """Initial policy mean, or None for zero."""
        return None

    @abc.abstractmethod
    def step(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        ...

    @abc.abstractmethod
    def is_crashed(self, x: np.ndarray) -> np.ndarray:
        ...

    @abc.abstractmethod
    def trajectory_cost(self, X: np.ndarray, U: np.ndarray) -> np.ndarray:
        """Cost of states ``(..., T+1, n_x)`` under controls ``(..., T, n_u)``."""

    @abc.abstractmethod
    def goal_distance(self, x: np.ndarray) -> np.ndarray:
        ...

    def simulate(self, x0: np.ndarray, U: np.ndarray) -> np.ndarray:
        """Roll ``U`` (B, T, n_u) forward from ``x0`` (B, n_x); returns (B, T+1, n_x)."""
        B, T = U.shape[:2]
        X = np.empty((B, T + 1, self.state_dim))
        X[:, 0] = x0
        x = X[:, 0]
        for t in range(T):
            x = self.step(x, U[:, t])
            X[:, t + 1] = x
        return X

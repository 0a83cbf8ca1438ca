"""Unimodal Gaussian policy with per-timestep mean and covariance."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .weights import ControlBatch, EmpiricalWeights

JITTER = 1e-8


def floor_spd(sigma: np.ndarray, floor: float) -> np.ndarray:
    """Symmetrize and lift eigenvalues of ``(..., n, n)`` matrices to ``floor``."""
    sym = 0.5 * (sigma + np.swapaxes(sigma, -1, -2))
    vals, vecs = np.linalg.eigh(sym)
    if np.all(vals >= floor):
        return sym
    vals = np.maximum(vals, floor)
    return np.einsum("...ij,...j,...kj->...ik", vecs, vals, vecs)


def add_jitter(sigma: np.ndarray) -> np.ndarray:
    n = sigma.shape[-1]
    scale = np.trace(sigma, axis1=-2, axis2=-1) / n
    return sigma + (JITTER * scale)[..., None, None] * np.eye(n)


def weighted_scatter(u: np.ndarray, w: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """``sum_n w_n (u_n - mu)(u_n - mu)^T`` per timestep; u is (N, T, n_u)."""
    d = np.swapaxes(u - mu, 0, 1)  # (T, N, n_u)
    return np.swapaxes(d * w[:, None], 1, 2) @ d


@dataclass(frozen=True)
class GaussianPolicy:
    mu: np.ndarray  # (T, n_u)
    sigma: np.ndarray  # (T, n_u, n_u)
    variance_mode: Literal["fixed", "adaptive"] = "fixed"
    variance_floor: float = 1e-6

    def __post_init__(self):
        if self.mu.ndim != 2 or self.sigma.shape != self.mu.shape + self.mu.shape[-1:]:
            raise ValueError("expected mu (T, n_u) and sigma (T, n_u, n_u)")
        if self.variance_mode not in ("fixed", "adaptive"):
            raise ValueError(f"unknown variance_mode {self.variance_mode!r}")

    @classmethod
    def isotropic(cls, horizon: int, control_dim: int, std: float, mean=None, **kw):
        mu = np.zeros((horizon, control_dim)) if mean is None else np.broadcast_to(
            np.asarray(mean, dtype=float), (horizon, control_dim)).copy()
        sigma = np.broadcast_to(std**2 * np.eye(control_dim), (horizon, control_dim, control_dim)).copy()
        return cls(mu, sigma, **kw)

    @property
    def horizon(self) -> int:
        return self.mu.shape[0]

    @property
    def control_dim(self) -> int:
        return self.mu.shape[1]

    def sample(self, n: int, rng: np.random.Generator) -> ControlBatch:
        chol = np.linalg.cholesky(self.sigma)
        z = rng.standard_normal((n,) + self.mu.shape)
        return ControlBatch(self.mu + np.swapaxes(np.swapaxes(z, 0, 1) @ np.swapaxes(chol, 1, 2), 0, 1))

    def update(self, samples: ControlBatch, weights: EmpiricalWeights, smoothing_alpha: float = 0.0):
        return gaussian_update(samples, weights, self, smoothing_alpha)

    def select_control(self) -> np.ndarray:
        return self.mu[0].copy()

    def recede(self) -> "GaussianPolicy":
        return replace(self, mu=shift(self.mu, 0), sigma=shift(self.sigma, 0))


def shift(a: np.ndarray, axis: int) -> np.ndarray:
    """Drop the first entry along ``axis`` and repeat the last one."""
    a = np.moveaxis(a, axis, 0)
    out = np.concatenate([a[1:], a[-1:]], axis=0)
    return np.moveaxis(out, 0, axis)


def gaussian_update(samples: ControlBatch, weights: EmpiricalWeights, prev: GaussianPolicy,
                    smoothing_alpha: float = 0.0) -> GaussianPolicy:
    """Weighted moment matching for the mean and (adaptive mode) covariance."""
    u, w = samples.controls, weights.w
    if u.shape[0] != w.shape[0]:
        raise ValueError(f"{u.shape[0]} samples but {w.shape[0]} weights")
    if u.shape[1:] != prev.mu.shape:
        raise ValueError("sample shape does not match the policy")
    if not 0.0 <= smoothing_alpha < 1.0:
        raise ValueError("smoothing_alpha must lie in [0, 1)")
    mu_w = np.einsum("n,ntu->tu", w, u)
    a = smoothing_alpha
    mu = a * prev.mu + (1.0 - a) * mu_w
    if prev.variance_mode == "fixed":
        return replace(prev, mu=mu)
    if u.shape[0] < 2:
        raise ValueError("adaptive covariance needs at least two samples")
    sigma_w = add_jitter(weighted_scatter(u, w, mu_w))
    sigma = floor_spd(a * prev.sigma + (1.0 - a) * sigma_w, prev.variance_floor)
    return replace(prev, mu=mu, sigma=sigma)

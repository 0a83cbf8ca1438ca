"""Stein variational policy: a particle set of mean control sequences.

Each particle parameterizes a fixed-variance Gaussian over control sequences.
Particles move along a kernelized direction combining a weighted score of
their own rollouts with a repulsion term. The kernel is a time average of
per-timestep RBF kernels, which keeps the repulsion useful for long horizons.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .gaussian import shift
from .weights import ControlBatch, EmpiricalWeights


@dataclass(frozen=True)
class SteinPolicy:
    particles: np.ndarray  # (L, T, n_u)
    rollout_sigma: float
    step_size: float = 0.5
    bandwidth_multiplier: float = 1.0
    group_weights: Optional[np.ndarray] = None  # (L,), from the last update

    def __post_init__(self):
        if self.particles.ndim != 3 or self.particles.shape[0] < 1:
            raise ValueError("expected particles of shape (L, T, n_u) with L >= 1")
        if not self.rollout_sigma > 0:
            raise ValueError("rollout_sigma must be positive")
        if not np.all(np.isfinite(self.particles)):
            raise ValueError("particles must be finite")

    @classmethod
    def from_mean(cls, n_particles: int, horizon: int, control_dim: int, rollout_sigma: float,
                  mean=None, spread: float = 0.0, rng=None, **kw):
        base = np.zeros(control_dim) if mean is None else np.asarray(mean, dtype=float)
        parts = np.broadcast_to(base, (n_particles, horizon, control_dim)).copy()
        if spread > 0:
            rng = np.random.default_rng(rng)
            parts = parts + spread * rng.standard_normal(parts.shape)
        return cls(parts, rollout_sigma, **kw)

    @property
    def n_particles(self) -> int:
        return self.particles.shape[0]

    @property
    def horizon(self) -> int:
        return self.particles.shape[1]

    def sample(self, n: int, rng: np.random.Generator) -> ControlBatch:
        """Draw ``n // L`` sequences per particle, particle-major ordering."""
        L = self.n_particles
        if n % L:
            raise ValueError(f"sample count {n} is not a multiple of {L} particles")
        s = n // L
        z = rng.standard_normal((L, s) + self.particles.shape[1:])
        u = self.particles[:, None] + self.rollout_sigma * z
        return ControlBatch(u.reshape((n,) + self.particles.shape[1:]), np.repeat(np.arange(L), s))

    def update(self, samples, weights, smoothing_alpha: float = 0.0):
        return stein_update(self, samples, weights)

    def select_control(self) -> np.ndarray:
        gw = self.group_weights
        best = 0 if gw is None else int(np.argmax(gw))
        return self.particles[best, 0].copy()

    def recede(self) -> "SteinPolicy":
        return replace(self, particles=shift(self.particles, 1))


def median_bandwidths(particles: np.ndarray, multiplier: float = 1.0) -> np.ndarray:
    """Per-timestep ``multiplier * median_dist**2 / log(L + 1)``.

    Falls back to ``multiplier`` when the particles coincide (or L = 1).
    """
    L, T = particles.shape[:2]
    if L < 2:
        return np.full(T, float(multiplier))
    iu = np.triu_indices(L, k=1)
    diff = particles[:, None] - particles[None]  # (L, L, T, n_u)
    dist = np.sqrt(np.sum(diff**2, -1))[iu]  # (pairs, T)
    med2 = np.median(dist, axis=0) ** 2
    h = multiplier * med2 / np.log(L + 1)
    return np.where(med2 > 0, h, float(multiplier))


def stein_kernel(theta_a: np.ndarray, theta_b: np.ndarray, bandwidths: np.ndarray) -> Tuple[float, np.ndarray]:
    """Time-averaged RBF kernel and its gradient with respect to ``theta_a``."""
    d = theta_a - theta_b
    e = np.exp(-np.sum(d * d, -1) / bandwidths)
    T = theta_a.shape[0]
    grad = (e / T)[:, None] * (-2.0 * d / bandwidths[:, None])
    return float(e.mean()), grad


def score_estimates(policy: SteinPolicy, samples: ControlBatch, weights: EmpiricalWeights):
    """Weighted score of each particle's own rollouts and the group weight totals."""
    L = policy.n_particles
    n = samples.controls.shape[0]
    if n % L:
        raise ValueError(f"{n} samples cannot be split over {L} particles")
    if weights.w.shape[0] != n:
        raise ValueError("weight/sample length mismatch")
    s = n // L
    u = samples.controls.reshape((L, s) + policy.particles.shape[1:])
    w = weights.w.reshape(L, s)
    totals = w.sum(1)
    grad_log = (u - policy.particles[:, None]) / policy.rollout_sigma**2
    num = np.einsum("ls,lstu->ltu", w, grad_log)
    safe = np.where(totals > 0, totals, 1.0)
    G = np.where((totals > 0)[:, None, None], num / safe[:, None, None], 0.0)
    return G, totals


def stein_update(policy: SteinPolicy, samples: ControlBatch, weights: EmpiricalWeights) -> SteinPolicy:
    """Move each particle by ``step_size`` along the kernelized Stein direction."""
    G, totals = score_estimates(policy, samples, weights)
    theta = policy.particles
    T = theta.shape[1]
    h = median_bandwidths(theta, policy.bandwidth_multiplier)
    d = theta[:, None] - theta[None]  # d[m, l] = theta_m - theta_l
    e = np.exp(-np.sum(d * d, -1) / h)  # (m, l, T)
    k = e.mean(-1)
    grad_m = (e / T)[..., None] * (-2.0 * d / h[:, None])  # d k(theta_m, theta_l) / d theta_m
    phi = np.einsum("ml,mtu->ltu", k, G) + grad_m.sum(0)
    return replace(policy, particles=theta + policy.step_size * phi, group_weights=totals)

"""Gaussian mixture policy fitted to weighted samples with EM."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Literal, NamedTuple, Tuple

import numpy as np
from scipy.special import logsumexp

from .gaussian import add_jitter, floor_spd, shift
from .weights import ControlBatch, EmpiricalWeights

RESEED_THRESHOLD = 1e-6
_TINY = 1e-300


@dataclass(frozen=True)
class GmmPolicy:
    phi: np.ndarray  # (L,)
    mu: np.ndarray  # (L, T, n_u)
    sigma: np.ndarray  # (L, T, n_u, n_u)
    variance_mode: Literal["fixed", "adaptive"] = "adaptive"
    variance_floor: float = 1e-6

    def __post_init__(self):
        L = self.phi.shape[0]
        if L == 0:
            raise ValueError("a mixture needs at least one component")
        if self.mu.ndim != 3 or self.mu.shape[0] != L:
            raise ValueError("expected mu of shape (L, T, n_u)")
        if self.sigma.shape != self.mu.shape + self.mu.shape[-1:]:
            raise ValueError("expected sigma of shape (L, T, n_u, n_u)")
        if np.any(self.phi < 0) or abs(self.phi.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must lie on the simplex")

    @classmethod
    def isotropic(cls, n_components: int, horizon: int, control_dim: int, std: float,
                  mean=None, spread: float = 0.0, rng=None, **kw):
        """Equal-weight mixture; component means are offset by ``spread * N(0, I)``.

        Identical components never separate under EM, so a non-zero ``spread``
        is normally wanted.
        """
        base = np.zeros(control_dim) if mean is None else np.asarray(mean, dtype=float)
        offsets = np.zeros((n_components, 1, control_dim))
        if spread > 0:
            rng = np.random.default_rng(rng)
            offsets = spread * rng.standard_normal((n_components, 1, control_dim))
        mu = np.broadcast_to(base + offsets, (n_components, horizon, control_dim)).copy()
        sigma = np.broadcast_to(std**2 * np.eye(control_dim),
                                (n_components, horizon, control_dim, control_dim)).copy()
        return cls(np.full(n_components, 1.0 / n_components), mu, sigma, **kw)

    @property
    def n_components(self) -> int:
        return self.phi.shape[0]

    @property
    def horizon(self) -> int:
        return self.mu.shape[1]

    def sample(self, n: int, rng: np.random.Generator) -> ControlBatch:
        # one latent component per trajectory
        comps = rng.choice(self.n_components, size=n, p=self.phi)
        chol = np.linalg.cholesky(self.sigma)
        z = rng.standard_normal((n,) + self.mu.shape[1:])
        u = self.mu[comps] + np.einsum("ntij,ntj->nti", chol[comps], z)
        return ControlBatch(u, comps)

    def update(self, samples, weights, smoothing_alpha: float = 0.0, em_iters: int = 5):
        return gmm_update(samples, weights, self, em_iters, smoothing_alpha)

    def select_control(self) -> np.ndarray:
        return self.mu[int(np.argmax(self.phi)), 0].copy()

    def recede(self) -> "GmmPolicy":
        return replace(self, mu=shift(self.mu, 1), sigma=shift(self.sigma, 1))


def component_log_pdf(u: np.ndarray, policy: GmmPolicy) -> np.ndarray:
    """``log N(u_t^n | mu_{l,t}, Sigma_{l,t})`` with shape ``(L, N, T)``."""
    n_u = u.shape[-1]
    chol = np.linalg.cholesky(policy.sigma)
    chol_inv = np.linalg.inv(chol)
    d = u[None] - policy.mu[:, None]
    y = np.einsum("ltij,lntj->lnti", chol_inv, d)
    half_logdet = np.log(np.diagonal(chol, axis1=-2, axis2=-1)).sum(-1)  # (L, T)
    return -0.5 * np.sum(y * y, -1) - half_logdet[:, None] - 0.5 * n_u * np.log(2 * np.pi)


def responsibilities(u: np.ndarray, policy: GmmPolicy) -> np.ndarray:
    """Posterior component probabilities per (sample, timestep), shape (L, N, T)."""
    with np.errstate(divide="ignore"):
        log_joint = np.log(policy.phi)[:, None, None] + component_log_pdf(u, policy)
    return np.exp(log_joint - logsumexp(log_joint, axis=0, keepdims=True))


def em_objective(u: np.ndarray, w: np.ndarray, policy: GmmPolicy, eta: np.ndarray) -> float:
    """Expected complete-data weighted log-likelihood for fixed responsibilities."""
    with np.errstate(divide="ignore"):
        terms = np.log(policy.phi)[:, None, None] + component_log_pdf(u, policy)
    ew = eta * w[None, :, None]
    return float(np.sum(np.where(ew > 0, ew * terms, 0.0)))


class EmStep(NamedTuple):
    q_before: float
    q_after: float
    reseeded: Tuple[int, ...]


def em_step(samples: ControlBatch, weights: EmpiricalWeights, policy: GmmPolicy,
            reseed_threshold: float = RESEED_THRESHOLD) -> Tuple[GmmPolicy, EmStep]:
    u, w = samples.controls, weights.w
    eta = responsibilities(u, policy)
    ew = eta * w[None, :, None]  # (L, N, T)
    n_lt = ew.sum(1)  # (L, T)
    live = n_lt > _TINY
    safe = np.where(live, n_lt, 1.0)

    mu = np.einsum("lnt,ntu->ltu", ew, u) / safe[..., None]
    mu = np.where(live[..., None], mu, policy.mu)
    if policy.variance_mode == "adaptive":
        d = u[None] - mu[:, None]
        sigma = np.einsum("lnt,lnti,lntj->ltij", ew, d, d) / safe[..., None, None]
        sigma = floor_spd(add_jitter(sigma), policy.variance_floor)
        sigma = np.where(live[..., None, None], sigma, policy.sigma)
    else:
        sigma = policy.sigma

    n_l = n_lt.sum(1)
    phi = n_l / n_l.sum()
    reseeded = tuple(int(l) for l in np.flatnonzero(n_l < reseed_threshold))
    if reseeded:
        best = int(np.argmax(w))
        mu = mu.copy()
        sigma = sigma.copy()
        for l in reseeded:
            mu[l] = u[best]
            sigma[l] = policy.sigma[l]
            phi[l] = 1.0 / policy.n_components
        phi = phi / phi.sum()
    new = replace(policy, phi=phi / phi.sum(), mu=mu, sigma=sigma)
    info = EmStep(em_objective(u, w, policy, eta), em_objective(u, w, new, eta), reseeded)
    return new, info


def gmm_em(samples: ControlBatch, weights: EmpiricalWeights, prev: GmmPolicy,
           em_iters: int = 5) -> Tuple[GmmPolicy, List[EmStep]]:
    if samples.controls.shape[0] != weights.w.shape[0]:
        raise ValueError("weight/sample length mismatch")
    if samples.controls.shape[1:] != prev.mu.shape[1:]:
        raise ValueError("sample shape does not match the policy")
    policy, trace = prev, []
    for _ in range(em_iters):
        policy, info = em_step(samples, weights, policy)
        trace.append(info)
    return policy, trace


def gmm_update(samples: ControlBatch, weights: EmpiricalWeights, prev: GmmPolicy,
               em_iters: int = 5, smoothing_alpha: float = 0.0) -> GmmPolicy:
    """Run ``em_iters`` rounds of weighted EM, then blend with ``prev``."""
    policy, _ = gmm_em(samples, weights, prev, em_iters)
    a = smoothing_alpha
    if a == 0.0:
        return policy
    return replace(policy, mu=a * prev.mu + (1 - a) * policy.mu,
                   sigma=a * prev.sigma + (1 - a) * policy.sigma)

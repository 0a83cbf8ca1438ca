"""Fast self-checks of the core numerics, run by the ``check`` command."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .policies import ControlBatch, GaussianPolicy, normalize_weights, stein_kernel
from .transforms import (Cem, EliteThreshold, Mppi, Tsallis, ara_coefficient, ara_finite_difference, exp_r,
                         likelihood, log_r, shape_function)

AraFn = Callable[..., float]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _transform_limits(rng) -> str:
    x = rng.uniform(-0.5, 2.0, 50)
    if not np.allclose(exp_r(x, 1.0 + 1e-9), np.exp(x), rtol=1e-6):
        raise AssertionError("exp_r does not tend to exp as r -> 1")
    y = rng.uniform(0.1, 5.0, 50)
    if not np.allclose(log_r(exp_r(np.log(y), 1.0), 1.0), np.log(y)):
        raise AssertionError("log_r/exp_r are not inverse at r = 1")
    for r in (0.5, 1.5, 3.0):
        z = rng.uniform(0.1, 5.0, 50)
        if not np.allclose(exp_r(log_r(z, r), r), z, rtol=1e-10):
            raise AssertionError(f"exp_r(log_r(x)) != x at r={r}")
    J = np.sort(rng.uniform(0, 1, 64))
    g = 0.5
    ts = likelihood(Tsallis(1e6, EliteThreshold(g)), J, g)
    cem = likelihood(Cem(EliteThreshold(g)), J, g)
    inside = J < g * (1 - 1e-3)
    if not np.allclose(ts[inside], cem[inside], atol=1e-6):
        raise AssertionError("Tsallis does not approach the CEM indicator for large r")
    return "deformed exp/log and large-r limit"


def _ara(rng, ara: AraFn) -> str:
    for _ in range(20):
        r = rng.choice([rng.uniform(1.1, 1.9), rng.uniform(2.2, 8.0)])
        g = rng.uniform(0.2, 2.0)
        J = rng.uniform(0.0, 0.9 * g)
        t = Tsallis(r, EliteThreshold(g))
        closed = ara(t, J, g)
        fd = ara_finite_difference(shape_function(t, g), J, 1e-4 * (g - J))
        if abs(closed - fd) > 1e-3 * abs(fd):
            raise AssertionError(f"Tsallis ARA mismatch at r={r:.3f}: {closed} vs {fd}")
        if (r < 2) != (closed > 0):
            raise AssertionError(f"Tsallis ARA sign wrong at r={r:.3f}")
    m = Mppi(rng.uniform(0.5, 5.0))
    fd = ara_finite_difference(shape_function(m), 0.3, 1e-4)
    if abs(ara(m, 0.3) - fd) > 1e-3 * abs(fd):
        raise AssertionError("MPPI ARA mismatch")
    return "closed form vs finite difference, sign law"


def _weights(rng) -> str:
    for _ in range(20):
        lik = rng.exponential(size=32) * (rng.uniform(size=32) > 0.3)
        w = normalize_weights(lik).w
        if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise AssertionError("weights leave the simplex")
    w = normalize_weights(np.zeros(8))
    if not (w.degenerate and np.allclose(w.w, 1 / 8)):
        raise AssertionError("all-zero likelihood must give uniform degenerate weights")
    u = rng.normal(size=(16, 3, 2))
    pol = GaussianPolicy.isotropic(3, 2, 1.0)
    upd = pol.update(ControlBatch(u), normalize_weights(np.ones(16)))
    if not np.allclose(upd.mu, u.mean(0)):
        raise AssertionError("uniform weights must give the sample mean")
    return "simplex, degenerate batches, uniform mean"


def _kernel(rng) -> str:
    step = 1e-6
    for _ in range(3):
        a = rng.normal(size=(4, 2))
        b = rng.normal(size=(4, 2))
        h = rng.uniform(0.5, 2.0, 4)
        _, grad = stein_kernel(a, b, h)
        for idx in np.ndindex(a.shape):
            ap, am = a.copy(), a.copy()
            ap[idx] += step
            am[idx] -= step
            fd = (stein_kernel(ap, b, h)[0] - stein_kernel(am, b, h)[0]) / (2 * step)
            if abs(grad[idx] - fd) > 1e-5:
                raise AssertionError("kernel gradient disagrees with finite differences")
    return "analytic vs finite-difference kernel gradient"


def run_checks(seed: int = 0, ara: Optional[AraFn] = None) -> List[CheckResult]:
    """Run every check; ``ara`` replaces the ARA implementation under test."""
    ara = ara or ara_coefficient
    suite = [
        ("transform_limits", lambda rng: _transform_limits(rng)),
        ("ara", lambda rng: _ara(rng, ara)),
        ("weight_simplex", lambda rng: _weights(rng)),
        ("kernel_gradients", lambda rng: _kernel(rng)),
    ]
    out = []
    for name, fn in suite:
        rng = np.random.default_rng(seed)
        t0 = time.perf_counter()
        try:
            detail = fn(rng)
            out.append(CheckResult(name, True, f"{detail} ({time.perf_counter() - t0:.2f}s)"))
        except Exception as e:  # report and continue with the other checks
            out.append(CheckResult(name, False, f"{type(e).__name__}: {e}"))
    return out

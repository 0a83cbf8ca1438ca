"""Deformed exponentials, cost-to-likelihood shape functions and risk analysis.

Three cost transforms are supported:

* :class:`Tsallis` -- ``(1 - J/gamma)_+ ** (1/(r-1))``, the reparameterized
  deformed exponential.
* :class:`Mppi` -- ``exp(-J / lambda)``.
* :class:`Cem` -- the elite indicator ``1{J <= gamma}``.

Threshold based transforms take an elite setting which is resolved
against each batch of costs (:func:`resolve_gamma`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

__all__ = [
    "EliteFraction",
    "EliteThreshold",
    "Tsallis",
    "Mppi",
    "Cem",
    "CostTransform",
    "SingularityError",
    "log_r",
    "exp_r",
    "tsallis_likelihood",
    "likelihood",
    "shape_function",
    "resolve_gamma",
    "ara_coefficient",
    "ara_finite_difference",
    "risk_premium",
]

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


class SingularityError(ArithmeticError):
    """Raised when a finite-difference ARA estimate has a vanishing slope."""


@dataclass(frozen=True)
class EliteFraction:
    """Threshold chosen so that a fraction ``f`` of the batch is elite."""

    f: float

    def __post_init__(self):
        if not 0.0 < self.f <= 1.0:
            raise ValueError(f"elite fraction must lie in (0, 1], got {self.f}")

    def count(self, n: int) -> int:
        # guard against 0.07 * 100 -> 7.000000000000001 -> 8
        return max(1, min(n, math.ceil(self.f * n - 1e-9)))


@dataclass(frozen=True)
class EliteThreshold:
    """Absolute cost threshold ``gamma``."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


EliteSpec = Union[EliteFraction, EliteThreshold]


@dataclass(frozen=True)
class Tsallis:
    r: float
    elite: EliteSpec

    def __post_init__(self):
        if not self.r > 1.0:
            # r = 1 is the Mppi transform; r < 1 has no threshold form.
            raise ValueError(f"Tsallis transform needs r > 1, got {self.r}")


@dataclass(frozen=True)
class Mppi:
    inv_lambda: float

    def __post_init__(self):
        if not self.inv_lambda > 0.0:
            raise ValueError(f"inv_lambda must be positive, got {self.inv_lambda}")


@dataclass(frozen=True)
class Cem:
    elite: EliteSpec
    smoothing_alpha: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.smoothing_alpha < 1.0:
            raise ValueError("smoothing_alpha must lie in [0, 1)")


CostTransform = Union[Tsallis, Mppi, Cem]


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return x.item() if x.ndim == 0 else x


def log_r(x, r: float):
    """Deformed logarithm ``(x**(r-1) - 1) / (r - 1)``; natural log at r = 1."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("log_r is defined for positive x only")
    if r <= 0:
        raise ValueError("r must be positive")
    if r == 1.0:
        return _scalar_or_array(np.log(x))
    a = r - 1.0
    # expm1 keeps the r -> 1 limit accurate
    return _scalar_or_array(np.expm1(a * np.log(x)) / a)


def exp_r(x, r: float):
    """Deformed exponential ``(1 + (r-1) x)_+ ** (1/(r-1))``; exp at r = 1."""
    x = np.asarray(x, dtype=float)
    if r <= 0:
        raise ValueError("r must be positive")
    if r == 1.0:
        return _scalar_or_array(np.exp(x))
    a = r - 1.0
    base = a * x
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(base > -1.0, np.exp(np.log1p(np.maximum(base, -1.0)) / a), 0.0)
        if a < 0:
            # (0)^(negative power) diverges
            out = np.where(base > -1.0, out, np.inf)
    return _scalar_or_array(out)


def tsallis_likelihood(J, gamma, r: float):
    """Reparameterized Tsallis weight, zero for ``J >= gamma``.

    Evaluated as ``exp(log1p(-J/gamma) / (r-1))`` so that ``r - 1`` down to
    1e-3 neither overflows nor underflows prematurely. ``gamma`` broadcasts
    against ``J``.
    """
    J = np.asarray(J, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if np.any(~(gamma > 0)):
        raise ValueError("gamma must be positive")
    if not r > 1.0:
        raise ValueError("r must exceed 1")
    ratio = J / gamma
    inside = ratio < 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.exp(np.log1p(-np.where(inside, ratio, 0.0)) / (r - 1.0))
    return _scalar_or_array(np.where(inside, val, 0.0))


def likelihood(transform: CostTransform, J, gamma_resolved=None):
    """Optimality likelihood of cost(s) ``J`` under ``transform``."""
    if isinstance(transform, Mppi):
        return _scalar_or_array(np.exp(-transform.inv_lambda * np.asarray(J, dtype=float)))
    if gamma_resolved is None:
        raise ValueError(f"{type(transform).__name__} needs a resolved gamma")
    if isinstance(transform, Tsallis):
        return tsallis_likelihood(J, gamma_resolved, transform.r)
    if isinstance(transform, Cem):
        J = np.asarray(J, dtype=float)
        return _scalar_or_array((J <= np.asarray(gamma_resolved, dtype=float)).astype(float))
    raise TypeError(f"unknown cost transform {transform!r}")


def shape_function(transform: CostTransform, gamma_resolved=None) -> Callable:
    """Return ``S(J)`` as a one-argument callable."""
    if not isinstance(transform, Mppi) and gamma_resolved is None:
        raise ValueError(f"{type(transform).__name__} needs a resolved gamma")
    return lambda J: likelihood(transform, J, gamma_resolved)


def resolve_gamma(costs, spec: EliteSpec, axis: Optional[int] = None):
    """Turn an elite setting into a cost threshold.

    For :class:`EliteFraction` the ``k = ceil(f N)``-th smallest cost is
    located and then raised by a few ulps (relative). With distinct costs exactly ``k``
    samples then satisfy ``J < gamma`` (so the Tsallis weight of the k-th
    sample is tiny but non-zero), and every sample tied with the k-th passes
    the ``J <= gamma`` test used by CEM.

    ``axis`` resolves one threshold per slice (keepdims), e.g. per seed.
    """
    costs = np.asarray(costs, dtype=float)
    if costs.size == 0:
        raise ValueError("cannot resolve gamma on an empty cost array")
    if isinstance(spec, EliteThreshold):
        if axis is None:
            return float(spec.gamma)
        shape = list(costs.shape)
        shape[axis] = 1
        return np.full(shape, spec.gamma)
    if not isinstance(spec, EliteFraction):
        raise TypeError(f"unknown elite spec {spec!r}")
    if axis is None:
        flat = costs.ravel()
        k = spec.count(flat.size)
        q = np.partition(flat, k - 1)[k - 1]
    else:
        n = costs.shape[axis]
        k = spec.count(n)
        q = np.take(np.partition(costs, k - 1, axis=axis), [k - 1], axis=axis)
    # relative nudge keeps the threshold equivariant under cost scaling
    gamma = np.where(q == 0.0, _TINY, q + 4.0 * _EPS * np.abs(q))
    return float(gamma) if axis is None else gamma


def ara_coefficient(transform: CostTransform, J: float, gamma_resolved: Optional[float] = None) -> float:
    """Arrow-Pratt coefficient ``-S''(J)/S'(J)`` of the transform's shape.

    Negative values are variance averse for cost minimization. CEM's indicator
    is the limit of steep sigmoids and yields -inf below the threshold, +inf
    above it and 0 exactly at it.
    """
    if isinstance(transform, Mppi):
        return float(transform.inv_lambda)
    if gamma_resolved is None:
        raise ValueError(f"{type(transform).__name__} needs a resolved gamma")
    if isinstance(transform, Tsallis):
        if J >= gamma_resolved:
            raise ValueError("Tsallis ARA is only defined for J < gamma")
        r = transform.r
        return -(r - 2.0) / ((r - 1.0) * (gamma_resolved - J))
    if isinstance(transform, Cem):
        if J < gamma_resolved:
            return -math.inf
        if J > gamma_resolved:
            return math.inf
        return 0.0
    raise TypeError(f"unknown cost transform {transform!r}")


def ara_finite_difference(shape: Callable[[float], float], J: float, h: float) -> float:
    """Central-difference estimate of ``-S''(J)/S'(J)``."""
    if not h > 0:
        raise ValueError("h must be positive")
    fp, f0, fm = (float(shape(J + h)), float(shape(J)), float(shape(J - h)))
    d1 = (fp - fm) / (2.0 * h)
    d2 = (fp - 2.0 * f0 + fm) / (h * h)
    # slope below rounding level of the function values
    if abs(d1) <= 8.0 * _EPS * max(abs(fp), abs(fm), abs(f0), 1e-300) / h:
        raise SingularityError(f"shape has a vanishing slope at J={J}")
    return -d2 / d1


def risk_premium(transform: CostTransform, mean_cost: float, cost_variance: float,
                 gamma_resolved: Optional[float] = None) -> float:
    """Second-order absolute risk premium ``0.5 * A(mean) * Var``."""
    return 0.5 * ara_coefficient(transform, mean_cost, gamma_resolved) * cost_variance

"""Seeded obstacle layouts for the navigation benchmarks."""
from __future__ import annotations

import numpy as np

MAX_ATTEMPTS = 10_000


class InfeasibleFieldError(RuntimeError):
    pass


def planar_field(seed: int, n_obstacles: int = 12, region: float = 5.0,
                 half_size=(0.6, 1.1)) -> np.ndarray:
    """Axis-aligned squares clustered between start and goal.

    Returns ``(K, 3)`` rows of ``(center_x, center_y, half_size)``. Squares do
    not overlap one another.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    out = []
    for _ in range(MAX_ATTEMPTS):
        if len(out) == n_obstacles:
            break
        c = rng.uniform(-region, region, 2)
        hs = rng.uniform(*half_size)
        if all(np.max(np.abs(c - o[:2])) > hs + o[2] for o in out):
            out.append((c[0], c[1], hs))
    if len(out) < n_obstacles:
        raise InfeasibleFieldError("could not place planar obstacles")
    return np.array(out)


def quad_field(seed: int, start, target, n_obstacles: int = 35, clearance: float = 1.5,
               corridor: float = 6.0) -> np.ndarray:
    """Vertical poles ``(K, 2)`` scattered along the start-target corridor.

    Every pole keeps at least ``clearance`` horizontal distance from start and
    target.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    a = np.asarray(start, dtype=float)[:2]
    b = np.asarray(target, dtype=float)[:2]
    axis = b - a
    length = np.linalg.norm(axis)
    axis = axis / length
    normal = np.array([-axis[1], axis[0]])
    out = []
    for _ in range(MAX_ATTEMPTS):
        if len(out) == n_obstacles:
            break
        p = a + rng.uniform(0, length) * axis + rng.uniform(-corridor, corridor) * normal
        if np.linalg.norm(p - a) >= clearance and np.linalg.norm(p - b) >= clearance:
            out.append(p)
    if len(out) < n_obstacles:
        raise InfeasibleFieldError(f"placed {len(out)} of {n_obstacles} poles")
    return np.array(out)


def generate_obstacle_field(seed: int, task_kind: str, **kw) -> np.ndarray:
    if task_kind == "planar":
        return planar_field(seed, **kw)
    if task_kind == "quadcopter":
        kw.setdefault("start", (0.0, 0.0))
        kw.setdefault("target", (25.0, 25.0))
        return quad_field(seed, **kw)
    raise ValueError(f"unknown task kind {task_kind!r}")

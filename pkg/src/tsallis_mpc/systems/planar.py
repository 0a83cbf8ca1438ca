"""Point mass with double-integrator dynamics crossing a field of squares."""
from __future__ import annotations

from typing import Optional

import numpy as np
from numba import njit

from .base import SystemModel
from .obstacles import planar_field

X0 = np.array([-9.0, -9.0, 0.0, 0.0])
X_GOAL = np.array([9.0, 9.0, 0.0, 0.0])
Q_RUNNING = np.array([0.5, 0.5, 0.2, 0.2])
Q_TERMINAL = np.array([0.25, 0.25, 1.0, 1.0])
R_CONTROL = np.array([0.01, 0.01])
CRASH_COST = 10_000.0


@njit(cache=True)
def _inside_any(px, py, obstacles):
    for k in range(obstacles.shape[0]):
        if abs(px - obstacles[k, 0]) <= obstacles[k, 2] and abs(py - obstacles[k, 1]) <= obstacles[k, 2]:
            return True
    return False


@njit(cache=True)
def _crash_flags(pos, obstacles):
    out = np.empty(pos.shape[0], dtype=np.bool_)
    for i in range(pos.shape[0]):
        out[i] = _inside_any(pos[i, 0], pos[i, 1], obstacles)
    return out


@njit(cache=True)
def _simulate(x0, U, dt, obstacles):
    B, T = U.shape[0], U.shape[1]
    X = np.empty((B, T + 1, 4))
    for b in range(B):
        px, py, vx, vy = x0[b, 0], x0[b, 1], x0[b, 2], x0[b, 3]
        X[b, 0, 0] = px
        X[b, 0, 1] = py
        X[b, 0, 2] = vx
        X[b, 0, 3] = vy
        for t in range(T):
            if _inside_any(px, py, obstacles):
                vx = 0.0
                vy = 0.0
            else:
                px, py, vx, vy = px + dt * vx, py + dt * vy, vx + dt * U[b, t, 0], vy + dt * U[b, t, 1]
            X[b, t + 1, 0] = px
            X[b, t + 1, 1] = py
            X[b, t + 1, 2] = vx
            X[b, t + 1, 3] = vy
    return X


@njit(cache=True)
def _cost(X, U, goal, q_run, q_term, r_ctrl, crash_cost, obstacles):
    B, T = U.shape[0], U.shape[1]
    out = np.empty(B)
    for b in range(B):
        c = 0.0
        crashed = False
        for t in range(T + 1):
            if not crashed and _inside_any(X[b, t, 0], X[b, t, 1], obstacles):
                crashed = True
            q = q_term if t == T else q_run
            for i in range(4):
                e = X[b, t, i] - goal[i]
                c += q[i] * e * e
            if t < T:
                c += r_ctrl[0] * U[b, t, 0] ** 2 + r_ctrl[1] * U[b, t, 1] ** 2
        out[b] = c + crash_cost if crashed else c
    return out


class PlanarNavigation(SystemModel):
    """State ``(px, py, vx, vy)``, control is the acceleration.

    Once the position is inside an obstacle the state is frozen (position held,
    velocity zeroed), so the crash indicator latches. The crash penalty is
    charged once per trajectory.
    """

    state_dim = 4
    control_dim = 2
    episode_length = 300
    sigma_eps = 1.0

    def __init__(self, obstacles: Optional[np.ndarray] = None, field_seed: int = 0,
                 dt: float = 0.01, x0=X0, goal=X_GOAL, crash_cost: float = CRASH_COST):
        self.dt = dt
        self.x0 = np.asarray(x0, dtype=float)
        self.goal = np.asarray(goal, dtype=float)
        self.crash_cost = crash_cost
        self.field_seed = field_seed
        if obstacles is None:
            obstacles = planar_field(field_seed)
        self.obstacles = np.ascontiguousarray(obstacles, dtype=float).reshape(-1, 3)

    def is_crashed(self, x):
        x = np.asarray(x, dtype=float)
        pos = np.ascontiguousarray(x[..., :2].reshape(-1, 2))
        return _crash_flags(pos, self.obstacles).reshape(x.shape[:-1])

    def step(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        pos, vel = x[..., :2], x[..., 2:]
        nxt = np.concatenate([pos + self.dt * vel, vel + self.dt * u], axis=-1)
        crashed = self.is_crashed(x)[..., None]
        frozen = np.concatenate([pos, np.zeros_like(vel)], axis=-1)
        return np.where(crashed, frozen, nxt)

    def simulate(self, x0, U):
        x0 = np.ascontiguousarray(x0, dtype=float)
        return _simulate(x0, np.ascontiguousarray(U, dtype=float), self.dt, self.obstacles)

    def trajectory_cost(self, X, U):
        X = np.asarray(X, dtype=float)
        U = np.asarray(U, dtype=float)
        if X.ndim == 3 and U.ndim == 3:
            return _cost(np.ascontiguousarray(X), np.ascontiguousarray(U), self.goal, Q_RUNNING,
                         Q_TERMINAL, R_CONTROL, float(self.crash_cost), self.obstacles)
        e = X - self.goal
        running = np.sum(e[..., :-1, :] ** 2 * Q_RUNNING, axis=(-1, -2))
        control = np.sum(U**2 * R_CONTROL, axis=(-1, -2))
        terminal = np.sum(e[..., -1, :] ** 2 * Q_TERMINAL, axis=-1)
        crashed = np.any(self.is_crashed(X), axis=-1)
        return self.crash_cost * crashed + terminal + running + control

    def goal_distance(self, x):
        return np.linalg.norm(np.asarray(x)[..., :2] - self.goal[:2], axis=-1)

"""Rate-controlled quadrotor flying through a forest of poles.

State layout (13): position (3), unit quaternion ``(w, x, y, z)`` (4), world
linear velocity (3), body angular velocity (3). Controls (4): commanded body
rates (3) tracked by a first-order lag, and collective thrust along body z.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .base import SystemModel
from .obstacles import quad_field

GRAVITY = 9.81


def quat_multiply(p, q):
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ], axis=-1)


def body_z(q):
    """Third column of the rotation matrix of unit quaternion ``q``."""
    w, x, y, z = np.moveaxis(q, -1, 0)
    return np.stack([2 * (x * z + w * y), 2 * (y * z - w * x), 1 - 2 * (x * x + y * y)], axis=-1)


class Quadcopter(SystemModel):
    state_dim = 13
    control_dim = 4
    episode_length = 400
    sigma_eps = 6.67

    def __init__(self, obstacles: Optional[np.ndarray] = None, field_seed: int = 0,
                 dt: float = 0.015, mass: float = 1.0, tau: float = 0.05,
                 start=(0.0, 0.0, 5.0), target=(25.0, 25.0, 5.0), crash_radius: float = 0.75,
                 z_bounds=(0.0, 10.0), weights=(40.0, 10.0, 2.0, 1e7)):
        self.dt = dt
        self.mass = mass
        self.tau = tau
        self.target = np.asarray(target, dtype=float)
        self.crash_radius = crash_radius
        self.z_bounds = z_bounds
        self.weights = weights
        self.field_seed = field_seed
        self.x0 = np.zeros(13)
        self.x0[:3] = start
        self.x0[3] = 1.0
        if obstacles is None:
            obstacles = quad_field(field_seed, start, target, clearance=2 * crash_radius)
        self.obstacles = np.asarray(obstacles, dtype=float).reshape(-1, 2)

    @property
    def hover_thrust(self) -> float:
        return self.mass * GRAVITY

    @property
    def nominal_control(self):
        return np.array([0.0, 0.0, 0.0, self.hover_thrust])

    def is_crashed(self, x):
        x = np.asarray(x, dtype=float)
        z = x[..., 2]
        out = (z < self.z_bounds[0]) | (z > self.z_bounds[1])
        if self.obstacles.shape[0]:
            d2 = np.sum((x[..., None, :2] - self.obstacles) ** 2, axis=-1)
            out = out | np.any(d2 < self.crash_radius**2, axis=-1)
        return out

    def step(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        p, q, v, w = x[..., :3], x[..., 3:7], x[..., 7:10], x[..., 10:13]
        rate_cmd, thrust = u[..., :3], u[..., 3:4]
        dt = self.dt
        w_next = w + dt * (rate_cmd - w) / self.tau
        omega = np.concatenate([np.zeros_like(w[..., :1]), w], axis=-1)
        q_next = q + dt * 0.5 * quat_multiply(q, omega)
        q_next = q_next / np.linalg.norm(q_next, axis=-1, keepdims=True)
        acc = body_z(q) * thrust / self.mass
        acc[..., 2] -= GRAVITY
        v_next = v + dt * acc
        p_next = p + dt * v
        nxt = np.concatenate([p_next, q_next, v_next, w_next], axis=-1)
        frozen = np.concatenate([p, q, np.zeros_like(v), np.zeros_like(w)], axis=-1)
        return np.where(self.is_crashed(x)[..., None], frozen, nxt)

    def trajectory_cost(self, X, U):
        X = np.asarray(X, dtype=float)[..., :-1, :]
        a, b, c, k = self.weights
        per_step = (a * np.linalg.norm(self.target - X[..., :3], axis=-1)
                    + b * np.linalg.norm(X[..., 7:10], axis=-1)
                    + c * np.linalg.norm(X[..., 10:13], axis=-1)
                    + k * self.is_crashed(X))
        return per_step.sum(-1)

    def goal_distance(self, x):
        return np.linalg.norm(np.asarray(x)[..., :3] - self.target, axis=-1)

"""Torque-limited pendulum swing-up with a dense shaping cost."""

from __future__ import annotations

import math

import numpy as np

from snaprl.envs.base import Environment
from snaprl.rng import Xoshiro256

DT = 0.05
GRAVITY = 10.0
MASS = 1.0
LENGTH = 1.0
MAX_SPEED = 8.0
MAX_TORQUE = 2.0


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi], measured from upright."""
    return math.pi - (math.pi - theta) % (2.0 * math.pi)


class PendulumEnv(Environment):
    """Swing a pendulum upright with bounded torque.

    Semi-implicit Euler integration; the cost penalizes angle from upright,
    angular velocity, and torque. Episodes end only on the time limit, which
    is enforced by wrappers, never here.
    """

    env_id = "pendulum"
    obs_dim = 3
    act_dim = 1
    a_max = MAX_TORQUE
    physics_dim = 2
    default_time_limit = 200

    def _initial_physics(self, rng: Xoshiro256) -> np.ndarray:
        theta = rng.uniform(-math.pi, math.pi)
        theta_dot = rng.uniform(-1.0, 1.0)
        return np.array([theta, theta_dot], dtype=np.float64)

    def _transition(
        self, physics: np.ndarray, action: np.ndarray
    ) -> tuple[np.ndarray, float, bool]:
        theta, theta_dot = physics
        u = action[0]
        cost = wrap_angle(theta) ** 2 + 0.1 * theta_dot**2 + 0.001 * u**2
        accel = (3.0 * GRAVITY / (2.0 * LENGTH)) * math.sin(theta) + (
            3.0 / (MASS * LENGTH**2)
        ) * u
        theta_dot = min(max(theta_dot + accel * DT, -MAX_SPEED), MAX_SPEED)
        theta = wrap_angle(theta + theta_dot * DT)
        return np.array([theta, theta_dot], dtype=np.float64), -cost, False

    def observe(self, physics: np.ndarray) -> np.ndarray:
        theta, theta_dot = physics
        return np.array(
            [math.cos(theta), math.sin(theta), theta_dot], dtype=np.float64
        )

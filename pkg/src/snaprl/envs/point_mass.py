"""Sparse-reward point-mass navigation in a walled square arena."""

from __future__ import annotations

import math

import numpy as np

from snaprl.envs.base import Environment
from snaprl.rng import Xoshiro256

DT = 0.1
ARENA_HALF = 5.0
VEL_MAX = 1.0
START_HALF = 0.1
GOAL = (4.0, 4.0)
GOAL_RADIUS = 0.3
STEP_PENALTY = -0.01
GOAL_REWARD = 10.0


class PointMassEnv(Environment):
    """Accelerate a point mass from the center box to a fixed goal disc.

    Reward is -0.01 per step and exactly +10 on the step that enters the
    goal disc, which terminates the episode. Walls clamp position and zero
    the normal velocity component.
    """

    env_id = "point-mass"
    obs_dim = 6
    act_dim = 2
    a_max = 1.0
    physics_dim = 4
    default_time_limit = 200

    def _initial_physics(self, rng: Xoshiro256) -> np.ndarray:
        px = rng.uniform(-START_HALF, START_HALF)
        py = rng.uniform(-START_HALF, START_HALF)
        return np.array([px, py, 0.0, 0.0], dtype=np.float64)

    def _transition(
        self, physics: np.ndarray, action: np.ndarray
    ) -> tuple[np.ndarray, float, bool]:
        px, py, vx, vy = physics
        ax, ay = action
        vx = min(max(vx + ax * DT, -VEL_MAX), VEL_MAX)
        vy = min(max(vy + ay * DT, -VEL_MAX), VEL_MAX)
        nx = px + vx * DT
        ny = py + vy * DT
        if nx > ARENA_HALF:
            nx, vx = ARENA_HALF, 0.0
        elif nx < -ARENA_HALF:
            nx, vx = -ARENA_HALF, 0.0
        if ny > ARENA_HALF:
            ny, vy = ARENA_HALF, 0.0
        elif ny < -ARENA_HALF:
            ny, vy = -ARENA_HALF, 0.0
        at_goal = math.hypot(nx - GOAL[0], ny - GOAL[1]) <= GOAL_RADIUS
        reward = GOAL_REWARD if at_goal else STEP_PENALTY
        return np.array([nx, ny, vx, vy], dtype=np.float64), reward, at_goal

    def observe(self, physics: np.ndarray) -> np.ndarray:
        px, py, vx, vy = physics
        return np.array(
            [px, py, vx, vy, GOAL[0] - px, GOAL[1] - py], dtype=np.float64
        )

"""Training-time environment wrapper: snapshot resets and episode caps.

During the initial snapshot phase, resets restore a stored snapshot
(cluster-balanced when enabled) instead of drawing from the initial-state
distribution, and episodes may be cut at a shorter limit to keep students
near dataset states. After the phase expires the wrapper behaves exactly
like the bare environment under its default time limit, so agents finish
training on the unaltered task. Evaluation must bypass this wrapper.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from snaprl.envs.base import Environment, EnvUsageError
from snaprl.snapshots import (
    ClusteredDataset,
    SnapshotDataset,
    sample_snapshot,
    sample_snapshot_uniform,
)


def in_snapshot_phase(global_step: int, phase_steps: int) -> bool:
    """Strict phase test: step counts 0 .. phase_steps-1 are inside."""
    return global_step < phase_steps


@dataclass
class WrapperConfig:
    phase_steps: int
    truncate_limit: int
    default_limit: int
    use_snapshots: bool = True
    use_clustering: bool = True
    use_truncation: bool = True

    def validate(self) -> None:
        if self.default_limit < 1:
            raise ValueError("default_limit must be >= 1")
        if not 1 <= self.truncate_limit <= self.default_limit:
            raise ValueError("require 1 <= truncate_limit <= default_limit")
        if self.phase_steps < 0:
            raise ValueError("phase_steps must be >= 0")


class SnapshotWrapper:
    """Stateful wrapper owning the phase schedule and episode bookkeeping.

    An episode's limit is fixed when it starts: episodes that begin inside
    the snapshot phase keep the short limit even if the phase expires
    mid-episode.
    """

    def __init__(
        self,
        env: Environment,
        config: WrapperConfig,
        rng: np.random.Generator,
        dataset: SnapshotDataset | None = None,
        clustered: ClusteredDataset | None = None,
    ) -> None:
        config.validate()
        if dataset is not None and dataset.env_id != env.env_id:
            raise ValueError(
                f"dataset is for env '{dataset.env_id}', wrapper env is '{env.env_id}'"
            )
        self.env = env
        self.config = config
        self.rng = rng
        self.dataset = dataset
        self.clustered = clustered
        self.global_step = 0
        self.episode_step = 0
        self.episode_limit = config.default_limit
        self._episode_live = False

    def in_phase(self) -> bool:
        return in_snapshot_phase(self.global_step, self.config.phase_steps)

    def reset(self) -> np.ndarray:
        cfg = self.config
        in_phase = self.in_phase()
        seed = int(self.rng.integers(0, 2**63))
        obs = self.env.reset(seed=seed)
        if cfg.use_snapshots and in_phase:
            if self.dataset is None or len(self.dataset) == 0:
                raise EnvUsageError("snapshot reset requested with no dataset attached")
            if cfg.use_clustering:
                if self.clustered is None:
                    raise EnvUsageError(
                        "cluster-balanced sampling requested with no clustering attached"
                    )
                snap = sample_snapshot(self.clustered, self.dataset, self.rng)
            else:
                snap = sample_snapshot_uniform(self.dataset, self.rng)
            self.env.load_snapshot(snap.blob)
            obs = self.env.observe(self.env.state.physics)
        self.episode_step = 0
        self.episode_limit = (
            cfg.truncate_limit if (cfg.use_truncation and in_phase) else cfg.default_limit
        )
        self._episode_live = True
        return obs

    def step(self, action: np.ndarray) -> tuple[np.ndarray, float, bool, bool]:
        if not self._episode_live:
            raise EnvUsageError("step() after episode end; call reset() first")
        obs, reward, terminated = self.env.step(action)
        self.episode_step += 1
        self.global_step += 1
        truncated = (self.episode_step == self.episode_limit) and not terminated
        if terminated or truncated:
            self._episode_live = False
        return obs, reward, terminated, truncated

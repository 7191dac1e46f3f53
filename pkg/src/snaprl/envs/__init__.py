"""Built-in environments and the snapshot protocol."""

from snaprl.envs.base import (
    SNAPSHOT_FORMAT_VERSION,
    EnvState,
    Environment,
    EnvUsageError,
    SnapshotBlob,
    SnapshotError,
)
from snaprl.envs.pendulum import PendulumEnv
from snaprl.envs.point_mass import PointMassEnv

ENV_TYPES: dict[str, type[Environment]] = {
    PointMassEnv.env_id: PointMassEnv,
    PendulumEnv.env_id: PendulumEnv,
}


def make_env(env_id: str) -> Environment:
    try:
        return ENV_TYPES[env_id]()
    except KeyError:
        raise ValueError(
            f"unknown env '{env_id}', available: {sorted(ENV_TYPES)}"
        ) from None


__all__ = [
    "SNAPSHOT_FORMAT_VERSION",
    "ENV_TYPES",
    "EnvState",
    "Environment",
    "EnvUsageError",
    "PendulumEnv",
    "PointMassEnv",
    "SnapshotBlob",
    "SnapshotError",
    "make_env",
]

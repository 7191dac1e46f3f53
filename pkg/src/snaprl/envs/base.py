"""Environment contract with exact save/restore snapshots.

Every environment keeps its complete mutable context (physics vector,
internal PRNG, step counter) in an :class:`EnvState` with a byte-exact
serialization, so a restored snapshot replays the original trajectory
bit for bit. Base environments never truncate on time; episode limits
belong to wrappers so training and evaluation share one step path.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from snaprl.rng import Xoshiro256, mix_seed

SNAPSHOT_MAGIC = b"SNAP"
SNAPSHOT_FORMAT_VERSION = 1


class EnvUsageError(RuntimeError):
    """Raised when the caller violates the step/reset protocol."""


class SnapshotError(ValueError):
    """Raised for malformed, mismatched, or unsupported snapshot blobs."""


@dataclass
class EnvState:
    """Complete environment context: physics, PRNG, and step counter."""

    physics: np.ndarray
    rng: Xoshiro256
    step_count: int

    def to_bytes(self) -> bytes:
        phys = np.ascontiguousarray(self.physics, dtype="<f8").tobytes()
        return phys + self.rng.state_bytes() + struct.pack("<Q", self.step_count)

    @classmethod
    def from_bytes(cls, raw: bytes, physics_dim: int) -> "EnvState":
        expected = 8 * physics_dim + 32 + 8
        if len(raw) != expected:
            raise SnapshotError(
                f"state payload is {len(raw)} bytes, expected {expected}"
            )
        phys = np.frombuffer(raw[: 8 * physics_dim], dtype="<f8").copy()
        rng = Xoshiro256.from_state_bytes(raw[8 * physics_dim : 8 * physics_dim + 32])
        (step_count,) = struct.unpack("<Q", raw[8 * physics_dim + 32 :])
        return cls(physics=phys, rng=rng, step_count=step_count)

    def copy(self) -> "EnvState":
        return EnvState(
            physics=self.physics.copy(),
            rng=Xoshiro256.from_state_bytes(self.rng.state_bytes()),
            step_count=self.step_count,
        )


@dataclass(frozen=True)
class SnapshotBlob:
    """Versioned, environment-tagged serialization of an EnvState."""

    format_version: int
    env_id: str
    payload: bytes

    def to_bytes(self) -> bytes:
        env_bytes = self.env_id.encode("utf-8")
        return (
            SNAPSHOT_MAGIC
            + struct.pack("<I", self.format_version)
            + struct.pack("<I", len(env_bytes))
            + env_bytes
            + struct.pack("<I", len(self.payload))
            + self.payload
        )

    @classmethod
    def from_bytes(cls, raw: bytes) -> "SnapshotBlob":
        if len(raw) < 12 or raw[:4] != SNAPSHOT_MAGIC:
            raise SnapshotError("not a snapshot blob (bad magic)")
        (version,) = struct.unpack_from("<I", raw, 4)
        (id_len,) = struct.unpack_from("<I", raw, 8)
        if len(raw) < 12 + id_len + 4:
            raise SnapshotError("snapshot blob truncated in header")
        env_id = raw[12 : 12 + id_len].decode("utf-8")
        (payload_len,) = struct.unpack_from("<I", raw, 12 + id_len)
        start = 12 + id_len + 4
        if len(raw) != start + payload_len:
            raise SnapshotError("snapshot blob truncated in payload")
        return cls(format_version=version, env_id=env_id, payload=raw[start:])


class Environment:
    """Base class for deterministic continuous-control environments.

    Subclasses define the physics by implementing ``_initial_physics``,
    ``_transition`` and ``observe``, and declare ``env_id``, ``obs_dim``,
    ``act_dim``, ``a_max``, ``physics_dim`` and ``default_time_limit``.
    """

    env_id: str
    obs_dim: int
    act_dim: int
    a_max: float
    physics_dim: int
    default_time_limit: int

    def __init__(self) -> None:
        self._state: EnvState | None = None
        self._needs_reset = True

    # -- subclass hooks -------------------------------------------------

    def _initial_physics(self, rng: Xoshiro256) -> np.ndarray:
        raise NotImplementedError

    def _transition(
        self, physics: np.ndarray, action: np.ndarray
    ) -> tuple[np.ndarray, float, bool]:
        """Apply one step of dynamics to a clamped action.

        Returns (next physics, reward, terminated).
        """
        raise NotImplementedError

    def observe(self, physics: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- protocol --------------------------------------------------------

    @property
    def state(self) -> EnvState:
        if self._state is None:
            raise EnvUsageError("environment has not been reset")
        return self._state

    def reset(self, seed: int) -> np.ndarray:
        rng = Xoshiro256(mix_seed(seed))
        physics = self._initial_physics(rng)
        self._state = EnvState(physics=physics, rng=rng, step_count=0)
        self._needs_reset = False
        return self.observe(physics)

    def step(self, action: np.ndarray) -> tuple[np.ndarray, float, bool]:
        if self._state is None or self._needs_reset:
            raise EnvUsageError("step() called on a terminated or unreset environment")
        act = np.asarray(action, dtype=np.float64).ravel()
        if act.shape != (self.act_dim,):
            raise ValueError(f"action shape {act.shape}, expected ({self.act_dim},)")
        if not np.all(np.isfinite(act)):
            raise ValueError("action must be finite")
        act = np.clip(act, -self.a_max, self.a_max)
        physics, reward, terminated = self._transition(self._state.physics, act)
        self._state = EnvState(
            physics=physics,
            rng=self._state.rng,
            step_count=self._state.step_count + 1,
        )
        if terminated:
            self._needs_reset = True
        return self.observe(physics), reward, terminated

    # -- snapshots --------------------------------------------------------

    def save_snapshot(self) -> SnapshotBlob:
        return SnapshotBlob(
            format_version=SNAPSHOT_FORMAT_VERSION,
            env_id=self.env_id,
            payload=self.state.to_bytes(),
        )

    def load_snapshot(self, blob: SnapshotBlob) -> None:
        if blob.env_id != self.env_id:
            raise SnapshotError(
                f"snapshot is for env '{blob.env_id}', this env is '{self.env_id}'"
            )
        if blob.format_version != SNAPSHOT_FORMAT_VERSION:
            raise SnapshotError(
                f"unsupported snapshot format version {blob.format_version}"
            )
        self._state = EnvState.from_bytes(blob.payload, self.physics_dim)
        self._needs_reset = False

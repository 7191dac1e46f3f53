"""Snapshot datasets: teacher rollouts, value tagging, clustering, files.

A dataset is the list of environment snapshots collected along teacher
episodes, each tagged with the teacher's own value estimate of the state.
Clustering partitions the tags so resets can draw evenly across value
levels instead of oversampling the dominant motion regime.

Dataset file layout, little-endian: magic ``SDS1``, u32 version,
length-prefixed env id and teacher id, i64 generation seed, u32 episode
count, u32 snapshot interval, u32 record count, then per record
f64 q, u32 episode index, u32 step index, u32 blob length, blob bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from snaprl.envs.base import Environment, SnapshotBlob
from snaprl.kmeans import kmeans_1d
from snaprl.model import Td3Model
from snaprl.rng import mix_seed

DATASET_MAGIC = b"SDS1"
DATASET_FORMAT_VERSION = 1


class DatasetFormatError(ValueError):
    """Raised for malformed, truncated, or mismatched dataset files."""


@dataclass(frozen=True)
class TaggedSnapshot:
    blob: SnapshotBlob
    q: float
    episode_index: int
    step_index: int


@dataclass
class SnapshotDataset:
    env_id: str
    teacher_id: str
    seed: int
    episodes: int
    interval: int
    snapshots: list[TaggedSnapshot]

    def __len__(self) -> int:
        return len(self.snapshots)


@dataclass
class ClusteredDataset:
    """Disjoint, exhaustive partition of dataset indices by tag value."""

    k: int
    clusters: list[list[int]]
    centroids: np.ndarray

    def validate(self, n: int) -> None:
        if self.k != len(self.clusters):
            raise ValueError("cluster count mismatch")
        seen: set[int] = set()
        total = 0
        for members in self.clusters:
            if not members:
                raise ValueError("empty cluster")
            total += len(members)
            seen.update(members)
        if total != n or len(seen) != n:
            raise ValueError("clusters must partition the dataset exactly")


def teacher_q(model: Td3Model, obs: np.ndarray, reduction: str = "min") -> float:
    """Teacher's value of a state: critic at the deterministic action."""
    return model.q_value(obs, model.policy(obs), reduction=reduction)


def generate_dataset(
    env: Environment,
    teacher: Td3Model,
    episodes: int,
    interval: int,
    seed: int,
    teacher_id: str = "teacher",
    q_reduction: str = "min",
) -> SnapshotDataset:
    """Roll the deterministic teacher and snapshot every ``interval`` steps.

    The state is saved before the step at each matching index, step 0
    included, so the episode's initial state always enters the dataset.
    Episodes run under the environment's default time limit.
    """
    if episodes < 1 or interval < 1:
        raise ValueError("episodes and interval must be >= 1")
    if teacher.env_id != env.env_id:
        raise ValueError(
            f"teacher was trained on '{teacher.env_id}', env is '{env.env_id}'"
        )
    if teacher.obs_dim != env.obs_dim or teacher.act_dim != env.act_dim:
        raise ValueError("teacher/env dimension mismatch")
    snapshots: list[TaggedSnapshot] = []
    for ep in range(episodes):
        obs = env.reset(seed=mix_seed(seed, ep))
        for step_index in range(env.default_time_limit):
            if step_index % interval == 0:
                snapshots.append(
                    TaggedSnapshot(
                        blob=env.save_snapshot(),
                        q=teacher_q(teacher, obs, reduction=q_reduction),
                        episode_index=ep,
                        step_index=step_index,
                    )
                )
            obs, _, terminated = env.step(teacher.policy(obs))
            if terminated:
                break
    return SnapshotDataset(
        env_id=env.env_id,
        teacher_id=teacher_id,
        seed=seed,
        episodes=episodes,
        interval=interval,
        snapshots=snapshots,
    )


def cluster_dataset(dataset: SnapshotDataset, k: int, seed: int) -> ClusteredDataset:
    """Partition snapshot indices by tag value with kmeans_1d."""
    qs = np.array([s.q for s in dataset.snapshots], dtype=np.float64)
    assign, centroids = kmeans_1d(qs, k, seed=seed)
    k_eff = centroids.shape[0]
    clusters = [np.flatnonzero(assign == j).tolist() for j in range(k_eff)]
    out = ClusteredDataset(k=k_eff, clusters=clusters, centroids=centroids)
    out.validate(len(dataset))
    return out


def sample_snapshot(
    clustered: ClusteredDataset,
    dataset: SnapshotDataset,
    rng: np.random.Generator,
) -> TaggedSnapshot:
    """Uniform cluster, then uniform member: P(s in C_i) = 1 / (k * n_i)."""
    members = clustered.clusters[int(rng.integers(clustered.k))]
    return dataset.snapshots[members[int(rng.integers(len(members)))]]


def sample_snapshot_uniform(
    dataset: SnapshotDataset, rng: np.random.Generator
) -> TaggedSnapshot:
    return dataset.snapshots[int(rng.integers(len(dataset.snapshots)))]


def save_dataset(dataset: SnapshotDataset, path: str | Path) -> None:
    env_bytes = dataset.env_id.encode("utf-8")
    teacher_bytes = dataset.teacher_id.encode("utf-8")
    parts = [
        DATASET_MAGIC,
        struct.pack("<I", DATASET_FORMAT_VERSION),
        struct.pack("<I", len(env_bytes)),
        env_bytes,
        struct.pack("<I", len(teacher_bytes)),
        teacher_bytes,
        struct.pack("<q", dataset.seed),
        struct.pack("<III", dataset.episodes, dataset.interval, len(dataset.snapshots)),
    ]
    for snap in dataset.snapshots:
        blob = snap.blob.to_bytes()
        parts.append(
            struct.pack("<dIII", snap.q, snap.episode_index, snap.step_index, len(blob))
        )
        parts.append(blob)
    Path(path).write_bytes(b"".join(parts))


def load_dataset(path: str | Path) -> SnapshotDataset:
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != DATASET_MAGIC:
        raise DatasetFormatError(f"{path}: not a snapshot dataset (bad magic)")
    off = 4
    try:
        (version,) = struct.unpack_from("<I", raw, off)
        off += 4
        if version != DATASET_FORMAT_VERSION:
            raise DatasetFormatError(f"{path}: unsupported dataset version {version}")
        (n,) = struct.unpack_from("<I", raw, off)
        off += 4
        if off + n > len(raw):
            raise DatasetFormatError(f"{path}: truncated header")
        env_id = raw[off : off + n].decode("utf-8")
        off += n
        (n,) = struct.unpack_from("<I", raw, off)
        off += 4
        if off + n > len(raw):
            raise DatasetFormatError(f"{path}: truncated header")
        teacher_id = raw[off : off + n].decode("utf-8")
        off += n
        (seed,) = struct.unpack_from("<q", raw, off)
        off += 8
        episodes, interval, count = struct.unpack_from("<III", raw, off)
        off += 12
        snapshots: list[TaggedSnapshot] = []
        for _ in range(count):
            q, ep, step, blob_len = struct.unpack_from("<dIII", raw, off)
            off += 20
            if off + blob_len > len(raw):
                raise DatasetFormatError(f"{path}: truncated snapshot record")
            blob = SnapshotBlob.from_bytes(raw[off : off + blob_len])
            off += blob_len
            snapshots.append(
                TaggedSnapshot(blob=blob, q=q, episode_index=ep, step_index=step)
            )
    except struct.error as exc:
        raise DatasetFormatError(f"{path}: truncated dataset file") from exc
    if off != len(raw):
        raise DatasetFormatError(f"{path}: {len(raw) - off} trailing bytes")
    return SnapshotDataset(
        env_id=env_id,
        teacher_id=teacher_id,
        seed=seed,
        episodes=episodes,
        interval=interval,
        snapshots=snapshots,
    )

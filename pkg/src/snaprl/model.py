"""Actor/critic parameter container and its on-disk format.

A model file stores the actor and both critics so saved agents can later
serve as teachers (dataset tagging needs the critics, not just the policy).
Layout, all little-endian: magic ``TD3M``, u32 version, length-prefixed
env id, u32 obs/act dims, f64 action bound, then per-network layer shapes,
then every parameter array as float64 in declaration order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from snaprl.nets import Mlp, mlp_forward

MODEL_MAGIC = b"TD3M"
MODEL_FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised for malformed or mismatched model files."""


@dataclass
class Td3Model:
    """Frozen actor + twin critics, as trained or as loaded from disk."""

    env_id: str
    obs_dim: int
    act_dim: int
    a_max: float
    actor: Mlp
    critic1: Mlp
    critic2: Mlp

    def policy(self, obs: np.ndarray) -> np.ndarray:
        """Deterministic action for a single observation."""
        z = mlp_forward(self.actor, np.asarray(obs, dtype=np.float64)[None, :])
        return np.tanh(z[0]) * self.a_max

    def policy_batch(self, obs: np.ndarray) -> np.ndarray:
        return np.tanh(mlp_forward(self.actor, obs)) * self.a_max

    def q_value(self, obs: np.ndarray, action: np.ndarray, reduction: str = "min") -> float:
        """Critic value of one (obs, action) pair; twin minimum by default."""
        x = np.concatenate([obs, action]).astype(np.float64)[None, :]
        q1 = float(mlp_forward(self.critic1, x)[0, 0])
        if reduction == "q1":
            return q1
        if reduction == "min":
            q2 = float(mlp_forward(self.critic2, x)[0, 0])
            return min(q1, q2)
        raise ValueError(f"unknown critic reduction '{reduction}'")


def _pack_net(net: Mlp) -> tuple[bytes, bytes]:
    header = struct.pack("<I", len(net.weights))
    for w in net.weights:
        header += struct.pack("<II", w.shape[0], w.shape[1])
    payload = b"".join(
        np.ascontiguousarray(p, dtype="<f8").tobytes() for p in net.params()
    )
    return header, payload


def save_model(model: Td3Model, path: str | Path) -> None:
    env_bytes = model.env_id.encode("utf-8")
    parts = [
        MODEL_MAGIC,
        struct.pack("<I", MODEL_FORMAT_VERSION),
        struct.pack("<I", len(env_bytes)),
        env_bytes,
        struct.pack("<II", model.obs_dim, model.act_dim),
        struct.pack("<d", model.a_max),
        struct.pack("<I", 3),
    ]
    payloads = []
    for net in (model.actor, model.critic1, model.critic2):
        header, payload = _pack_net(net)
        parts.append(header)
        payloads.append(payload)
    Path(path).write_bytes(b"".join(parts + payloads))


def load_model(path: str | Path) -> Td3Model:
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: not a model file (bad magic)")
    off = 4
    try:
        (version,) = struct.unpack_from("<I", raw, off)
        off += 4
        if version != MODEL_FORMAT_VERSION:
            raise ModelFormatError(f"{path}: unsupported model version {version}")
        (id_len,) = struct.unpack_from("<I", raw, off)
        off += 4
        env_id = raw[off : off + id_len].decode("utf-8")
        off += id_len
        obs_dim, act_dim = struct.unpack_from("<II", raw, off)
        off += 8
        (a_max,) = struct.unpack_from("<d", raw, off)
        off += 8
        (n_nets,) = struct.unpack_from("<I", raw, off)
        off += 4
        if n_nets != 3:
            raise ModelFormatError(f"{path}: expected 3 networks, found {n_nets}")
        shapes: list[list[tuple[int, int]]] = []
        for _ in range(n_nets):
            (n_layers,) = struct.unpack_from("<I", raw, off)
            off += 4
            layer_shapes = []
            for _ in range(n_layers):
                fan_in, fan_out = struct.unpack_from("<II", raw, off)
                off += 8
                layer_shapes.append((fan_in, fan_out))
            shapes.append(layer_shapes)
        nets = []
        for layer_shapes in shapes:
            weights, biases = [], []
            for fan_in, fan_out in layer_shapes:
                n = fan_in * fan_out
                w = np.frombuffer(raw, dtype="<f8", count=n, offset=off).reshape(
                    fan_in, fan_out
                )
                off += 8 * n
                b = np.frombuffer(raw, dtype="<f8", count=fan_out, offset=off)
                off += 8 * fan_out
                weights.append(w.copy())
                biases.append(b.copy())
            nets.append(Mlp(weights=weights, biases=biases))
    except struct.error as exc:
        raise ModelFormatError(f"{path}: truncated model file") from exc
    if off != len(raw):
        raise ModelFormatError(f"{path}: {len(raw) - off} trailing bytes")
    return Td3Model(
        env_id=env_id,
        obs_dim=obs_dim,
        act_dim=act_dim,
        a_max=a_max,
        actor=nets[0],
        critic1=nets[1],
        critic2=nets[2],
    )

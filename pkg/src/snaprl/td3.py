"""Twin-critic deterministic policy gradient agent (TD3).

Critics are regressed every step onto a smoothed, clipped-noise target;
the actor and the target networks update only on delayed steps. All math
runs in float64 on the hand-rolled MLPs from :mod:`snaprl.nets`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from snaprl.adam import AdamState, adam_init, adam_step
from snaprl.model import Td3Model
from snaprl.nets import (
    Mlp,
    init_mlp,
    mlp_backward,
    mlp_forward,
    mlp_forward_cached,
    polyak_update,
)
from snaprl.replay import Batch, ReplayBuffer


@dataclass
class Td3Config:
    learning_rate: float = 3e-4
    buffer_capacity: int = 1_000_000
    gamma: float = 0.99
    tau: float = 0.005
    batch_size: int = 256
    policy_noise: float = 0.2
    exploration_noise: float = 0.1
    noise_clip: float = 0.5
    policy_frequency: int = 2
    learning_starts: int = 25_000
    total_timesteps: int = 1_000_000
    hidden_sizes: tuple[int, ...] = (256, 256)

    def validate(self) -> None:
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must be in (0, 1]")
        if self.noise_clip < 0.0:
            raise ValueError("noise_clip must be nonnegative")
        if self.policy_frequency < 1:
            raise ValueError("policy_frequency must be >= 1")
        if self.batch_size < 1 or self.buffer_capacity < 1:
            raise ValueError("batch_size and buffer_capacity must be positive")
        if self.learning_starts < 0 or self.total_timesteps < 1:
            raise ValueError("invalid step budget")


class TD3Agent:
    """One actor, two critics, their targets, and per-network Adam state."""

    def __init__(
        self,
        obs_dim: int,
        act_dim: int,
        a_max: float,
        config: Td3Config,
        seed: int,
    ) -> None:
        config.validate()
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.a_max = a_max
        self.config = config
        self.rng = np.random.default_rng(seed)
        hidden = list(config.hidden_sizes)
        self.actor = init_mlp([obs_dim] + hidden + [act_dim], self.rng)
        self.critic1 = init_mlp([obs_dim + act_dim] + hidden + [1], self.rng)
        self.critic2 = init_mlp([obs_dim + act_dim] + hidden + [1], self.rng)
        self.actor_target = self.actor.copy()
        self.critic1_target = self.critic1.copy()
        self.critic2_target = self.critic2.copy()
        self.actor_adam = adam_init(self.actor.params())
        self.critic1_adam = adam_init(self.critic1.params())
        self.critic2_adam = adam_init(self.critic2.params())

    # -- acting -----------------------------------------------------------

    def policy(self, obs: np.ndarray) -> np.ndarray:
        """Deterministic evaluation action for a single observation."""
        z = mlp_forward(self.actor, np.asarray(obs, dtype=np.float64)[None, :])
        return np.tanh(z[0]) * self.a_max

    def select_action(self, obs: np.ndarray, noise_scale: float) -> np.ndarray:
        """Policy action plus clipped Gaussian exploration noise."""
        action = self.policy(obs)
        if noise_scale > 0.0:
            action = action + self.rng.normal(
                0.0, noise_scale * self.a_max, size=self.act_dim
            )
        return np.clip(action, -self.a_max, self.a_max)

    def random_action(self) -> np.ndarray:
        """Uniform action, used before learning starts."""
        return self.rng.uniform(-self.a_max, self.a_max, size=self.act_dim)

    # -- training ---------------------------------------------------------

    def compute_targets(self, batch: Batch, eps: np.ndarray | None = None) -> np.ndarray:
        """TD target: r + gamma * (1 - done) * min twin target critic.

        The next action is the target policy plus clipped smoothing noise
        eps ~ N(0, policy_noise * a_max), drawn here unless provided.
        """
        cfg = self.config
        if eps is None:
            eps = self.rng.normal(
                0.0, cfg.policy_noise * self.a_max, size=batch.actions.shape
            )
        eps = np.clip(eps, -cfg.noise_clip, cfg.noise_clip)
        next_act = np.tanh(mlp_forward(self.actor_target, batch.next_obs)) * self.a_max
        next_act = np.clip(next_act + eps, -self.a_max, self.a_max)
        x = np.concatenate([batch.next_obs, next_act], axis=1)
        q1 = mlp_forward(self.critic1_target, x)[:, 0]
        q2 = mlp_forward(self.critic2_target, x)[:, 0]
        return batch.rewards + cfg.gamma * (1.0 - batch.dones) * np.minimum(q1, q2)

    def _critic_update(
        self, critic: Mlp, adam: AdamState, x: np.ndarray, y: np.ndarray
    ) -> float:
        q, acts = mlp_forward_cached(critic, x)
        resid = q[:, 0] - y
        loss = float(np.mean(resid**2))
        dout = (2.0 / x.shape[0]) * resid[:, None]
        grads, _ = mlp_backward(critic, acts, dout)
        adam_step(critic.params(), grads, adam, self.config.learning_rate)
        return loss

    def _actor_update(self, obs: np.ndarray) -> float:
        z, actor_acts = mlp_forward_cached(self.actor, obs)
        t = np.tanh(z)
        act = t * self.a_max
        x = np.concatenate([obs, act], axis=1)
        q, critic_acts = mlp_forward_cached(self.critic1, x)
        loss = float(-np.mean(q))
        dq = np.full_like(q, -1.0 / obs.shape[0])
        _, dx = mlp_backward(self.critic1, critic_acts, dq, need_input_grad=True)
        dact = dx[:, self.obs_dim :]
        dz = dact * self.a_max * (1.0 - t**2)
        grads, _ = mlp_backward(self.actor, actor_acts, dz)
        adam_step(self.actor.params(), grads, self.actor_adam, self.config.learning_rate)
        return loss

    def train_step(self, buffer: ReplayBuffer, global_step: int) -> dict:
        """One gradient step; delayed actor/target update per config.

        Before learning starts (or with an underfilled buffer) this is a
        no-op, reported via ``updated`` so callers can count real updates.
        """
        cfg = self.config
        if global_step < cfg.learning_starts or buffer.size < cfg.batch_size:
            return {"updated": False, "actor_updated": False}
        batch = buffer.sample(self.rng, cfg.batch_size)
        y = self.compute_targets(batch)
        x = np.concatenate([batch.obs, batch.actions], axis=1)
        q1_loss = self._critic_update(self.critic1, self.critic1_adam, x, y)
        q2_loss = self._critic_update(self.critic2, self.critic2_adam, x, y)
        metrics = {
            "updated": True,
            "q1_loss": q1_loss,
            "q2_loss": q2_loss,
            "actor_updated": False,
        }
        if global_step % cfg.policy_frequency == 0:
            metrics["actor_loss"] = self._actor_update(batch.obs)
            polyak_update(self.actor_target, self.actor, cfg.tau)
            polyak_update(self.critic1_target, self.critic1, cfg.tau)
            polyak_update(self.critic2_target, self.critic2, cfg.tau)
            metrics["actor_updated"] = True
        return metrics

    # -- export -----------------------------------------------------------

    def to_model(self, env_id: str) -> Td3Model:
        return Td3Model(
            env_id=env_id,
            obs_dim=self.obs_dim,
            act_dim=self.act_dim,
            a_max=self.a_max,
            actor=self.actor.copy(),
            critic1=self.critic1.copy(),
            critic2=self.critic2.copy(),
        )

"""Experiment configuration: presets, flat key=value files, validation.

Config files are UTF-8 text with one ``key = value`` per line and ``#``
comments. The ``preset`` key selects the default bundle (``paper`` keeps
the reference hyperparameters; ``desk`` scales the step budget down by
25x while preserving the phase/limit/eval ratios); every other key then
overrides its preset default regardless of line order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from snaprl.td3 import Td3Config
from snaprl.wrapper import WrapperConfig


class ConfigError(ValueError):
    """Raised for unparseable or inconsistent experiment configuration."""


# variant -> (use_snapshots, use_clustering, use_truncation)
VARIANT_FLAGS: dict[str, tuple[bool, bool, bool]] = {
    "baseline": (False, False, False),
    "snapshot": (True, False, False),
    "snapshot_sc": (True, True, False),
    "snapshot_stt": (True, False, True),
    "s3rl": (True, True, True),
    "stt_only": (False, False, True),
}

SWEEP_AXES = ("K", "T", "teacher_quality")
TEACHER_QUALITIES = ("best", "weak")


@dataclass
class ExperimentConfig:
    env_id: str = "point-mass"
    variant: str = "baseline"
    preset: str = "desk"
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    td3: Td3Config = field(default_factory=Td3Config)
    phase_steps: int = 4_000
    truncate_limit: int = 25
    default_limit: int = 200
    eval_interval: int = 1_000
    eval_episodes: int = 3
    dataset_path: str | None = None
    teacher_path: str | None = None
    dataset_episodes: int = 10
    dataset_interval: int = 10
    q_reduction: str = "min"
    kmeans_k: int = 6
    kmeans_restarts: int = 16

    def wrapper_config(self) -> WrapperConfig:
        use_snapshots, use_clustering, use_truncation = VARIANT_FLAGS[self.variant]
        return WrapperConfig(
            phase_steps=self.phase_steps,
            truncate_limit=self.truncate_limit,
            default_limit=self.default_limit,
            use_snapshots=use_snapshots,
            use_clustering=use_clustering,
            use_truncation=use_truncation,
        )

    def needs_dataset(self) -> bool:
        return VARIANT_FLAGS[self.variant][0]

    def validate(self) -> None:
        if self.variant not in VARIANT_FLAGS:
            raise ConfigError(
                f"unknown variant '{self.variant}', expected one of {sorted(VARIANT_FLAGS)}"
            )
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.eval_episodes < 1:
            raise ConfigError("eval_episodes must be >= 1")
        if self.eval_interval < 1:
            raise ConfigError("eval_interval must be >= 1")
        if self.dataset_episodes < 1 or self.dataset_interval < 1:
            raise ConfigError("dataset_episodes and dataset_interval must be >= 1")
        if self.q_reduction not in ("min", "q1"):
            raise ConfigError("q_reduction must be 'min' or 'q1'")
        if self.kmeans_k < 1 or self.kmeans_restarts < 1:
            raise ConfigError("kmeans_k and kmeans_restarts must be >= 1")
        try:
            self.td3.validate()
            self.wrapper_config().validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.phase_steps > self.td3.total_timesteps:
            raise ConfigError("phase_steps cannot exceed total_timesteps")
        if self.needs_dataset():
            if (self.dataset_path is None) == (self.teacher_path is None):
                raise ConfigError(
                    f"variant '{self.variant}' needs exactly one snapshot source: "
                    "dataset_path or teacher_path"
                )
        elif self.dataset_path is not None:
            raise ConfigError(f"variant '{self.variant}' does not take a dataset")


def preset_config(preset: str) -> ExperimentConfig:
    if preset == "paper":
        return ExperimentConfig(
            preset="paper",
            td3=Td3Config(
                total_timesteps=1_000_000,
                buffer_capacity=1_000_000,
                learning_starts=25_000,
                hidden_sizes=(256, 256),
            ),
            phase_steps=100_000,
            truncate_limit=100,
            default_limit=200,
            eval_interval=5_000,
            eval_episodes=3,
        )
    if preset == "desk":
        return ExperimentConfig(
            preset="desk",
            td3=Td3Config(
                total_timesteps=40_000,
                buffer_capacity=40_000,
                learning_starts=1_000,
                hidden_sizes=(64, 64),
            ),
            phase_steps=4_000,
            truncate_limit=25,
            default_limit=200,
            eval_interval=1_000,
            eval_episodes=3,
        )
    raise ConfigError(f"unknown preset '{preset}', expected 'paper' or 'desk'")


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got '{value}'") from None


def _parse_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got '{value}'") from None


def _parse_int_list(key: str, value: str) -> tuple[int, ...]:
    try:
        return tuple(int(v.strip()) for v in value.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated integers, got '{value}'") from None


_TD3_INT_KEYS = {
    "total_timesteps",
    "buffer_capacity",
    "learning_starts",
    "batch_size",
    "policy_frequency",
}
_TD3_FLOAT_KEYS = {
    "learning_rate",
    "gamma",
    "tau",
    "policy_noise",
    "exploration_noise",
    "noise_clip",
}
_TOP_INT_KEYS = {
    "phase_steps",
    "truncate_limit",
    "default_limit",
    "eval_interval",
    "eval_episodes",
    "dataset_episodes",
    "dataset_interval",
    "kmeans_k",
    "kmeans_restarts",
}


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    entries: dict[str, str] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        entries[key] = value

    cfg = preset_config(entries.pop("preset", "desk"))
    td3 = cfg.td3
    for key, value in entries.items():
        if key == "env":
            cfg.env_id = value
        elif key == "variant":
            cfg.variant = value
        elif key == "seeds":
            cfg.seeds = _parse_int_list(key, value)
        elif key == "dataset_path":
            cfg.dataset_path = value
        elif key == "teacher_path":
            cfg.teacher_path = value
        elif key == "q_reduction":
            cfg.q_reduction = value
        elif key == "hidden_sizes":
            td3 = replace(td3, hidden_sizes=_parse_int_list(key, value))
        elif key in _TD3_INT_KEYS:
            td3 = replace(td3, **{key: _parse_int(key, value)})
        elif key in _TD3_FLOAT_KEYS:
            td3 = replace(td3, **{key: _parse_float(key, value)})
        elif key in _TOP_INT_KEYS:
            setattr(cfg, key, _parse_int(key, value))
        else:
            raise ConfigError(f"{source}: unknown key '{key}'")
    cfg.td3 = td3
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))

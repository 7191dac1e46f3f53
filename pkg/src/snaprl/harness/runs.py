"""Training runs, evaluation protocol, and curve CSV files.

Every run is a pure function of (config, seed): agent init, exploration,
replay sampling, snapshot choices, and evaluation episodes all derive
from the run seed through fixed mixing constants. Evaluation always uses
a fresh bare environment with the deterministic policy; those steps never
count against the training budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from snaprl.envs import make_env
from snaprl.harness.config import ConfigError, ExperimentConfig
from snaprl.model import Td3Model, load_model, save_model
from snaprl.replay import ReplayBuffer
from snaprl.rng import mix_seed
from snaprl.snapshots import (
    ClusteredDataset,
    SnapshotDataset,
    cluster_dataset,
    generate_dataset,
    load_dataset,
    save_dataset,
)
from snaprl.td3 import TD3Agent, Td3Config
from snaprl.wrapper import SnapshotWrapper, WrapperConfig

# stream tags so the agent, wrapper, dataset, and clustering draws stay
# independent for one run seed
_AGENT_STREAM = 1
_WRAPPER_STREAM = 2
_DATASET_STREAM = 3
_KMEANS_STREAM = 4
_FINAL_EVAL_STREAM = 5

TEACHER_SUCCESS_EPISODES = 10


@dataclass
class EvalRecord:
    """One evaluation: per-episode returns and their arithmetic mean."""

    seed: int
    global_step: int
    returns: list[float]
    mean_return: float
    successes: int
    wall_time: float


def evaluate(
    policy: Callable[[np.ndarray], np.ndarray],
    env_id: str,
    episodes: int,
    seed: int,
    time_limit: int | None = None,
    run_seed: int = 0,
    global_step: int = 0,
    wall_time: float = 0.0,
) -> EvalRecord:
    """Run the deterministic policy on a fresh bare environment."""
    returns: list[float] = []
    successes = 0
    for ep in range(episodes):
        env = make_env(env_id)
        limit = env.default_time_limit if time_limit is None else time_limit
        obs = env.reset(seed=mix_seed(seed, ep))
        total = 0.0
        terminated = False
        for _ in range(limit):
            obs, reward, terminated = env.step(policy(obs))
            total += reward
            if terminated:
                break
        returns.append(total)
        successes += int(terminated)
    return EvalRecord(
        seed=run_seed,
        global_step=global_step,
        returns=returns,
        mean_return=sum(returns) / len(returns),
        successes=successes,
        wall_time=wall_time,
    )


@dataclass
class RunResult:
    seed: int
    records: list[EvalRecord]
    agent: TD3Agent
    checkpoints: dict[int, Td3Model]


def run_training(
    env_id: str,
    td3_cfg: Td3Config,
    wrapper_cfg: WrapperConfig,
    run_seed: int,
    eval_interval: int,
    eval_episodes: int,
    dataset: SnapshotDataset | None = None,
    clustered: ClusteredDataset | None = None,
    checkpoint_steps: tuple[int, ...] = (),
) -> RunResult:
    """Train one agent for exactly ``total_timesteps`` environment steps."""
    env = make_env(env_id)
    agent = TD3Agent(
        env.obs_dim, env.act_dim, env.a_max, td3_cfg, seed=mix_seed(run_seed, _AGENT_STREAM)
    )
    wrapper = SnapshotWrapper(
        env,
        wrapper_cfg,
        np.random.default_rng(mix_seed(run_seed, _WRAPPER_STREAM)),
        dataset=dataset,
        clustered=clustered,
    )
    buffer = ReplayBuffer(td3_cfg.buffer_capacity, env.obs_dim, env.act_dim)
    records: list[EvalRecord] = []
    checkpoints: dict[int, Td3Model] = {}
    start = time.perf_counter()
    obs = wrapper.reset()
    for g in range(td3_cfg.total_timesteps):
        if g < td3_cfg.learning_starts:
            action = agent.random_action()
        else:
            action = agent.select_action(obs, td3_cfg.exploration_noise)
        next_obs, reward, terminated, truncated = wrapper.step(action)
        buffer.add(obs, action, reward, next_obs, done_for_bootstrap=terminated)
        obs = wrapper.reset() if (terminated or truncated) else next_obs
        agent.train_step(buffer, g)
        step = g + 1
        if step % eval_interval == 0:
            records.append(
                evaluate(
                    agent.policy,
                    env_id,
                    eval_episodes,
                    seed=mix_seed(run_seed, step),
                    time_limit=wrapper_cfg.default_limit,
                    run_seed=run_seed,
                    global_step=step,
                    wall_time=time.perf_counter() - start,
                )
            )
        if step in checkpoint_steps:
            checkpoints[step] = agent.to_model(env_id)
    return RunResult(seed=run_seed, records=records, agent=agent, checkpoints=checkpoints)


# -- curve CSV files -------------------------------------------------------


def format_float(x: float) -> str:
    """Shortest round-trip decimal form; deterministic for identical bits."""
    return repr(float(x))


def curve_header(eval_episodes: int) -> str:
    eps = ",".join(f"ep{i}" for i in range(eval_episodes))
    return f"variant,seed,global_step,mean_return,{eps},wall_time"


def write_curve_csv(
    path: str | Path, variant: str, records: list[EvalRecord], eval_episodes: int
) -> None:
    lines = [curve_header(eval_episodes)]
    for rec in records:
        eps = ",".join(format_float(r) for r in rec.returns)
        lines.append(
            f"{variant},{rec.seed},{rec.global_step},"
            f"{format_float(rec.mean_return)},{eps},{format_float(rec.wall_time)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_curve_csv(path: str | Path) -> list[dict]:
    """Parse a curve CSV into row dicts with typed fields."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"{path}: empty curve file")
    columns = lines[0].split(",")
    ep_cols = [c for c in columns if c.startswith("ep")]
    rows = []
    for line in lines[1:]:
        if not line:
            continue
        values = dict(zip(columns, line.split(",")))
        rows.append(
            {
                "variant": values["variant"],
                "seed": int(values["seed"]),
                "global_step": int(values["global_step"]),
                "mean_return": float(values["mean_return"]),
                "returns": [float(values[c]) for c in ep_cols],
                "wall_time": float(values["wall_time"]),
            }
        )
    return rows


# -- teacher training ------------------------------------------------------


def weak_model_path(path: str | Path) -> Path:
    """Sibling file holding the quarter-budget checkpoint of a teacher."""
    p = Path(path)
    return p.with_name(p.stem + "_weak" + p.suffix)


@dataclass
class TeacherSummary:
    seed: int
    model_path: Path
    weak_path: Path
    curve_path: Path
    final_mean_return: float
    success_rate: float


def train_teacher_seed(config: ExperimentConfig, run_seed: int, out_dir: Path) -> TeacherSummary:
    """Train one teacher on the bare environment; save final + weak models."""
    bare = WrapperConfig(
        phase_steps=0,
        truncate_limit=config.default_limit,
        default_limit=config.default_limit,
        use_snapshots=False,
        use_clustering=False,
        use_truncation=False,
    )
    quarter = max(1, config.td3.total_timesteps // 4)
    result = run_training(
        config.env_id,
        config.td3,
        bare,
        run_seed,
        config.eval_interval,
        config.eval_episodes,
        checkpoint_steps=(quarter,),
    )
    model = result.agent.to_model(config.env_id)
    model_path = out_dir / f"teacher_seed{run_seed}.td3m"
    save_model(model, model_path)
    weak_path = weak_model_path(model_path)
    save_model(result.checkpoints[quarter], weak_path)
    curve_path = out_dir / f"teacher_seed{run_seed}_curve.csv"
    write_curve_csv(curve_path, "teacher", result.records, config.eval_episodes)
    final = evaluate(
        model.policy,
        config.env_id,
        TEACHER_SUCCESS_EPISODES,
        seed=mix_seed(run_seed, _FINAL_EVAL_STREAM),
        time_limit=config.default_limit,
        run_seed=run_seed,
        global_step=config.td3.total_timesteps,
    )
    return TeacherSummary(
        seed=run_seed,
        model_path=model_path,
        weak_path=weak_path,
        curve_path=curve_path,
        final_mean_return=final.mean_return,
        success_rate=final.successes / TEACHER_SUCCESS_EPISODES,
    )


def train_teacher(config: ExperimentConfig, out_dir: str | Path) -> list[TeacherSummary]:
    """Train one teacher per config seed and write a ranking summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summaries = [train_teacher_seed(config, seed, out) for seed in config.seeds]
    best = max(summaries, key=lambda s: s.final_mean_return)
    lines = ["seed,final_mean_return,success_rate,best,model_path,weak_path"]
    for s in summaries:
        lines.append(
            f"{s.seed},{format_float(s.final_mean_return)},{format_float(s.success_rate)},"
            f"{int(s is best)},{s.model_path.name},{s.weak_path.name}"
        )
    (out / "teacher_summary.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return summaries


# -- student training ------------------------------------------------------


def _load_teacher(config: ExperimentConfig) -> Td3Model:
    assert config.teacher_path is not None
    try:
        teacher = load_model(config.teacher_path)
    except FileNotFoundError:
        raise ConfigError(f"teacher model not found: {config.teacher_path}") from None
    if teacher.env_id != config.env_id:
        raise ConfigError(
            f"teacher is for env '{teacher.env_id}', config env is '{config.env_id}'"
        )
    return teacher


def dataset_for_seed(
    config: ExperimentConfig,
    run_seed: int,
    teacher: Td3Model | None = None,
    shared_dataset: SnapshotDataset | None = None,
) -> tuple[SnapshotDataset | None, ClusteredDataset | None]:
    """Resolve the snapshot source for one run.

    A teacher generates a fresh per-run dataset (seeded from the run seed);
    a dataset file is shared across runs. Clustering, when the variant uses
    it, is recomputed per run seed either way.
    """
    if not config.needs_dataset():
        return None, None
    if shared_dataset is not None:
        dataset = shared_dataset
    elif config.dataset_path is not None:
        dataset = load_dataset(config.dataset_path)
    else:
        assert teacher is not None
        dataset = generate_dataset(
            make_env(config.env_id),
            teacher,
            episodes=config.dataset_episodes,
            interval=config.dataset_interval,
            seed=mix_seed(run_seed, _DATASET_STREAM),
            teacher_id=Path(config.teacher_path).stem,
            q_reduction=config.q_reduction,
        )
    if dataset.env_id != config.env_id:
        raise ConfigError(
            f"dataset is for env '{dataset.env_id}', config env is '{config.env_id}'"
        )
    clustered = None
    if config.wrapper_config().use_clustering:
        clustered = cluster_dataset(
            dataset, config.kmeans_k, seed=mix_seed(run_seed, _KMEANS_STREAM)
        )
    return dataset, clustered


def train_student_seed(
    config: ExperimentConfig,
    run_seed: int,
    out_dir: Path,
    teacher: Td3Model | None = None,
    shared_dataset: SnapshotDataset | None = None,
) -> Path:
    dataset, clustered = dataset_for_seed(config, run_seed, teacher, shared_dataset)
    result = run_training(
        config.env_id,
        config.td3,
        config.wrapper_config(),
        run_seed,
        config.eval_interval,
        config.eval_episodes,
        dataset=dataset,
        clustered=clustered,
    )
    curve_path = out_dir / f"{config.variant}_seed{run_seed}_curve.csv"
    write_curve_csv(curve_path, config.variant, result.records, config.eval_episodes)
    return curve_path


def train_student(config: ExperimentConfig, out_dir: str | Path) -> list[Path]:
    """Train one student per config seed; returns the curve CSV paths."""
    config.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    teacher = None
    shared_dataset = None
    if config.needs_dataset():
        if config.teacher_path is not None:
            teacher = _load_teacher(config)
        else:
            shared_dataset = load_dataset(config.dataset_path)
    return [
        train_student_seed(config, seed, out, teacher, shared_dataset)
        for seed in config.seeds
    ]


def gen_snapshots(config: ExperimentConfig, seed: int, out_path: str | Path) -> SnapshotDataset:
    """Generate and save one snapshot dataset file from the config teacher."""
    if config.teacher_path is None:
        raise ConfigError("gen-snapshots needs teacher_path in the config or --teacher")
    teacher = _load_teacher(config)
    dataset = generate_dataset(
        make_env(config.env_id),
        teacher,
        episodes=config.dataset_episodes,
        interval=config.dataset_interval,
        seed=seed,
        teacher_id=Path(config.teacher_path).stem,
        q_reduction=config.q_reduction,
    )
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(dataset, out)
    return dataset

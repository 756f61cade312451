"""Experiment configuration: strict key-value text format.

Unknown keys are errors so hyperparameters cannot silently drift. Viewpoint
distributions are given as ``standard``, ``uniform2d``, ``triangularA``,
``triangularB``, or ``fixed:<dh>:<dtheta>``.
"""

from dataclasses import dataclass, field, fields

from .simworld.distributions import ViewpointDistribution, fixed
from .vilcore import VILConfig

CONFIG_FORMAT_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    format_version: int = CONFIG_FORMAT_VERSION
    seed: int = 0
    out_dir: str = "runs/default"

    train_worlds: int = 64
    val_seen_worlds: int = 16
    val_unseen_worlds: int = 16
    world_obstacles: int = 6
    world_extent: float = 20.0
    world_resolution: float = 0.05
    train_world_seed_base: int = 1000
    unseen_world_seed_base: int = 5000

    train_episodes: int = 256
    val_seen_episodes: int = 64
    val_unseen_episodes: int = 200

    model_seed: int = 11
    obs_dim: int = 32
    max_steps: int = 15

    pretrain_iterations: int = 500
    pretrain_lr: float = 0.05
    pretrain_decay_frequency: int = 200
    pretrain_decay_ratio: float = 0.75
    pretrain_batch_size: int = 8

    vil_p1: float = 0.1
    vil_p2: float = 0.1
    vil_lambda1: float = 0.2
    vil_lambda2: float = 10.0
    vil_tau: float = 0.1
    vil_iterations: int = 500
    vil_lr: float = 0.05
    vil_decay_frequency: int = 200
    vil_decay_ratio: float = 0.75
    vil_batch_size: int = 8
    vil_eval_interval: int = 100
    vil_selection_episodes: int = 64

    train_viewpoint: str = "uniform2d"
    eval_viewpoint: str = "uniform2d"
    grid_size: int = 9

    def validate(self):
        if self.format_version != CONFIG_FORMAT_VERSION:
            raise ConfigError(
                f"unsupported format_version {self.format_version}"
            )
        train_seeds = set(self.train_world_seeds())
        unseen_seeds = set(self.unseen_world_seeds())
        if train_seeds & unseen_seeds:
            raise ConfigError("train and val-unseen world seed sets overlap")
        if self.val_seen_worlds > self.train_worlds:
            raise ConfigError("val_seen_worlds cannot exceed train_worlds")
        parse_viewpoint(self.train_viewpoint)
        parse_viewpoint(self.eval_viewpoint)
        self.vil_config().validate()
        return self

    def train_world_seeds(self):
        return [self.train_world_seed_base + i for i in range(self.train_worlds)]

    def unseen_world_seeds(self):
        return [self.unseen_world_seed_base + i for i in range(self.val_unseen_worlds)]

    def vil_config(self):
        return VILConfig(
            p1=self.vil_p1,
            p2=self.vil_p2,
            lambda1=self.vil_lambda1,
            lambda2=self.vil_lambda2,
            tau=self.vil_tau,
            iterations=self.vil_iterations,
            lr=self.vil_lr,
            decay_frequency=self.vil_decay_frequency,
            decay_ratio=self.vil_decay_ratio,
            seed=self.seed,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def parse_viewpoint(spec):
    """Distribution from its config string."""
    spec = spec.strip()
    if spec.startswith("fixed:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad fixed viewpoint spec: {spec!r}")
        try:
            return fixed(float(parts[1]), float(parts[2]))
        except ValueError as e:
            raise ConfigError(f"bad fixed viewpoint spec: {spec!r}") from e
    try:
        return ViewpointDistribution(spec)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def load_config(path):
    cfg = ExperimentConfig()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            kind = _FIELD_TYPES[key]
            try:
                if kind in ("int", int):
                    setattr(cfg, key, int(value))
                elif kind in ("float", float):
                    setattr(cfg, key, float(value))
                else:
                    setattr(cfg, key, value)
            except ValueError as e:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}") from e
    return cfg.validate()


def dump_config(cfg, path):
    lines = [f"{f.name} = {getattr(cfg, f.name)}" for f in fields(ExperimentConfig)]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

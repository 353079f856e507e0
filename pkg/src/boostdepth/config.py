"""Experiment configuration: ``section.key = value`` files, presets and the echo format."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .curriculum import ScheduleParams
from .exceptions import ConfigError
from .metrics import PROSE
from .optimizer import RunConfig
from .photometric import LossConfig
from .pose import DriftModel
from .synth import SceneSpec

POSE_KINDS = ("oracle", "noisy_oracle", "optimized")


@dataclass(frozen=True)
class PoseConfig:
    kind: str = "oracle"
    scale_c: float = 0.5
    power: float = 2.0
    rotation_std_deg: float = 0.05
    base: str = "oracle"  # what an optimized estimator starts from

    def __post_init__(self):
        if self.kind not in POSE_KINDS:
            raise ConfigError(f"pose.kind must be one of {POSE_KINDS}, got {self.kind!r}")
        if self.base not in POSE_KINDS[:2]:
            raise ConfigError("pose.base must be oracle or noisy_oracle")

    def drift(self) -> DriftModel:
        return DriftModel(self.scale_c, self.power, self.rotation_std_deg)


@dataclass(frozen=True)
class MetricOptions:
    median_scale: bool = False
    edge_low: float = 0.05
    edge_high: float = 0.15
    edge_cap: float = 10.0
    edge_orientation: str = PROSE
    delta: float = 0.1
    pointcloud: bool = True


@dataclass(frozen=True)
class PosesimOptions:
    max_separation: int = 7


@dataclass(frozen=True)
class OutputOptions:
    snapshots: bool = True
    dump_errors: bool = False


SECTIONS = {
    "scene": SceneSpec,
    "run": RunConfig,
    "loss": LossConfig,
    "pose": PoseConfig,
    "schedule": ScheduleParams,
    "metrics": MetricOptions,
    "posesim": PosesimOptions,
    "output": OutputOptions,
}
# the scene seed is driven by the experiment-wide seed
RESERVED = {("scene", "seed")}


@dataclass(frozen=True)
class ExperimentConfig:
    scene: SceneSpec = field(default_factory=SceneSpec)
    run: RunConfig = field(default_factory=RunConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    pose: PoseConfig = field(default_factory=PoseConfig)
    schedule: ScheduleParams = field(default_factory=ScheduleParams)
    metrics: MetricOptions = field(default_factory=MetricOptions)
    posesim: PosesimOptions = field(default_factory=PosesimOptions)
    output: OutputOptions = field(default_factory=OutputOptions)
    seed: int = 0

    def scene_spec(self) -> SceneSpec:
        return replace(self.scene, seed=self.seed)


_FLAGS_OFF = dict(curriculum=False, tri_min=False, incremental_pose=False, partial_incremental=False, error_reconstructions=False)

PRESETS = {
    # single-pair baseline: fixed sources t-1, t+1 and stereo, four scales throughout
    "md2": {"run": dict(_FLAGS_OFF, warmup_epochs=20, boost_epochs=0, skip=1, use_stereo=True)},
    "warmup": {"run": dict(curriculum=True, tri_min=True, warmup_epochs=10, boost_epochs=0)},
    "full": {
        "run": dict(
            curriculum=True, tri_min=True, incremental_pose=True, partial_incremental=True,
            error_reconstructions=True, warmup_epochs=10, boost_epochs=10,
        )
    },
    # boosting only, started from saved depth (see ``optimize --resume``)
    "pre": {"run": dict(curriculum=True, tri_min=True, incremental_pose=True, partial_incremental=True,
                        error_reconstructions=True, warmup_epochs=0, boost_epochs=10, boost_start_epoch=10)},
}


def _parse_value(raw: str, default, key: str):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            parts = raw.replace(",", " ").split()
            kind = type(default[0]) if default else int
            if kind is bool:
                kind = float
            return tuple(kind(p) for p in parts)
        if isinstance(default, str):
            return raw
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(default).__name__}") from exc
    raise ConfigError(f"{key}: unsupported option type")


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_format_value(x) for x in v)
    return str(v)


def _rebuild(section_cls, current, updates: dict):
    try:
        return replace(current, **updates)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value in [{section_cls.__name__}]: {exc}") from exc


def apply_overrides(cfg: ExperimentConfig, items: dict) -> ExperimentConfig:
    """Apply ``{"section.key": raw_string}`` overrides; unknown keys raise :class:`ConfigError`."""
    per_section: dict = {}
    seed = cfg.seed
    for key, raw in items.items():
        if key == "seed":
            seed = _parse_value(raw, 0, key)
            continue
        section, _, name = key.partition(".")
        if section not in SECTIONS or not name:
            raise ConfigError(f"unknown configuration key {key!r}")
        if (section, name) in RESERVED:
            raise ConfigError(f"{key} is set through the top-level 'seed' key")
        current = getattr(cfg, section)
        known = {f.name: f for f in fields(current)}
        if name not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
        per_section.setdefault(section, {})[name] = _parse_value(raw, getattr(current, name), key)
    out = {s: _rebuild(SECTIONS[s], getattr(cfg, s), upd) for s, upd in per_section.items()}
    return replace(cfg, seed=seed, **out)


def apply_preset(cfg: ExperimentConfig, name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    out = {}
    for section, updates in PRESETS[name].items():
        out[section] = _rebuild(SECTIONS[section], getattr(cfg, section), updates)
    return replace(cfg, **out)


def parse_text(text: str, origin: str = "<config>") -> dict:
    items = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{n}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in items:
            raise ConfigError(f"{origin}:{n}: duplicate key {key!r}")
        items[key] = value.strip()
    return items


def load_config(path=None, preset: str | None = None, seed: int | None = None) -> ExperimentConfig:
    """Defaults, then the preset, then the file, then an explicit seed."""
    cfg = ExperimentConfig()
    if preset:
        cfg = apply_preset(cfg, preset)
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        cfg = apply_overrides(cfg, parse_text(text, str(p)))
    if seed is not None:
        cfg = replace(cfg, seed=int(seed))
    return cfg


def to_items(cfg: ExperimentConfig) -> dict:
    items = {"seed": str(cfg.seed)}
    for section in SECTIONS:
        obj = getattr(cfg, section)
        for f in fields(obj):
            if (section, f.name) in RESERVED:
                continue
            items[f"{section}.{f.name}"] = _format_value(getattr(obj, f.name))
    return items


def dump_config(cfg: ExperimentConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in to_items(cfg).items())


def write_config(cfg: ExperimentConfig, out_dir) -> Path:
    path = Path(out_dir) / "config.txt"
    path.write_text(dump_config(cfg))
    return path


__all__ = [
    "ExperimentConfig",
    "PoseConfig",
    "MetricOptions",
    "PosesimOptions",
    "OutputOptions",
    "PRESETS",
    "load_config",
    "apply_overrides",
    "apply_preset",
    "parse_text",
    "dump_config",
    "write_config",
]


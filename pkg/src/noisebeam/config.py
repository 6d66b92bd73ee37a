"""Run configuration: flat key = value files with sections.

Every knob has a default, so an empty config is a valid run. Files use
the INI shape below; unknown sections or keys are rejected rather than
ignored, and command-line flags override file values.

    [world]
    height = 16
    ...
    [schedule]
    total_steps = 400
    ...
    [search]
    paradigm = fifo
    ...
    [run]
    out_dir = out

``fingerprint`` hashes the canonical serialization, so two configs agree
exactly when their fingerprints do.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import io
from dataclasses import dataclass
from pathlib import Path

from .metrics import METRIC_NAMES
from .search import SearchConfig


@dataclass
class RunConfig:
    # [world]
    height: int = 16
    width: int = 16
    window: int = 4
    partitions: int = 4
    corpus_size: int = 16
    world_seed: int = 0
    subject_shape: str = "square"
    subject_size: int = 5
    subject_intensity: float = 1.0
    background: float = -1.0
    start_row: float = 5.0
    start_col: float = 2.0
    velocity_row: float = 0.0
    velocity_col: float = 1.0
    branch_size: int = 3
    pixel_noise: float = 0.0
    # [schedule]
    total_steps: int = 400
    ddim_steps: int = 16
    beta_min: float = 1e-4
    beta_max: float = 2e-2
    # [search]
    paradigm: str = "fifo"
    beam_k: int = 2
    cands_n: int = 5
    steps: int = 48
    reward: str = "full"
    mix: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    fft_r: float = 0.25
    fft_mode: str = "2d"
    delta: float = 0.3
    anchor_lag: int = 0
    overlap: int = 1
    seed: int = 0
    workers: int = 1
    # [run]
    algo: str = "beam"
    bon_n: int = 4
    out_dir: str = "out"
    export_frames: bool = False
    metrics: tuple[str, ...] = METRIC_NAMES

    def validate(self):
        if self.corpus_size < 1:
            raise ValueError("corpus_size must be positive")
        if self.branch_size < 0:
            raise ValueError("branch_size must be >= 0")
        if self.algo not in ("beam", "greedy", "bon"):
            raise ValueError("algo must be beam, greedy or bon")
        if self.bon_n < 1:
            raise ValueError("bon_n must be positive")
        unknown = set(self.metrics) - set(METRIC_NAMES)
        if unknown:
            raise ValueError(f"unknown metrics: {sorted(unknown)}")
        self.to_search_config().validate()

    def to_search_config(self) -> SearchConfig:
        return SearchConfig(
            paradigm=self.paradigm,
            beam_k=self.beam_k,
            cands_n=self.cands_n,
            steps=self.steps,
            reward=self.reward,
            mix=tuple(self.mix),
            fft_r=self.fft_r,
            fft_mode=self.fft_mode,
            delta=self.delta,
            anchor_lag=self.anchor_lag,
            overlap=self.overlap,
            seed=self.seed,
            workers=self.workers,
            height=self.height,
            width=self.width,
            window=self.window,
            partitions=self.partitions,
        )


_SECTIONS = {
    "world": (
        "height", "width", "window", "partitions", "corpus_size", "world_seed",
        "subject_shape", "subject_size", "subject_intensity", "background",
        "start_row", "start_col", "velocity_row", "velocity_col", "branch_size",
        "pixel_noise",
    ),
    "schedule": ("total_steps", "ddim_steps", "beta_min", "beta_max"),
    "search": (
        "paradigm", "beam_k", "cands_n", "steps", "reward", "mix", "fft_r",
        "fft_mode", "delta", "anchor_lag", "overlap", "seed", "workers",
    ),
    "run": ("algo", "bon_n", "out_dir", "export_frames", "metrics"),
}

_FIELD_SECTION = {key: section for section, keys in _SECTIONS.items() for key in keys}


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def _parse_value(field_obj: dataclasses.Field, raw: str):
    raw = raw.strip()
    default = field_obj.default
    if isinstance(default, bool):
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"{field_obj.name}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        if field_obj.name == "mix":
            if len(parts) != 4:
                raise ValueError("mix needs exactly four comma-separated weights")
            return tuple(float(p) for p in parts)
        return tuple(parts)
    return raw


def dumps(cfg: RunConfig) -> str:
    """Canonical serialization: fixed section and key order."""
    out = io.StringIO()
    for section, keys in _SECTIONS.items():
        out.write(f"[{section}]\n")
        for key in keys:
            out.write(f"{key} = {_format_value(getattr(cfg, key))}\n")
        out.write("\n")
    return out.getvalue()


def fingerprint(cfg: RunConfig) -> str:
    return hashlib.sha256(dumps(cfg).encode()).hexdigest()[:16]


def loads(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse a config file's text over ``base`` (defaults when omitted)."""
    parser = configparser.ConfigParser()
    parser.read_string(text)
    cfg = dataclasses.replace(base) if base is not None else RunConfig()
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ValueError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SECTIONS[section]:
                raise ValueError(f"unknown key {key!r} in section [{section}]")
            setattr(cfg, key, _parse_value(fields[key], raw))
    cfg.validate()
    return cfg


def load_file(path, base: RunConfig | None = None) -> RunConfig:
    return loads(Path(path).read_text(), base=base)


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """Apply flag-style overrides (already typed); unknown names rejected."""
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    updated = dataclasses.replace(cfg)
    for key, value in overrides.items():
        if key not in fields:
            raise ValueError(f"unknown config field {key!r}")
        if value is not None:
            setattr(updated, key, value)
    updated.validate()
    return updated

"""Flat key-value experiment configuration."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml

from ..baselines import ApsConfig
from ..env import RINGS, FlowSpec, LinkConfig, ScenarioConfig
from ..marl import Hyperparams

ALGORITHMS = ("oqmix", "qmix", "aps")
RING_NAMES = {"near": RINGS[0], "mid": RINGS[1], "far": RINGS[2]}


class ConfigError(ValueError):
    pass


def parse_ring(value) -> tuple[float, float]:
    """Accepts ``near|mid|far``, ``"300-400"`` or a two-element sequence."""
    inner, outer = _read_ring(value)
    if not 0 < inner < outer:
        raise ConfigError(f"ring needs 0 < inner < outer, got {value!r}")
    return inner, outer


def _read_ring(value) -> tuple[float, float]:
    if isinstance(value, str):
        key = value.strip().lower()
        if key in RING_NAMES:
            return RING_NAMES[key]
        parts = key.replace(",", "-").split("-")
        if len(parts) == 2:
            try:
                return (float(parts[0]), float(parts[1]))
            except ValueError:
                pass
        raise ConfigError(f"cannot read ring {value!r}; use near, mid, far or 'inner-outer'")
    try:
        inner, outer = value
        return (float(inner), float(outer))
    except (TypeError, ValueError):
        raise ConfigError(f"cannot read ring {value!r}") from None


def ring_label(ring: tuple[float, float]) -> str:
    return f"{ring[0]:g}-{ring[1]:g}"


def parse_seeds(value) -> tuple[int, ...]:
    """``"0,1,2"``, ``"0-9"``, an int, or a list of ints."""
    if isinstance(value, int):
        return (value,)
    if isinstance(value, str):
        out: list[int] = []
        for chunk in value.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "-" in chunk[1:]:
                lo, hi = chunk.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(chunk))
        value = out
    seeds = tuple(int(s) for s in value)
    if not seeds:
        raise ConfigError("need at least one seed")
    if len(set(seeds)) != len(seeds):
        raise ConfigError(f"duplicate seeds in {seeds}")
    return seeds


@dataclass(frozen=True)
class FlowBounds:
    ar_min_mbps: float = 0.5
    ar_max_mbps: float = 10.0
    vr_min_mbps: float = 10.0
    vr_max_mbps: float = 30.0
    cg_min_mbps: float = 10.0
    cg_max_mbps: float = 30.0
    fps: float = 60.0

    def flows(self) -> tuple[FlowSpec, ...]:
        return (
            FlowSpec("AR", 3, self.ar_min_mbps, self.ar_max_mbps, self.fps),
            FlowSpec("VR", 1, self.vr_min_mbps, self.vr_max_mbps, self.fps),
            FlowSpec("CG", 1, self.cg_min_mbps, self.cg_max_mbps, self.fps),
        )


@dataclass(frozen=True)
class ScenarioKnobs:
    window_s: float = 0.5
    windows_per_episode: int = 20
    rlc_capacity_bytes: int = 60_000
    delay_budget_ms: float = 20.0
    max_sdu_bytes: int = 30_000
    ingress_rate_bps: float = 1e9
    frame_jitter_frac: float = 0.105
    initial_rate_frac: float = 1.0


@dataclass
class ExperimentConfig:
    algo: str = "oqmix"
    ring: tuple[float, float] = RINGS[0]
    seeds: tuple[int, ...] = (0,)
    episodes: int = 500
    steps: int = 300_000
    eval_episodes: int = 50
    out: str = "runs"
    hp: Hyperparams = field(default_factory=Hyperparams)
    link: LinkConfig = field(default_factory=LinkConfig)
    scenario: ScenarioKnobs = field(default_factory=ScenarioKnobs)
    flows: FlowBounds = field(default_factory=FlowBounds)
    aps: ApsConfig = field(default_factory=ApsConfig)

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ConfigError(f"algo must be one of {ALGORITHMS}, got {self.algo!r}")
        self.ring = parse_ring(self.ring)
        self.seeds = parse_seeds(self.seeds)
        if self.episodes < 1:
            raise ConfigError("episodes must be >= 1")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.eval_episodes < 0:
            raise ConfigError("eval_episodes must be >= 0")
        if self.hp.mode != self.algo and self.algo != "aps":
            self.hp = replace(self.hp, mode=self.algo)

    def scenario_config(self, seed: int) -> ScenarioConfig:
        knobs = dataclasses.asdict(self.scenario)
        return ScenarioConfig(ring=self.ring, seed=seed, link=self.link,
                              flows=self.flows.flows(), **knobs)

    def with_overrides(self, **kw) -> ExperimentConfig:
        flat = self.to_flat()
        flat.update({k: v for k, v in kw.items() if v is not None})
        return ExperimentConfig.from_flat(flat)

    # -- flat mapping -----------------------------------------------------------
    def to_flat(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "algo": self.algo, "ring": ring_label(self.ring), "seeds": list(self.seeds),
            "episodes": self.episodes, "steps": self.steps,
            "eval_episodes": self.eval_episodes, "out": self.out,
        }
        for key, (section, name) in _SECTION_KEYS.items():
            out[key] = getattr(getattr(self, section), name)
        return out

    @classmethod
    def from_flat(cls, data: dict[str, Any]) -> ExperimentConfig:
        unknown = sorted(set(data) - set(KNOWN_KEYS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        top = {k: data[k] for k in _TOP_KEYS if k in data}
        sections: dict[str, dict[str, Any]] = {s: {} for s in _SECTIONS}
        for key, (section, name) in _SECTION_KEYS.items():
            if key in data:
                sections[section][name] = _coerce(_DEFAULTS[key], data[key], key)
        try:
            built = {s: _SECTIONS[s](**kw) for s, kw in sections.items()}
            algo = top.get("algo", "oqmix")
            if algo in ("oqmix", "qmix"):
                built["hp"] = replace(built["hp"], mode=algo)
            return cls(**top, **built)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc


_TOP_KEYS = ("algo", "ring", "seeds", "episodes", "steps", "eval_episodes", "out")
_SECTIONS = {"hp": Hyperparams, "link": LinkConfig, "scenario": ScenarioKnobs,
             "flows": FlowBounds, "aps": ApsConfig}
_PREFIX = {"hp": "", "link": "", "scenario": "", "flows": "", "aps": "aps_"}
# bounds come from the action grid, and mode follows algo
_HIDDEN = {("aps", "a_min"), ("aps", "a_max"), ("hp", "mode"), ("hp", "max_env_steps")}
_SECTION_KEYS: dict[str, tuple[str, str]] = {
    _PREFIX[s] + f.name: (s, f.name)
    for s, cls_ in _SECTIONS.items() for f in fields(cls_) if (s, f.name) not in _HIDDEN
}
KNOWN_KEYS = _TOP_KEYS + tuple(_SECTION_KEYS)
_DEFAULTS = {k: getattr(_SECTIONS[s](), n) for k, (s, n) in _SECTION_KEYS.items()}


def _coerce(default, value, key):
    # YAML 1.1 reads "2.0e7" as a string, so numbers get a second chance here
    if isinstance(default, bool) or not isinstance(default, (int, float)):
        return value
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {value!r}") from None
    if isinstance(default, int) and isinstance(value, float) and value.is_integer():
        value = int(value)
    return value


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a flat key: value mapping")
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"{path}: nested sections are not supported ({', '.join(nested)})")
    return ExperimentConfig.from_flat(data)


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_flat(), sort_keys=False)

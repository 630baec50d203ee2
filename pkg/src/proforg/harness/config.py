"""Flat ``key = value`` experiment configuration.

Precedence, lowest to highest: built-in defaults, the config file, explicit
overrides (the CLI passes its flags here).  Unknown keys and unparsable values
raise :class:`ConfigError` naming the offending key.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..baselines import FQIConfig, SACConfig
from ..embedding import EmbeddingConfig
from ..env import EnvConfig
from ..learners import RegressorSpec
from ..planner import PlannerConfig

ALGORITHMS = ("proforg", "proforg_i", "proforg_c", "proforg_offline",
              "fqi", "fqi_notime", "sac", "sac_notime")


class ConfigError(ValueError):
    def __init__(self, key: str | None, message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_tuple(text: str) -> tuple:
    return tuple(int(p) for p in text.replace(" ", "").split(",") if p)


def _optional(conv):
    def parse(text: str):
        return None if text.strip().lower() in ("none", "") else conv(text)
    return parse


def parse_seeds(text: str) -> tuple:
    """``"0..4"`` (inclusive range), ``"0,3,7"``, or a mix such as ``"0..2,9"``."""
    seeds = []
    for part in str(text).replace(" ", "").split(","):
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    return tuple(seeds)


# key -> (parser, default)
SCHEMA = {
    "env.width": (int, 7),
    "env.patch_a": (int, 2),
    "env.patch_b": (int, 5),
    "env.period": (int, 10),
    "env.tau": (float, 2.0),
    "env.gamma": (float, 0.9),
    "embed.time_dim": (int, 50),
    "embed.frequency_base": (_optional(float), None),
    "embed.position_mode": (str, "onehot"),
    "learner.kind": (str, "forest"),
    "learner.n_trees": (int, 100),
    "learner.max_depth": (int, 0),
    "learner.min_leaf": (int, 1),
    "learner.bootstrap": (_bool, True),
    "learner.n_rounds": (int, 100),
    "learner.learning_rate": (float, 0.1),
    "learner.gbt_max_depth": (int, 3),
    "learner.hidden_layers": (_int_tuple, (128, 128)),
    "learner.step_size": (float, 1e-3),
    "learner.momentum": (float, 0.9),
    "learner.epochs": (int, 200),
    "learner.batch_size": (int, 32),
    "planner.horizon": (int, 6),
    "planner.warmup_steps": (int, 200),
    "planner.refit_interval": (int, 1),
    "planner.label_horizon": (_optional(int), None),
    "planner.start_position": (_optional(int), None),
    "fqi.iterations": (int, 20),
    "fqi.epsilon0": (float, 1.0),
    "fqi.warmup": (int, 200),
    "fqi.update_interval": (int, 50),
    "fqi.n_trees": (int, 1000),
    "fqi.max_depth": (int, 0),
    "fqi.min_leaf": (int, 1),
    "fqi.warm_start_q": (_bool, True),
    "fqi.random_ties": (_bool, True),
    "sac.hidden": (_int_tuple, (128, 128)),
    "sac.alpha": (float, 0.2),
    "sac.rho": (float, 0.995),
    "sac.batch_size": (int, 64),
    "sac.actor_lr": (float, 1e-3),
    "sac.critic_lr": (float, 1e-3),
    "sac.target_expectation": (_bool, False),
    "algorithm": (str, "proforg"),
    "seeds": (parse_seeds, (0, 1, 2, 3, 4)),
    "online_steps": (int, 100),
    "eval_every": (int, 1),
    "eval_window": (int, 20),
    "output": (str, "runs"),
    "workers": (int, 1),
}


def parse_text(text: str, source: str = "<config>") -> dict:
    """Raw ``{key: value-string}`` from config text; later duplicates win."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(None, f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def algorithm(self) -> str:
        return self.values["algorithm"]

    @property
    def seeds(self) -> tuple:
        return self.values["seeds"]

    @property
    def online_steps(self) -> int:
        return self.values["online_steps"]

    @property
    def eval_every(self) -> int:
        return self.values["eval_every"]

    @property
    def eval_window(self) -> int:
        return self.values["eval_window"]

    @property
    def output(self) -> str:
        return self.values["output"]

    @property
    def workers(self) -> int:
        return self.values["workers"]

    def replace(self, **overrides) -> "ExperimentConfig":
        """Copy with dotted keys given as ``env__tau=...`` or plain keys."""
        raw = {k.replace("__", "."): v for k, v in overrides.items()}
        return build({**self.values, **raw})

    # component configs -------------------------------------------------

    def env(self) -> EnvConfig:
        v = self.values
        return EnvConfig(width=v["env.width"], patch_a=v["env.patch_a"], patch_b=v["env.patch_b"],
                         period=v["env.period"], tau=v["env.tau"], gamma=v["env.gamma"])

    def embedding(self) -> EmbeddingConfig:
        v = self.values
        return EmbeddingConfig(width=v["env.width"], time_dim=v["embed.time_dim"],
                               frequency_base=v["embed.frequency_base"], period=v["env.period"],
                               position_mode=v["embed.position_mode"])

    def regressor(self, seed: int = 0) -> RegressorSpec:
        v = self.values
        return RegressorSpec(
            kind=v["learner.kind"], n_trees=v["learner.n_trees"], max_depth=v["learner.max_depth"],
            min_leaf=v["learner.min_leaf"], bootstrap=v["learner.bootstrap"],
            n_rounds=v["learner.n_rounds"], learning_rate=v["learner.learning_rate"],
            gbt_max_depth=v["learner.gbt_max_depth"], hidden_layers=v["learner.hidden_layers"],
            step_size=v["learner.step_size"], momentum=v["learner.momentum"],
            epochs=v["learner.epochs"], batch_size=v["learner.batch_size"], seed=seed)

    def planner(self, variant: str = "full", mode: str = "online") -> PlannerConfig:
        v = self.values
        return PlannerConfig(horizon=v["planner.horizon"], gamma=v["env.gamma"],
                             warmup_steps=v["planner.warmup_steps"], variant=variant, mode=mode,
                             refit_interval=v["planner.refit_interval"],
                             label_horizon=v["planner.label_horizon"],
                             start_position=v["planner.start_position"])

    def fqi(self, time_aware: bool = True) -> FQIConfig:
        v = self.values
        return FQIConfig(iterations=v["fqi.iterations"], gamma=v["env.gamma"],
                         epsilon0=v["fqi.epsilon0"], warmup=v["fqi.warmup"],
                         update_interval=v["fqi.update_interval"], time_aware=time_aware,
                         n_trees=v["fqi.n_trees"], max_depth=v["fqi.max_depth"],
                         min_leaf=v["fqi.min_leaf"], warm_start_q=v["fqi.warm_start_q"],
                         random_ties=v["fqi.random_ties"], start_position=v["planner.start_position"])

    def sac(self, time_aware: bool = True) -> SACConfig:
        v = self.values
        return SACConfig(hidden=v["sac.hidden"], alpha=v["sac.alpha"], rho=v["sac.rho"],
                         batch_size=v["sac.batch_size"], actor_lr=v["sac.actor_lr"],
                         critic_lr=v["sac.critic_lr"], gamma=v["env.gamma"], time_aware=time_aware,
                         target_expectation=v["sac.target_expectation"],
                         start_position=v["planner.start_position"])

    def to_text(self) -> str:
        """Canonical config text; ``load_text(cfg.to_text())`` round-trips."""
        lines = []
        for key in SCHEMA:
            value = self.values[key]
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, tuple):
                text = ",".join(str(x) for x in value)
            elif value is None:
                text = "none"
            else:
                text = repr(value) if isinstance(value, float) else str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"


def build(raw: dict) -> ExperimentConfig:
    """Merge ``raw`` over the defaults, converting strings and validating every component."""
    values = {k: d for k, (_, d) in SCHEMA.items()}
    for key, value in raw.items():
        if key not in SCHEMA:
            raise ConfigError(key, "unknown configuration key")
        conv = SCHEMA[key][0]
        if isinstance(value, str):
            try:
                value = conv(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(key, f"cannot parse {value!r} ({exc})") from None
        values[key] = value
    cfg = ExperimentConfig(values)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    v = cfg.values
    if v["algorithm"] not in ALGORITHMS:
        raise ConfigError("algorithm", f"unknown algorithm {v['algorithm']!r}; expected one of {ALGORITHMS}")
    if not v["seeds"]:
        raise ConfigError("seeds", "at least one seed is required")
    if len(set(v["seeds"])) != len(v["seeds"]):
        raise ConfigError("seeds", "duplicate seeds")
    for key in ("eval_every", "eval_window", "workers"):
        if v[key] < 1:
            raise ConfigError(key, f"must be >= 1, got {v[key]}")
    if v["online_steps"] < 0:
        raise ConfigError("online_steps", "must be >= 0")
    checks = [("env.", cfg.env), ("embed.", cfg.embedding), ("learner.", cfg.regressor),
              ("planner.", cfg.planner), ("fqi.", cfg.fqi), ("sac.", cfg.sac)]
    for prefix, make in checks:
        try:
            make()
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError(prefix.rstrip("."), str(exc)) from None


def load_text(text: str, overrides: dict | None = None, source: str = "<config>") -> ExperimentConfig:
    raw = parse_text(text, source)
    raw.update(overrides or {})
    return build(raw)


def load(path, overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(None, f"cannot read config {path}: {exc}") from None
    return load_text(text, overrides, str(path))


def default() -> ExperimentConfig:
    return build({})

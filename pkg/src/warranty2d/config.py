"""Run configuration: one YAML file drives the whole pipeline.

Quantities that the pipeline can derive (consumer expected lifetimes from
predictive medians, benefit rates from calibration at the reference
thresholds) may instead be given explicitly, but never both ways at once:
an explicit a2 excludes an explicit t_w, and an explicit prior excludes
elicitation. Flags given on the command line override file values.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .mcmc import McmcConfig

__all__ = ["DatasetSpec", "CensorSpec", "PriorSpec", "CostSpec", "OptimSpec",
           "RunConfig", "load_run_config", "resolve_config"]

_BUILTINS = ("locomotive", "starter")


@dataclass(frozen=True)
class DatasetSpec:
    path: str = None
    builtin: str = None
    age_col: str = "age"
    usage_col: str = "usage"
    scale_factor: float = 1.0

    def __post_init__(self):
        if (self.path is None) == (self.builtin is None):
            raise ConfigError("dataset needs exactly one of path or builtin")
        if self.builtin is not None and self.builtin not in _BUILTINS:
            raise ConfigError(
                f"unknown builtin dataset {self.builtin!r}; "
                f"choose from {_BUILTINS}")
        if self.scale_factor <= 0:
            raise ConfigError("scale_factor must be positive")


@dataclass(frozen=True)
class CensorSpec:
    t0: float = math.inf
    u0: float = math.inf
    pad_to_n: int = None

    def __post_init__(self):
        if self.t0 <= 0 or self.u0 <= 0:
            raise ConfigError("censoring limits must be positive")


@dataclass(frozen=True)
class PriorSpec:
    source: str = "elicit"
    a: tuple = None
    b: tuple = None

    def __post_init__(self):
        if self.source not in ("elicit", "explicit"):
            raise ConfigError(f"prior source must be elicit or explicit, "
                              f"got {self.source!r}")
        given = self.a is not None or self.b is not None
        if self.source == "explicit" and (self.a is None or self.b is None):
            raise ConfigError("explicit priors need both a and b (5 values)")
        if self.source == "elicit" and given:
            raise ConfigError("elicited priors exclude explicit a/b values")


@dataclass(frozen=True)
class CostSpec:
    s: float = 700.0
    c: float = 500.0
    m: float = 1.0
    q_star: float = 0.75
    q1t: float = 0.10
    q2t: float = 0.05
    q1u: float = 0.10
    q2u: float = 0.05
    frw_quantile: float = 0.1
    lt: float = None
    lu: float = None
    a2: float = None
    a3: float = None
    t_w: float = None
    u_w: float = None

    def __post_init__(self):
        if not 0.0 < self.frw_quantile < 0.5:
            raise ConfigError("frw_quantile must be in (0, 0.5)")
        if self.a2 is not None and self.t_w is not None:
            raise ConfigError("a2 is derived from t_w: give one, not both")
        if self.a3 is not None and self.u_w is not None:
            raise ConfigError("a3 is derived from u_w: give one, not both")


@dataclass(frozen=True)
class OptimSpec:
    n_restarts: int = 16
    nodes: int = 32
    thin: int = 256
    seed: int = 0
    init: tuple = None

    def __post_init__(self):
        if self.init is not None and len(self.init) != 4:
            raise ConfigError("optimizer init needs 4 thresholds")


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetSpec
    censoring: CensorSpec = field(default_factory=CensorSpec)
    censor_mode: str = "window"
    prior: PriorSpec = field(default_factory=PriorSpec)
    mcmc: McmcConfig = field(default_factory=McmcConfig)
    cost: CostSpec = field(default_factory=CostSpec)
    optimizer: OptimSpec = field(default_factory=OptimSpec)
    out: str = "out"
    chain_path: str = None

    def __post_init__(self):
        if self.censor_mode not in ("window", "corner"):
            raise ConfigError("censor_mode must be window or corner")


def _build(cls, raw, where):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} section must be a mapping")
    allowed = set(cls.__dataclass_fields__)
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    clean = {}
    for k, v in raw.items():
        if isinstance(v, list):
            v = tuple(v)
        clean[k] = v
    try:
        return cls(**clean)
    except TypeError as exc:
        raise ConfigError(f"bad {where} section: {exc}") from None


def resolve_config(raw):
    """RunConfig from a plain mapping (already-parsed YAML)."""
    if not isinstance(raw, dict):
        raise ConfigError("run config must be a mapping")
    known = {"dataset", "censoring", "censor_mode", "prior", "mcmc", "cost",
             "optimizer", "out", "chain_path"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
    if "dataset" not in raw:
        raise ConfigError("config needs a dataset section")
    cens = dict(raw.get("censoring") or {})
    for key in ("t0", "u0"):
        if cens.get(key) is None:
            cens[key] = math.inf
    return RunConfig(
        dataset=_build(DatasetSpec, raw["dataset"], "dataset"),
        censoring=_build(CensorSpec, cens, "censoring"),
        censor_mode=raw.get("censor_mode", "window"),
        prior=_build(PriorSpec, raw.get("prior"), "prior"),
        mcmc=_build(McmcConfig, raw.get("mcmc"), "mcmc"),
        cost=_build(CostSpec, raw.get("cost"), "cost"),
        optimizer=_build(OptimSpec, raw.get("optimizer"), "optimizer"),
        out=raw.get("out", "out"),
        chain_path=raw.get("chain_path"),
    )


def load_run_config(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    cfg = resolve_config(raw or {})
    if cfg.dataset.path is not None:
        ds = Path(cfg.dataset.path)
        if not ds.is_absolute():
            ds = path.parent / ds
        if not ds.exists():
            raise FileNotFoundError(f"dataset file not found: {ds}")
        object.__setattr__(cfg.dataset, "path", str(ds))
    if cfg.chain_path is not None:
        cp = Path(cfg.chain_path)
        if not cp.is_absolute():
            cp = path.parent / cp
        if not cp.exists():
            raise FileNotFoundError(f"chain file not found: {cp}")
        object.__setattr__(cfg, "chain_path", str(cp))
    return cfg

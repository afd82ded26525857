"""Experiment configuration: YAML schema, validation and object building.

A single structured file configures every command; all model constants are
also dataclass defaults, so an empty file reproduces the default study.
Validation runs before any simulation and rejects unknown keys with a
dotted field path, so typos fail fast instead of silently running the
default.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import yaml

from .growth import ModelParams
from .controllers import PidGains
from .mpc import Mpc1Config, Mpc2Config
from .qlearning import QConfig
from .scenarios import (
    ControllerBundle,
    ScenarioSetup,
    reference_from_csv,
    staged_series,
)

__all__ = ["ConfigError", "load_config", "validate_config", "Experiment",
           "build_experiment", "DEFAULT_REFERENCE_STAGES"]

# Reference drive for the controller-comparison study: a mid-season growth
# push that outruns what the suboptimal-temperature pond can deliver at
# full ration, bracketed by easily attainable phases.
DEFAULT_REFERENCE_STAGES = ((0.45, 40), (1.0, 75), (0.45, 35))

_NUM = "number"
_INT = "int"
_STR = "str"
_BOOL = "bool"


class ConfigError(ValueError):
    """Configuration file rejected before any simulation ran."""


_MODEL_SCHEMA = {f.name: _NUM for f in dataclasses.fields(ModelParams)}

_SCHEMA = {
    "seed": _INT,
    "output_dir": _STR,
    "model": _MODEL_SCHEMA,
    "scenario": {
        "period": _INT,
        "population": _INT,
        "case": _INT,
        "initial_weight": _NUM,
        "temperature": _NUM,
        "oxygen": _NUM,
        "uia_base": _NUM,
        "uia_amplitude": _NUM,
        "uia_cycle_days": _NUM,
        "spike_day": _NUM,
        "spike_peak": _NUM,
        "spike_width": _NUM,
        "plant_substeps": _INT,
    },
    "reference": {
        "feed": _NUM,
        "feed_stages": [{"value": _NUM, "days": _INT}],
        "csv": _STR,
    },
    "controllers": {
        "pid": {"kp": _NUM, "ki": _NUM, "kd": _NUM, "f_min": _NUM, "f_max": _NUM},
        "mpc1": {
            "horizon": _INT,
            "feed_weight": _NUM,
            "f_min": _NUM,
            "f_max": _NUM,
            "w_min": _NUM,
            "w_max": _NUM,
            "move_limit": _NUM,
            "bound_penalty": _NUM,
            "substeps": _INT,
            "max_sweeps": _INT,
            "tol": _NUM,
        },
        "mpc2": {
            "horizon": _INT,
            "feed_weight": _NUM,
            "temperature_weight": _NUM,
            "oxygen_weight": _NUM,
            "ammonia_weight": _NUM,
            "temperature_ref": _NUM,
            "oxygen_ref": _NUM,
            "ammonia_ref": _NUM,
            "feed_bounds": [_NUM],
            "temperature_bounds": [_NUM],
            "oxygen_bounds": [_NUM],
            "ammonia_bounds": [_NUM],
            "bound_penalty": _NUM,
            "substeps": _INT,
            "max_sweeps": _INT,
            "tol": _NUM,
        },
        "qlearning": {
            "alpha": _NUM,
            "gamma": _NUM,
            "epsilon": _NUM,
            "epsilon_decay": _NUM,
            "epsilon_floor": _NUM,
            "episodes": _INT,
            "feed_weight": _NUM,
            "grid": [_NUM],
            "actions": [_NUM],
        },
    },
    "compare": {
        "case3_extra_population": _INT,
    },
}


def _type_ok(value, spec: str) -> bool:
    if isinstance(value, bool):
        return spec == _BOOL
    if spec == _NUM:
        return isinstance(value, (int, float))
    if spec == _INT:
        return isinstance(value, int)
    if spec == _STR:
        return isinstance(value, str)
    if spec == _BOOL:
        return False
    raise AssertionError(f"bad schema atom {spec!r}")


def _validate(value, spec, path: str) -> None:
    where = path or "<root>"
    if isinstance(spec, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected a mapping")
        for key, sub in value.items():
            child = f"{path}.{key}" if path else str(key)
            if key not in spec:
                raise ConfigError(f"{child}: unknown key")
            _validate(sub, spec[key], child)
    elif isinstance(spec, list):
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list")
        for i, item in enumerate(value):
            _validate(item, spec[0], f"{path}[{i}]")
    else:
        if not _type_ok(value, spec):
            raise ConfigError(f"{where}: expected {spec}, got {type(value).__name__}")


def validate_config(config: dict) -> None:
    """Reject unknown keys and wrong types, reporting the offending path."""
    _validate(config if config is not None else {}, _SCHEMA, "")


def load_config(path: str | None) -> dict:
    """Load and validate a YAML config file; missing path means defaults."""
    if path is None:
        config: dict = {}
    else:
        with open(path) as fh:
            config = yaml.safe_load(fh) or {}
        if not isinstance(config, dict):
            raise ConfigError("config root must be a mapping")
    validate_config(config)
    return config


@dataclass
class Experiment:
    """Validated configuration resolved into model and controller objects."""

    seed: int = 0
    output_dir: str = "out"
    params: ModelParams = field(default_factory=ModelParams)
    period: int = 150
    population: int = 10
    case: int = 3
    initial_weight: float = 6.24
    plant_substeps: int = 24
    profile_overrides: dict = field(default_factory=dict)
    reference_feed: object = None       # scalar or per-day array
    reference_csv: str | None = None
    controllers: ControllerBundle = field(default_factory=ControllerBundle)
    case3_extra_population: int = 25

    def setup(self) -> ScenarioSetup:
        reference = None
        if self.reference_csv is not None:
            reference = reference_from_csv(self.reference_csv)
        feed = self.reference_feed
        if feed is None:
            feed = staged_series(DEFAULT_REFERENCE_STAGES, self.period)
        return ScenarioSetup(
            params=self.params,
            controllers=self.controllers,
            period=self.period,
            initial_weight=self.initial_weight,
            reference_feed=feed,
            reference=reference,
            profile_overrides=dict(self.profile_overrides),
            plant_substeps=self.plant_substeps,
        )


def _pop(d: dict, key: str, default):
    return d[key] if key in d else default


def build_experiment(config: dict) -> Experiment:
    """Turn a validated config mapping into an Experiment."""
    validate_config(config)
    model = config.get("model", {})
    try:
        params = ModelParams(**model)
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc

    scn = config.get("scenario", {})
    profile_keys = ("temperature", "oxygen", "uia_base", "uia_amplitude",
                    "uia_cycle_days", "spike_day", "spike_peak", "spike_width")
    overrides = {k: scn[k] for k in profile_keys if k in scn}

    ref = config.get("reference", {})
    if sum(k in ref for k in ("feed", "feed_stages", "csv")) > 1:
        raise ConfigError("reference: give only one of feed, feed_stages, csv")
    reference_feed = None
    if "feed" in ref:
        reference_feed = float(ref["feed"])
    elif "feed_stages" in ref:
        stages = [(s["value"], s["days"]) for s in ref["feed_stages"]]
        period = _pop(scn, "period", 150)
        reference_feed = staged_series(stages, period)

    ctl = config.get("controllers", {})

    def _build(cls, section: str, transform=None):
        kwargs = dict(ctl.get(section, {}))
        if transform:
            kwargs = transform(kwargs)
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"controllers.{section}: {exc}") from exc

    def _tuples(kwargs: dict) -> dict:
        for key in ("feed_bounds", "temperature_bounds", "oxygen_bounds",
                    "ammonia_bounds"):
            if key in kwargs:
                bounds = kwargs[key]
                if len(bounds) != 2:
                    raise ConfigError(
                        f"controllers.mpc2.{key}: expected [low, high]"
                    )
                kwargs[key] = (float(bounds[0]), float(bounds[1]))
        return kwargs

    def _qtuples(kwargs: dict) -> dict:
        for key in ("grid", "actions"):
            if key in kwargs:
                kwargs[key] = tuple(float(v) for v in kwargs[key])
        return kwargs

    bundle = ControllerBundle(
        pid=_build(PidGains, "pid"),
        mpc1=_build(Mpc1Config, "mpc1"),
        mpc2=_build(Mpc2Config, "mpc2", _tuples),
        qconfig=_build(QConfig, "qlearning", _qtuples),
    )

    cmp_cfg = config.get("compare", {})
    return Experiment(
        seed=config.get("seed", 0),
        output_dir=config.get("output_dir", "out"),
        params=params,
        period=_pop(scn, "period", 150),
        population=_pop(scn, "population", 10),
        case=_pop(scn, "case", 3),
        initial_weight=_pop(scn, "initial_weight", 6.24),
        plant_substeps=_pop(scn, "plant_substeps", 24),
        profile_overrides=overrides,
        reference_feed=reference_feed,
        reference_csv=ref.get("csv"),
        controllers=bundle,
        case3_extra_population=_pop(cmp_cfg, "case3_extra_population", 25),
    )

"""Key/value configuration documents.

A configuration is an INI document with one flat section per concern::

    [run]
    kind = simulate
    name = cs2_indirect_pos

    [model]
    order = 2
    agents = 10
    dim = 2

    [kernel]
    type = cucker_smale
    K = 1
    beta = 1

    [control]
    mode = vel_via_pos
    lambda = 1

    [sim]
    dt = 0.001
    T = 20
    record_every = 10
    seed = 0

    [ic]
    boxes = -5:5, -2:2, -1:1

Internally a configuration is a flat ``{"section.key": "text"}`` mapping so
that ``--set section.key=value`` overrides apply uniformly.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .core import ConfigurationError, CuckerSmale, ModelConfig, SmoothedHK
from .integrate import ControlSpec, InitialCondition, SimConfig, validate

KINDS = ("simulate", "rank")

# (type, default); None means "no default, optional"
SCHEMA = {
    "run.kind": (str, "simulate"),
    "run.name": (str, "custom"),
    "run.expected": (str, ""),
    "model.order": (int, 1),
    "model.agents": (int, 10),
    "model.dim": (int, 2),
    "kernel.type": (str, "smoothed_hk"),
    "kernel.alpha": (float, 1.6),
    "kernel.K": (float, 1.0),
    "kernel.beta": (float, 1.0),
    "kernel.skew_strength": (float, None),
    "control.mode": (str, "none"),
    "control.lambda": (float, 1.0),
    "control.stage_solve": (bool, True),
    "sim.dt": (float, 1e-3),
    "sim.T": (float, 10.0),
    "sim.record_every": (int, 10),
    "sim.seed": (int, 0),
    "sim.store_states": (bool, True),
    "ic.boxes": (str, "-1:1"),
    "ic.dim_normalized": (bool, False),
    "report.threshold": (float, 1e-6),
    "report.fit_floor": (float, 1e-10),
    "rank.dims": (str, "3,4,5,10,20,30"),
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_value(key, text):
    if key not in SCHEMA:
        raise ConfigurationError(f"unknown configuration key {key!r}")
    typ = SCHEMA[key][0]
    text = str(text).strip()
    try:
        if typ is bool:
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        if typ is int:
            return int(text)
        if typ is float:
            value = float(text)
            if not math.isfinite(value):
                raise ValueError(text)
            return value
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {text!r} as {typ.__name__}") from None
    return text


def parse_config_text(text):
    """Parse an INI document into a flat settings mapping of strings."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed configuration: {exc}") from None
    settings = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            full = f"{section}.{key}"
            parse_value(full, value)
            settings[full] = value
    return settings


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None


def dump_config(settings):
    """Render a flat settings mapping as an INI document."""
    sections = {}
    for key, value in settings.items():
        section, name = key.split(".", 1)
        sections.setdefault(section, {})[name] = value
    lines = []
    for section, items in sections.items():
        lines.append(f"[{section}]")
        lines.extend(f"{name} = {value}" for name, value in items.items())
        lines.append("")
    return "\n".join(lines)


def apply_overrides(settings, overrides):
    """Return a copy of ``settings`` with ``section.key=value`` strings applied."""
    out = dict(settings)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not of the form section.key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        parse_value(key, value)
        out[key] = value.strip()
    return out


def get(settings, key):
    if key in settings:
        return parse_value(key, settings[key])
    return SCHEMA[key][1]


def parse_boxes(text):
    boxes = []
    for part in text.split(","):
        part = part.strip()
        try:
            lo, hi = (float(v) for v in part.split(":"))
        except ValueError:
            raise ConfigurationError(f"ic.boxes: cannot parse {part!r}; use low:high") from None
        boxes.append((lo, hi))
    if not boxes:
        raise ConfigurationError("ic.boxes is empty")
    return tuple(boxes)


def parse_int_list(key, text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"{key}: expected a comma separated list of integers") from None


@dataclass(frozen=True)
class Scenario:
    name: str
    model: ModelConfig
    kernel: object
    sim: SimConfig
    kind: str = "simulate"
    expected: str = ""
    threshold: float = 1e-6
    fit_floor: float = 1e-10
    rank_dims: tuple = field(default=())


def build_kernel(settings):
    kind = get(settings, "kernel.type")
    skew = get(settings, "kernel.skew_strength")
    if kind == "smoothed_hk":
        return SmoothedHK(get(settings, "kernel.alpha"), 0.8 if skew is None else skew)
    if kind == "cucker_smale":
        return CuckerSmale(get(settings, "kernel.K"), get(settings, "kernel.beta"),
                           0.0 if skew is None else skew)
    raise ConfigurationError(f"kernel.type must be smoothed_hk or cucker_smale, got {kind!r}")


def build_scenario(settings):
    """Validate a settings mapping and turn it into a Scenario."""
    for key in settings:
        parse_value(key, settings[key])
    kind = get(settings, "run.kind")
    if kind not in KINDS:
        raise ConfigurationError(f"run.kind must be one of {KINDS}, got {kind!r}")
    model = ModelConfig(get(settings, "model.order"), get(settings, "model.agents"),
                        get(settings, "model.dim"))
    kernel = build_kernel(settings)
    control = ControlSpec(get(settings, "control.mode"), get(settings, "control.lambda"),
                          get(settings, "control.stage_solve"))
    sim = SimConfig(
        dt=get(settings, "sim.dt"),
        T=get(settings, "sim.T"),
        control=control,
        record_every=get(settings, "sim.record_every"),
        seed=get(settings, "sim.seed"),
        ic=InitialCondition(parse_boxes(get(settings, "ic.boxes")),
                            get(settings, "ic.dim_normalized")),
        store_states=get(settings, "sim.store_states"),
    )
    threshold = get(settings, "report.threshold")
    if threshold <= 0:
        raise ConfigurationError("report.threshold must be positive")
    rank_dims = ()
    if kind == "simulate":
        validate(model, kernel, sim)
    else:
        rank_dims = tuple(parse_int_list("rank.dims", get(settings, "rank.dims")))
        if not rank_dims or min(rank_dims) < 1:
            raise ConfigurationError("rank.dims must list positive dimensions")
        from .lsq import min_agents
        for d in rank_dims:
            if model.agents < min_agents(d):
                raise ConfigurationError(f"rank run with d={d} needs N >= {min_agents(d)}")
    return Scenario(
        name=get(settings, "run.name"), model=model, kernel=kernel, sim=sim, kind=kind,
        expected=get(settings, "run.expected"), threshold=threshold,
        fit_floor=get(settings, "report.fit_floor"), rank_dims=rank_dims,
    )

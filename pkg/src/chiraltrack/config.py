"""TOML run configuration with a strict schema.

Example::

    [reaction]
    completion_fraction = 0.95      # or give k directly
    completion_time_s = 1800

    [probe]
    mean_pairs_per_window = 250
    seed = 1234

    [drift]
    kind = "linear"
    v0 = 0.85
    v_end = 0.80                    # or slope, in 1/s

    [run]
    duration_s = 3600

Unknown sections or keys are rejected with the offending key path.
"""

import math
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, DomainError
from .estimator import GridSpec
from .kinetics import ReactionParams, rate_from_completion
from .simulator import ProbeConfig, VisibilityDrift

_SCHEMA = {
    "reaction": {
        "k": float,
        "completion_fraction": float,
        "completion_time_s": float,
        "s0": float,
        "path": float,
        "rot_sucrose": float,
        "rot_glucose": float,
        "rot_fructose": float,
        "molar_mass_sucrose": float,
        "molar_mass_monomer": float,
        "rotation_to_phase_factor": float,
    },
    "probe": {
        "mean_pairs_per_window": float,
        "window_s": float,
        "cycle_s": float,
        "settings": list,
        "seed": int,
    },
    "drift": {
        "kind": str,
        "v0": float,
        "slope": float,
        "v_end": float,
        "step_std": float,
        "floor": float,
        "ceil": float,
    },
    "grid": {"n_phi": int, "n_v": int},
    "run": {"duration_s": float, "phase_offset": float},
    "water": {"n_cycles": int, "visibility": float},
    "output": {
        "records": str,
        "truth": str,
        "water": str,
        "estimates": str,
        "kinetics": str,
        "bounds": str,
        "report": str,
    },
    "crb": {"v_min": float, "v_max": float, "n_phi": int, "n_events": float},
}

DEFAULT_OUTPUT = {
    "records": "records.csv",
    "truth": "truth.csv",
    "water": "water.csv",
    "estimates": "estimates.csv",
    "kinetics": "kinetics.csv",
    "bounds": "bounds.csv",
    "report": "report.json",
}


@dataclass(frozen=True)
class RunConfig:
    reaction: ReactionParams
    probe: ProbeConfig
    drift: VisibilityDrift
    grid: GridSpec
    duration: float
    phase_offset: float = 0.0
    water_cycles: int | None = None  # None: as many cycles as the sample run
    water_visibility: float | None = None
    output: dict = field(default_factory=lambda: dict(DEFAULT_OUTPUT))
    crb: dict = field(default_factory=dict)


def _check_types(data):
    for section, body in data.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in body.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            expected = _SCHEMA[section][key]
            if expected is float:
                ok = isinstance(value, (int, float)) and not isinstance(value, bool)
            elif expected is int:
                ok = isinstance(value, int) and not isinstance(value, bool)
            else:
                ok = isinstance(value, expected)
            if not ok:
                raise ConfigError(f"{section}.{key} must be {expected.__name__}, got {value!r}")


def _reaction(body):
    body = dict(body)
    has_k = "k" in body
    has_completion = "completion_fraction" in body or "completion_time_s" in body
    if has_k == has_completion:
        raise ConfigError("reaction needs either k or completion_fraction + completion_time_s")
    if has_completion:
        try:
            body["k"] = rate_from_completion(body.pop("completion_fraction"), body.pop("completion_time_s"))
        except KeyError as exc:
            raise ConfigError(f"missing key reaction.{exc.args[0]}") from None
    return ReactionParams(**{k: float(v) for k, v in body.items()})


def _drift(body, duration):
    body = dict(body)
    if "v_end" in body:
        if "slope" in body:
            raise ConfigError("drift.slope and drift.v_end are mutually exclusive")
        body["slope"] = (body.pop("v_end") - body.get("v0", VisibilityDrift.v0)) / duration
        body.setdefault("kind", "linear")
    return VisibilityDrift(**body)


def parse_config(data):
    """Build a :class:`RunConfig` from an already-parsed TOML mapping."""
    _check_types(data)
    try:
        run = data.get("run", {})
        duration = float(run.get("duration_s", 3600.0))
        if not (math.isfinite(duration) and duration > 0):
            raise ConfigError(f"run.duration_s must be positive, got {duration!r}")
        reaction = _reaction(data.get("reaction", {}))
        probe_body = dict(data.get("probe", {}))
        if "settings" in probe_body:
            probe_body["settings"] = tuple(float(s) for s in probe_body["settings"])
        probe = ProbeConfig(**probe_body)
        drift = _drift(data.get("drift", {}), duration)
        grid = GridSpec(**data.get("grid", {}))
        water = data.get("water", {})
        output = dict(DEFAULT_OUTPUT)
        output.update(data.get("output", {}))
        return RunConfig(
            reaction=reaction,
            probe=probe,
            drift=drift,
            grid=grid,
            duration=duration,
            phase_offset=float(run.get("phase_offset", 0.0)),
            water_cycles=water.get("n_cycles"),
            water_visibility=water.get("visibility"),
            output=output,
            crb=dict(data.get("crb", {})),
        )
    except (DomainError, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path):
    """Read and validate a TOML config file."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    try:
        return parse_config(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None

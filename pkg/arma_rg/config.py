"""Run configuration: voluptuous schemas per subcommand and the flag/file/default merge."""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    CLASSIFY_MAX_ITER,
    CLASSIFY_TOL,
    DEFAULT_K,
    DEFAULT_REPLICAS,
    DEFAULT_SEED,
    DEFAULT_SUBSAMPLE,
    FixedPointClass,
    Likelihood,
    OutputFormat,
)
from .exceptions import ConfigError

_LOGGER = logging.getLogger(__name__)

EXPERIMENTS = (
    "fixed-points",
    "inertial-flow",
    "rg-invariance",
    "euler-bias",
    "basin",
    "quartic",
    "memory-rule",
)
QUARTIC = "quartic"


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise vol.Invalid("must be finite")
    return value


REAL = vol.All(vol.Coerce(float), _finite)
POSITIVE = vol.All(REAL, vol.Range(min=0, min_included=False))
NON_NEGATIVE = vol.All(REAL, vol.Range(min=0))
COUNT = vol.All(vol.Coerce(int), vol.Range(min=1))
COEFFICIENTS = [REAL]

GLOBAL_FIELDS: dict[Any, Any] = {
    vol.Optional("seed", default=DEFAULT_SEED): vol.All(
        vol.Coerce(int), vol.Range(min=0, max=2**64 - 1)
    ),
    vol.Optional("output", default="-"): str,
    vol.Optional("format", default=None): vol.Any(None, vol.In([f.value for f in OutputFormat])),
    vol.Optional("replicas", default=DEFAULT_REPLICAS): COUNT,
    vol.Optional("workers", default=None): vol.Any(None, COUNT),
}

# Linear SDE; svv2 = None means 2 * temperature * eta
SDE_FIELDS: dict[Any, Any] = {
    vol.Optional("lam", default=0.0): REAL,
    vol.Optional("kappa", default=0.0): REAL,
    vol.Optional("eta", default=1.0): REAL,
    vol.Optional("sxx2", default=0.0): NON_NEGATIVE,
    vol.Optional("sxv2", default=0.0): REAL,
    vol.Optional("svv2", default=None): vol.Any(None, NON_NEGATIVE),
    vol.Optional("temperature", default=1.0): NON_NEGATIVE,
}

ARMA_FIELDS: dict[Any, Any] = {
    vol.Optional("phi", default=[]): COEFFICIENTS,
    vol.Optional("nu", default=[]): COEFFICIENTS,
    vol.Optional("mu", default=1.0): NON_NEGATIVE,
}

# Initial condition of an RG orbit
INITIAL_FIELDS: dict[Any, Any] = {
    vol.Optional("initial", default="euler"): vol.In(["euler", "fixed-point", "coefficients"]),
    vol.Optional("eta", default=1.0): REAL,
    vol.Optional("kappa", default=0.0): REAL,
    vol.Optional("sigma2", default=1.0): REAL,
    vol.Optional("kind", default="D"): vol.In([c.value for c in FixedPointClass]),
    vol.Optional("u", default=0.0): REAL,
    vol.Optional("s", default=0.0): REAL,
    vol.Optional("z", default=0.0): REAL,
    vol.Optional("b", default=0.0): REAL,
    vol.Optional("psi", default=[]): COEFFICIENTS,
    vol.Optional("theta", default=[]): COEFFICIENTS,
    vol.Optional("alpha", default=[]): COEFFICIENTS,
    vol.Optional("beta", default=[]): COEFFICIENTS,
    vol.Optional("K", default=DEFAULT_K): vol.All(vol.Coerce(int), vol.Range(min=0)),
}

QUARTIC_FIELDS: dict[Any, Any] = {
    vol.Optional("lambda4", default=0.0): NON_NEGATIVE,
    vol.Optional("tau_sim", default=5e-4): POSITIVE,
    vol.Optional("subsample", default=DEFAULT_SUBSAMPLE): COUNT,
}

SIMULATE_SCHEMA = vol.Schema(
    {
        **GLOBAL_FIELDS,
        **SDE_FIELDS,
        **ARMA_FIELDS,
        vol.Optional("scheme", default="exact"): vol.In(["euler", "exact", "arma"]),
        vol.Optional("n", default=1000): COUNT,
        vol.Optional("tau", default=0.01): POSITIVE,
        vol.Optional("burn_in", default=None): vol.Any(
            None, vol.All(vol.Coerce(int), vol.Range(min=0))
        ),
        vol.Optional("stationary", default=False): bool,
        vol.Optional("x0", default=0.0): REAL,
        vol.Optional("v0", default=0.0): REAL,
    }
)

DECIMATE_SCHEMA = vol.Schema(
    {
        **GLOBAL_FIELDS,
        **ARMA_FIELDS,
        vol.Optional("times", default=1): COUNT,
    }
)

FLOW_SCHEMA = vol.Schema(
    {
        **GLOBAL_FIELDS,
        **INITIAL_FIELDS,
        vol.Optional("iterations", default=20): COUNT,
    }
)

CLASSIFY_SCHEMA = vol.Schema(
    {
        **GLOBAL_FIELDS,
        **INITIAL_FIELDS,
        vol.Optional("tol", default=CLASSIFY_TOL): POSITIVE,
        vol.Optional("max_iterations", default=CLASSIFY_MAX_ITER): COUNT,
    }
)

EXACTIFY_SCHEMA = vol.Schema(
    {
        **GLOBAL_FIELDS,
        **SDE_FIELDS,
        vol.Optional("tau", default=0.01): POSITIVE,
    }
)

INFER_SCHEMA = vol.Schema(
    {
        **GLOBAL_FIELDS,
        **SDE_FIELDS,
        **QUARTIC_FIELDS,
        vol.Optional("likelihood", default=Likelihood.EULER.value): vol.In(
            [*(s.value for s in Likelihood), QUARTIC]
        ),
        vol.Optional("input", default=None): vol.Any(None, str),
        vol.Optional("tau", default=0.01): POSITIVE,
        vol.Optional("taus", default=[]): [POSITIVE],
        vol.Optional("n", default=100_000): COUNT,
        vol.Optional("ns", default=[]): [COUNT],
        vol.Optional("with_kappa", default=False): bool,
    }
)

EXPERIMENT_SCHEMA = vol.Schema(
    {
        **GLOBAL_FIELDS,
        **SDE_FIELDS,
        **QUARTIC_FIELDS,
        vol.Required("name"): vol.In(EXPERIMENTS),
        vol.Optional("sigma2", default=1.0): REAL,
        vol.Optional("K", default=DEFAULT_K): vol.All(vol.Coerce(int), vol.Range(min=0)),
        vol.Optional("iterations", default=20): COUNT,
        vol.Optional("taus", default=[0.1, 0.05, 0.02, 0.01]): [POSITIVE],
        vol.Optional("n", default=100_000): COUNT,
        vol.Optional("resolution", default=21): vol.All(vol.Coerce(int), vol.Range(min=2)),
        vol.Optional("max_order", default=5): COUNT,
    }
)

SCHEMAS: dict[str, vol.Schema] = {
    "simulate": SIMULATE_SCHEMA,
    "decimate": DECIMATE_SCHEMA,
    "flow": FLOW_SCHEMA,
    "classify": CLASSIFY_SCHEMA,
    "exactify": EXACTIFY_SCHEMA,
    "infer": INFER_SCHEMA,
    "experiment": EXPERIMENT_SCHEMA,
}


def load_config_file(path: Path) -> dict[str, Any]:
    """Read a JSON run configuration; a manifest is accepted and its "config" block used.

    Raises:
        ConfigError: If the file is unreadable, not valid JSON or not an object.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: {err.msg}", line=err.lineno) from err
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    if "command" in data and isinstance(data.get("config"), dict):
        return dict(data["config"])
    return data


def resolve_config(
    command: str, file_values: Mapping[str, Any], flag_values: Mapping[str, Any]
) -> dict[str, Any]:
    """Validate flags over file values over schema defaults.

    Flags set to None count as not given.

    Raises:
        ConfigError: With the failing field path when validation fails.
    """
    try:
        schema = SCHEMAS[command]
    except KeyError as err:
        raise ConfigError(f"unknown command {command!r}", field="command") from err
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    try:
        resolved: dict[str, Any] = schema(merged)
    except vol.MultipleInvalid as err:
        first = err.errors[0]
        field = ".".join(str(part) for part in first.path) or None
        raise ConfigError(f"{field or command}: {first.msg}", field=field) from err
    _LOGGER.debug("Resolved %s config: %s", command, resolved)
    return resolved


def build_manifest(command: str, config: Mapping[str, Any], version: str) -> dict[str, Any]:
    """Everything needed to rerun a command: feed it back through --config."""
    return {"command": command, "config": dict(config), "seed": config["seed"], "version": version}

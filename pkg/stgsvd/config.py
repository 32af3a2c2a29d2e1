"""Validated configuration for sketches and experiment runs.

User input (CLI flags or a mapping) is coerced and range-checked by the
voluptuous schemas below, then frozen into dataclasses.
"""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass
from typing import Any, Mapping, Optional

import voluptuous as vol

from .const import (
    CONF_DELTA,
    CONF_DROP_TOL,
    CONF_EXPERIMENT,
    CONF_FORMAT,
    CONF_K_GRID,
    CONF_KAPPA,
    CONF_KAPPA_LIST,
    CONF_MATRICES,
    CONF_MATRIX_FILE,
    CONF_METHODS,
    CONF_N,
    CONF_OUT,
    CONF_OVERSAMPLING,
    CONF_PRECONDITIONER,
    CONF_Q_LIST,
    CONF_REL_TOL_LIST,
    CONF_SEEDS,
    CONF_TIMINGS,
    CONF_WEIGHT_FILES,
    CONF_WEIGHT_SEED,
    CONF_WORKERS,
    DEFAULT_COMPARISON_METHODS,
    DEFAULT_DELTA,
    DEFAULT_DROP_TOL,
    DEFAULT_FORMAT,
    DEFAULT_K_GRID,
    DEFAULT_KAPPA,
    DEFAULT_KAPPA_LIST,
    DEFAULT_N,
    DEFAULT_OVERSAMPLING,
    DEFAULT_PRECOND_KAPPA,
    DEFAULT_Q_LIST,
    DEFAULT_REL_TOL_LIST,
    DEFAULT_SEEDS,
    DEFAULT_WEIGHT_SEED,
    EXPERIMENT_ACCURACY_VS_K,
    EXPERIMENT_BOUNDS_AUDIT,
    EXPERIMENT_CONDITION_SWEEP,
    EXPERIMENT_INEXACTNESS,
    EXPERIMENT_METHOD_COMPARISON,
    EXPERIMENT_PRECONDITIONER,
    EXPERIMENT_SENSITIVITY,
    EXPERIMENT_SV_AND_ANGLES,
    MATRIX_DECAY,
    MATRIX_LOWRANK_DECAY,
    METHOD_GSVD,
    PRECOND_EXACT,
    SAMPLER_GAUSSIAN,
    SUPPORTED_EXPERIMENTS,
    SUPPORTED_FORMATS,
    SUPPORTED_MATRICES,
    SUPPORTED_METHODS,
    SUPPORTED_PRECONDITIONERS,
    SUPPORTED_SAMPLERS,
)
from .exceptions import ConfigError
from .rand_gsvd import SketchConfig
from .sampling import Preconditioner, SamplerSpec

_METHOD_LABEL = re.compile(r"^(?P<route>[a-z-]+?)(?:-q(?P<q>\d+))?$")


def parse_method_label(label: str) -> tuple[str, Optional[int]]:
    """Split "gsvd-q1" into ("gsvd", 1); plain method names carry no q.

    Raises:
        ConfigError: If the route is not a supported method
    """
    if label in SUPPORTED_METHODS:
        return label, None
    match = _METHOD_LABEL.match(label)
    if not match or match.group("route") not in SUPPORTED_METHODS:
        raise ConfigError(f"unsupported method: {label}", CONF_METHODS)
    q = match.group("q")
    return match.group("route"), None if q is None else int(q)


def _method_label(value: Any) -> str:
    try:
        parse_method_label(str(value))
    except ConfigError as err:
        raise vol.Invalid(str(err)) from err
    return str(value)


_POSITIVE_INT = vol.All(vol.Coerce(int), vol.Range(min=1))
_NON_NEGATIVE_INT = vol.All(vol.Coerce(int), vol.Range(min=0))
_KAPPA = vol.All(vol.Coerce(float), vol.Range(min=1.0))
_UNIT_OPEN = vol.All(
    vol.Coerce(float), vol.Range(min=0.0, max=1.0, min_included=False, max_included=False)
)
_REL_TOL = vol.All(vol.Coerce(float), vol.Range(min=0.0, max=1.0, max_included=False))

SKETCH_SCHEMA = vol.Schema(
    {
        vol.Required("k"): _POSITIVE_INT,
        vol.Optional("p", default=DEFAULT_OVERSAMPLING): _NON_NEGATIVE_INT,
        vol.Optional("q", default=0): _NON_NEGATIVE_INT,
        vol.Optional("sampler", default=SAMPLER_GAUSSIAN): vol.In(SUPPORTED_SAMPLERS),
        vol.Optional("seed", default=0): _NON_NEGATIVE_INT,
        vol.Optional("truncate", default=True): vol.Boolean(),
    }
)

EXPERIMENT_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_EXPERIMENT): vol.In(SUPPORTED_EXPERIMENTS),
        vol.Optional(CONF_MATRICES, default=None): vol.Any(
            None, [vol.In(SUPPORTED_MATRICES)]
        ),
        vol.Optional(CONF_MATRIX_FILE, default=None): vol.Any(None, str),
        vol.Optional(CONF_WEIGHT_FILES, default=None): vol.Any(
            None, vol.ExactSequence([str, str])
        ),
        vol.Optional(CONF_N, default=DEFAULT_N): vol.All(
            vol.Coerce(int), vol.Range(min=2)
        ),
        vol.Optional(CONF_KAPPA, default=None): vol.Any(None, _KAPPA),
        vol.Optional(CONF_KAPPA_LIST, default=DEFAULT_KAPPA_LIST): [_KAPPA],
        vol.Optional(CONF_K_GRID, default=None): vol.Any(None, [_POSITIVE_INT]),
        vol.Optional(CONF_OVERSAMPLING, default=DEFAULT_OVERSAMPLING): _NON_NEGATIVE_INT,
        vol.Optional(CONF_Q_LIST, default=None): vol.Any(None, [_NON_NEGATIVE_INT]),
        vol.Optional(CONF_SEEDS, default=DEFAULT_SEEDS): vol.All(
            [_NON_NEGATIVE_INT], vol.Length(min=1)
        ),
        vol.Optional(CONF_DELTA, default=DEFAULT_DELTA): _UNIT_OPEN,
        vol.Optional(CONF_METHODS, default=None): vol.Any(None, [_method_label]),
        vol.Optional(CONF_REL_TOL_LIST, default=DEFAULT_REL_TOL_LIST): [_REL_TOL],
        vol.Optional(CONF_PRECONDITIONER, default=PRECOND_EXACT): vol.In(
            SUPPORTED_PRECONDITIONERS
        ),
        vol.Optional(CONF_DROP_TOL, default=DEFAULT_DROP_TOL): vol.All(
            vol.Coerce(float), vol.Range(min=0.0)
        ),
        vol.Optional(CONF_WEIGHT_SEED, default=DEFAULT_WEIGHT_SEED): _NON_NEGATIVE_INT,
        vol.Optional(CONF_WORKERS, default=None): vol.Any(None, _POSITIVE_INT),
        vol.Optional(CONF_TIMINGS, default=False): vol.Boolean(),
        vol.Optional(CONF_FORMAT, default=DEFAULT_FORMAT): vol.In(SUPPORTED_FORMATS),
        vol.Optional(CONF_OUT, default=None): vol.Any(None, str),
    }
)

# Per-experiment defaults for the grids left unset by the caller
EXPERIMENT_DEFAULTS: dict[str, dict[str, Any]] = {
    EXPERIMENT_ACCURACY_VS_K: {
        CONF_MATRICES: SUPPORTED_MATRICES,
        CONF_K_GRID: DEFAULT_K_GRID,
        CONF_Q_LIST: DEFAULT_Q_LIST,
        CONF_METHODS: [METHOD_GSVD],
        CONF_KAPPA: DEFAULT_KAPPA,
    },
    EXPERIMENT_METHOD_COMPARISON: {
        CONF_MATRICES: SUPPORTED_MATRICES,
        CONF_K_GRID: DEFAULT_K_GRID,
        CONF_Q_LIST: [0],
        CONF_METHODS: DEFAULT_COMPARISON_METHODS,
        CONF_KAPPA: DEFAULT_KAPPA,
    },
    EXPERIMENT_SV_AND_ANGLES: {
        CONF_MATRICES: [MATRIX_LOWRANK_DECAY],
        CONF_K_GRID: [50],
        CONF_Q_LIST: [0],
        CONF_METHODS: DEFAULT_COMPARISON_METHODS,
        CONF_KAPPA: DEFAULT_KAPPA,
    },
    EXPERIMENT_CONDITION_SWEEP: {
        CONF_MATRICES: SUPPORTED_MATRICES,
        CONF_K_GRID: [50],
        CONF_Q_LIST: [0, 1],
        CONF_METHODS: [METHOD_GSVD],
        CONF_KAPPA: DEFAULT_KAPPA,
    },
    EXPERIMENT_PRECONDITIONER: {
        CONF_MATRICES: SUPPORTED_MATRICES,
        CONF_K_GRID: [30, 50],
        CONF_Q_LIST: [0],
        CONF_METHODS: [METHOD_GSVD],
        CONF_KAPPA: DEFAULT_PRECOND_KAPPA,
    },
    EXPERIMENT_INEXACTNESS: {
        CONF_MATRICES: [MATRIX_DECAY],
        CONF_K_GRID: [10],
        CONF_Q_LIST: [1],
        CONF_METHODS: [METHOD_GSVD],
        CONF_KAPPA: DEFAULT_KAPPA,
    },
    EXPERIMENT_BOUNDS_AUDIT: {
        CONF_MATRICES: SUPPORTED_MATRICES,
        CONF_K_GRID: [10, 30, 50],
        CONF_Q_LIST: DEFAULT_Q_LIST,
        CONF_METHODS: [METHOD_GSVD],
        CONF_KAPPA: DEFAULT_KAPPA,
    },
    EXPERIMENT_SENSITIVITY: {
        CONF_MATRICES: [MATRIX_LOWRANK_DECAY],
        CONF_K_GRID: [20],
        CONF_Q_LIST: [1],
        CONF_METHODS: [METHOD_GSVD],
        CONF_KAPPA: DEFAULT_KAPPA,
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment request."""

    experiment: str
    matrices: tuple[str, ...]
    matrix_file: Optional[str]
    weight_files: Optional[tuple[str, str]]
    n: int
    kappa: float
    kappa_list: tuple[float, ...]
    k_grid: tuple[int, ...]
    oversampling: int
    q_list: tuple[int, ...]
    seeds: tuple[int, ...]
    delta: float
    methods: tuple[str, ...]
    rel_tol_list: tuple[float, ...]
    preconditioner: str
    drop_tol: float
    weight_seed: int
    workers: Optional[int]
    timings: bool
    format: str
    out: Optional[str]

    def as_dict(self) -> dict[str, Any]:
        """Return a JSON-friendly dict."""
        return {
            key: list(value) if isinstance(value, tuple) else value
            for key, value in asdict(self).items()
        }


def _invalid_to_config_error(err: vol.Invalid) -> ConfigError:
    field_name = ".".join(str(part) for part in err.path) or None
    return ConfigError(err.msg, field_name)


def build_experiment_config(data: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a mapping and fill per-experiment defaults.

    Raises:
        ConfigError: Naming the first offending field
    """
    try:
        valid = EXPERIMENT_SCHEMA(dict(data))
    except vol.MultipleInvalid as err:
        raise _invalid_to_config_error(err.errors[0]) from err
    except vol.Invalid as err:
        raise _invalid_to_config_error(err) from err

    defaults = EXPERIMENT_DEFAULTS[valid[CONF_EXPERIMENT]]
    resolved = {
        key: defaults[key] if valid.get(key) is None else valid[key] for key in defaults
    }
    weight_files = valid[CONF_WEIGHT_FILES]
    return ExperimentConfig(
        experiment=valid[CONF_EXPERIMENT],
        matrices=tuple(resolved[CONF_MATRICES]),
        matrix_file=valid[CONF_MATRIX_FILE],
        weight_files=tuple(weight_files) if weight_files else None,
        n=valid[CONF_N],
        kappa=float(resolved[CONF_KAPPA]),
        kappa_list=tuple(valid[CONF_KAPPA_LIST]),
        k_grid=tuple(resolved[CONF_K_GRID]),
        oversampling=valid[CONF_OVERSAMPLING],
        q_list=tuple(resolved[CONF_Q_LIST]),
        seeds=tuple(valid[CONF_SEEDS]),
        delta=valid[CONF_DELTA],
        methods=tuple(resolved[CONF_METHODS]),
        rel_tol_list=tuple(valid[CONF_REL_TOL_LIST]),
        preconditioner=valid[CONF_PRECONDITIONER],
        drop_tol=valid[CONF_DROP_TOL],
        weight_seed=valid[CONF_WEIGHT_SEED],
        workers=valid[CONF_WORKERS],
        timings=valid[CONF_TIMINGS],
        format=valid[CONF_FORMAT],
        out=valid[CONF_OUT],
    )


def build_sketch_config(
    data: Mapping[str, Any], precond: Optional[Preconditioner] = None
) -> SketchConfig:
    """Validate a mapping into a SketchConfig.

    Raises:
        ConfigError: Naming the offending field
    """
    try:
        valid = SKETCH_SCHEMA(dict(data))
    except vol.MultipleInvalid as err:
        raise _invalid_to_config_error(err.errors[0]) from err
    except vol.Invalid as err:
        raise _invalid_to_config_error(err) from err
    return SketchConfig(
        k=valid["k"],
        p=valid["p"],
        q=valid["q"],
        sampler=SamplerSpec(kind=valid["sampler"], seed=valid["seed"], precond=precond),
        truncate=valid["truncate"],
    )

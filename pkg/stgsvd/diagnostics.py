"""Provenance metadata for result files."""

from __future__ import annotations

import platform
from importlib import metadata
from typing import Any, Optional

import numpy as np
import scipy

from .config import ExperimentConfig
from .const import PACKAGE, RESULTS_SCHEMA, VERSION
from .coordinator import ExperimentCoordinator
from .sampling import rng_metadata


def _version_of(distribution: str) -> Optional[str]:
    try:
        return metadata.version(distribution)
    except metadata.PackageNotFoundError:
        return None


def get_run_diagnostics(
    cfg: ExperimentConfig, coordinator: Optional[ExperimentCoordinator] = None
) -> dict[str, Any]:
    """Return the metadata block written alongside experiment rows.

    Nothing time- or host-dependent is included unless timings were
    requested, so repeated runs produce identical files.
    """
    config = cfg.as_dict()
    config.pop("workers", None)  # output must not depend on the thread count
    diagnostics_data: dict[str, Any] = {
        "schema": RESULTS_SCHEMA,
        "package": {"name": PACKAGE, "version": VERSION},
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "voluptuous": _version_of("voluptuous"),
        },
        "rng": rng_metadata(),
        "config": config,
    }

    if coordinator is not None:
        diagnostics_data["coordinator"] = coordinator.summary()
        if cfg.timings:
            diagnostics_data["coordinator"]["elapsed"] = coordinator.elapsed
            diagnostics_data["coordinator"]["workers"] = coordinator.max_workers
            diagnostics_data["environment"]["machine"] = platform.machine()

    return diagnostics_data

"""Experiment descriptions and the tasks that produce their result rows.

Each experiment is described by its output columns and a planner that turns
an ExperimentConfig into independent tasks. Problems (matrix, weights and the
exact decomposition) are built once while planning; tasks only read them.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
import scipy.linalg

from .analysis import (
    BoundInputs,
    bound_check,
    brute_force_sensitivity_indices,
    error_report,
    gamma_interlacing_check,
    omega_interaction,
    projection_error,
    sensitivity_indices,
    sigma_weighted_interaction,
)
from .config import ExperimentConfig, parse_method_label
from .const import (
    EXPERIMENT_ACCURACY_VS_K,
    EXPERIMENT_BOUNDS_AUDIT,
    EXPERIMENT_CONDITION_SWEEP,
    EXPERIMENT_INEXACTNESS,
    EXPERIMENT_METHOD_COMPARISON,
    EXPERIMENT_PRECONDITIONER,
    EXPERIMENT_SENSITIVITY,
    EXPERIMENT_SV_AND_ANGLES,
    METHOD_GSVD,
    PRECOND_EXACT,
    PRECOND_ICHOL,
    PRECOND_JACOBI,
    RNG_NAME,
    SAMPLER_PRECONDITIONED,
    VERSION,
)
from .exceptions import AssumptionViolationError, ConfigError
from .operators.dense import (
    DenseOperator,
    DenseSpdOperator,
    dense_adapter,
    spd_dense_adapter,
)
from .operators.inexact import InexactOperator
from .operators.market import read_matrix_market
from .rand_gsvd import (
    GSVD_METHODS,
    GsvdFactors,
    SketchConfig,
    expected_matvec_counts,
    observed_matvec_counts,
)
from .reference import ExactGsvd, exact_gsvd, ground_truth_floor
from .sampler_factory import SamplerFactory
from .sampling import (
    Preconditioner,
    SamplerSpec,
    exact_preconditioner,
    incomplete_cholesky_preconditioner,
    jacobi_preconditioner,
    preconditioned_condition_number,
)
from .testmatrices import TestMatrixSpec, make_minij, make_randsvd_spd, make_test_matrix

_LOGGER = logging.getLogger(__name__)

Row = dict[str, Any]

PROVENANCE_COLUMNS = ("rng", "version")

APPROXIMATION_COLUMNS = (
    "experiment",
    "matrix",
    "m",
    "n",
    "kappa_T",
    "method",
    "sampler",
    "preconditioner",
    "kappa_LTL",
    "k",
    "p",
    "q",
    "ell",
    "seed",
    "rel_error",  # rank-k truncation, relative to sigma_1
    "projection_rel_error",  # untruncated rank-ell approximation
    "best_possible",
    "omega",
    "gamma_ratio",  # |Gamma_2| |Gamma_1^{-1}|
    "bound_gap_dependent",
    "bound_gap_independent",
    "bound_prob_gap_dependent",
    "bound_prob_gap_independent",
    "bounds_pass",
    "matvec_A",
    "matvec_At",
    "matvec_S",
    "matvec_S_solve",
    "matvec_T",
    "matvec_T_solve",
    "table1_match",
    "retries",
    "refinements",
    "truth_floor",
) + PROVENANCE_COLUMNS

SPECTRUM_COLUMNS = (
    "experiment",
    "matrix",
    "m",
    "n",
    "kappa_T",
    "method",
    "k",
    "p",
    "q",
    "seed",
    "index",
    "sigma_exact",
    "sigma_hat",
    "sv_abs_error",
    "left_angle",  # index-th largest canonical angle
    "right_angle",
) + PROVENANCE_COLUMNS

INEXACT_COLUMNS = (
    "experiment",
    "matrix",
    "m",
    "n",
    "kappa_T",
    "method",
    "k",
    "p",
    "q",
    "seed",
    "rel_tol",
    "index",
    "sigma_exact",
    "sigma_hat",
    "sv_abs_error",
) + PROVENANCE_COLUMNS

SENSITIVITY_COLUMNS = (
    "experiment",
    "matrix",
    "m",
    "n",
    "kappa_T",
    "method",
    "k",
    "p",
    "q",
    "seed",
    "index",
    "index_estimate",
    "index_exact",
    "abs_error",
    "rel_error",
) + PROVENANCE_COLUMNS


@dataclass
class Problem:
    """A matrix with its weights and exact decomposition."""

    name: str
    A: DenseOperator
    S: DenseSpdOperator
    T: DenseSpdOperator
    kappa_T: float
    truth: ExactGsvd
    truth_floor: Optional[float] = None

    @property
    def shape(self) -> tuple[int, int]:
        """Return (m, n)."""
        return self.A.shape

    def fresh_operators(self) -> tuple[DenseOperator, DenseSpdOperator, DenseSpdOperator]:
        """Return views of A, S, T with zeroed counters."""
        return (
            self.A.with_fresh_counter(),
            self.S.with_fresh_counter(),
            self.T.with_fresh_counter(),
        )


@dataclass(frozen=True)
class Task:
    """One independent unit of work producing result rows."""

    label: str
    run: Callable[[], list[Row]]


@dataclass(frozen=True)
class ExperimentDescription:
    """Describes one experiment of the suite."""

    key: str
    columns: tuple[str, ...]
    planner: Callable[[ExperimentConfig], list[Task]]

    def columns_for(self, cfg: ExperimentConfig) -> tuple[str, ...]:
        """Return the output columns, with wall time when timings are on."""
        return self.columns + (("wall_time",) if cfg.timings else ())


def _kappa(matrix: np.ndarray) -> float:
    eigvals = scipy.linalg.eigvalsh(matrix)
    return float(eigvals[-1] / eigvals[0])


def build_problem(
    name: str, A, S, T, with_floor: bool = False
) -> Problem:
    """Wrap dense A, S, T and compute the exact decomposition."""
    A_op, S_op, T_op = dense_adapter(A), spd_dense_adapter(S), spd_dense_adapter(T)
    truth = exact_gsvd(A_op, S_op, T_op)
    floor = ground_truth_floor(A_op, S_op, T_op) if with_floor else None
    kappa_T = _kappa(T_op.to_dense())
    _LOGGER.info(
        "Built problem %s (%dx%d, kappa_T=%.3e, sigma_1=%.6e)",
        name,
        *A_op.shape,
        kappa_T,
        truth.sigma[0],
    )
    return Problem(
        name=name, A=A_op, S=S_op, T=T_op, kappa_T=kappa_T, truth=truth, truth_floor=floor
    )


def _matrices(cfg: ExperimentConfig) -> list[tuple[str, np.ndarray]]:
    if cfg.matrix_file:
        return [(Path(cfg.matrix_file).stem, read_matrix_market(cfg.matrix_file))]
    return [
        (kind, make_test_matrix(TestMatrixSpec(kind=kind, n=cfg.n)))
        for kind in cfg.matrices
    ]


def _weights(
    cfg: ExperimentConfig, m: int, n: int, kappa: float
) -> tuple[np.ndarray, np.ndarray]:
    if cfg.weight_files:
        return read_matrix_market(cfg.weight_files[0]), read_matrix_market(
            cfg.weight_files[1]
        )
    return make_minij(m), make_randsvd_spd(n, kappa, seed=cfg.weight_seed)


def build_problems(
    cfg: ExperimentConfig, kappas: Optional[tuple[float, ...]] = None
) -> list[Problem]:
    """Build one problem per matrix (and per kappa when sweeping)."""
    problems = []
    sweep = kappas if kappas and not cfg.weight_files else (cfg.kappa,)
    for name, matrix in _matrices(cfg):
        m, n = matrix.shape
        for kappa in sweep:
            S, T = _weights(cfg, m, n, kappa)
            label = name if len(sweep) == 1 else f"{name}@kappa={kappa:g}"
            problems.append(build_problem(label, matrix, S, T, with_floor=kappas is not None))
    return problems


def build_preconditioner(kind: str, T, drop_tol: float) -> Preconditioner:
    """Return the named sampling preconditioner for T."""
    if kind == PRECOND_EXACT:
        return exact_preconditioner(T)
    if kind == PRECOND_JACOBI:
        return jacobi_preconditioner(T)
    if kind == PRECOND_ICHOL:
        return incomplete_cholesky_preconditioner(T, drop_tol=drop_tol)
    raise ConfigError(f"unsupported preconditioner: {kind}", "preconditioner")


def _sketch(
    cfg: ExperimentConfig, label: str, k: int, q: int, sampler: SamplerSpec
) -> tuple[str, SketchConfig]:
    route, pinned_q = parse_method_label(label)
    return route, SketchConfig(
        k=k,
        p=cfg.oversampling,
        q=q if pinned_q is None else pinned_q,
        sampler=sampler,
        truncate=False,
    )


def _common(cfg: ExperimentConfig, problem: Problem, label: str, sketch: SketchConfig) -> Row:
    m, n = problem.shape
    return {
        "experiment": cfg.experiment,
        "matrix": problem.name,
        "m": m,
        "n": n,
        "kappa_T": problem.kappa_T,
        "method": label,
        "k": sketch.k,
        "p": sketch.p,
        "q": sketch.q,
        "seed": sketch.sampler.seed,
        "rng": RNG_NAME,
        "version": VERSION,
    }


def _run(
    route: str, problem: Problem, sketch: SketchConfig, A=None
) -> tuple[GsvdFactors, dict[str, int], float]:
    fresh_A, S, T = problem.fresh_operators()
    operator = fresh_A if A is None else A
    start = time.perf_counter()
    factors = GSVD_METHODS[route](operator, S, T, sketch)
    elapsed = time.perf_counter() - start
    return factors, observed_matvec_counts(operator, S, T), elapsed


def _bound_fields(
    cfg: ExperimentConfig,
    problem: Problem,
    sketch: SketchConfig,
    realized: float,
    kappa: float,
) -> Row:
    truth, k = problem.truth, sketch.k
    sigma_1 = float(truth.sigma[0])
    Omega = SamplerFactory.create(sketch.sampler).draw(problem.shape[1], sketch.ell)
    try:
        omega = omega_interaction(Omega, problem.T, truth, k)
        interaction = sigma_weighted_interaction(Omega, problem.T, truth, k)
    except AssumptionViolationError as err:
        _LOGGER.warning("%s k=%d seed=%d: %s", problem.name, k, sketch.sampler.seed, err)
        omega = interaction = None
    report = bound_check(
        BoundInputs(
            sigma=truth.sigma,
            k=k,
            p=sketch.p,
            q=sketch.q,
            n=problem.shape[1],
            kappa=kappa,
            delta=cfg.delta,
            omega=omega,
            sigma_interaction=interaction,
        ),
        realized,
    )

    def relative(name: str) -> Optional[float]:
        value = report.bounds.get(name)
        return None if value is None else value / sigma_1

    return {
        "omega": omega,
        "bound_gap_dependent": relative("gap_dependent"),
        "bound_gap_independent": relative("gap_independent"),
        "bound_prob_gap_dependent": relative("probabilistic_gap_dependent"),
        "bound_prob_gap_independent": relative("probabilistic_gap_independent"),
        "bounds_pass": report.all_passed if report.bounds else None,
    }


def _approximation_task(
    cfg: ExperimentConfig,
    problem: Problem,
    label: str,
    k: int,
    q: int,
    sampler: SamplerSpec,
    precond_label: str = "none",
    kappa_ltl: Optional[float] = None,
    gamma_ratio: Optional[float] = None,
) -> Task:
    route, sketch = _sketch(cfg, label, k, q, sampler)

    def run() -> list[Row]:
        factors, counts, elapsed = _run(route, problem, sketch)
        truth = problem.truth
        sigma = truth.sigma
        projection = projection_error(problem.A, problem.S, problem.T, factors)
        truncated = projection_error(problem.A, problem.S, problem.T, factors.truncate(k))
        retries = factors.info.get("retries", 0)
        refinements = factors.info.get("refinements", {})

        row = _common(cfg, problem, label, sketch)
        row.update(
            {
                "sampler": sketch.sampler.kind,
                "preconditioner": precond_label,
                "kappa_LTL": kappa_ltl,
                "ell": factors.info.get("ell", sketch.ell),
                "rel_error": truncated / sigma[0],
                "projection_rel_error": projection / sigma[0],
                "best_possible": float(sigma[k] / sigma[0]) if k < sigma.shape[0] else 0.0,
                "gamma_ratio": gamma_ratio,
                "matvec_A": counts["A.apply"],
                "matvec_At": counts["A.apply_transpose"],
                "matvec_S": counts["S.apply"],
                "matvec_S_solve": counts["S.solve"],
                "matvec_T": counts["T.apply"],
                "matvec_T_solve": counts["T.solve"],
                "table1_match": None,
                "retries": retries,
                "refinements": sum(refinements.values()),
                "truth_floor": problem.truth_floor,
                "wall_time": elapsed,
            }
        )
        if route == METHOD_GSVD and retries == 0:
            expected = expected_matvec_counts(sketch.ell, sketch.q, refinements)
            row["table1_match"] = expected == counts
            kappa = kappa_ltl if sketch.sampler.kind == SAMPLER_PRECONDITIONED else problem.kappa_T
            row.update(_bound_fields(cfg, problem, sketch, projection, kappa))
        return [row]

    return Task(
        label=f"{problem.name}/{label}/k={k}/q={sketch.q}/seed={sampler.seed}", run=run
    )


def _gamma_ratio(problem: Problem, k: int, precond: Optional[Preconditioner] = None) -> Optional[float]:
    if k >= problem.shape[1]:
        return None
    return gamma_interlacing_check(problem.T, problem.truth, k, precond).middle


def _approximation_grid(
    cfg: ExperimentConfig, problems: list[Problem]
) -> list[Task]:
    tasks = []
    for problem in problems:
        for k in cfg.k_grid:
            gamma_ratio = _gamma_ratio(problem, k)
            for label in cfg.methods:
                _, pinned_q = parse_method_label(label)
                q_values = cfg.q_list if pinned_q is None else (pinned_q,)
                for q in q_values:
                    for seed in cfg.seeds:
                        tasks.append(
                            _approximation_task(
                                cfg,
                                problem,
                                label,
                                k,
                                q,
                                SamplerSpec(seed=seed),
                                gamma_ratio=gamma_ratio,
                            )
                        )
    return tasks


def plan_accuracy(cfg: ExperimentConfig) -> list[Task]:
    """Error versus k for every matrix, q and seed."""
    return _approximation_grid(cfg, build_problems(cfg))


def plan_condition_sweep(cfg: ExperimentConfig) -> list[Task]:
    """Error versus kappa_2(T); problems are rebuilt for every kappa."""
    return _approximation_grid(cfg, build_problems(cfg, kappas=cfg.kappa_list))


def plan_preconditioner(cfg: ExperimentConfig) -> list[Task]:
    """Plain Gaussian sketches against preconditioned ones on the same seeds."""
    tasks = []
    for problem in build_problems(cfg):
        precond = build_preconditioner(cfg.preconditioner, problem.T, cfg.drop_tol)
        kappa_ltl = preconditioned_condition_number(problem.T, precond)
        _LOGGER.info(
            "%s: kappa(T)=%.3e, kappa(L^T T L)=%.3e with %s",
            problem.name,
            problem.kappa_T,
            kappa_ltl,
            precond.label,
        )
        for k in cfg.k_grid:
            variants = (
                ("none", None, problem.kappa_T),
                (precond.label, precond, kappa_ltl),
            )
            for precond_label, variant, kappa_variant in variants:
                gamma_ratio = _gamma_ratio(problem, k, variant)
                for label in cfg.methods:
                    _, pinned_q = parse_method_label(label)
                    for q in cfg.q_list if pinned_q is None else (pinned_q,):
                        for seed in cfg.seeds:
                            sampler = (
                                SamplerSpec(seed=seed)
                                if variant is None
                                else SamplerSpec(
                                    kind=SAMPLER_PRECONDITIONED, seed=seed, precond=variant
                                )
                            )
                            tasks.append(
                                _approximation_task(
                                    cfg,
                                    problem,
                                    label,
                                    k,
                                    q,
                                    sampler,
                                    precond_label=precond_label,
                                    kappa_ltl=kappa_variant,
                                    gamma_ratio=gamma_ratio,
                                )
                            )
    return tasks


def _spectrum_task(
    cfg: ExperimentConfig, problem: Problem, label: str, k: int, q: int, seed: int
) -> Task:
    route, sketch = _sketch(cfg, label, k, q, SamplerSpec(seed=seed))
    sketch = sketch.replace(truncate=True)

    def run() -> list[Row]:
        factors, _, elapsed = _run(route, problem, sketch)
        report = error_report(problem.A, problem.S, problem.T, factors, problem.truth, k)
        rows = []
        for index in range(k):
            row = _common(cfg, problem, label, sketch)
            row.update(
                {
                    "index": index + 1,
                    "sigma_exact": float(problem.truth.sigma[index]),
                    "sigma_hat": float(factors.sigma_hat[index]),
                    "sv_abs_error": float(report.sv_abs_errors[index]),
                    "left_angle": float(report.left_angles[index]),
                    "right_angle": float(report.right_angles[index]),
                    "wall_time": elapsed,
                }
            )
            rows.append(row)
        return rows

    return Task(label=f"{problem.name}/{label}/k={k}/seed={seed}", run=run)


def plan_sv_and_angles(cfg: ExperimentConfig) -> list[Task]:
    """Singular value errors and canonical angles per method."""
    tasks = []
    for problem in build_problems(cfg):
        for k in cfg.k_grid:
            for label in cfg.methods:
                _, pinned_q = parse_method_label(label)
                for q in cfg.q_list if pinned_q is None else (pinned_q,):
                    for seed in cfg.seeds:
                        tasks.append(_spectrum_task(cfg, problem, label, k, q, seed))
    return tasks


def _inexact_task(
    cfg: ExperimentConfig, problem: Problem, k: int, q: int, seed: int, rel_tol: float
) -> Task:
    route, sketch = _sketch(cfg, METHOD_GSVD, k, q, SamplerSpec(seed=seed))
    sketch = sketch.replace(truncate=True)

    def run() -> list[Row]:
        noisy = InexactOperator(problem.A.with_fresh_counter(), rel_tol, seed)
        factors, _, elapsed = _run(route, problem, sketch, A=noisy)
        rows = []
        for index in range(min(k, factors.rank)):
            exact_value = float(problem.truth.sigma[index])
            row = _common(cfg, problem, METHOD_GSVD, sketch)
            row.update(
                {
                    "rel_tol": rel_tol,
                    "index": index + 1,
                    "sigma_exact": exact_value,
                    "sigma_hat": float(factors.sigma_hat[index]),
                    "sv_abs_error": abs(exact_value - float(factors.sigma_hat[index])),
                    "wall_time": elapsed,
                }
            )
            rows.append(row)
        return rows

    return Task(label=f"{problem.name}/rel_tol={rel_tol:g}/k={k}/seed={seed}", run=run)


def plan_inexactness(cfg: ExperimentConfig) -> list[Task]:
    """Leading singular values under perturbed operator products."""
    tasks = []
    tolerances = (0.0,) + tuple(tol for tol in cfg.rel_tol_list if tol != 0.0)
    for problem in build_problems(cfg):
        for k in cfg.k_grid:
            for q in cfg.q_list:
                for rel_tol in tolerances:
                    for seed in cfg.seeds:
                        tasks.append(_inexact_task(cfg, problem, k, q, seed, rel_tol))
    return tasks


def _sensitivity_task(
    cfg: ExperimentConfig,
    problem: Problem,
    k: int,
    q: int,
    seed: int,
    exact: np.ndarray,
) -> Task:
    route, sketch = _sketch(cfg, METHOD_GSVD, k, q, SamplerSpec(seed=seed))
    sketch = sketch.replace(truncate=True)

    def run() -> list[Row]:
        factors, _, elapsed = _run(route, problem, sketch)
        estimates = sensitivity_indices(factors, problem.T, np.eye(problem.shape[1]))
        rows = []
        for index, (estimate, reference) in enumerate(zip(estimates, exact)):
            row = _common(cfg, problem, METHOD_GSVD, sketch)
            row.update(
                {
                    "index": index + 1,
                    "index_estimate": float(estimate),
                    "index_exact": float(reference),
                    "abs_error": float(abs(estimate - reference)),
                    "rel_error": float(abs(estimate - reference) / reference)
                    if reference > 0
                    else None,
                    "wall_time": elapsed,
                }
            )
            rows.append(row)
        return rows

    return Task(label=f"{problem.name}/sensitivity/k={k}/seed={seed}", run=run)


def plan_sensitivity(cfg: ExperimentConfig) -> list[Task]:
    """Sensitivity indices of the coordinate directions from truncated factors."""
    tasks = []
    for problem in build_problems(cfg):
        n = problem.shape[1]
        exact = brute_force_sensitivity_indices(problem.A, problem.S, problem.T, np.eye(n))
        for k in cfg.k_grid:
            for q in cfg.q_list:
                for seed in cfg.seeds:
                    tasks.append(_sensitivity_task(cfg, problem, k, q, seed, exact))
    return tasks


EXPERIMENT_TYPES: list[ExperimentDescription] = [
    ExperimentDescription(
        key=EXPERIMENT_ACCURACY_VS_K,
        columns=APPROXIMATION_COLUMNS,
        planner=plan_accuracy,
    ),
    ExperimentDescription(
        key=EXPERIMENT_METHOD_COMPARISON,
        columns=APPROXIMATION_COLUMNS,
        planner=plan_accuracy,
    ),
    ExperimentDescription(
        key=EXPERIMENT_SV_AND_ANGLES,
        columns=SPECTRUM_COLUMNS,
        planner=plan_sv_and_angles,
    ),
    ExperimentDescription(
        key=EXPERIMENT_CONDITION_SWEEP,
        columns=APPROXIMATION_COLUMNS,
        planner=plan_condition_sweep,
    ),
    ExperimentDescription(
        key=EXPERIMENT_PRECONDITIONER,
        columns=APPROXIMATION_COLUMNS,
        planner=plan_preconditioner,
    ),
    ExperimentDescription(
        key=EXPERIMENT_INEXACTNESS,
        columns=INEXACT_COLUMNS,
        planner=plan_inexactness,
    ),
    ExperimentDescription(
        key=EXPERIMENT_BOUNDS_AUDIT,
        columns=APPROXIMATION_COLUMNS,
        planner=plan_accuracy,
    ),
    ExperimentDescription(
        key=EXPERIMENT_SENSITIVITY,
        columns=SENSITIVITY_COLUMNS,
        planner=plan_sensitivity,
    ),
]

EXPERIMENTS_BY_KEY: dict[str, ExperimentDescription] = {
    description.key: description for description in EXPERIMENT_TYPES
}

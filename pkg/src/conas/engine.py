"""Multi-stage search: measure, recover, truncate, minimize, restrict, repeat.

Each stage samples the still-free coordinates, fits a sparse surrogate of the
restricted objective, fixes the surrogate's minimizing assignment, and hands
the grown restriction to the next stage.  Coordinates are never unfixed.

Seed scheme: stage k of a search with master seed M draws its per-stage seed
from SeedSequence([M, k]); within a stage, encoding sampling uses
SeedSequence([stage_seed, 0]) and connectivity repair SeedSequence([stage_seed, 1]).
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import recovery
from .fourier import (
    FourierExpansion,
    Restriction,
    all_encodings,
    enumerate_parities,
    merge_points,
    restrict_oracle,
)
from .recovery import LassoSolution, RecoveryConfig
from .space import Cell, CellSpec, decode_cell, repair_connectivity, validate_connectivity

THREADS_ENV_VAR = "CONAS_THREADS"


def stage_statistics(values) -> tuple[float, float, float]:
    """(mean, sample std, min) of a measurement vector; a single value has std 0."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty measurement vector")
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std, float(arr.min())


def final_encoding(restriction: Restriction, n: int | None = None) -> np.ndarray:
    """Encoding with fixed coordinates at their restricted values, all others -1."""
    if n is not None and n != restriction.n:
        raise ValueError(f"dimension {n} != restriction dimension {restriction.n}")
    out = np.full(restriction.n, -1, dtype=np.int8)
    for coord, value in restriction.fixed.items():
        out[coord] = value
    return out


def _thread_limit() -> int:
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw == "":
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from None


def _measure(f, X) -> np.ndarray:
    """Evaluate f on each row of X; output order always matches row order."""
    batch = getattr(f, "evaluate_batch", None)
    if batch is not None:
        return np.asarray(batch(X), dtype=np.float64)
    threads = _thread_limit()
    if threads > 1 and getattr(f, "thread_safe", False):
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return np.array(list(pool.map(lambda row: float(f.evaluate(row)), X)))
    return np.array([float(f.evaluate(row)) for row in X])


@dataclass(frozen=True)
class StageResult:
    """Everything one stage produced, plus the cumulative restriction after it."""

    stage: int
    free_dimension: int
    degree_used: int
    measurement_mean: float
    measurement_std: float
    measurement_min: float
    lasso: LassoSolution
    surrogate: FourierExpansion
    surrogate_min: float
    assignment: Mapping[int, int]
    cumulative: Restriction
    warnings: tuple[str, ...]
    values: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "stage": self.stage,
            "free_dimension": self.free_dimension,
            "degree_used": self.degree_used,
            "measurements": {
                "mean": self.measurement_mean,
                "std": self.measurement_std,
                "min": self.measurement_min,
                "count": int(self.values.shape[0]),
            },
            "lasso": {
                "iterations": int(self.lasso.iterations),
                "objective": float(self.lasso.objective),
                "kkt_residual": float(self.lasso.kkt_residual),
                "converged": bool(self.lasso.converged),
            },
            "surrogate": self.surrogate.to_json_dict(),
            "surrogate_min": self.surrogate_min,
            "assignment": [[coord, value] for coord, value in sorted(self.assignment.items())],
            "fixed_after": len(self.cumulative.fixed),
            "warnings": list(self.warnings),
        }


def run_stage(
    f,
    cumulative: Restriction,
    cfg: RecoveryConfig,
    seed: int,
    *,
    stage_index: int = 0,
    sparsity: int | None = None,
    exhaustive: bool = False,
    cell_spec: CellSpec | None = None,
    repair_sampling: bool = False,
) -> StageResult:
    """One measure-recover-minimize pass over the free coordinates.

    Samples encodings of the free coordinates, evaluates the restricted
    objective (order fixed by the pre-generated encodings), solves the lasso
    over the degree-bounded parity dictionary, keeps the top coefficients,
    minimizes over their subcube, and folds the assignment back into the
    cumulative restriction in original coordinates.

    exhaustive replaces sampling with all 2**free points.  repair_sampling
    applies connectivity repair to each merged encoding before evaluation
    (the design matrix still uses the unrepaired bits).
    """
    if cumulative.n != f.n:
        raise ValueError(f"restriction dimension {cumulative.n} != evaluator dimension {f.n}")
    free = cumulative.free
    free_dimension = len(free)
    if free_dimension < 1:
        raise ValueError("no free coordinates left to search")
    warnings: list[str] = []
    degree = cfg.degree
    if degree > free_dimension:
        warnings.append(f"degree {degree} clamped to free dimension {free_dimension}")
        degree = free_dimension

    if exhaustive:
        X = all_encodings(free_dimension)
    else:
        X = recovery.sample_encodings(
            free_dimension, cfg.p, cfg.m, np.random.SeedSequence([seed, 0])
        )

    restricted = restrict_oracle(f, cumulative)
    if repair_sampling:
        if cell_spec is None:
            raise ValueError("repair_sampling requires a cell spec")
        rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
        merged = merge_points(X, cumulative)
        repaired = np.stack([repair_connectivity(row, cell_spec, rng) for row in merged])
        y = _measure(f, repaired)
    else:
        y = _measure(restricted, X)

    mean, std, minimum = stage_statistics(y)
    parities = enumerate_parities(free_dimension, degree)
    matrix = recovery.build_sampling_matrix(X, parities)
    solution = recovery.lasso_solve(matrix, y, cfg.lam, cfg.tol, cfg.max_iter)
    keep = cfg.sparsity if sparsity is None else int(sparsity)
    surrogate = recovery.truncate_top_s(solution, parities, keep, free_dimension)
    sub_assignment, surrogate_min = recovery.minimize_over_support(surrogate)
    assignment = {free[coord]: value for coord, value in sub_assignment.fixed.items()}
    new_cumulative = cumulative.compose(Restriction(f.n, assignment))

    return StageResult(
        stage=stage_index,
        free_dimension=free_dimension,
        degree_used=degree,
        measurement_mean=mean,
        measurement_std=std,
        measurement_min=minimum,
        lasso=solution,
        surrogate=surrogate,
        surrogate_min=surrogate_min,
        assignment=assignment,
        cumulative=new_cumulative,
        warnings=tuple(warnings),
        values=y,
    )


@dataclass(frozen=True)
class SearchResult:
    """All stage results plus the assembled final encoding."""

    stages: tuple[StageResult, ...]
    final: np.ndarray
    restriction: Restriction
    cell: Cell | None
    connectivity_violations: tuple[tuple[int, int], ...] | None
    config: Mapping
    seed: int
    truncated: bool

    def to_json_dict(self) -> dict:
        out = {
            "seed": self.seed,
            "truncated": self.truncated,
            "config": dict(self.config),
            "stages": [stage.to_json_dict() for stage in self.stages],
            "final_encoding": [int(b) for b in self.final],
            "fixed_coordinates": [[c, v] for c, v in self.restriction.fixed.items()],
            "cell": self.cell.to_json_dict() if self.cell is not None else None,
            "connectivity_violations": (
                [[k, t] for k, t in self.connectivity_violations]
                if self.connectivity_violations is not None
                else None
            ),
        }
        return out


def _stage_seed(master: int, stage_index: int) -> int:
    return int(np.random.SeedSequence([master, stage_index]).generate_state(1, np.uint64)[0])


def conas_search(
    f,
    cfg: RecoveryConfig,
    stages: int,
    seed: int,
    *,
    cell_spec: CellSpec | None = None,
    exhaustive: bool = False,
    repair_sampling: bool = False,
    sparsity_schedule: list[int] | None = None,
) -> SearchResult:
    """Run up to `stages` restriction stages and assemble the final encoding.

    Stops early (flagged truncated) if every coordinate is fixed first.  The
    per-stage sparsity can be overridden with a schedule of length `stages`.
    """
    if stages < 1:
        raise ValueError("at least one stage is required")
    if sparsity_schedule is not None and len(sparsity_schedule) != stages:
        raise ValueError(f"sparsity schedule must have length {stages}")
    cumulative = Restriction.empty(f.n)
    results: list[StageResult] = []
    truncated = False
    for k in range(stages):
        if len(cumulative.free) == 0:
            truncated = True
            break
        result = run_stage(
            f,
            cumulative,
            cfg,
            _stage_seed(seed, k),
            stage_index=k,
            sparsity=None if sparsity_schedule is None else sparsity_schedule[k],
            exhaustive=exhaustive,
            cell_spec=cell_spec,
            repair_sampling=repair_sampling,
        )
        results.append(result)
        cumulative = result.cumulative

    final = final_encoding(cumulative)
    cell = decode_cell(cell_spec, final) if cell_spec is not None else None
    violations = tuple(validate_connectivity(cell)) if cell is not None else None
    config_echo = {
        "lambda": cfg.lam,
        "sparsity": cfg.sparsity,
        "degree": cfg.degree,
        "p": cfg.p,
        "m": cfg.m,
        "tol": cfg.tol,
        "max_iter": cfg.max_iter,
        "stages": stages,
        "exhaustive": exhaustive,
        "repair_sampling": repair_sampling,
        "sparsity_schedule": list(sparsity_schedule) if sparsity_schedule is not None else None,
    }
    return SearchResult(
        stages=tuple(results),
        final=final,
        restriction=cumulative,
        cell=cell,
        connectivity_violations=violations,
        config=config_echo,
        seed=seed,
        truncated=truncated,
    )

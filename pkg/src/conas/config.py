"""Strict JSON run configuration for the command-line harness.

Unknown keys are rejected everywhere: a silently ignored typo in lambda,
sparsity, or m would invalidate an experiment.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .fourier import FourierExpansion
from .oracles import PlantedOracle, load_tabular, make_decision_tree, make_planted, wrap_noise
from .recovery import RecoveryConfig
from .space import CellSpec

MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    """A configuration file failed validation."""


def _check_keys(mapping, context: str, required: set[str], optional: set[str]) -> None:
    if not isinstance(mapping, dict):
        raise ConfigError(f"{context}: expected an object")
    unknown = sorted(set(mapping) - required - optional)
    if unknown:
        raise ConfigError(f"{context}: unknown keys {unknown}")
    missing = sorted(required - set(mapping))
    if missing:
        raise ConfigError(f"{context}: missing keys {missing}")


def _as_int(value, context: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{context}: expected an integer, got {value!r}")
    return value


def _as_number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context}: expected a number, got {value!r}")
    return float(value)


def _as_bool(value, context: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{context}: expected a boolean, got {value!r}")
    return value


def _as_seed(value, context: str) -> int:
    seed = _as_int(value, context)
    if not 0 <= seed <= MAX_SEED:
        raise ConfigError(f"{context}: seed must be an unsigned 64-bit integer")
    return seed


@dataclass(frozen=True)
class OracleConfig:
    kind: str
    n: int | None = None
    sparsity: int | None = None
    degree: int | None = None
    magnitude_range: tuple[float, float] = (1.0, 2.0)
    depth: int | None = None
    path: str | None = None
    missing: float | str = "error"
    terms: tuple | None = None
    seed: int | None = None
    noise_sigma: float = 0.0
    noise_seed: int | None = None


def _parse_oracle(raw, context: str = "oracle") -> OracleConfig:
    common = {"kind", "noise_sigma", "noise_seed"}
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError(f"{context}: expected an object with a 'kind' key")
    kind = raw["kind"]
    if kind == "planted":
        _check_keys(raw, context, {"kind", "n", "sparsity", "degree"},
                    common | {"magnitude_range", "seed"})
        rng = raw.get("magnitude_range", [1.0, 2.0])
        if not (isinstance(rng, list) and len(rng) == 2):
            raise ConfigError(f"{context}: magnitude_range must be a [lo, hi] pair")
        cfg = OracleConfig(
            kind=kind,
            n=_as_int(raw["n"], f"{context}.n"),
            sparsity=_as_int(raw["sparsity"], f"{context}.sparsity"),
            degree=_as_int(raw["degree"], f"{context}.degree"),
            magnitude_range=(_as_number(rng[0], context), _as_number(rng[1], context)),
            seed=_as_seed(raw["seed"], f"{context}.seed") if "seed" in raw else None,
        )
    elif kind == "tree":
        _check_keys(raw, context, {"kind", "n", "depth"}, common | {"seed"})
        cfg = OracleConfig(
            kind=kind,
            n=_as_int(raw["n"], f"{context}.n"),
            depth=_as_int(raw["depth"], f"{context}.depth"),
            seed=_as_seed(raw["seed"], f"{context}.seed") if "seed" in raw else None,
        )
    elif kind == "tabular":
        _check_keys(raw, context, {"kind", "path"}, common | {"missing"})
        missing = raw.get("missing", "error")
        if missing != "error":
            missing = _as_number(missing, f"{context}.missing")
        cfg = OracleConfig(kind=kind, path=str(raw["path"]), missing=missing)
    elif kind == "expansion":
        _check_keys(raw, context, {"kind", "n", "terms"}, common)
        terms = raw["terms"]
        if not isinstance(terms, list):
            raise ConfigError(f"{context}.terms: expected a list")
        for term in terms:
            _check_keys(term, f"{context}.terms[]", {"s", "c"}, set())
        cfg = OracleConfig(
            kind=kind,
            n=_as_int(raw["n"], f"{context}.n"),
            terms=tuple((tuple(t["s"]), _as_number(t["c"], context)) for t in terms),
        )
    else:
        raise ConfigError(f"{context}: unknown oracle kind {kind!r}")

    sigma = _as_number(raw.get("noise_sigma", 0.0), f"{context}.noise_sigma")
    if sigma < 0:
        raise ConfigError(f"{context}.noise_sigma: must be nonnegative")
    noise_seed = (
        _as_seed(raw["noise_seed"], f"{context}.noise_seed") if "noise_seed" in raw else None
    )
    if sigma > 0 and noise_seed is None:
        raise ConfigError(f"{context}: noise_sigma > 0 requires noise_seed")
    return OracleConfig(**{**cfg.__dict__, "noise_sigma": sigma, "noise_seed": noise_seed})


def build_oracle(cfg: OracleConfig, *, seed=None, noise_seed=None):
    """Instantiate the configured evaluator; seed arguments override the config."""
    plant_seed = seed if seed is not None else cfg.seed
    try:
        if cfg.kind == "planted":
            if plant_seed is None:
                raise ConfigError("oracle: planted oracles need a seed")
            oracle = make_planted(cfg.n, cfg.sparsity, cfg.degree, cfg.magnitude_range, plant_seed)
        elif cfg.kind == "tree":
            if plant_seed is None:
                raise ConfigError("oracle: tree oracles need a seed")
            oracle = make_decision_tree(cfg.n, cfg.depth, plant_seed)
        elif cfg.kind == "tabular":
            oracle = load_tabular(cfg.path, cfg.missing)
        elif cfg.kind == "expansion":
            oracle = PlantedOracle(FourierExpansion(cfg.n, dict(cfg.terms)))
        else:
            raise ConfigError(f"unknown oracle kind {cfg.kind!r}")
    except (ValueError, OSError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"oracle: {exc}") from exc
    if cfg.noise_sigma > 0:
        oracle = wrap_noise(oracle, cfg.noise_sigma, noise_seed if noise_seed is not None else cfg.noise_seed)
    return oracle


@dataclass(frozen=True)
class PhaseConfig:
    m_grid: tuple[int, ...]
    trials: int


def _parse_phase(raw) -> PhaseConfig:
    _check_keys(raw, "phase", {"m_grid", "trials"}, set())
    grid = raw["m_grid"]
    if not isinstance(grid, list) or not grid:
        raise ConfigError("phase.m_grid: expected a nonempty list of measurement counts")
    m_grid = tuple(_as_int(m, "phase.m_grid") for m in grid)
    if any(m < 1 for m in m_grid):
        raise ConfigError("phase.m_grid: measurement counts must be positive")
    trials = _as_int(raw["trials"], "phase.trials")
    if trials < 1:
        raise ConfigError("phase.trials: must be positive")
    return PhaseConfig(m_grid=m_grid, trials=trials)


def _parse_recovery(raw) -> RecoveryConfig:
    _check_keys(raw, "recovery", set(),
                {"lambda", "sparsity", "degree", "p", "m", "tol", "max_iter"})
    kwargs = {}
    if "lambda" in raw:
        kwargs["lam"] = _as_number(raw["lambda"], "recovery.lambda")
    for key in ("sparsity", "degree", "m", "max_iter"):
        if key in raw:
            kwargs[key] = _as_int(raw[key], f"recovery.{key}")
    for key in ("p", "tol"):
        if key in raw:
            kwargs[key] = _as_number(raw[key], f"recovery.{key}")
    try:
        return RecoveryConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"recovery: {exc}") from exc


def _parse_cell(raw) -> CellSpec:
    _check_keys(raw, "cell", {"nodes", "operations"}, {"kinds", "inputs"})
    operations = raw["operations"]
    if not isinstance(operations, list):
        raise ConfigError("cell.operations: expected a list of names")
    kwargs = {
        "nodes": _as_int(raw["nodes"], "cell.nodes"),
        "operations": tuple(str(o) for o in operations),
    }
    if "kinds" in raw:
        if not isinstance(raw["kinds"], list):
            raise ConfigError("cell.kinds: expected a list of names")
        kwargs["kinds"] = tuple(str(k) for k in raw["kinds"])
    if "inputs" in raw:
        kwargs["inputs"] = _as_int(raw["inputs"], "cell.inputs")
    try:
        return CellSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"cell: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    seed: int
    oracle: OracleConfig
    recovery: RecoveryConfig
    stages: int = 4
    sparsity_schedule: tuple[int, ...] | None = None
    cell: CellSpec | None = None
    exhaustive: bool = False
    repair_sampling: bool = False
    dump_measurements: bool = False
    phase: PhaseConfig | None = None


def parse_run_config(raw) -> RunConfig:
    _check_keys(
        raw,
        "config",
        {"seed", "oracle"},
        {"recovery", "stages", "sparsity_schedule", "cell", "exhaustive",
         "repair_sampling", "dump_measurements", "phase"},
    )
    seed = _as_seed(raw["seed"], "seed")
    oracle = _parse_oracle(raw["oracle"])
    rec = _parse_recovery(raw.get("recovery", {}))
    stages = _as_int(raw.get("stages", 4), "stages")
    if stages < 1:
        raise ConfigError("stages: must be at least 1")
    schedule = None
    if raw.get("sparsity_schedule") is not None:
        sched_raw = raw["sparsity_schedule"]
        if not isinstance(sched_raw, list):
            raise ConfigError("sparsity_schedule: expected a list")
        schedule = tuple(_as_int(s, "sparsity_schedule") for s in sched_raw)
        if len(schedule) != stages:
            raise ConfigError(f"sparsity_schedule: must have exactly {stages} entries")
        if any(s < 1 for s in schedule):
            raise ConfigError("sparsity_schedule: entries must be at least 1")
    cell = _parse_cell(raw["cell"]) if raw.get("cell") is not None else None
    phase = _parse_phase(raw["phase"]) if raw.get("phase") is not None else None
    return RunConfig(
        seed=seed,
        oracle=oracle,
        recovery=rec,
        stages=stages,
        sparsity_schedule=schedule,
        cell=cell,
        exhaustive=_as_bool(raw.get("exhaustive", False), "exhaustive"),
        repair_sampling=_as_bool(raw.get("repair_sampling", False), "repair_sampling"),
        dump_measurements=_as_bool(raw.get("dump_measurements", False), "dump_measurements"),
        phase=phase,
    )


def load_run_config(path) -> RunConfig:
    try:
        with open(path, "r") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_run_config(raw)


def derive_seed(*entropy: int) -> np.random.SeedSequence:
    """Deterministic sub-stream for a tuple of nonnegative integers."""
    return np.random.SeedSequence(list(entropy))

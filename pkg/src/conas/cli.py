"""Deterministic command-line harness.

Subcommands: search, phase, stages, count, dft.  Every command is a pure
function of its config file and seed, so reruns produce byte-identical
primary outputs.  Exit codes: 0 success, 2 config error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import recovery
from .config import ConfigError, RunConfig, build_oracle, derive_seed, load_run_config
from .engine import SearchResult, conas_search
from .fourier import EXACT_TRANSFORM_CAP, enumerate_parities, exact_transform, evaluate_many
from .oracles import make_planted, wrap_noise
from .space import (
    CellSpec,
    count_configurations,
    darts_configuration_count,
    format_scientific,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _write_json(path: Path, payload) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load(args) -> tuple[RunConfig, int]:
    cfg = load_run_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    return cfg, seed


def _run_search(cfg: RunConfig, seed: int) -> SearchResult:
    oracle = build_oracle(cfg.oracle)
    if cfg.cell is not None and oracle.n != cfg.cell.edge_count:
        raise ConfigError(
            f"oracle dimension {oracle.n} != cell encoder length {cfg.cell.edge_count}"
        )
    schedule = list(cfg.sparsity_schedule) if cfg.sparsity_schedule is not None else None
    return conas_search(
        oracle,
        cfg.recovery,
        cfg.stages,
        seed,
        cell_spec=cfg.cell,
        exhaustive=cfg.exhaustive,
        repair_sampling=cfg.repair_sampling,
        sparsity_schedule=schedule,
    )


def _measurements_csv(result: SearchResult) -> str:
    lines = ["stage,sample_index,value"]
    for stage in result.stages:
        for idx, value in enumerate(stage.values):
            lines.append(f"{stage.stage},{idx},{float(value)!r}")
    return "\n".join(lines) + "\n"


def cmd_search(args) -> int:
    cfg, seed = _load(args)
    result = _run_search(cfg, seed)
    out = Path(args.out)
    _write_json(out / "search.json", result.to_json_dict())
    _log(f"search: {len(result.stages)} stages, "
         f"{len(result.restriction.fixed)} fixed coordinates -> {out / 'search.json'}")
    if result.cell is not None:
        _write_json(out / "cell.json", {
            "cell": result.cell.to_json_dict(),
            "connectivity_violations": [[k, t] for k, t in result.connectivity_violations],
        })
        _log(f"search: cell with {result.cell.active_edge_count()} active edges -> {out / 'cell.json'}")
    if cfg.dump_measurements:
        _write_text(out / "measurements.csv", _measurements_csv(result))
    return EXIT_OK


def cmd_stages(args) -> int:
    cfg, seed = _load(args)
    if cfg.stages < 2:
        raise ConfigError("stages: the stages command needs at least 2 stages")
    result = _run_search(cfg, seed)
    truncated = int(result.truncated)
    lines = ["stage,mean,std,min,truncated"]
    for stage in result.stages:
        lines.append(
            f"{stage.stage},{stage.measurement_mean!r},{stage.measurement_std!r},"
            f"{stage.measurement_min!r},{truncated}"
        )
    out = Path(args.out)
    _write_text(out / "stages.csv", "\n".join(lines) + "\n")
    _log(f"stages: {len(result.stages)} rows -> {out / 'stages.csv'}")
    return EXIT_OK


def cmd_phase(args) -> int:
    cfg, seed = _load(args)
    if cfg.phase is None:
        raise ConfigError("phase: config needs a 'phase' section with m_grid and trials")
    oc = cfg.oracle
    if oc.kind != "planted":
        raise ConfigError("phase: only planted oracles have a recoverable ground truth")
    rec = cfg.recovery
    parities = enumerate_parities(oc.n, rec.degree)
    rows = []
    for mi, m in enumerate(sorted(cfg.phase.m_grid)):
        successes = 0
        for trial in range(cfg.phase.trials):
            plant = make_planted(
                oc.n, oc.sparsity, oc.degree, oc.magnitude_range,
                derive_seed(seed, mi, trial, 0),
            )
            target = plant
            if oc.noise_sigma > 0:
                target = wrap_noise(plant, oc.noise_sigma, int(
                    derive_seed(seed, mi, trial, 2).generate_state(1, np.uint64)[0]
                ))
            X = recovery.sample_encodings(oc.n, rec.p, m, derive_seed(seed, mi, trial, 1))
            y = evaluate_many(target, X)
            matrix = recovery.build_sampling_matrix(X, parities)
            solution = recovery.lasso_solve(matrix, y, rec.lam, rec.tol, rec.max_iter)
            recovered = recovery.truncate_top_s(solution, parities, rec.sparsity, oc.n)
            truth = plant.expansion
            support_recovered = int(set(recovered.terms) == set(truth.terms))
            union = set(recovered.terms) | set(truth.terms)
            error = max(
                (abs(recovered.terms.get(s, 0.0) - truth.terms.get(s, 0.0)) for s in union),
                default=0.0,
            )
            successes += support_recovered
            rows.append((m, trial, support_recovered, error))
        _log(f"phase: m={m} recovered {successes}/{cfg.phase.trials}")
    rows.sort(key=lambda row: (row[0], row[1]))
    lines = ["m,trial,support_recovered,coefficient_error"]
    lines.extend(f"{m},{trial},{ok},{err!r}" for m, trial, ok, err in rows)
    out = Path(args.out)
    _write_text(out / "phase.csv", "\n".join(lines) + "\n")
    _log(f"phase: {len(rows)} rows -> {out / 'phase.csv'}")
    return EXIT_OK


def _kind_names(kinds: int) -> tuple[str, ...]:
    if kinds == 1:
        return ("normal",)
    if kinds == 2:
        return ("normal", "reduce")
    return tuple(f"kind{i}" for i in range(kinds))


def cmd_count(args) -> int:
    if args.ops < 1 or args.kinds < 1:
        raise ConfigError("count: --ops and --kinds must be positive")
    try:
        spec = CellSpec(
            nodes=args.nodes,
            operations=tuple(f"op{i}" for i in range(args.ops)),
            kinds=_kind_names(args.kinds),
            inputs=args.inputs,
        )
    except ValueError as exc:
        raise ConfigError(f"count: {exc}") from exc
    edges = spec.edge_count
    active = edges // 4
    combos = count_configurations(edges, active)
    darts = darts_configuration_count(args.ops)
    report = {
        "nodes": spec.nodes,
        "operations": len(spec.operations),
        "kinds": len(spec.kinds),
        "edges": edges,
        "quarter_active": active,
        "configurations": str(combos),
        "configurations_sci": format_scientific(combos),
        "darts_configurations": str(darts),
        "darts_configurations_sci": format_scientific(darts),
    }
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(f"edges: {edges}")
        print(f"configurations C({edges}, {active}): {combos}")
        print(f"  approx {format_scientific(combos)}")
        print(f"darts configurations ({args.ops} ops): {darts}")
        print(f"  approx {format_scientific(darts)}")
    if args.out is not None:
        _write_json(Path(args.out) / "count.json", report)
    return EXIT_OK


def cmd_dft(args) -> int:
    cfg, _ = _load(args)
    oracle = build_oracle(cfg.oracle)
    if oracle.n > EXACT_TRANSFORM_CAP:
        raise ConfigError(
            f"dft: oracle dimension {oracle.n} exceeds the exact-transform cap "
            f"{EXACT_TRANSFORM_CAP}"
        )
    expansion = exact_transform(oracle, oracle.n)
    out = Path(args.out)
    _write_json(out / "expansion.json", expansion.to_json_dict())
    _log(f"dft: {len(expansion)} terms -> {out / 'expansion.json'}")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="path to a JSON run config")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conas",
        description="compressive-sensing search over Boolean architecture encodings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="run the multi-stage search")
    _add_common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("stages", help="per-stage measurement statistics CSV")
    _add_common(p)
    p.set_defaults(func=cmd_stages)

    p = sub.add_parser("phase", help="support-recovery rate over a measurement grid")
    _add_common(p)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("count", help="search-space size report")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--ops", type=int, required=True, help="number of operations")
    p.add_argument("--kinds", type=int, default=2)
    p.add_argument("--inputs", type=int, default=2)
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.add_argument("--out", default=None, help="also write count.json here")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("dft", help="exact transform of a configured oracle")
    _add_common(p)
    p.set_defaults(func=cmd_dft)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _log(f"error: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""Batch experiment harness: replications over problems x variants x seeds.

Writes a combined long-format CSV (problem,variant,seed,n,k,regret,
walltime_ms), one regret-curve CSV per problem with per-interaction means and
standard errors, and an errors CSV for replications that failed (failures are
isolated; the batch continues).  Replications are independent and run in a
process pool; outputs are deterministic for a fixed batch configuration.
"""

from __future__ import annotations

import json
import math
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .dm import NOISE_LOGISTIC, NOISE_NONE, DmConfig, SimulatedDm, calibrate_noise
from .engine import EngineError, child_seed, parse_variant, run_session
from .evolution import ParetoApproximation, approximate_pareto
from .ground_truth import true_optimal_utility
from .problems import default_utility, make_problem

PAPER_NSGA2 = (200, 500)
PAPER_NSGA3 = (1500, 2500)


@dataclass
class BatchConfig:
    problems: list
    variants: list  # labels like "int-obj"; suffixes: -mono, -rand
    seeds: list
    budget: int = 50
    initial_pairs: int | None = None
    regret_ks: tuple = (1,)
    menu_k: int = 1
    noise_target: float | None = None  # None = noise-free responses
    monotonicity_count: int = 64  # used when enabled
    monotonicity_delta: float = 2.0
    mono_all: bool = False  # enable virtual pairs for every variant
    candidate_policy: str = "queried-points"
    fit_iters: int = 600
    mc_samples: int = 256
    restarts: int = 8
    eval_budget: int = 2000
    menu_mc_samples: int = 8192
    pareto_population: int | None = None  # None = paper defaults by m
    pareto_generations: int | None = None
    pareto_seed: int = 0
    pareto_csv: str | None = None  # externally supplied approximation
    out_dir: str = "results"
    workers: int | None = None
    extra: dict = field(default_factory=dict)


def _variant_config(label: str, cfg: BatchConfig, problem):
    parts = label.split("-")
    base = "-".join(parts[:2])
    flags = set(parts[2:])
    unknown = flags - {"mono", "rand"}
    if unknown:
        raise EngineError(f"unknown variant flags {sorted(unknown)} in {label!r}")
    mono_on = "mono" in flags or cfg.mono_all
    return parse_variant(
        base,
        budget=cfg.budget,
        initial_pairs=cfg.initial_pairs,
        menu_k=cfg.menu_k,
        monotonicity_count=cfg.monotonicity_count if mono_on else 0,
        monotonicity_delta=cfg.monotonicity_delta,
        query_policy="random" if "rand" in flags else "acquisition",
        fit_iters=cfg.fit_iters,
        mc_samples=cfg.mc_samples,
        restarts=cfg.restarts,
        eval_budget=cfg.eval_budget,
        menu_mc_samples=cfg.menu_mc_samples,
    )


def pareto_cache_path(cfg: BatchConfig, problem_name: str, algo: str, pop: int, gens: int):
    name = f"pareto_{problem_name}_{algo}_{pop}x{gens}_s{cfg.pareto_seed}.csv"
    return os.path.join(cfg.out_dir, name)


def ensure_pareto(cfg: BatchConfig, problem_name: str):
    """Compute (or load the cached) Pareto approximation for one problem."""
    problem = make_problem(problem_name)
    if cfg.pareto_csv:
        pa = ParetoApproximation.from_csv(cfg.pareto_csv, problem.d, problem.m)
        return pa, cfg.pareto_csv
    algo = "nsga2" if problem.m <= 3 else "nsga3"
    pop, gens = (PAPER_NSGA2 if algo == "nsga2" else PAPER_NSGA3)
    pop = cfg.pareto_population or pop
    gens = cfg.pareto_generations or gens
    path = pareto_cache_path(cfg, problem_name, algo, pop, gens)
    if os.path.exists(path):
        return ParetoApproximation.from_csv(path, problem.d, problem.m), path
    pa = approximate_pareto(problem, algo, pop, gens, cfg.pareto_seed)
    pa.to_csv(path, problem)
    return pa, path


def _replication(payload: dict) -> dict:
    """One replication; runs inside a worker process."""
    try:
        problem = make_problem(payload["problem"])
        utility = default_utility(problem)
        cfg = BatchConfig(**payload["batch"])
        variant = _variant_config(payload["variant"], cfg, problem)
        pareto = None
        if payload.get("pareto_path"):
            pareto = ParetoApproximation.from_csv(
                payload["pareto_path"], problem.d, problem.m
            )
        if payload["noise_level"] is None:
            dm_cfg = DmConfig(utility, NOISE_NONE, None, payload["dm_seed"])
        else:
            dm_cfg = DmConfig(
                utility, NOISE_LOGISTIC, payload["noise_level"], payload["dm_seed"]
            )
        result = run_session(
            problem,
            variant,
            SimulatedDm(dm_cfg),
            utility,
            seed=payload["seed"],
            pareto=pareto,
            regret_ks=tuple(cfg.regret_ks),
            candidate_policy=cfg.candidate_policy,
            u_star=payload["u_star"],
        )
        rows = [
            {
                "problem": payload["problem"],
                "variant": payload["variant"],
                "seed": payload["seed"],
                **row,
            }
            for row in result.trace
        ]
        return {"ok": True, "rows": rows}
    except Exception as exc:  # isolate the failure, keep the batch running
        return {
            "ok": False,
            "problem": payload.get("problem"),
            "variant": payload.get("variant"),
            "seed": payload.get("seed"),
            "error": f"{type(exc).__name__}: {exc}",
            "trace": traceback.format_exc(),
        }


def run_experiment(cfg: BatchConfig) -> dict:
    """Run the batch and write the CSV artifacts; returns their paths."""
    os.makedirs(cfg.out_dir, exist_ok=True)

    pareto_paths = {}
    if any(v.startswith("post") for v in cfg.variants):
        for name in cfg.problems:
            _, path = ensure_pareto(cfg, name)
            pareto_paths[name] = path

    noise_levels = {}
    noise_cache = os.path.join(cfg.out_dir, "noise_cache.json")
    for name in cfg.problems:
        if cfg.noise_target is None:
            noise_levels[name] = None
        else:
            problem = make_problem(name)
            noise_levels[name] = calibrate_noise(
                problem,
                default_utility(problem),
                cfg.noise_target,
                seed=0,
                cache_path=noise_cache,
            )

    u_stars = {
        name: true_optimal_utility(make_problem(name), default_utility(make_problem(name)))
        for name in cfg.problems
    }

    batch_doc = {
        key: val
        for key, val in cfg.__dict__.items()
        if key not in ("extra",)
    }
    tasks = []
    for problem in cfg.problems:
        for variant in cfg.variants:
            for seed in cfg.seeds:
                tasks.append(
                    {
                        "problem": problem,
                        "variant": variant,
                        "seed": int(seed),
                        "dm_seed": child_seed(int(seed), 1),
                        "noise_level": noise_levels[problem],
                        "u_star": u_stars[problem],
                        "pareto_path": pareto_paths.get(problem)
                        if variant.startswith("post")
                        else None,
                        "batch": batch_doc,
                    }
                )

    workers = cfg.workers or os.cpu_count() or 1
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_replication, tasks))
    else:
        outcomes = [_replication(t) for t in tasks]

    rows = []
    errors = []
    for out in outcomes:
        if out["ok"]:
            rows.extend(out["rows"])
        else:
            errors.append(out)

    paths = {}
    long_path = os.path.join(cfg.out_dir, "regret_long.csv")
    with open(long_path, "w") as fh:
        fh.write("problem,variant,seed,n,k,regret,walltime_ms\n")
        for row in rows:
            fh.write(
                f"{row['problem']},{row['variant']},{row['seed']},{row['n']},"
                f"{row['k']},{row['regret']!r},{row['walltime_ms']!r}\n"
            )
    paths["long"] = long_path

    groups: dict = {}
    for row in rows:
        key = (row["problem"], row["variant"], row["n"], row["k"])
        groups.setdefault(key, []).append(row["regret"])
    for problem in cfg.problems:
        curve_path = os.path.join(cfg.out_dir, f"curves_{problem}.csv")
        with open(curve_path, "w") as fh:
            fh.write("variant,n,k,mean_regret,stderr,n_seeds\n")
            for (prob, variant, n, k), vals in sorted(groups.items()):
                if prob != problem:
                    continue
                mean = sum(vals) / len(vals)
                if len(vals) > 1:
                    var = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
                    stderr = math.sqrt(var / len(vals))
                else:
                    stderr = 0.0
                fh.write(f"{variant},{n},{k},{mean!r},{stderr!r},{len(vals)}\n")
        paths[f"curves_{problem}"] = curve_path

    error_path = os.path.join(cfg.out_dir, "errors.csv")
    if errors:
        with open(error_path, "w") as fh:
            fh.write("problem,variant,seed,error\n")
            for err in errors:
                msg = err["error"].replace(",", ";")
                fh.write(f"{err['problem']},{err['variant']},{err['seed']},{msg}\n")
        paths["errors"] = error_path

    manifest = os.path.join(cfg.out_dir, "batch.json")
    with open(manifest, "w") as fh:
        json.dump(
            {"batch": batch_doc, "n_rows": len(rows), "n_errors": len(errors)},
            fh,
            indent=1,
            sort_keys=True,
        )
    paths["manifest"] = manifest
    return paths

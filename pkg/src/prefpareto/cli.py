"""Command-line entry point: experiment runs, Pareto fronts, replay, serving."""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__


def parse_seeds(text: str) -> list[int]:
    """Accepts "0..19" (inclusive range) or "0,3,7"."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",") if v.strip() != ""]


def parse_mono(text: str) -> tuple[int, float]:
    """Accepts "COUNT:DELTA", e.g. "64:2"."""
    count, delta = text.split(":")
    return int(count), float(delta)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elicit",
        description="Preference elicitation for multi-objective decision support",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a batch of simulated elicitation sessions")
    run.add_argument("--problem", action="append", required=True,
                     help="problem id like dtlz2-9-6 (repeatable)")
    run.add_argument("--variant", action="append", required=True,
                     help="int-obj | int-dec | post-obj | post-dec "
                          "(+ optional -mono / -rand suffixes; repeatable)")
    run.add_argument("--budget", type=int, default=50)
    run.add_argument("--initial-pairs", type=int, default=None)
    run.add_argument("--menu-size", type=int, default=1)
    run.add_argument("--regret-ks", default="1",
                     help="comma-separated menu sizes tracked in the regret trace")
    run.add_argument("--noise", type=float, default=None,
                     help="target DM error rate (e.g. 0.15); omit for noise-free")
    run.add_argument("--mono", default=None, metavar="COUNT:DELTA",
                     help="enable virtual dominance pairs for all variants")
    run.add_argument("--mono-pairs", type=int, default=None,
                     help="virtual pair count (alternative to --mono)")
    run.add_argument("--mono-delta", type=float, default=None,
                     help="virtual pair box expansion (alternative to --mono)")
    run.add_argument("--pareto-csv", default=None,
                     help="externally computed Pareto approximation for "
                          "post-* variants (CSV in the `elicit pareto` layout)")
    run.add_argument("--seeds", default="0..19")
    run.add_argument("--out", default="results")
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--candidate-policy", default="queried-points",
                     choices=["queried-points", "full-space"])
    run.add_argument("--fit-iters", type=int, default=600)
    run.add_argument("--mc-samples", type=int, default=256)
    run.add_argument("--restarts", type=int, default=8)
    run.add_argument("--eval-budget", type=int, default=2000)
    run.add_argument("--pareto-pop", type=int, default=None)
    run.add_argument("--pareto-gens", type=int, default=None)

    pareto = sub.add_parser("pareto", help="precompute a Pareto approximation")
    pareto.add_argument("--problem", required=True)
    pareto.add_argument("--algo", choices=["nsga2", "nsga3"], default=None)
    pareto.add_argument("--pop", type=int, default=None)
    pareto.add_argument("--gens", type=int, default=None)
    pareto.add_argument("--seed", type=int, default=0)
    pareto.add_argument("--out", required=True)

    replay = sub.add_parser("replay", help="recompute a session from its event log")
    replay.add_argument("log", help="path to the session event log")
    replay.add_argument("--tolerance", type=float, default=1e-12)

    serve = sub.add_parser("serve", help="serve live sessions over HTTP")
    serve.add_argument("--bind", default=None, help="host:port (default from PP_BIND_ADDR)")
    serve.add_argument("--data-dir", default=None, help="default from PP_DATA_DIR")
    serve.add_argument("--allow-early", action="store_true",
                       help="serve menus before the budget is exhausted")

    truth = sub.add_parser("truth", help="estimate the reference optimum of a problem")
    truth.add_argument("--problem", required=True)
    truth.add_argument("--evals", type=int, default=1_000_000)
    truth.add_argument("--seed", type=int, default=0)
    truth.add_argument("--write", default=None,
                       help="JSON table to create or extend with the result")
    return parser


def cmd_run(args) -> int:
    from .experiments import BatchConfig, run_experiment

    mono_all = args.mono is not None or args.mono_pairs is not None
    mono_count, mono_delta = parse_mono(args.mono) if args.mono else (64, 2.0)
    if args.mono_pairs is not None:
        mono_count = args.mono_pairs
    if args.mono_delta is not None:
        mono_delta = args.mono_delta
    cfg = BatchConfig(
        problems=args.problem,
        variants=args.variant,
        seeds=parse_seeds(args.seeds),
        budget=args.budget,
        initial_pairs=args.initial_pairs,
        regret_ks=tuple(int(k) for k in args.regret_ks.split(",")),
        menu_k=args.menu_size,
        noise_target=args.noise,
        monotonicity_count=mono_count,
        monotonicity_delta=mono_delta,
        mono_all=mono_all,
        candidate_policy=args.candidate_policy,
        fit_iters=args.fit_iters,
        mc_samples=args.mc_samples,
        restarts=args.restarts,
        eval_budget=args.eval_budget,
        pareto_population=args.pareto_pop,
        pareto_generations=args.pareto_gens,
        pareto_csv=args.pareto_csv,
        out_dir=args.out,
        workers=args.workers,
    )
    paths = run_experiment(cfg)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return 0


def cmd_pareto(args) -> int:
    from .evolution import approximate_pareto
    from .problems import make_problem

    problem = make_problem(args.problem)
    algo = args.algo or ("nsga2" if problem.m <= 3 else "nsga3")
    pop = args.pop or (200 if algo == "nsga2" else 1500)
    gens = args.gens or (500 if algo == "nsga2" else 2500)
    pa = approximate_pareto(problem, algo, pop, gens, args.seed)
    pa.to_csv(args.out, problem)
    print(f"{len(pa)} non-dominated points -> {args.out}")
    return 0


def cmd_replay(args) -> int:
    from .engine import replay_session
    from .problems import default_utility, problem_from_dict
    from .engine import read_event_log

    events = read_event_log(args.log)
    problem = problem_from_dict(events[0]["problem"])
    report = replay_session(events, utility=default_utility(problem))
    devs = {
        "initial": report.max_initial_deviation,
        "query": report.max_query_deviation,
        "hyperparams": report.max_hyperparam_deviation,
        "menu": report.max_menu_deviation,
    }
    print(json.dumps(devs, indent=1))
    ok = all(v <= args.tolerance for v in devs.values())
    print("replay " + ("MATCHES" if ok else "DIVERGED"))
    return 0 if ok else 1


def cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import create_app

    bind = args.bind or os.environ.get("PP_BIND_ADDR", "127.0.0.1:8080")
    host, _, port = bind.rpartition(":")
    app = create_app(data_dir=args.data_dir, allow_early_menu=args.allow_early)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def cmd_truth(args) -> int:
    from .ground_truth import compute_true_optimum, optimum_key
    from .problems import default_utility, make_problem

    problem = make_problem(args.problem)
    utility = default_utility(problem)
    entry = compute_true_optimum(problem, utility, evals=args.evals, seed=args.seed)
    print(json.dumps({"value": entry["value"], "method": entry["method"]}, indent=1))
    if args.write:
        import os

        table = {}
        if os.path.exists(args.write):
            with open(args.write) as fh:
                table = json.load(fh)
        table[optimum_key(problem, utility)] = entry
        with open(args.write, "w") as fh:
            json.dump(table, fh, indent=1, sort_keys=True)
        print(f"written to {args.write}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": cmd_run,
        "pareto": cmd_pareto,
        "replay": cmd_replay,
        "serve": cmd_serve,
        "truth": cmd_truth,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

"""Elicitation sessions: the interactive loop, regret tracking, experiments.

One session runs the loop: draw an initial comparison set, fit the utility
posterior, then repeat (pick the acquisition-maximizing query, collect the
response, regenerate virtual dominance pairs if enabled, refit) for a fixed
interaction budget, and finally report a menu.  Four variants come from two
independent switches: interactive search over the whole decision box versus
a-posteriori search restricted to a precomputed Pareto approximation, and
modeling utility over objective vectors versus decision vectors.

Sessions are event-sourced: every mutation appends one JSON record to an
ordered log (schema-version header first), and replaying a log reproduces
queries, posterior hyperparameters, and menus bit-compatibly because every
random draw is tied to (session seed, stream, step index).
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import acquisition as acq
from . import menus as menus_mod
from .dm import SimulatedDm
from .evolution import ParetoApproximation
from .gp import (
    DECISION_SPACE,
    OBJECTIVE_SPACE,
    ORIGIN_ELICITED,
    ORIGIN_INITIAL,
    FitConfig,
    PreferenceDataset,
    QueryPair,
    Response,
    UtilityPosterior,
    fit,
)
from .ground_truth import true_optimal_utility
from .problems import (
    ProblemSpec,
    UtilitySpec,
    evaluate_objectives_batch,
    make_problem,
    orientation_signs,
    problem_from_dict,
    problem_to_dict,
    true_utility,
)

SCHEMA_VERSION = 1

INTERACTIVE = "interactive"
A_POSTERIORI = "a-posteriori"

POLICY_ACQUISITION = "acquisition"
POLICY_RANDOM = "random"

COLLECTING_INITIAL = "collecting-initial"
READY = "ready-for-query"
AWAITING = "awaiting-response"
FINISHED = "finished"


class EngineError(ValueError):
    """Invalid session operation or configuration."""


def child_seed(seed: int, *tags) -> int:
    """Stable derived seed for one random stream of a session."""
    state = np.random.SeedSequence([int(seed), *[int(t) for t in tags]])
    return int(state.generate_state(2, np.uint64)[0])


@dataclass(frozen=True)
class VariantConfig:
    """One cell of the variant grid plus its runtime knobs."""

    interaction: str = INTERACTIVE
    model_space: str = OBJECTIVE_SPACE
    budget: int = 50
    initial_pairs: int | None = None  # default 2(d+1)
    menu_k: int = 1
    monotonicity_count: int = 0  # 0 disables virtual pairs
    monotonicity_delta: float = 2.0
    query_policy: str = POLICY_ACQUISITION
    fit_iters: int = 600
    sobol_min: int = 64
    mc_samples: int = 256
    restarts: int = 8
    eval_budget: int = 2000
    menu_mc_samples: int = 8192

    def __post_init__(self):
        if self.interaction not in (INTERACTIVE, A_POSTERIORI):
            raise EngineError(f"unknown interaction mode {self.interaction!r}")
        if self.model_space not in (OBJECTIVE_SPACE, DECISION_SPACE):
            raise EngineError(f"unknown model space {self.model_space!r}")
        if self.budget < 0:
            raise EngineError("budget must be >= 0")
        if self.initial_pairs is not None and self.initial_pairs < 1:
            raise EngineError("initial_pairs must be >= 1")
        if self.menu_k < 1:
            raise EngineError("menu_k must be >= 1")
        if self.monotonicity_count < 0 or self.monotonicity_delta < 0:
            raise EngineError("monotonicity settings must be non-negative")
        if self.monotonicity_count > 0 and self.model_space != OBJECTIVE_SPACE:
            raise EngineError(
                "virtual dominance pairs live in objective space; "
                "monotonicity requires the objective-space model"
            )
        if self.query_policy not in (POLICY_ACQUISITION, POLICY_RANDOM):
            raise EngineError(f"unknown query policy {self.query_policy!r}")

    @property
    def label(self) -> str:
        tag = ("int" if self.interaction == INTERACTIVE else "post") + "-" + (
            "obj" if self.model_space == OBJECTIVE_SPACE else "dec"
        )
        if self.monotonicity_count > 0:
            tag += "-mono"
        if self.query_policy == POLICY_RANDOM:
            tag += "-rand"
        return tag

    def to_dict(self) -> dict:
        return {
            "interaction": self.interaction,
            "model_space": self.model_space,
            "budget": self.budget,
            "initial_pairs": self.initial_pairs,
            "menu_k": self.menu_k,
            "monotonicity_count": self.monotonicity_count,
            "monotonicity_delta": self.monotonicity_delta,
            "query_policy": self.query_policy,
            "fit_iters": self.fit_iters,
            "sobol_min": self.sobol_min,
            "mc_samples": self.mc_samples,
            "restarts": self.restarts,
            "eval_budget": self.eval_budget,
            "menu_mc_samples": self.menu_mc_samples,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "VariantConfig":
        return cls(**doc)


def parse_variant(label: str, **overrides) -> VariantConfig:
    """Build a VariantConfig from a short label like ``int-obj``."""
    parts = label.split("-")
    if len(parts) < 2:
        raise EngineError(f"bad variant label {label!r}")
    inter = {"int": INTERACTIVE, "post": A_POSTERIORI}.get(parts[0])
    space = {"obj": OBJECTIVE_SPACE, "dec": DECISION_SPACE}.get(parts[1])
    if inter is None or space is None:
        raise EngineError(f"bad variant label {label!r}")
    return VariantConfig(interaction=inter, model_space=space, **overrides)


@dataclass
class Comparison:
    """One answered query with both representations kept."""

    x1: np.ndarray
    x2: np.ndarray
    y1_raw: np.ndarray
    y2_raw: np.ndarray
    choice: int
    origin: str


@dataclass
class PendingQuery:
    seq: int
    origin: str
    x1: np.ndarray
    x2: np.ndarray
    y1_raw: np.ndarray
    y2_raw: np.ndarray


@dataclass
class SessionState:
    problem: ProblemSpec
    variant: VariantConfig
    seed: int
    dm: SimulatedDm | None = None
    pareto: ParetoApproximation | None = None
    comparisons: list = field(default_factory=list)
    posterior: UtilityPosterior | None = None
    interaction_index: int = 0
    refit_count: int = 0
    status: str = COLLECTING_INITIAL
    pending: PendingQuery | None = None
    pending_initial: list = field(default_factory=list)
    next_seq: int = 0
    events: list = field(default_factory=list)
    objective_evals: int = 0
    search_objective_evals: int = 0

    @property
    def signs(self) -> np.ndarray:
        return orientation_signs(self.problem.orientation)

    def oriented(self, y_raw) -> np.ndarray:
        return np.asarray(y_raw, dtype=float) * self.signs

    def model_inputs(self, comp: Comparison) -> tuple[np.ndarray, np.ndarray]:
        if self.variant.model_space == OBJECTIVE_SPACE:
            return self.oriented(comp.y1_raw), self.oriented(comp.y2_raw)
        return comp.x1, comp.x2

    def seen_oriented_objectives(self) -> np.ndarray:
        rows = []
        for comp in self.comparisons:
            rows.append(self.oriented(comp.y1_raw))
            rows.append(self.oriented(comp.y2_raw))
        return np.asarray(rows)

    def queried_decisions(self) -> tuple[np.ndarray, np.ndarray]:
        """All queried decision points with their raw objectives (dedup)."""
        X = []
        Y = []
        for comp in self.comparisons:
            X.extend([comp.x1, comp.x2])
            Y.extend([comp.y1_raw, comp.y2_raw])
        X = np.asarray(X)
        Y = np.asarray(Y)
        _, keep = np.unique(X, axis=0, return_index=True)
        keep = np.sort(keep)
        return X[keep], Y[keep]

    def evaluate(self, X, during_search: bool = False) -> np.ndarray:
        F = evaluate_objectives_batch(self.problem, np.atleast_2d(X))
        self.objective_evals += F.shape[0]
        if during_search:
            self.search_objective_evals += F.shape[0]
        return F

    def log(self, kind: str, **payload) -> None:
        self.events.append({"kind": kind, **payload})


def _vec(v) -> list:
    return [float(x) for x in np.asarray(v, dtype=float)]


def _build_dataset(state: SessionState) -> PreferenceDataset:
    ds = PreferenceDataset()
    for comp in state.comparisons:
        a, b = state.model_inputs(comp)
        ds.add(QueryPair(a, b, comp.origin), Response(comp.choice))
    cfg = state.variant
    if cfg.monotonicity_count > 0:
        pairs = acq.generate_monotonicity_pairs(
            state.seen_oriented_objectives(),
            cfg.monotonicity_count,
            cfg.monotonicity_delta,
            child_seed(state.seed, 4, state.refit_count),
        )
        for pair in pairs:
            ds.add(pair, Response(1))
    return ds


def _refit(state: SessionState) -> None:
    cfg = state.variant
    fit_cfg = FitConfig(
        input_space=cfg.model_space,
        bounds=state.problem.bounds if cfg.model_space == DECISION_SPACE else None,
        max_iters=cfg.fit_iters,
        sobol_min=cfg.sobol_min,
        seed=child_seed(state.seed, 2, state.refit_count),
    )
    dataset = _build_dataset(state)
    state.posterior = fit(dataset, fit_cfg)
    state.refit_count += 1
    hp = state.posterior.hyperparams
    state.log(
        "refit",
        index=state.refit_count - 1,
        dataset_size=len(dataset),
        n_inducing=int(state.posterior.inducing.shape[0]),
        lengthscales=_vec(hp.lengthscales),
        signal_variance=float(hp.signal_variance),
        noise_level=float(hp.noise_level),
        elbo=float(state.posterior.elbo_value),
        converged=bool(state.posterior.converged),
    )


def _draw_initial_pairs(state: SessionState) -> list[PendingQuery]:
    cfg = state.variant
    n_init = cfg.initial_pairs or 2 * (state.problem.d + 1)
    rng = np.random.default_rng(child_seed(state.seed, 0))
    queries = []
    if cfg.interaction == INTERACTIVE:
        X = rng.uniform(
            state.problem.lower, state.problem.upper, size=(n_init, 2, state.problem.d)
        )
        F = state.evaluate(X.reshape(-1, state.problem.d)).reshape(n_init, 2, -1)
        for i in range(n_init):
            queries.append(
                PendingQuery(i, ORIGIN_INITIAL, X[i, 0], X[i, 1], F[i, 0], F[i, 1])
            )
    else:
        n_cand = len(state.pareto)
        if n_cand < 2:
            raise EngineError("Pareto approximation needs at least two points")
        for i in range(n_init):
            a = int(rng.integers(0, n_cand))
            b = int(rng.integers(0, n_cand - 1))
            if b >= a:
                b += 1
            queries.append(
                PendingQuery(
                    i, ORIGIN_INITIAL,
                    state.pareto.decisions[a], state.pareto.decisions[b],
                    state.pareto.objectives[a], state.pareto.objectives[b],
                )
            )
    return queries


def initialize_session(
    problem: ProblemSpec,
    variant: VariantConfig,
    dm: SimulatedDm | None = None,
    pareto: ParetoApproximation | None = None,
    seed: int = 0,
) -> SessionState:
    """Draw and (for a simulated DM) answer the initial comparisons, then
    fit the first posterior.  Without a DM the session stays in the
    collecting-initial phase and is driven through next/record calls."""
    if variant.interaction == A_POSTERIORI and pareto is None:
        raise EngineError("a-posteriori sessions need a Pareto approximation")
    state = SessionState(problem, variant, int(seed), dm=dm, pareto=pareto)
    state.log(
        "header",
        schema_version=SCHEMA_VERSION,
        problem=problem_to_dict(problem),
        variant=variant.to_dict(),
        seed=int(seed),
        pareto=None
        if pareto is None
        else {
            "decisions": [_vec(r) for r in pareto.decisions],
            "objectives": [_vec(r) for r in pareto.objectives],
            "generator": pareto.generator,
            "generations": pareto.generations,
            "population": pareto.population,
        },
    )
    queries = _draw_initial_pairs(state)
    for q in queries:
        state.log(
            "initial-pair", seq=q.seq, x1=_vec(q.x1), x2=_vec(q.x2),
            y1=_vec(q.y1_raw), y2=_vec(q.y2_raw),
        )
    state.next_seq = len(queries)
    if dm is None:
        state.pending_initial = queries
        state.pending = queries[0]
        state.status = COLLECTING_INITIAL
        return state
    for q in queries:
        resp = dm.respond(state.oriented(q.y1_raw), state.oriented(q.y2_raw))
        state.comparisons.append(
            Comparison(q.x1, q.x2, q.y1_raw, q.y2_raw, resp.choice, ORIGIN_INITIAL)
        )
        state.log("response", seq=q.seq, choice=resp.choice, origin=ORIGIN_INITIAL)
    _refit(state)
    _advance(state)
    return state


def _advance(state: SessionState) -> None:
    if state.interaction_index >= state.variant.budget:
        if state.status != FINISHED:
            state.status = FINISHED
            state.log("finished")
    else:
        state.status = READY


def _acquisition_domain(state: SessionState):
    cfg = state.variant
    if cfg.interaction == A_POSTERIORI:
        if cfg.model_space == OBJECTIVE_SPACE:
            inputs = state.pareto.objectives * state.signs[None, :]
        else:
            inputs = state.pareto.decisions
        return acq.CandidateSet(state.pareto.decisions, inputs)
    if cfg.model_space == OBJECTIVE_SPACE:
        def to_input(X):
            return state.evaluate(X, during_search=True) * state.signs[None, :]
    else:
        to_input = None
    return acq.BoxDomain(state.problem.bounds, to_input)


def next_query(state: SessionState) -> PendingQuery:
    """Pick the next query (acquisition argmax or the random baseline)."""
    if state.status != READY:
        raise EngineError(f"cannot issue a query while {state.status}")
    if state.interaction_index >= state.variant.budget:
        raise EngineError("interaction budget exhausted")
    cfg = state.variant
    step = state.interaction_index
    seed = child_seed(state.seed, 3, step)
    if cfg.query_policy == POLICY_RANDOM:
        rng = np.random.default_rng(seed)
        if cfg.interaction == A_POSTERIORI:
            n_cand = len(state.pareto)
            a = int(rng.integers(0, n_cand))
            b = int(rng.integers(0, n_cand - 1))
            if b >= a:
                b += 1
            x1, x2 = state.pareto.decisions[a], state.pareto.decisions[b]
            y1, y2 = state.pareto.objectives[a], state.pareto.objectives[b]
        else:
            pair = rng.uniform(
                state.problem.lower, state.problem.upper, size=(2, state.problem.d)
            )
            x1, x2 = pair[0], pair[1]
            F = state.evaluate(pair)
            y1, y2 = F[0], F[1]
    else:
        domain = _acquisition_domain(state)
        choice = acq.maximize_qeubo(
            state.posterior,
            domain,
            acq.AcquisitionConfig(
                mc_samples=cfg.mc_samples,
                restarts=cfg.restarts,
                eval_budget=cfg.eval_budget,
                seed=seed,
            ),
        )
        x1, x2 = choice.first_decision, choice.second_decision
        if cfg.interaction == A_POSTERIORI:
            idx1 = _find_row(state.pareto.decisions, x1)
            idx2 = _find_row(state.pareto.decisions, x2)
            y1 = state.pareto.objectives[idx1]
            y2 = state.pareto.objectives[idx2]
        else:
            F = state.evaluate(np.stack([x1, x2]))
            y1, y2 = F[0], F[1]
    pending = PendingQuery(state.next_seq, ORIGIN_ELICITED, x1, x2, y1, y2)
    state.next_seq += 1
    state.pending = pending
    state.status = AWAITING
    state.log(
        "query", seq=pending.seq, x1=_vec(x1), x2=_vec(x2), y1=_vec(y1), y2=_vec(y2),
    )
    return pending


def _find_row(M: np.ndarray, row: np.ndarray) -> int:
    hits = np.flatnonzero(np.all(M == row[None, :], axis=1))
    if hits.size == 0:
        raise EngineError("decision not found among candidates")
    return int(hits[0])


def accept_response(state: SessionState, response) -> None:
    """Record the response for the pending query (cheap, no refit).

    Split from :func:`complete_interaction` so a service can persist the
    accepted response durably before the slow refit runs off-path.
    """
    if state.pending is None:
        raise EngineError("no pending query to answer")
    choice = response.choice if isinstance(response, Response) else int(response)
    if choice not in (1, 2):
        raise EngineError(f"choice must be 1 or 2, got {choice}")
    q = state.pending
    state.comparisons.append(
        Comparison(q.x1, q.x2, q.y1_raw, q.y2_raw, choice, q.origin)
    )
    state.log("response", seq=q.seq, choice=choice, origin=q.origin)
    if q.origin == ORIGIN_INITIAL:
        state.pending_initial = state.pending_initial[1:]
        state.pending = state.pending_initial[0] if state.pending_initial else None
    else:
        state.pending = None
        state.interaction_index += 1


def complete_interaction(state: SessionState) -> SessionState:
    """Refit and advance after an accepted response (no-op while more
    initial pairs are still waiting for answers)."""
    if state.pending is not None and state.status == COLLECTING_INITIAL:
        return state
    _refit(state)
    _advance(state)
    return state


def record_response(state: SessionState, response) -> SessionState:
    """Append the response for the pending query, then refit (or move to the
    next initial pair while the starting dataset is still being collected)."""
    accept_response(state, response)
    return complete_interaction(state)


# ---------------------------------------------------------------------------
# Regret
# ---------------------------------------------------------------------------


def _true_utility_of_raw(state: SessionState, utility: UtilitySpec, y_raw) -> float:
    return true_utility(utility, state.oriented(y_raw))


def regret_trace_at(
    state: SessionState,
    utility: UtilitySpec,
    u_star: float,
    ks,
    candidate_policy: str = "queried-points",
) -> dict:
    """Regret for each requested menu size at the current posterior.

    One greedy menu of size max(ks) is built; smaller sizes read nested
    prefixes, so regret is non-increasing in k by construction.
    """
    ks = sorted(set(int(k) for k in ks))
    cfg = state.variant
    seed = child_seed(state.seed, 6, state.interaction_index)
    menu_cfg = menus_mod.MenuConfig(mc_samples=cfg.menu_mc_samples, seed=seed)
    if candidate_policy == "queried-points":
        X, Y_raw = state.queried_decisions()
        if cfg.model_space == OBJECTIVE_SPACE:
            inputs = Y_raw * state.signs[None, :]
        else:
            inputs = X
        domain = acq.CandidateSet(X, inputs)
        result = menus_mod.select_menu(state.posterior, domain, max(ks), menu_cfg)
        menu_Y = Y_raw[result.indices]
    elif candidate_policy == "full-space":
        domain = _acquisition_domain(state)
        if isinstance(domain, acq.CandidateSet):
            result = menus_mod.select_menu(state.posterior, domain, max(ks), menu_cfg)
            menu_Y = state.pareto.objectives[result.indices]
        else:
            result = menus_mod.select_menu(state.posterior, domain, max(ks), menu_cfg)
            menu_Y = state.evaluate(result.decisions)
    else:
        raise EngineError(f"unknown candidate policy {candidate_policy!r}")
    true_vals = [ _true_utility_of_raw(state, utility, y) for y in menu_Y ]
    out = {}
    best = -np.inf
    j = 0
    for k in range(1, max(ks) + 1):
        best = max(best, true_vals[k - 1])
        if j < len(ks) and k == ks[j]:
            out[ks[j]] = float(u_star - best)
            j += 1
    return out


def compute_regret(
    state: SessionState,
    utility: UtilitySpec,
    k: int = 1,
    candidate_policy: str = "queried-points",
    u_star: float | None = None,
) -> float:
    """Gap between the reference optimum and the best true utility in the
    size-k menu recommended from the current posterior."""
    if u_star is None:
        u_star = true_optimal_utility(state.problem, utility)
    return regret_trace_at(state, utility, u_star, [k], candidate_policy)[k]


# ---------------------------------------------------------------------------
# Whole-session driver and replay
# ---------------------------------------------------------------------------


@dataclass
class SessionResult:
    state: SessionState
    trace: list  # rows: {"n": int, "k": int, "regret": float, "walltime_ms": float}
    menu: menus_mod.MenuResult | None


def run_session(
    problem: ProblemSpec,
    variant: VariantConfig,
    dm: SimulatedDm,
    utility: UtilitySpec,
    seed: int = 0,
    pareto: ParetoApproximation | None = None,
    regret_ks=(1,),
    candidate_policy: str = "queried-points",
    u_star: float | None = None,
    log_path=None,
) -> SessionResult:
    """Run one full simulated session and record the per-interaction regret."""
    if u_star is None:
        u_star = true_optimal_utility(problem, utility)
    t0 = time.perf_counter()
    state = initialize_session(problem, variant, dm=dm, pareto=pareto, seed=seed)
    trace = []

    def record(n):
        nonlocal t0
        regrets = regret_trace_at(state, utility, u_star, regret_ks, candidate_policy)
        wall = (time.perf_counter() - t0) * 1000.0
        t0 = time.perf_counter()
        for k in sorted(regrets):
            row = {"n": n, "k": k, "regret": regrets[k], "walltime_ms": wall}
            trace.append(row)
            state.log("regret", n=n, k=k, regret=regrets[k], walltime_ms=wall)

    record(0)
    for n in range(1, variant.budget + 1):
        q = next_query(state)
        resp = dm.respond(state.oriented(q.y1_raw), state.oriented(q.y2_raw))
        record_response(state, resp)
        record(n)

    menu = None
    if state.comparisons:
        X, Y_raw = state.queried_decisions()
        inputs = (
            Y_raw * state.signs[None, :]
            if variant.model_space == OBJECTIVE_SPACE
            else X
        )
        k = min(variant.menu_k, X.shape[0])
        menu = menus_mod.select_menu(
            state.posterior,
            acq.CandidateSet(X, inputs),
            k,
            menus_mod.MenuConfig(
                mc_samples=variant.menu_mc_samples,
                seed=child_seed(state.seed, 5, k),
            ),
        )
        state.log("menu", n=state.interaction_index, **menu.to_doc())
    if log_path is not None:
        write_event_log(state, log_path)
    return SessionResult(state, trace, menu)


def write_event_log(state: SessionState, path) -> None:
    with open(path, "w") as fh:
        for event in state.events:
            fh.write(json.dumps(event) + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def read_event_log(path) -> list[dict]:
    events = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(json.loads(line))
    if not events or events[0].get("kind") != "header":
        raise EngineError("event log must start with a header record")
    if events[0].get("schema_version") != SCHEMA_VERSION:
        raise EngineError("unsupported event-log schema version")
    return events


def restore_from_events(events: list[dict], dm: SimulatedDm | None = None) -> SessionState:
    """Rebuild a live session from its event log.

    Recorded responses are fed back through the engine, so posteriors and
    queries are recomputed deterministically; a trailing unanswered query is
    re-issued.  The caller owns fast-forwarding any attached DM.
    """
    header = events[0]
    if header.get("kind") != "header" or header.get("schema_version") != SCHEMA_VERSION:
        raise EngineError("event list must start with a schema header")
    problem = problem_from_dict(header["problem"])
    variant = VariantConfig.from_dict(header["variant"])
    pareto = None
    if header.get("pareto"):
        pdoc = header["pareto"]
        pareto = ParetoApproximation(
            np.asarray(pdoc["decisions"], dtype=float),
            np.asarray(pdoc["objectives"], dtype=float),
            pdoc["generator"],
            pdoc["generations"],
            pdoc["population"],
        )
    state = initialize_session(
        problem, variant, dm=None, pareto=pareto, seed=header["seed"]
    )
    responses = [e for e in events if e["kind"] == "response"]
    n_queries = sum(1 for e in events if e["kind"] == "query")
    n_elicited = 0
    for event in responses:
        if event["origin"] == ORIGIN_INITIAL:
            record_response(state, event["choice"])
        else:
            next_query(state)
            record_response(state, event["choice"])
            n_elicited += 1
    if n_queries > n_elicited and state.status == READY:
        next_query(state)
    state.dm = dm
    return state


@dataclass
class ReplayReport:
    state: SessionState
    max_initial_deviation: float
    max_query_deviation: float
    max_hyperparam_deviation: float
    max_menu_deviation: float
    trace: list


def replay_session(events_or_path, utility: UtilitySpec | None = None) -> ReplayReport:
    """Recompute a logged session from its recorded responses.

    Initial draws, acquisition queries, refits, and menus are recomputed
    deterministically and compared to the logged records; recorded regret
    walltimes are carried over so the reconstructed trace is identical.
    """
    events = (
        read_event_log(events_or_path)
        if not isinstance(events_or_path, list)
        else events_or_path
    )
    header = events[0]
    problem = problem_from_dict(header["problem"])
    variant = VariantConfig.from_dict(header["variant"])
    pareto = None
    if header.get("pareto"):
        pdoc = header["pareto"]
        pareto = ParetoApproximation(
            np.asarray(pdoc["decisions"], dtype=float),
            np.asarray(pdoc["objectives"], dtype=float),
            pdoc["generator"],
            pdoc["generations"],
            pdoc["population"],
        )
    responses = [e for e in events if e["kind"] == "response"]
    logged_initial = [e for e in events if e["kind"] == "initial-pair"]
    logged_queries = [e for e in events if e["kind"] == "query"]
    logged_refits = [e for e in events if e["kind"] == "refit"]
    logged_menus = [e for e in events if e["kind"] == "menu"]
    logged_regret = [e for e in events if e["kind"] == "regret"]

    state = initialize_session(
        problem, variant, dm=None, pareto=pareto, seed=header["seed"]
    )
    dev_init = 0.0
    replayed_initial = [e for e in state.events if e["kind"] == "initial-pair"]
    for a, b in zip(logged_initial, replayed_initial):
        for key in ("x1", "x2", "y1", "y2"):
            dev_init = max(
                dev_init,
                float(np.max(np.abs(np.asarray(a[key]) - np.asarray(b[key]))))
                if a[key]
                else 0.0,
            )

    trace = []
    by_n: dict = {}
    for event in logged_regret:
        by_n.setdefault(event["n"], []).append(event)
    u_star = (
        true_optimal_utility(problem, utility)
        if utility is not None and logged_regret
        else None
    )

    def recompute_regret(n):
        # regret is tied to the posterior after interaction n, so it must be
        # recomputed here, mid-replay, not from the final state
        if u_star is None or n not in by_n:
            return
        ks = [e["k"] for e in by_n[n]]
        regrets = regret_trace_at(state, utility, u_star, ks)
        for e in by_n[n]:
            trace.append(
                {
                    "n": n,
                    "k": e["k"],
                    "regret": regrets[e["k"]],
                    "walltime_ms": e["walltime_ms"],
                }
            )

    dev_query = 0.0
    for event in responses:
        if event["origin"] != ORIGIN_INITIAL:
            break
        record_response(state, event["choice"])
    recompute_regret(0)
    replayed_queries = []
    elicited = [e for e in responses if e["origin"] == ORIGIN_ELICITED]
    for event in elicited:
        q = next_query(state)
        replayed_queries.append(q)
        record_response(state, event["choice"])
        recompute_regret(state.interaction_index)
    for a, b in zip(logged_queries, replayed_queries):
        for key, val in (("x1", b.x1), ("x2", b.x2), ("y1", b.y1_raw), ("y2", b.y2_raw)):
            dev_query = max(
                dev_query, float(np.max(np.abs(np.asarray(a[key]) - val)))
            )

    dev_hyper = 0.0
    replayed_refits = [e for e in state.events if e["kind"] == "refit"]
    for a, b in zip(logged_refits, replayed_refits):
        for key in ("lengthscales", "signal_variance", "noise_level", "elbo"):
            dev_hyper = max(
                dev_hyper,
                float(np.max(np.abs(np.asarray(a[key]) - np.asarray(b[key])))),
            )

    dev_menu = 0.0
    if logged_menus:
        doc = logged_menus[-1]
        X, Y_raw = state.queried_decisions()
        inputs = (
            Y_raw * state.signs[None, :]
            if variant.model_space == OBJECTIVE_SPACE
            else X
        )
        menu = menus_mod.select_menu(
            state.posterior,
            acq.CandidateSet(X, inputs),
            doc["k"],
            menus_mod.MenuConfig(
                mc_samples=variant.menu_mc_samples,
                seed=child_seed(state.seed, 5, doc["k"]),
            ),
        )
        logged_items = np.asarray(doc["decisions"], dtype=float)
        dev_menu = float(np.max(np.abs(logged_items - menu.decisions)))
        dev_menu = max(
            dev_menu,
            abs(doc["expected_best_utility"] - menu.expected_best_utility),
        )
    return ReplayReport(state, dev_init, dev_query, dev_hyper, dev_menu, trace)

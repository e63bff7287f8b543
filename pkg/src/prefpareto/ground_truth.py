"""Reference optima: the best achievable utility per (problem, utility) pair.

Regret reporting needs u(x*) = max_x u(f(x)).  These values are estimated
once by large-budget derivative-free global optimization (differential
evolution over the decision box, vectorized objective, plus local polish) and
shipped as a versioned data file with provenance.  Two structured composites
have independent cross-checks used by the tests: the disconnected-front
benchmark with a linear utility reduces to a separable one-dimensional
maximization, and the spherical-front benchmark with the signed-cube utility
reduces to a smooth constrained problem on the unit sphere.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np
from scipy.optimize import differential_evolution, minimize, minimize_scalar

from .problems import (
    ProblemSpec,
    UtilitySpec,
    evaluate_objectives_batch,
    orientation_signs,
    true_utility_batch,
    utility_to_dict,
)

OPTIMA_FILE = "true_optima_v1.json"


class GroundTruthError(ValueError):
    """No reference optimum available."""


def composite_utility_batch(problem: ProblemSpec, utility: UtilitySpec, X) -> np.ndarray:
    """u(f(x)) on canonical maximization values, vectorized over rows."""
    F = evaluate_objectives_batch(problem, np.atleast_2d(X))
    return true_utility_batch(utility, F * orientation_signs(problem.orientation))


def optimum_key(problem: ProblemSpec, utility: UtilitySpec) -> str:
    return problem.name + "|" + json.dumps(utility_to_dict(utility), sort_keys=True)


def compute_true_optimum(
    problem: ProblemSpec,
    utility: UtilitySpec,
    evals: int = 1_000_000,
    seed=0,
    n_restarts: int = 4,
) -> dict:
    """Estimate max_x u(f(x)) by restarted differential evolution + polish."""
    bounds = [tuple(b) for b in problem.bounds]

    def neg(Xt):
        return -composite_utility_batch(problem, utility, Xt.T)

    best_val = -np.inf
    best_x = None
    used = 0
    per_run = max(evals // n_restarts, 10_000)
    popsize = 16
    maxiter = max(per_run // (popsize * problem.d), 50)
    for r in range(n_restarts):
        res = differential_evolution(
            neg,
            bounds,
            seed=np.random.default_rng([seed, r]),
            popsize=popsize,
            maxiter=maxiter,
            tol=1e-12,
            polish=True,
            vectorized=True,
            updating="deferred",
        )
        used += res.nfev
        if -res.fun > best_val:
            best_val = float(-res.fun)
            best_x = np.asarray(res.x)
    return {
        "value": best_val,
        "decision": [float(v) for v in best_x],
        "method": "differential-evolution+polish",
        "evals": int(used),
        "seed": seed,
    }


def dtlz7_linear_optimum(d: int, m: int) -> float:
    """Closed-form reduction: with distance variables at 0 the objective sum
    is 2m - sum_j x_j sin(3 pi x_j), separable in the position variables.
    The scalar profile x sin(3 pi x) is multimodal, so scan a grid before
    polishing the best bracket."""
    grid = np.linspace(0.0, 1.0, 2001)
    vals = grid * np.sin(3.0 * np.pi * grid)
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(
        lambda x: -x * np.sin(3.0 * np.pi * x), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-14},
    )
    peak = -res.fun
    return (m - 1) * peak - 2.0 * m


def dtlz2_cubic_optimum(m: int, ideal) -> float:
    """Constrained reduction: minimize sum (z_i + y_i)^3 over the unit
    sphere octant the front occupies."""
    z = np.asarray(ideal, dtype=float)
    best = np.inf
    rng = np.random.default_rng(0)
    for trial in range(24):
        y0 = rng.uniform(0.1, 1.0, size=m)
        y0 /= np.linalg.norm(y0)
        res = minimize(
            lambda y: np.sum((z + y) ** 3),
            y0,
            jac=lambda y: 3.0 * (z + y) ** 2,
            method="SLSQP",
            bounds=[(0.0, 1.0)] * m,
            constraints=[
                {
                    "type": "eq",
                    "fun": lambda y: np.sum(y**2) - 1.0,
                    "jac": lambda y: 2.0 * y,
                }
            ],
            options={"maxiter": 500, "ftol": 1e-14},
        )
        if res.success and res.fun < best:
            best = float(res.fun)
    return float(-np.cbrt(best))


def _load_packaged() -> dict:
    text = resources.files("prefpareto.data").joinpath(OPTIMA_FILE).read_text()
    return json.loads(text)


def true_optimal_utility(
    problem: ProblemSpec,
    utility: UtilitySpec,
    extra_path=None,
    allow_compute: bool = False,
    seed=0,
) -> float:
    """Reference optimum from the packaged table (or an extra user table).

    With allow_compute the value is estimated on the fly, which is slow and
    should be reserved for non-catalog problem/utility combinations.
    """
    key = optimum_key(problem, utility)
    if extra_path is not None:
        with open(extra_path) as fh:
            table = json.load(fh)
        if key in table:
            return float(table[key]["value"])
    table = _load_packaged()
    if key in table:
        return float(table[key]["value"])
    if allow_compute:
        return float(compute_true_optimum(problem, utility, seed=seed)["value"])
    raise GroundTruthError(
        f"no reference optimum for {key!r}; run `elicit truth` to compute one"
    )

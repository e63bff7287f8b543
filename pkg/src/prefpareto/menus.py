"""Menu construction: a size-k set of solutions maximizing the expected
utility of the decision-maker's best pick.

The set objective E[max_i u(x_i)] is estimated on shared Monte-Carlo paths:
one recentered sample matrix over the candidate points, with any subset
evaluated by the per-sample maximum over its columns.  On those shared paths
the objective is monotone and submodular sample by sample, so greedy
construction carries the usual (1 - 1/e) guarantee relative to the best
subset under the same evaluation, and nested menus have non-decreasing
values deterministically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .acquisition import (
    AcquisitionError,
    BoxDomain,
    CandidateSet,
    crn_matrix,
    expected_best,
    pattern_search,
)
from .gp import UtilityPosterior, psd_sqrt


@dataclass(frozen=True)
class MenuConfig:
    """Settings for menu optimization (menus are computed once per session,
    so the sample budget is higher than during query search)."""

    mc_samples: int = 8192
    restarts: int = 8
    eval_budget: int = 2000
    seed: int = 0


@dataclass
class MenuResult:
    """A selected menu with its shared-path value estimates."""

    decisions: np.ndarray  # (k, d)
    inputs: np.ndarray  # (k, p) model-space points
    expected_best_utility: float
    construction: str  # "greedy" | "joint-enumeration"
    prefix_values: np.ndarray  # value of each nested prefix menu, length k
    item_means: np.ndarray
    item_variances: np.ndarray
    indices: list = field(default_factory=list)  # candidate indices if finite

    @property
    def k(self) -> int:
        return self.inputs.shape[0]

    def to_doc(self) -> dict:
        return {
            "k": self.k,
            "construction": self.construction,
            "expected_best_utility": self.expected_best_utility,
            "prefix_values": [float(v) for v in self.prefix_values],
            "decisions": [list(map(float, row)) for row in self.decisions],
            "inputs": [list(map(float, row)) for row in self.inputs],
            "item_means": [float(v) for v in self.item_means],
            "item_variances": [float(v) for v in self.item_variances],
            "indices": [int(i) for i in self.indices],
        }


def menu_objective(posterior: UtilityPosterior, points, config: MenuConfig) -> float:
    """Expected utility of the best point in the set (shared random numbers).

    For two points this is by construction the same number qEUBO assigns to
    the pair under the same sample count and seed.
    """
    return expected_best(posterior, points, config.mc_samples, config.seed)


def shared_samples(posterior: UtilityPosterior, points, config: MenuConfig) -> np.ndarray:
    """Joint recentered predictive samples at the points, shape (mc, n)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    mean, cov = posterior.mean_var(pts)
    Z = crn_matrix(config.mc_samples, mean.size, config.seed)
    return mean[None, :] + Z @ psd_sqrt(cov).T


def subset_value(samples: np.ndarray, idx) -> float:
    """Shared-path estimate of E[max over the subset]."""
    cols = list(idx)
    if not cols:
        raise AcquisitionError("subset must be non-empty")
    return float(samples[:, cols].max(axis=1).mean())


def greedy_indices(samples: np.ndarray, k: int) -> tuple[list, np.ndarray]:
    """Greedy argmax sequence of the shared-path set objective.

    Ties break toward the earliest candidate index.  Returns the chosen
    indices and the value of every nested prefix.
    """
    n = samples.shape[1]
    if not 1 <= k <= n:
        raise AcquisitionError(f"menu size {k} out of range for {n} candidates")
    chosen: list = []
    prefix_vals = np.empty(k)
    running = np.full(samples.shape[0], -np.inf)
    for step in range(k):
        gains = np.maximum(running[:, None], samples).mean(axis=0)
        gains[chosen] = -np.inf
        best = int(np.argmax(gains))
        chosen.append(best)
        running = np.maximum(running, samples[:, best])
        prefix_vals[step] = running.mean()
    return chosen, prefix_vals


def select_menu(posterior: UtilityPosterior, domain, k: int, config: MenuConfig) -> MenuResult:
    """Greedily build a size-k menu over the domain.

    Finite domains share one sample matrix over all candidates; continuous
    domains optimize each greedy step with pattern search, holding the
    previously chosen points fixed.
    """
    if k < 1:
        raise AcquisitionError("menu size must be >= 1")
    if isinstance(domain, CandidateSet):
        if k > len(domain):
            raise AcquisitionError(
                f"menu size {k} exceeds candidate set size {len(domain)}"
            )
        S = shared_samples(posterior, domain.inputs, config)
        chosen, prefix_vals = greedy_indices(S, k)
        inputs = domain.inputs[chosen]
        decisions = domain.decisions[chosen]
        value = float(prefix_vals[-1])
    elif isinstance(domain, BoxDomain):
        decisions, inputs, prefix_vals = _greedy_continuous(posterior, domain, k, config)
        chosen = []
        value = float(prefix_vals[-1])
    else:
        raise AcquisitionError(f"unsupported domain {type(domain).__name__}")
    mean, cov = posterior.mean_var(inputs)
    return MenuResult(
        decisions=np.asarray(decisions),
        inputs=np.asarray(inputs),
        expected_best_utility=value,
        construction="greedy",
        prefix_values=prefix_vals,
        item_means=mean,
        item_variances=np.maximum(np.diag(cov), 0.0),
        indices=chosen,
    )


def _greedy_continuous(posterior, domain: BoxDomain, k, config):
    decisions = []
    inputs = []
    prefix_vals = np.empty(k)
    for step in range(k):
        fixed = np.asarray(inputs) if inputs else None

        def f_batch(X):
            U = domain.to_input(X)
            out = np.empty(U.shape[0])
            for i, u in enumerate(U):
                pts = u[None, :] if fixed is None else np.vstack([fixed, u])
                out[i] = expected_best(posterior, pts, config.mc_samples, config.seed)
            return out

        x, val, _ = pattern_search(
            f_batch, domain.bounds, config.restarts, config.eval_budget, config.seed
        )
        decisions.append(x)
        inputs.append(domain.to_input(x[None, :])[0])
        prefix_vals[step] = val
    return np.asarray(decisions), np.asarray(inputs), prefix_vals


def enumerate_menu(posterior: UtilityPosterior, domain: CandidateSet, k: int,
                   config: MenuConfig) -> MenuResult:
    """Exact best menu by exhaustive subset enumeration on shared paths.

    Exponential in k; intended for small instances and as the reference the
    greedy construction is compared against.
    """
    n = len(domain)
    if not 1 <= k <= n:
        raise AcquisitionError(f"menu size {k} out of range for {n} candidates")
    S = shared_samples(posterior, domain.inputs, config)
    best_val = -np.inf
    best_subset = None
    for subset in itertools.combinations(range(n), k):
        v = subset_value(S, subset)
        if v > best_val:
            best_val = v
            best_subset = subset
    chosen = list(best_subset)
    inputs = domain.inputs[chosen]
    running = S[:, chosen[:1]].max(axis=1)
    prefix_vals = np.empty(k)
    prefix_vals[0] = running.mean()
    for i in range(1, k):
        running = np.maximum(running, S[:, chosen[i]])
        prefix_vals[i] = running.mean()
    mean, cov = posterior.mean_var(inputs)
    return MenuResult(
        decisions=domain.decisions[chosen],
        inputs=inputs,
        expected_best_utility=float(best_val),
        construction="joint-enumeration",
        prefix_values=prefix_vals,
        item_means=mean,
        item_variances=np.maximum(np.diag(cov), 0.0),
        indices=chosen,
    )

"""Evolutionary approximation of the Pareto set: NSGA-II and NSGA-III.

Standard real-coded machinery (Deb et al. 2002; Deb & Jain 2014): simulated
binary crossover (eta = 15, rate 0.9), polynomial mutation (eta = 20, rate
1/d), fast non-dominated sorting, crowding-distance truncation (NSGA-II) or
Das-Dennis reference-direction niching (NSGA-III).  The returned
approximation is the non-dominated subset of the final population.

Sorting and selection operate internally on canonical maximization values;
the stored objectives stay in the published problem convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problems import (
    ProblemSpec,
    evaluate_objectives_batch,
    non_dominated_filter,
    orientation_signs,
)

SBX_ETA = 15.0
SBX_RATE = 0.9
MUTATION_ETA = 20.0


class EvolutionError(ValueError):
    """Invalid evolutionary-run configuration."""


@dataclass
class ParetoApproximation:
    """Non-dominated decisions/objectives from one evolutionary run."""

    decisions: np.ndarray  # (n, d)
    objectives: np.ndarray  # (n, m), published convention
    generator: str
    generations: int
    population: int

    def __len__(self) -> int:
        return self.decisions.shape[0]

    def to_csv(self, path, problem: ProblemSpec | None = None) -> None:
        d = self.decisions.shape[1]
        m = self.objectives.shape[1]
        lines = [
            f"# generator={self.generator} generations={self.generations} "
            f"population={self.population}"
        ]
        if problem is not None:
            lines.append(
                f"# problem={problem.name} orientation={','.join(problem.orientation)}"
            )
        lines.append(
            ",".join([f"x{i + 1}" for i in range(d)] + [f"f{j + 1}" for j in range(m)])
        )
        data = np.concatenate([self.decisions, self.objectives], axis=1)
        for row in data:
            lines.append(",".join(repr(float(v)) for v in row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path, d: int, m: int) -> "ParetoApproximation":
        """Ingest an externally produced decision/objective table.

        Expects the column layout written by :meth:`to_csv`; metadata lines
        are optional, so third-party solver output can be loaded after
        adding a matching header row.
        """
        meta = {"generator": "external", "generations": 0, "population": 0}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    for token in line[1:].split():
                        if "=" in token:
                            key, val = token.split("=", 1)
                            if key in ("generator", "generations", "population"):
                                meta[key] = val
                    continue
                if line[0].isalpha() or line.startswith('"x'):
                    continue  # column header
                rows.append([float(v) for v in line.split(",")])
        data = np.asarray(rows, dtype=float)
        if data.ndim != 2 or data.shape[1] != d + m:
            raise EvolutionError(
                f"expected {d + m} columns (d={d}, m={m}), got {data.shape}"
            )
        return cls(
            data[:, :d],
            data[:, d:],
            str(meta["generator"]),
            int(meta["generations"]),
            int(meta["population"]),
        )


# ---------------------------------------------------------------------------
# Sorting and diversity machinery
# ---------------------------------------------------------------------------


def nondominated_sort(objectives, orientation=None) -> list[np.ndarray]:
    """Partition points into fronts; front 0 is the non-dominated set.

    Values are treated as larger-is-better unless an orientation is given.
    """
    Y = np.atleast_2d(np.asarray(objectives, dtype=float))
    if Y.shape[0] == 0:
        raise EvolutionError("need a non-empty set of points")
    if orientation is not None:
        Y = Y * orientation_signs(orientation)[None, :]
    ge = np.all(Y[:, None, :] >= Y[None, :, :], axis=2)
    gt = np.any(Y[:, None, :] > Y[None, :, :], axis=2)
    dominates = ge & gt  # [i, j] = i dominates j
    n_dom = dominates.sum(axis=0)
    remaining = np.ones(Y.shape[0], dtype=bool)
    fronts = []
    while remaining.any():
        current = remaining & (n_dom == 0)
        if not current.any():
            raise AssertionError("dominance relation produced a cycle")
        fronts.append(np.flatnonzero(current))
        remaining &= ~current
        n_dom = n_dom - dominates[current].sum(axis=0)
    return fronts


def crowding_distance(objectives) -> np.ndarray:
    """NSGA-II crowding distance; boundary points get +inf per objective."""
    Y = np.atleast_2d(np.asarray(objectives, dtype=float))
    n, m = Y.shape
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for j in range(m):
        order = np.argsort(Y[:, j], kind="stable")
        span = Y[order[-1], j] - Y[order[0], j]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span > 0:
            gaps = (Y[order[2:], j] - Y[order[:-2], j]) / span
            dist[order[1:-1]] += gaps
    return dist


def das_dennis(m: int, partitions: int) -> np.ndarray:
    """Simplex-lattice reference directions; every row sums to 1."""
    if partitions < 1:
        return np.full((1, m), 1.0 / m)
    out = []

    def rec(prefix, left, depth):
        if depth == m - 1:
            out.append(prefix + [left])
            return
        for i in range(left + 1):
            rec(prefix + [i], left - i, depth + 1)

    rec([], partitions, 0)
    return np.asarray(out, dtype=float) / partitions


def reference_directions(m: int, minimum: int) -> np.ndarray:
    """Das-Dennis directions with the smallest partition count reaching
    at least `minimum` directions."""
    p = 1
    while math.comb(p + m - 1, m - 1) < minimum:
        p += 1
    return das_dennis(m, p)


# ---------------------------------------------------------------------------
# Variation operators (bounded, real-coded)
# ---------------------------------------------------------------------------


def sbx_crossover(parents1, parents2, lower, upper, rng) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover on row-aligned parent batches."""
    X1 = parents1.copy()
    X2 = parents2.copy()
    n, d = X1.shape
    do_pair = rng.random(n) <= SBX_RATE
    do_var = (rng.random((n, d)) <= 0.5) & do_pair[:, None]
    u = rng.random((n, d))
    lo = np.minimum(X1, X2)
    hi = np.maximum(X1, X2)
    diff = np.maximum(hi - lo, 1e-14)
    distinct = (hi - lo) > 1e-14

    beta1 = 1.0 + 2.0 * (lo - lower[None, :]) / diff
    beta2 = 1.0 + 2.0 * (upper[None, :] - hi) / diff

    def betaq(beta):
        alpha = 2.0 - beta ** (-(SBX_ETA + 1.0))
        take = u <= 1.0 / alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            low = (u * alpha) ** (1.0 / (SBX_ETA + 1.0))
            high = (1.0 / (2.0 - u * alpha)) ** (1.0 / (SBX_ETA + 1.0))
        return np.where(take, low, high)

    c1 = 0.5 * ((lo + hi) - betaq(beta1) * diff)
    c2 = 0.5 * ((lo + hi) + betaq(beta2) * diff)
    c1 = np.clip(c1, lower[None, :], upper[None, :])
    c2 = np.clip(c2, lower[None, :], upper[None, :])
    swap = rng.random((n, d)) <= 0.5
    child1 = np.where(swap, c2, c1)
    child2 = np.where(swap, c1, c2)
    apply_mask = do_var & distinct
    out1 = np.where(apply_mask, child1, X1)
    out2 = np.where(apply_mask, child2, X2)
    return out1, out2


def polynomial_mutation(X, lower, upper, rng, rate=None) -> np.ndarray:
    """Bounded polynomial mutation, default rate 1/d per variable."""
    X = X.copy()
    n, d = X.shape
    if rate is None:
        rate = 1.0 / d
    mask = rng.random((n, d)) < rate
    width = (upper - lower)[None, :]
    delta1 = (X - lower[None, :]) / width
    delta2 = (upper[None, :] - X) / width
    u = rng.random((n, d))
    mut_pow = 1.0 / (MUTATION_ETA + 1.0)
    low_branch = u < 0.5
    val_low = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta1) ** (MUTATION_ETA + 1.0)
    val_high = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta2) ** (MUTATION_ETA + 1.0)
    deltaq = np.where(low_branch, val_low**mut_pow - 1.0, 1.0 - val_high**mut_pow)
    X_new = np.clip(X + deltaq * width, lower[None, :], upper[None, :])
    return np.where(mask, X_new, X)


# ---------------------------------------------------------------------------
# Main loop
# ---------------------------------------------------------------------------


def _tournament(rng, ranks, crowd, pop_size, n_pick):
    """Binary tournaments on (rank, crowding); returns winner indices."""
    a = rng.integers(0, pop_size, size=n_pick)
    b = rng.integers(0, pop_size, size=n_pick)
    better = (ranks[a] < ranks[b]) | ((ranks[a] == ranks[b]) & (crowd[a] > crowd[b]))
    return np.where(better, a, b)


def _nsga2_select(Ymax, pop_size):
    """Elitist environmental selection by (front, crowding)."""
    fronts = nondominated_sort(Ymax)
    chosen: list[int] = []
    for front in fronts:
        if len(chosen) + front.size <= pop_size:
            chosen.extend(front.tolist())
        else:
            crowd = crowding_distance(Ymax[front])
            order = np.argsort(-crowd, kind="stable")
            need = pop_size - len(chosen)
            chosen.extend(front[order[:need]].tolist())
            break
    return np.asarray(chosen)


def _asf_extremes(Ytrans):
    """Extreme points via achievement scalarizing along each axis."""
    m = Ytrans.shape[1]
    extremes = np.empty(m, dtype=int)
    for j in range(m):
        w = np.full(m, 1e-6)
        w[j] = 1.0
        asf = np.max(Ytrans / w[None, :], axis=1)
        extremes[j] = int(np.argmin(asf))
    return extremes


def _nsga3_normalize(Ymin):
    """Translate by the ideal point and scale by the simplex intercepts."""
    ideal = Ymin.min(axis=0)
    Yt = Ymin - ideal[None, :]
    extremes = _asf_extremes(Yt)
    E = Yt[extremes]
    m = Ymin.shape[1]
    intercepts = None
    try:
        if np.linalg.matrix_rank(E) == m:
            b = np.linalg.solve(E, np.ones(m))
            with np.errstate(divide="ignore"):
                cand = 1.0 / b
            if np.all(np.isfinite(cand)) and np.all(cand > 1e-12):
                intercepts = cand
    except np.linalg.LinAlgError:
        intercepts = None
    if intercepts is None:
        intercepts = np.maximum(Yt.max(axis=0), 1e-12)
    return Yt / intercepts[None, :]


def _associate(Ynorm, directions):
    """Closest reference ray per point: (direction index, perpendicular
    distance)."""
    norms = np.linalg.norm(directions, axis=1)
    unit = directions / norms[:, None]
    proj = Ynorm @ unit.T  # (n, H)
    proj = np.maximum(proj, 0.0)
    sq = np.sum(Ynorm**2, axis=1)[:, None] - proj**2
    dist = np.sqrt(np.maximum(sq, 0.0))
    idx = np.argmin(dist, axis=1)
    return idx, dist[np.arange(Ynorm.shape[0]), idx]


def _nsga3_select(Ymin, pop_size, directions, rng):
    fronts = nondominated_sort(-Ymin)  # sort expects larger-is-better
    chosen: list[int] = []
    last = None
    for front in fronts:
        if len(chosen) + front.size <= pop_size:
            chosen.extend(front.tolist())
        else:
            last = front
            break
    if last is None or len(chosen) == pop_size:
        return np.asarray(chosen[:pop_size])

    pool = np.asarray(chosen + last.tolist())
    Ynorm = _nsga3_normalize(Ymin[pool])
    assoc, dist = _associate(Ynorm, directions)
    n_chosen = len(chosen)
    niche_count = np.bincount(assoc[:n_chosen], minlength=directions.shape[0])
    last_assoc = assoc[n_chosen:]
    last_dist = dist[n_chosen:]
    available = np.ones(last.size, dtype=bool)
    active = np.ones(directions.shape[0], dtype=bool)
    need = pop_size - n_chosen
    picked: list[int] = []
    while need > 0:
        active_dirs = np.flatnonzero(active)
        counts = niche_count[active_dirs]
        min_count = counts.min()
        tied = active_dirs[counts == min_count]
        d_idx = int(tied[rng.integers(0, tied.size)])
        members = np.flatnonzero(available & (last_assoc == d_idx))
        if members.size == 0:
            active[d_idx] = False
            continue
        if niche_count[d_idx] == 0:
            pick = int(members[np.argmin(last_dist[members])])
        else:
            pick = int(members[rng.integers(0, members.size)])
        picked.append(int(last[pick]))
        available[pick] = False
        niche_count[d_idx] += 1
        need -= 1
    return np.asarray(chosen + picked)


def approximate_pareto(
    problem: ProblemSpec,
    algorithm: str,
    population: int,
    generations: int,
    seed,
) -> ParetoApproximation:
    """Run the selected evolutionary algorithm and keep the non-dominated
    subset of its final population.  Deterministic per seed."""
    if population < 4 or population % 2 != 0:
        raise EvolutionError("population must be even and >= 4")
    if algorithm == "nsga2":
        if problem.m > 3:
            raise EvolutionError("nsga2 supports at most 3 objectives; use nsga3")
        directions = None
    elif algorithm == "nsga3":
        if problem.m < 3:
            raise EvolutionError("nsga3 needs at least 3 objectives; use nsga2")
        directions = reference_directions(problem.m, population)
        population = 4 * int(np.ceil(population / 4))
    else:
        raise EvolutionError(f"unknown algorithm {algorithm!r}")

    rng = np.random.default_rng(seed)
    lower, upper = problem.lower, problem.upper
    signs = orientation_signs(problem.orientation)
    X = rng.uniform(lower, upper, size=(population, problem.d))
    F = evaluate_objectives_batch(problem, X)

    for _gen in range(generations):
        Ymax = F * signs[None, :]
        if algorithm == "nsga2":
            fronts = nondominated_sort(Ymax)
            ranks = np.empty(population, dtype=int)
            crowd = np.empty(population)
            for r, front in enumerate(fronts):
                ranks[front] = r
                crowd[front] = crowding_distance(Ymax[front])
            parents = _tournament(rng, ranks, crowd, population, population)
        else:
            fronts = nondominated_sort(Ymax)
            ranks = np.empty(population, dtype=int)
            for r, front in enumerate(fronts):
                ranks[front] = r
            zeros = np.zeros(population)
            parents = _tournament(rng, ranks, zeros, population, population)

        P1 = X[parents[0::2]]
        P2 = X[parents[1::2]]
        C1, C2 = sbx_crossover(P1, P2, lower, upper, rng)
        children = np.concatenate([C1, C2], axis=0)
        children = polynomial_mutation(children, lower, upper, rng)
        CF = evaluate_objectives_batch(problem, children)

        X_all = np.concatenate([X, children], axis=0)
        F_all = np.concatenate([F, CF], axis=0)
        if algorithm == "nsga2":
            keep = _nsga2_select(F_all * signs[None, :], population)
        else:
            keep = _nsga3_select(-(F_all * signs[None, :]), population, directions, rng)
        X = X_all[keep]
        F = F_all[keep]

    nd = non_dominated_filter(F, problem.orientation)
    return ParetoApproximation(X[nd], F[nd], algorithm, generations, population)

"""Benchmark multi-objective problems, their ground-truth utilities, and dominance.

Implements the DTLZ2, DTLZ7 (Deb et al.), WFG3 (Huband et al. 2006), and a
car side-impact design problem, each paired with a scalar utility function
used by the simulated decision-maker.

All benchmark formulas follow the published minimization conventions; the
per-objective ``orientation`` flag on :class:`ProblemSpec` records the
direction.  Everything downstream of objective evaluation (preference model,
acquisition, menus) works on the *canonical maximization form* obtained via
:func:`to_max_form`, so "dominates" and "monotone utility" always mean
"larger is better" there.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import yaml
from scipy.special import logsumexp

MIN = "min"
MAX = "max"

UTILITY_KINDS = (
    "linear-sum",
    "cubic-norm-to-ideal",
    "soft-min-exponential",
    "piecewise-linear-sum",
)


class ProblemError(ValueError):
    """Invalid problem definition or evaluation input."""


@dataclass(frozen=True)
class ProblemSpec:
    """A box-bounded multi-objective benchmark problem.

    bounds has shape (d, 2) with strict lower < upper per dimension.
    orientation holds one of "min"/"max" per objective, in the convention
    of the published benchmark formula.
    """

    name: str
    d: int
    m: int
    bounds: np.ndarray
    orientation: tuple[str, ...]
    objective_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.d < 1:
            raise ProblemError(f"decision dimension must be >= 1, got {self.d}")
        if self.m < 2:
            raise ProblemError(f"objective dimension must be >= 2, got {self.m}")
        bounds = np.asarray(self.bounds, dtype=float)
        if bounds.shape != (self.d, 2):
            raise ProblemError(f"bounds must have shape ({self.d}, 2), got {bounds.shape}")
        if not np.all(bounds[:, 0] < bounds[:, 1]):
            raise ProblemError("every bound interval must satisfy lower < upper")
        object.__setattr__(self, "bounds", bounds)
        if len(self.orientation) != self.m:
            raise ProblemError("orientation must have one entry per objective")
        if any(o not in (MIN, MAX) for o in self.orientation):
            raise ProblemError(f"orientation entries must be '{MIN}' or '{MAX}'")
        if not self.objective_names:
            object.__setattr__(
                self, "objective_names", tuple(f"f{i + 1}" for i in range(self.m))
            )
        elif len(self.objective_names) != self.m:
            raise ProblemError("objective_names must have one entry per objective")

    @property
    def lower(self) -> np.ndarray:
        return self.bounds[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.bounds[:, 1]


def orientation_signs(orientation) -> np.ndarray:
    """+1 for maximized objectives, -1 for minimized ones."""
    return np.array([1.0 if o == MAX else -1.0 for o in orientation])


def to_max_form(y, orientation) -> np.ndarray:
    """Map raw objective values into the larger-is-better convention."""
    return np.asarray(y, dtype=float) * orientation_signs(orientation)


def _check_decision(problem: ProblemSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.d,):
        raise ProblemError(
            f"decision vector must have shape ({problem.d},), got {x.shape}"
        )
    eps = 1e-12
    if np.any(x < problem.lower - eps) or np.any(x > problem.upper + eps):
        raise ProblemError("decision vector outside box bounds")
    return x


# ---------------------------------------------------------------------------
# Benchmark objective functions (batched: X is (n, d), returns (n, m))
# ---------------------------------------------------------------------------


def _dtlz2(X: np.ndarray, m: int) -> np.ndarray:
    g = np.sum((X[:, m - 1:] - 0.5) ** 2, axis=1)
    theta = X[:, : m - 1] * (np.pi / 2.0)
    F = np.empty((X.shape[0], m))
    for j in range(m):
        f = 1.0 + g
        for i in range(m - 1 - j):
            f = f * np.cos(theta[:, i])
        if j > 0:
            f = f * np.sin(theta[:, m - 1 - j])
        F[:, j] = f
    return F


def _dtlz7(X: np.ndarray, m: int) -> np.ndarray:
    k = X.shape[1] - m + 1
    F = np.empty((X.shape[0], m))
    F[:, : m - 1] = X[:, : m - 1]
    g = 1.0 + 9.0 / k * np.sum(X[:, m - 1:], axis=1)
    h = m - np.sum(
        F[:, : m - 1] / (1.0 + g[:, None]) * (1.0 + np.sin(3.0 * np.pi * F[:, : m - 1])),
        axis=1,
    )
    F[:, m - 1] = (1.0 + g) * h
    return F


def _wfg_s_linear(y: np.ndarray, a: float) -> np.ndarray:
    # shift transformation: 0 at y == a, linear to 1 at both box edges
    return np.abs(y - a) / np.abs(np.floor(a - y) + a)


def _wfg3(X: np.ndarray, m: int, k: int) -> np.ndarray:
    n = X.shape[1]
    l = n - k
    y = X / (2.0 * np.arange(1, n + 1))

    t1 = y.copy()
    t1[:, k:] = _wfg_s_linear(y[:, k:], 0.35)

    # pairwise non-separable reduction of the distance part
    a = t1[:, k: k + l: 2]
    b = t1[:, k + 1: k + l: 2]
    red = (a + b + 2.0 * np.abs(a - b)) / 3.0
    t2 = np.concatenate([t1[:, :k], red], axis=1)

    # weighted-sum reduction to m components (unit weights)
    per = k // (m - 1)
    t3 = np.empty((X.shape[0], m))
    for i in range(m - 1):
        t3[:, i] = np.mean(t2[:, i * per: (i + 1) * per], axis=1)
    t3[:, m - 1] = np.mean(t2[:, k:], axis=1)

    # degenerate front: only the first position parameter stays active
    A = np.zeros(m - 1)
    A[0] = 1.0
    xm = t3[:, m - 1]
    x = np.maximum(xm[:, None], A[None, :]) * (t3[:, : m - 1] - 0.5) + 0.5

    # linear shape functions
    H = np.empty((X.shape[0], m))
    for j in range(m):
        h = np.ones(X.shape[0])
        for i in range(m - 1 - j):
            h = h * x[:, i]
        if j > 0:
            h = h * (1.0 - x[:, m - 1 - j])
        H[:, j] = h
    S = 2.0 * np.arange(1, m + 1)
    return xm[:, None] + S[None, :] * H


# Car side-impact structural responses (Jain & Deb 2014 coefficients with the
# material/noise variables substituted).  Nine responses, all minimized:
# weight, abdomen load, viscous criteria (upper/mid/lower), rib deflections
# (upper/mid/lower), pubic symphysis force.
_CARCAB_BOUNDS = np.array(
    [
        [0.5, 1.5],
        [0.45, 1.35],
        [0.5, 1.5],
        [0.5, 1.5],
        [0.875, 2.625],
        [0.4, 1.2],
        [0.4, 1.2],
    ]
)

_CARCAB_NAMES = (
    "weight",
    "abdomen_load",
    "vc_upper",
    "vc_mid",
    "vc_lower",
    "rib_upper",
    "rib_mid",
    "rib_lower",
    "pubic_force",
)


def _carcab(X: np.ndarray) -> np.ndarray:
    x1, x2, x3, x4, x5, x6, x7 = (X[:, i] for i in range(7))
    F = np.empty((X.shape[0], 9))
    F[:, 0] = (
        1.98 + 4.9 * x1 + 6.67 * x2 + 6.98 * x3 + 4.01 * x4 + 1.78 * x5
        + 1e-5 * x6 + 2.73 * x7
    )
    F[:, 1] = 1.16 - 0.3717 * x2 * x4 - 0.0092928 * x3
    F[:, 2] = (
        0.261 - 0.0159 * x1 * x2 - 0.06486 * x1 - 0.019 * x2 * x7
        + 0.0144 * x3 * x5 + 0.0154464 * x6
    )
    F[:, 3] = (
        0.214 + 0.00817 * x5 - 0.045195 * x1 - 0.0135168 * x1
        + 0.03099 * x2 * x6 - 0.018 * x2 * x7 + 0.007176 * x3
        + 0.023232 * x3 - 0.00364 * x5 * x6 - 0.018 * x2 ** 2
    )
    F[:, 4] = 0.74 - 0.61 * x2 - 0.031296 * x3 - 0.031872 * x7 + 0.227 * x2 ** 2
    F[:, 5] = 28.98 + 3.818 * x3 - 4.2 * x1 * x2 + 1.27296 * x6 - 2.68065 * x7
    F[:, 6] = (
        33.86 + 2.95 * x3 - 5.057 * x1 * x2 - 3.795 * x2 - 3.4431 * x7 + 1.45728
    )
    F[:, 7] = 46.36 - 9.9 * x2 - 4.4505 * x1
    F[:, 8] = 4.72 - 0.5 * x4 - 0.19 * x2 * x3
    return F


def wfg_position_count(d: int, m: int) -> int:
    """Smallest valid number of WFG position parameters for (d, m).

    Must be a positive multiple of m - 1, leaving an even, positive number
    of distance parameters.
    """
    k = m - 1
    while k < d:
        l = d - k
        if l >= 2 and l % 2 == 0:
            return k
        k += m - 1
    raise ProblemError(f"no valid WFG position split for d={d}, m={m}")


def make_problem(name: str) -> ProblemSpec:
    """Build a ProblemSpec from an id like ``dtlz2-9-6`` or ``carcab-7-9``."""
    match = re.fullmatch(r"(dtlz2|dtlz7|wfg3|carcab)-(\d+)-(\d+)", name.lower())
    if not match:
        raise ProblemError(
            f"unknown problem id {name!r}; expected <family>-<d>-<m> with "
            "family in dtlz2|dtlz7|wfg3|carcab"
        )
    family, d, m = match.group(1), int(match.group(2)), int(match.group(3))
    if family in ("dtlz2", "dtlz7"):
        if d < m:
            raise ProblemError(f"{family} requires d >= m")
        bounds = np.tile([0.0, 1.0], (d, 1))
        return ProblemSpec(name.lower(), d, m, bounds, (MIN,) * m)
    if family == "wfg3":
        wfg_position_count(d, m)  # validates the split exists
        bounds = np.stack(
            [np.zeros(d), 2.0 * np.arange(1, d + 1, dtype=float)], axis=1
        )
        return ProblemSpec(name.lower(), d, m, bounds, (MIN,) * m)
    if (d, m) != (7, 9):
        raise ProblemError("carcab is only defined for d=7, m=9")
    return ProblemSpec(
        name.lower(), 7, 9, _CARCAB_BOUNDS.copy(), (MIN,) * 9, _CARCAB_NAMES
    )


def evaluate_objectives_batch(problem: ProblemSpec, X) -> np.ndarray:
    """Evaluate the raw (published-convention) objectives for rows of X."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != problem.d:
        raise ProblemError(f"X must have shape (n, {problem.d}), got {X.shape}")
    family = problem.name.split("-")[0]
    if family == "dtlz2":
        return _dtlz2(X, problem.m)
    if family == "dtlz7":
        return _dtlz7(X, problem.m)
    if family == "wfg3":
        return _wfg3(X, problem.m, wfg_position_count(problem.d, problem.m))
    if family == "carcab":
        return _carcab(X)
    raise ProblemError(f"no evaluator registered for {problem.name!r}")


def evaluate_objectives(problem: ProblemSpec, x) -> np.ndarray:
    """Evaluate f(x) in the published convention. Deterministic."""
    x = _check_decision(problem, x)
    return evaluate_objectives_batch(problem, x[None, :])[0]


# ---------------------------------------------------------------------------
# Ground-truth utility functions
#
# All four kinds are monotone non-decreasing in each coordinate; they are
# meant to be evaluated on objective vectors in canonical maximization form.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PiecewiseTable:
    """One objective's piecewise-linear value function.

    breakpoints: strictly increasing knots (len K >= 2).
    slopes: K + 1 positive values; slopes[0] applies below the first knot,
    slopes[j] between knots j-1 and j, slopes[-1] above the last knot.
    The function is anchored at 0 on the first knot.
    """

    breakpoints: np.ndarray
    slopes: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        sl = np.asarray(self.slopes, dtype=float)
        if bp.ndim != 1 or bp.size < 2:
            raise ProblemError("need at least two breakpoints")
        if np.any(np.diff(bp) <= 0):
            raise ProblemError("breakpoints must be strictly increasing")
        if sl.shape != (bp.size + 1,):
            raise ProblemError("need exactly len(breakpoints) + 1 slopes")
        if np.any(sl <= 0):
            raise ProblemError("slopes must be positive (monotone utility)")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "slopes", sl)

    def __call__(self, v: float) -> float:
        bp, sl = self.breakpoints, self.slopes
        if v <= bp[0]:
            return sl[0] * (v - bp[0])
        total = 0.0
        for j in range(1, bp.size):
            if v <= bp[j]:
                return total + sl[j] * (v - bp[j - 1])
            total += sl[j] * (bp[j] - bp[j - 1])
        return total + sl[-1] * (v - bp[-1])


@dataclass(frozen=True)
class UtilitySpec:
    """A ground-truth utility function over objective vectors.

    kind selects the formula; params holds kind-specific values:
      linear-sum            -> {}
      cubic-norm-to-ideal   -> {"ideal": m-vector z}
      soft-min-exponential  -> {"theta": positive float}
      piecewise-linear-sum  -> {"tables": tuple of PiecewiseTable, one per objective}
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in UTILITY_KINDS:
            raise ProblemError(f"unknown utility kind {self.kind!r}")
        if self.kind == "soft-min-exponential" and self.params.get("theta", 0) <= 0:
            raise ProblemError("soft-min temperature theta must be > 0")

    @property
    def dimension(self) -> int | None:
        if self.kind == "cubic-norm-to-ideal":
            return len(self.params["ideal"])
        if self.kind == "piecewise-linear-sum":
            return len(self.params["tables"])
        return None


def linear_sum() -> UtilitySpec:
    return UtilitySpec("linear-sum")


def cubic_norm_to_ideal(ideal) -> UtilitySpec:
    return UtilitySpec("cubic-norm-to-ideal", {"ideal": np.asarray(ideal, dtype=float)})


def soft_min_exponential(theta: float) -> UtilitySpec:
    return UtilitySpec("soft-min-exponential", {"theta": float(theta)})


def piecewise_linear_sum(tables) -> UtilitySpec:
    return UtilitySpec("piecewise-linear-sum", {"tables": tuple(tables)})


def true_utility(spec: UtilitySpec, y) -> float:
    """Evaluate the utility formula at y (canonical maximization form)."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ProblemError("objective vector must be finite")
    dim = spec.dimension
    if dim is not None and y.shape != (dim,):
        raise ProblemError(f"expected {dim} objectives, got shape {y.shape}")
    if spec.kind == "linear-sum":
        return float(np.sum(y))
    if spec.kind == "cubic-norm-to-ideal":
        z = spec.params["ideal"]
        return float(-np.cbrt(np.sum((z - y) ** 3)))
    if spec.kind == "soft-min-exponential":
        theta = spec.params["theta"]
        return float(-logsumexp(-theta * y) / theta)
    tables = spec.params["tables"]
    return float(sum(t(v) for t, v in zip(tables, y)))


def true_utility_batch(spec: UtilitySpec, Y) -> np.ndarray:
    """Vectorized :func:`true_utility` over rows of Y."""
    Y = np.asarray(Y, dtype=float)
    if spec.kind == "linear-sum":
        return np.sum(Y, axis=1)
    if spec.kind == "cubic-norm-to-ideal":
        z = spec.params["ideal"]
        return -np.cbrt(np.sum((z[None, :] - Y) ** 3, axis=1))
    if spec.kind == "soft-min-exponential":
        theta = spec.params["theta"]
        return -logsumexp(-theta * Y, axis=1) / theta
    tables = spec.params["tables"]
    out = np.zeros(Y.shape[0])
    for j, t in enumerate(tables):
        bp, sl = t.breakpoints, t.slopes
        v = Y[:, j]
        seg = np.concatenate([[bp[0]], bp])
        cum = np.concatenate([[0.0], np.cumsum(sl[1:-1] * np.diff(bp))])
        idx = np.searchsorted(bp, v, side="left")
        below = v <= bp[0]
        above = idx >= bp.size
        mid = ~below & ~above
        out[below] += sl[0] * (v[below] - bp[0])
        out[above] += cum[-1] + sl[-1] * (v[above] - bp[-1])
        out[mid] += cum[idx[mid] - 1] + sl[idx[mid]] * (v[mid] - seg[idx[mid]])
    return out


# ---------------------------------------------------------------------------
# Pareto dominance
# ---------------------------------------------------------------------------


def pareto_dominates(a, b, orientation=None) -> bool:
    """True iff a is weakly better everywhere and strictly better somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ProblemError(f"shape mismatch: {a.shape} vs {b.shape}")
    if orientation is not None:
        signs = orientation_signs(orientation)
        a = a * signs
        b = b * signs
    return bool(np.all(a >= b) and np.any(a > b))


def non_dominated_filter(points, orientation=None) -> np.ndarray:
    """Indices of points dominated by no other point in the list."""
    Y = np.asarray(points, dtype=float)
    if Y.ndim != 2 or Y.shape[0] == 0:
        raise ProblemError("need a non-empty 2-D array of points")
    if orientation is not None:
        Y = Y * orientation_signs(orientation)[None, :]
    n = Y.shape[0]
    # dominated[i] iff some j with Y[j] >= Y[i] everywhere and > somewhere
    ge = np.all(Y[:, None, :] >= Y[None, :, :], axis=2)
    gt = np.any(Y[:, None, :] > Y[None, :, :], axis=2)
    dominated = np.any(ge & gt, axis=0)
    return np.flatnonzero(~dominated)


# ---------------------------------------------------------------------------
# Catalog pairing problems with their utilities, and spec (de)serialization
# ---------------------------------------------------------------------------

DEFAULT_IDEAL_DTLZ2 = tuple(0.2 if (i + 1) % 2 == 0 else 0.0 for i in range(6))

CARCAB_TABLE_FILE = "carcab_utility_v1.txt"


def load_piecewise_tables(path=None) -> tuple[PiecewiseTable, ...]:
    """Load piecewise value tables from the plain-text table format.

    Each non-comment line reads ``<objective index>: b1 b2 ... ; s0 s1 ...``
    with 1-based objective indices, strictly increasing breakpoints, and one
    more slope than breakpoints.  The packaged default for the car problem
    is a documented stand-in (see README) and can be overridden per run.
    """
    if path is None:
        text = (
            resources.files("prefpareto.data").joinpath(CARCAB_TABLE_FILE).read_text()
        )
    else:
        with open(path) as fh:
            text = fh.read()
    rows: dict[int, PiecewiseTable] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, rest = line.split(":", 1)
        bp_part, slope_part = rest.split(";")
        idx = int(head)
        rows[idx] = PiecewiseTable(
            np.array([float(v) for v in bp_part.split()]),
            np.array([float(v) for v in slope_part.split()]),
        )
    if not rows:
        raise ProblemError("no table rows found")
    ordered = [rows[i] for i in sorted(rows)]
    if sorted(rows) != list(range(1, len(ordered) + 1)):
        raise ProblemError("table rows must cover objectives 1..m")
    return tuple(ordered)


def dump_piecewise_tables(tables, path) -> None:
    lines = ["# piecewise-linear utility tables v1", "# objective: breakpoints ; slopes"]
    for i, t in enumerate(tables, start=1):
        bp = " ".join(repr(float(v)) for v in t.breakpoints)
        sl = " ".join(repr(float(v)) for v in t.slopes)
        lines.append(f"{i}: {bp} ; {sl}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def default_utility(problem: ProblemSpec) -> UtilitySpec:
    """The catalog pairing of each benchmark family with a utility kind."""
    family = problem.name.split("-")[0]
    if family == "dtlz7":
        return linear_sum()
    if family == "dtlz2":
        ideal = tuple(0.2 if (i + 1) % 2 == 0 else 0.0 for i in range(problem.m))
        return cubic_norm_to_ideal(ideal)
    if family == "wfg3":
        return soft_min_exponential(4.0)
    return piecewise_linear_sum(load_piecewise_tables())


def utility_to_dict(spec: UtilitySpec) -> dict:
    doc: dict = {"kind": spec.kind}
    if spec.kind == "cubic-norm-to-ideal":
        doc["ideal"] = [float(v) for v in spec.params["ideal"]]
    elif spec.kind == "soft-min-exponential":
        doc["theta"] = spec.params["theta"]
    elif spec.kind == "piecewise-linear-sum":
        doc["tables"] = [
            {
                "breakpoints": [float(v) for v in t.breakpoints],
                "slopes": [float(v) for v in t.slopes],
            }
            for t in spec.params["tables"]
        ]
    return doc


def utility_from_dict(doc: dict) -> UtilitySpec:
    kind = doc["kind"]
    if kind == "linear-sum":
        return linear_sum()
    if kind == "cubic-norm-to-ideal":
        return cubic_norm_to_ideal(doc["ideal"])
    if kind == "soft-min-exponential":
        return soft_min_exponential(doc["theta"])
    tables = [
        PiecewiseTable(np.asarray(t["breakpoints"]), np.asarray(t["slopes"]))
        for t in doc["tables"]
    ]
    return piecewise_linear_sum(tables)


def problem_to_dict(problem: ProblemSpec) -> dict:
    return {
        "name": problem.name,
        "d": problem.d,
        "m": problem.m,
        "bounds": [[float(a), float(b)] for a, b in problem.bounds],
        "orientation": list(problem.orientation),
        "objective_names": list(problem.objective_names),
    }


def problem_from_dict(doc: dict) -> ProblemSpec:
    return ProblemSpec(
        doc["name"],
        int(doc["d"]),
        int(doc["m"]),
        np.asarray(doc["bounds"], dtype=float),
        tuple(doc["orientation"]),
        tuple(doc.get("objective_names", ())),
    )


def save_specs(path, problem: ProblemSpec, utility: UtilitySpec | None = None) -> None:
    doc: dict = {"problem": problem_to_dict(problem)}
    if utility is not None:
        doc["utility"] = utility_to_dict(utility)
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)


def load_specs(path) -> tuple[ProblemSpec, UtilitySpec | None]:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    problem = problem_from_dict(doc["problem"])
    utility = utility_from_dict(doc["utility"]) if "utility" in doc else None
    return problem, utility

"""Simulated decision-maker: responds to pairwise queries from a ground-truth
utility, either noise-free or with a calibrated logistic error rate.

Noise calibration targets the probability of picking the worse option among
pairs drawn from the top 1% of utility values over the decision box, found by
monotone bisection on the noise temperature.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass

import numpy as np

from .gp import Response, likelihood
from .problems import (
    ProblemSpec,
    UtilitySpec,
    evaluate_objectives_batch,
    orientation_signs,
    true_utility,
    true_utility_batch,
    utility_to_dict,
)

NOISE_NONE = "none"
NOISE_LOGISTIC = "logistic"

DM_LAMBDA_FLOOR = 1e-8


class DmError(ValueError):
    """Invalid decision-maker configuration or input."""


@dataclass
class DmConfig:
    utility: UtilitySpec
    noise_mode: str = NOISE_NONE
    noise_level: float | None = None  # logistic temperature
    seed: int = 0

    def __post_init__(self):
        if self.noise_mode not in (NOISE_NONE, NOISE_LOGISTIC):
            raise DmError(f"unknown noise mode {self.noise_mode!r}")
        if self.noise_mode == NOISE_LOGISTIC:
            if self.noise_level is None or self.noise_level <= 0:
                raise DmError("logistic mode needs a positive noise level")


class SimulatedDm:
    """Answers queries deterministically given (seed, call index).

    Objective vectors are expected in canonical maximization form, matching
    everything downstream of the problem evaluators.
    """

    def __init__(self, config: DmConfig):
        self.config = config
        self.calls = 0

    def respond(self, y1, y2) -> Response:
        u1 = true_utility(self.config.utility, y1)
        u2 = true_utility(self.config.utility, y2)
        if not (np.isfinite(u1) and np.isfinite(u2)):
            raise DmError("non-finite utility value")
        index = self.calls
        self.calls += 1
        if self.config.noise_mode == NOISE_NONE:
            return Response(1 if u1 >= u2 else 2)
        p1 = likelihood(u1, u2, self.config.noise_level, 1)
        rng = np.random.default_rng([self.config.seed, index])
        return Response(1 if rng.random() < p1 else 2)


def respond(dm: SimulatedDm, y1, y2) -> Response:
    return dm.respond(y1, y2)


def error_rate(gaps: np.ndarray, lam: float) -> float:
    """Mean probability of choosing the worse option for the given absolute
    utility gaps under the logistic model at temperature lam."""
    z = np.clip(np.abs(gaps) / lam, 0.0, 700.0)
    return float(np.mean(1.0 / (1.0 + np.exp(z))))


def _elite_utility_gaps(problem, utility, n_probe, n_pairs, rng):
    X = rng.uniform(problem.lower, problem.upper, size=(n_probe, problem.d))
    Y = evaluate_objectives_batch(problem, X) * orientation_signs(problem.orientation)
    u = true_utility_batch(utility, Y)
    threshold = np.quantile(u, 0.99)
    elite = u[u >= threshold]
    if elite.max() - elite.min() <= 1e-12 * max(1.0, abs(float(elite.max()))):
        raise DmError("all top-1% utilities are equal; error rate stuck at 0.5")
    i = rng.integers(0, elite.size, size=n_pairs)
    j = rng.integers(0, elite.size, size=n_pairs)
    return np.abs(elite[i] - elite[j])


def calibrate_noise(
    problem: ProblemSpec,
    utility: UtilitySpec,
    target_error_rate: float,
    n_probe: int = 100_000,
    seed=0,
    n_pairs: int = 100_000,
    cache_path=None,
) -> float:
    """Noise temperature reproducing the target error rate on elite pairs.

    Draws n_probe uniform decisions, keeps the top 1% by utility, and
    bisects the temperature until the expected error over random ordered
    pairs from that subset matches the target within 1e-3.  Results are
    cached per (problem, utility, target, n_probe, seed) when a cache path
    is given.
    """
    if not 0.0 <= target_error_rate < 0.5:
        raise DmError("target error rate must lie in [0, 0.5)")
    if n_probe < 10_000:
        raise DmError("n_probe must be at least 10000")

    key = json.dumps(
        {
            "problem": problem.name,
            "utility": utility_to_dict(utility),
            "target": target_error_rate,
            "n_probe": n_probe,
            "seed": seed,
        },
        sort_keys=True,
    )
    cache = {}
    if cache_path is not None and os.path.exists(cache_path):
        with open(cache_path) as fh:
            cache = json.load(fh)
        if key in cache:
            return float(cache[key])

    if target_error_rate == 0.0:
        warnings.warn(
            "target error rate 0 is the noise-free limit; returning the "
            "configured temperature floor"
        )
        return DM_LAMBDA_FLOOR

    rng = np.random.default_rng(seed)
    gaps = _elite_utility_gaps(problem, utility, n_probe, n_pairs, rng)

    lo = DM_LAMBDA_FLOOR
    hi = 1.0
    while error_rate(gaps, hi) < target_error_rate:
        hi *= 10.0
        if hi > 1e12:
            raise DmError("target error rate unreachable for this utility")
    for _ in range(200):
        mid = np.sqrt(lo * hi)
        err = error_rate(gaps, mid)
        if abs(err - target_error_rate) <= 1e-3:
            lo = hi = mid
            break
        if err < target_error_rate:
            lo = mid
        else:
            hi = mid
    lam = float(np.sqrt(lo * hi))

    if cache_path is not None:
        cache[key] = lam
        tmp = str(cache_path) + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(cache, fh, indent=1, sort_keys=True)
        os.replace(tmp, cache_path)
    return lam

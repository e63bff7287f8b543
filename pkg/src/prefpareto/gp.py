"""Variational Gaussian-process model of a latent utility from pairwise choices.

The decision-maker's responses follow a logistic choice likelihood with a
noise temperature; the latent utility gets a zero-mean GP prior with a
Matern-5/2 ARD kernel.  The posterior is a Gaussian over utility values at a
set of inducing points (all distinct data points plus quasi-random Sobol
fill), fitted by maximizing the evidence lower bound:

    ELBO = sum_j E_q[log p(choice_j | u)] - KL(q || prior)

Because the likelihood of one comparison depends only on the *difference* of
the two latent utilities, each expectation reduces to a 1-D Gaussian integral
handled by fixed-order Gauss-Hermite quadrature.  Gradients with respect to
every trainable quantity (variational mean, covariance square root, ARD
lengthscales, signal variance, noise temperature) are computed analytically
and checked against finite differences in the test suite.

Inputs are affinely normalized per dimension before any kernel math; a fitted
posterior stores its normalizer and accepts unnormalized points everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.stats import qmc

ORIGIN_ELICITED = "elicited"
ORIGIN_INITIAL = "initial"
ORIGIN_VIRTUAL = "virtual-monotonicity"

OBJECTIVE_SPACE = "objective"
DECISION_SPACE = "decision"

LAM_BOUNDS = (1e-3, 10.0)
LS_BOUNDS = (1e-2, 1e2)  # inputs are normalized, so these are generous
SV_BOUNDS = (1e-3, 1e3)

_SQRT5 = math.sqrt(5.0)
_JITTER = 1e-6


class ModelError(ValueError):
    """Invalid model input or state."""


# ---------------------------------------------------------------------------
# Choice likelihood
# ---------------------------------------------------------------------------


def likelihood(u1: float, u2: float, lam: float, choice: int) -> float:
    """Probability of the given choice under the logistic noise model.

    Computed so that the two choices' probabilities sum to exactly 1 in
    floating point.  lam -> 0 recovers the noise-free argmax response.
    """
    if lam <= 0:
        raise ModelError(f"noise level must be > 0, got {lam}")
    if choice not in (1, 2):
        raise ModelError(f"choice must be 1 or 2, got {choice}")
    # p1 = 1 / (1 + exp((u2 - u1)/lam)), saturating exactly at 0/1 once the
    # exponent leaves the representable range (the noise-free limit)
    a = (u2 - u1) / lam
    if a >= 709.0:
        p1 = 0.0
    elif a <= -709.0:
        p1 = 1.0
    else:
        p1 = 1.0 / (1.0 + math.exp(a))
    return p1 if choice == 1 else 1.0 - p1


# ---------------------------------------------------------------------------
# Comparison data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QueryPair:
    """One pair of points shown to the decision-maker, in model input space."""

    first: np.ndarray
    second: np.ndarray
    origin: str = ORIGIN_ELICITED

    def __post_init__(self):
        first = np.asarray(self.first, dtype=float)
        second = np.asarray(self.second, dtype=float)
        if first.ndim != 1 or first.shape != second.shape:
            raise ModelError("query pair points must be 1-D and equal length")
        object.__setattr__(self, "first", first)
        object.__setattr__(self, "second", second)


@dataclass(frozen=True)
class Response:
    choice: int

    def __post_init__(self):
        if self.choice not in (1, 2):
            raise ModelError(f"choice must be 1 or 2, got {self.choice}")


@dataclass
class PreferenceDataset:
    """Ordered history of (pair, response) comparisons in one input space."""

    comparisons: list = field(default_factory=list)

    def __post_init__(self):
        dim = None
        for pair, response in self.comparisons:
            if dim is None:
                dim = pair.first.size
            elif pair.first.size != dim:
                raise ModelError("all comparisons must share one input space")
            if pair.origin == ORIGIN_VIRTUAL and response.choice != 1:
                raise ModelError("virtual pairs must list the dominating point first")

    def __len__(self) -> int:
        return len(self.comparisons)

    @property
    def dim(self) -> int:
        if not self.comparisons:
            raise ModelError("empty dataset has no dimension")
        return self.comparisons[0][0].first.size

    def add(self, pair: QueryPair, response: Response) -> None:
        if self.comparisons and pair.first.size != self.dim:
            raise ModelError("all comparisons must share one input space")
        if pair.origin == ORIGIN_VIRTUAL and response.choice != 1:
            raise ModelError("virtual pairs must list the dominating point first")
        self.comparisons.append((pair, response))

    def winners_losers(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked winner and loser points, one row per comparison."""
        win, lose = [], []
        for pair, response in self.comparisons:
            if response.choice == 1:
                win.append(pair.first)
                lose.append(pair.second)
            else:
                win.append(pair.second)
                lose.append(pair.first)
        return np.asarray(win), np.asarray(lose)


# ---------------------------------------------------------------------------
# Kernel and normalization
# ---------------------------------------------------------------------------


def matern52(X1, X2, lengthscales, signal_variance) -> np.ndarray:
    """Matern-5/2 kernel with per-dimension lengthscales."""
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    X2 = np.atleast_2d(np.asarray(X2, dtype=float))
    ls = np.asarray(lengthscales, dtype=float)
    d = X1[:, None, :] - X2[None, :, :]
    r = np.sqrt(np.maximum(np.sum((d / ls) ** 2, axis=2), 0.0))
    sr = _SQRT5 * r
    return signal_variance * (1.0 + sr + sr**2 / 3.0) * np.exp(-sr)


@dataclass(frozen=True)
class AffineNormalizer:
    """Per-dimension map x -> (x - offset) / scale."""

    offset: np.ndarray
    scale: np.ndarray

    @classmethod
    def from_points(cls, X) -> "AffineNormalizer":
        X = np.asarray(X, dtype=float)
        lo = X.min(axis=0)
        hi = X.max(axis=0)
        scale = hi - lo
        degenerate = scale <= 0
        offset = np.where(degenerate, lo - 0.5, lo)
        scale = np.where(degenerate, 1.0, scale)
        return cls(offset, scale)

    @classmethod
    def from_bounds(cls, lower, upper) -> "AffineNormalizer":
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        return cls(lower, upper - lower)

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.offset) / self.scale

    def inverse(self, U) -> np.ndarray:
        return np.asarray(U, dtype=float) * self.scale + self.offset


@dataclass(frozen=True)
class GPHyperparams:
    lengthscales: np.ndarray
    signal_variance: float
    noise_level: float

    def __post_init__(self):
        ls = np.asarray(self.lengthscales, dtype=float)
        if np.any(ls <= 0) or self.signal_variance <= 0 or self.noise_level <= 0:
            raise ModelError("hyperparameters must be strictly positive")
        object.__setattr__(self, "lengthscales", ls)


# ---------------------------------------------------------------------------
# Posterior state
# ---------------------------------------------------------------------------


@dataclass
class UtilityPosterior:
    """Variational GP state: Gaussian over utilities at inducing points.

    inducing points are stored in normalized coordinates; every public
    method takes unnormalized points and applies the stored normalizer.
    """

    inducing: np.ndarray
    mu: np.ndarray
    cov: np.ndarray
    hyperparams: GPHyperparams
    input_space: str
    normalizer: AffineNormalizer
    converged: bool = True
    elbo_value: float = float("nan")
    _chol_cache: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.inducing = np.asarray(self.inducing, dtype=float)
        self.mu = np.asarray(self.mu, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        n = self.inducing.shape[0]
        if self.mu.shape != (n,) or self.cov.shape != (n, n):
            raise ModelError("inconsistent posterior shapes")
        if not np.allclose(self.cov, self.cov.T, atol=1e-8):
            raise ModelError("variational covariance must be symmetric")
        if self.input_space not in (OBJECTIVE_SPACE, DECISION_SPACE):
            raise ModelError(f"unknown input space {self.input_space!r}")

    @classmethod
    def prior(
        cls,
        inducing,
        hyperparams: GPHyperparams,
        input_space: str,
        normalizer: AffineNormalizer,
    ) -> "UtilityPosterior":
        """q equal to the GP prior at the inducing points (KL = 0)."""
        Z = np.asarray(inducing, dtype=float)
        K = _prior_gram(Z, hyperparams)
        return cls(Z, np.zeros(Z.shape[0]), K, hyperparams, input_space, normalizer)

    @property
    def dim(self) -> int:
        return self.inducing.shape[1]

    def _prior_chol(self):
        if self._chol_cache is None:
            K = _prior_gram(self.inducing, self.hyperparams)
            self._chol_cache = cho_factor(K, lower=True)
        return self._chol_cache

    def _normalize(self, points) -> np.ndarray:
        X = np.atleast_2d(np.asarray(points, dtype=float))
        if X.shape[1] != self.dim:
            raise ModelError(
                f"points must have dimension {self.dim}, got {X.shape[1]}"
            )
        return self.normalizer.transform(X)

    def mean_var(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Predictive mean vector and full covariance matrix at the points."""
        U = self._normalize(points)
        hp = self.hyperparams
        cf = self._prior_chol()
        Kxz = matern52(U, self.inducing, hp.lengthscales, hp.signal_variance)
        B = cho_solve(cf, Kxz.T)  # (n_i, q)
        mean = Kxz @ cho_solve(cf, self.mu)
        Kxx = matern52(U, U, hp.lengthscales, hp.signal_variance)
        C = Kxx - Kxz @ B + B.T @ self.cov @ B
        return mean, 0.5 * (C + C.T)

    def pair_stats(self, first, second):
        """Batched predictive stats for point pairs.

        Returns (m1, m2, v1, v2, c12) with one entry per pair row.
        """
        P1 = self._normalize(first)
        P2 = self._normalize(second)
        hp = self.hyperparams
        cf = self._prior_chol()
        stacked = np.concatenate([P1, P2], axis=0)
        Kxz = matern52(stacked, self.inducing, hp.lengthscales, hp.signal_variance)
        B = cho_solve(cf, Kxz.T)  # (n_i, 2B)
        mean = Kxz @ cho_solve(cf, self.mu)
        SB = self.cov @ B
        n = P1.shape[0]
        var = hp.signal_variance - np.sum(Kxz.T * B, axis=0) + np.sum(B * SB, axis=0)
        d = P1 - P2
        r = np.sqrt(np.maximum(np.sum((d / hp.lengthscales) ** 2, axis=1), 0.0))
        sr = _SQRT5 * r
        k12 = hp.signal_variance * (1.0 + sr + sr**2 / 3.0) * np.exp(-sr)
        c12 = (
            k12
            - np.sum(Kxz.T[:, :n] * B[:, n:], axis=0)
            + np.sum(B[:, :n] * SB[:, n:], axis=0)
        )
        return mean[:n], mean[n:], np.maximum(var[:n], 0.0), np.maximum(var[n:], 0.0), c12

    def mean(self, points) -> np.ndarray:
        """Predictive mean only (cheap path for ranking candidates)."""
        U = self._normalize(points)
        hp = self.hyperparams
        cf = self._prior_chol()
        Kxz = matern52(U, self.inducing, hp.lengthscales, hp.signal_variance)
        return Kxz @ cho_solve(cf, self.mu)

    def sample(self, points, n_samples: int, seed) -> np.ndarray:
        """Joint predictive samples, shape (n_samples, n_points)."""
        if n_samples < 1:
            raise ModelError("n_samples must be >= 1")
        mean, cov = self.mean_var(points)
        L = psd_sqrt(cov)
        rng = np.random.default_rng(seed)
        Z = rng.standard_normal((n_samples, mean.size))
        return mean[None, :] + Z @ L.T

    def to_doc(self) -> dict:
        return {
            "schema_version": 1,
            "input_space": self.input_space,
            "converged": bool(self.converged),
            "elbo": float(self.elbo_value),
            "hyperparams": {
                "lengthscales": self.hyperparams.lengthscales.tolist(),
                "signal_variance": float(self.hyperparams.signal_variance),
                "noise_level": float(self.hyperparams.noise_level),
            },
            "normalizer": {
                "offset": self.normalizer.offset.tolist(),
                "scale": self.normalizer.scale.tolist(),
            },
            "inducing": {"shape": list(self.inducing.shape), "data": self.inducing.ravel().tolist()},
            "mu": {"shape": [self.mu.size], "data": self.mu.tolist()},
            "cov": {"shape": list(self.cov.shape), "data": self.cov.ravel().tolist()},
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "UtilityPosterior":
        if doc.get("schema_version") != 1:
            raise ModelError(f"unsupported posterior schema {doc.get('schema_version')!r}")
        hp = GPHyperparams(
            np.asarray(doc["hyperparams"]["lengthscales"], dtype=float),
            doc["hyperparams"]["signal_variance"],
            doc["hyperparams"]["noise_level"],
        )
        norm = AffineNormalizer(
            np.asarray(doc["normalizer"]["offset"], dtype=float),
            np.asarray(doc["normalizer"]["scale"], dtype=float),
        )
        return cls(
            np.asarray(doc["inducing"]["data"], dtype=float).reshape(doc["inducing"]["shape"]),
            np.asarray(doc["mu"]["data"], dtype=float),
            np.asarray(doc["cov"]["data"], dtype=float).reshape(doc["cov"]["shape"]),
            hp,
            doc["input_space"],
            norm,
            converged=doc.get("converged", True),
            elbo_value=doc.get("elbo", float("nan")),
        )


def _prior_gram(Z: np.ndarray, hp: GPHyperparams) -> np.ndarray:
    K = matern52(Z, Z, hp.lengthscales, hp.signal_variance)
    return K + (_JITTER * hp.signal_variance) * np.eye(Z.shape[0])


def psd_sqrt(C: np.ndarray) -> np.ndarray:
    """Matrix square root of a PSD matrix; tolerates exact singularity."""
    try:
        return np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(0.5 * (C + C.T))
        return V * np.sqrt(np.clip(w, 0.0, None))


# ---------------------------------------------------------------------------
# ELBO and fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitConfig:
    """Settings for one ELBO maximization."""

    input_space: str = OBJECTIVE_SPACE
    bounds: np.ndarray | None = None  # required for decision-space normalization
    sobol_min: int = 64
    quad_nodes: int = 20
    max_iters: int = 2000
    grad_tol: float = 1e-5
    learning_rate: float = 0.05
    plateau_iters: int = 200
    plateau_rel: float = 1e-6
    init_lengthscale: float = 0.5
    init_signal_variance: float = 1.0
    init_noise_level: float = 0.1
    seed: int = 0


class _Quad:
    def __init__(self, nodes: int):
        t, w = hermgauss(nodes)
        self.t = t
        self.w = w / math.sqrt(math.pi)


def _expected_log_choice(m, s, lam, quad: _Quad):
    """E[log sigmoid(D / lam)] with D ~ N(m, s^2), via Gauss-Hermite.

    Returns (values, d/dm, d/ds, d/dlam) as arrays over comparisons.
    """
    z = (m[:, None] + math.sqrt(2.0) * s[:, None] * quad.t[None, :]) / lam
    log_sig = -np.logaddexp(0.0, -z)
    sig_neg = np.exp(log_sig - z)  # sigmoid(-z) = sigmoid(z) * exp(-z), stable
    vals = log_sig @ quad.w
    A = sig_neg * quad.w[None, :]
    d_m = A.sum(axis=1) / lam
    d_s = (A @ (math.sqrt(2.0) * quad.t)) / lam
    d_lam = -(A * z).sum(axis=1) / lam
    return vals, d_m, d_s, d_lam


def elbo(dataset: PreferenceDataset, posterior: UtilityPosterior, quad_nodes: int = 20) -> float:
    """Evidence lower bound of the posterior on the given comparisons."""
    if len(dataset) == 0:
        raise ModelError("dataset must be non-empty")
    win, lose = dataset.winners_losers()
    m1, m2, v1, v2, c12 = posterior.pair_stats(win, lose)
    m = m1 - m2
    s = np.sqrt(np.maximum(v1 + v2 - 2.0 * c12, 0.0) + 1e-14)
    quad = _Quad(quad_nodes)
    ll = float(np.sum(_expected_log_choice(m, s, posterior.hyperparams.noise_level, quad)[0]))

    K = _prior_gram(posterior.inducing, posterior.hyperparams)
    cf = cho_factor(K, lower=True)
    n = posterior.mu.size
    Kinv_S = cho_solve(cf, posterior.cov)
    quad_term = float(posterior.mu @ cho_solve(cf, posterior.mu))
    logdet_K = 2.0 * float(np.sum(np.log(np.diag(cf[0]))))
    sign, logdet_S = np.linalg.slogdet(posterior.cov)
    if sign <= 0:
        raise ModelError("variational covariance must be positive definite")
    kl = 0.5 * (np.trace(Kinv_S) + quad_term - n + logdet_K - logdet_S)
    return ll - float(kl)


class _ParamPack:
    """Flat packing of the whitened trainable quantities.

    The variational Gaussian is parameterized relative to the prior:
    mu' = Lk w and Sigma' = Lk (C C^T) Lk^T with Lk = chol(K).  This keeps
    the KL term independent of the kernel (KL = 0.5 (||C||_F^2 + w^T w - n
    - 2 sum log diag C)), which is what makes first-order ascent workable on
    the near-singular Gram matrices dense inducing sets produce.
    """

    def __init__(self, n: int, p: int):
        self.n = n
        self.p = p
        self.tril_idx = np.tril_indices(n, k=-1)
        self.n_tril = len(self.tril_idx[0])
        # layout: w | strict-lower C | raw diag C | log ls | log sv | log lam
        self.size = n + self.n_tril + n + p + 2

    def init(self, cfg: FitConfig) -> np.ndarray:
        theta = np.zeros(self.size)
        off = self.n + self.n_tril
        # softplus(x) = 1  =>  C = I  =>  q equals the prior
        theta[off: off + self.n] = math.log(math.expm1(1.0))
        off += self.n
        theta[off: off + self.p] = math.log(cfg.init_lengthscale)
        theta[off + self.p] = math.log(cfg.init_signal_variance)
        theta[off + self.p + 1] = math.log(cfg.init_noise_level)
        return theta

    def unpack(self, theta: np.ndarray):
        n, p = self.n, self.p
        w = theta[:n]
        off = n
        C = np.zeros((n, n))
        C[self.tril_idx] = theta[off: off + self.n_tril]
        off += self.n_tril
        raw_diag = theta[off: off + n]
        C[np.arange(n), np.arange(n)] = np.logaddexp(0.0, raw_diag)  # softplus
        off += n
        ls = np.exp(theta[off: off + p])
        sv = math.exp(theta[off + p])
        lam = math.exp(theta[off + p + 1])
        return w, C, raw_diag, ls, sv, lam

    def project(self, theta: np.ndarray) -> None:
        """Clip the log-scale hyperparameters into their boxes."""
        off = self.n + self.n_tril + self.n
        np.clip(
            theta[off: off + self.p],
            math.log(LS_BOUNDS[0]),
            math.log(LS_BOUNDS[1]),
            out=theta[off: off + self.p],
        )
        theta[-2] = min(max(theta[-2], math.log(SV_BOUNDS[0])), math.log(SV_BOUNDS[1]))
        theta[-1] = min(max(theta[-1], math.log(LAM_BOUNDS[0])), math.log(LAM_BOUNDS[1]))


def _kernel_parts(Z, SQ, ls, sv):
    r = np.sqrt(np.maximum(SQ @ (1.0 / ls**2), 0.0))
    sr = _SQRT5 * r
    E = np.exp(-sr)
    K = sv * ((1.0 + sr + sr**2 / 3.0) * E + _JITTER * np.eye(Z.shape[0]))
    return K, sr, E


def _elbo_and_grad(theta, pack: _ParamPack, Z, SQ, win_idx, lose_idx, quad: _Quad):
    """ELBO value and gradient w.r.t. the packed (whitened) parameters."""
    n, p = pack.n, pack.p
    w, C, raw_diag, ls, sv, lam = pack.unpack(theta)

    K, sr, E = _kernel_parts(Z, SQ, ls, sv)
    Lk = np.linalg.cholesky(K)

    # likelihood depends on utility differences only: for comparison j with
    # winner a and loser b, D_j ~ N(t_j . w, ||t_j C||^2), t_j = Lk[a] - Lk[b]
    T = Lk[win_idx] - Lk[lose_idx]
    m = T @ w
    R = T @ C
    s = np.sqrt(np.sum(R * R, axis=1) + 1e-14)
    vals, d_m, d_s, d_lam = _expected_log_choice(m, s, lam, quad)
    ll = float(np.sum(vals))

    diag_C = np.diag(C)
    kl = 0.5 * (np.sum(C * C) + w @ w - n) - float(np.sum(np.log(diag_C)))

    grad = np.zeros_like(theta)
    grad[:n] = T.T @ d_m - w

    # dE/dC from the likelihood (through R) and the KL
    dE_dR = (d_s / s)[:, None] * R
    G_C = T.T @ dE_dR - C
    G_C[np.arange(n), np.arange(n)] += 1.0 / diag_C
    off = n
    grad[off: off + pack.n_tril] = G_C[pack.tril_idx]
    off += pack.n_tril
    sig = 1.0 / (1.0 + np.exp(-raw_diag))
    grad[off: off + n] = np.diag(G_C) * sig
    off += n

    # kernel hyperparameters enter through Lk only; accumulate the adjoint
    # of Lk and push it back through the Cholesky factorization
    dE_dT = np.outer(d_m, w) + dE_dR @ C.T
    Lk_bar = np.zeros((n, n))
    np.add.at(Lk_bar, win_idx, dE_dT)
    np.add.at(Lk_bar, lose_idx, -dE_dT)
    B = Lk.T @ Lk_bar
    BL = np.tril(B, k=-1)
    C_adj = 0.5 * (BL + BL.T) + np.diag(0.5 * np.diag(B))
    half = solve_triangular(Lk, C_adj, lower=True, trans="T", check_finite=False)
    K_bar = solve_triangular(Lk, half.T, lower=True, trans="T", check_finite=False).T

    base = sv * (5.0 / 3.0) * (1.0 + sr) * E
    W_mat = K_bar * base
    for j in range(p):
        grad[off + j] = float(np.sum(W_mat * SQ[:, :, j]) / ls[j] ** 2)
    grad[off + p] = float(np.sum(K_bar * K))  # dK/dlog sv = K (incl. jitter)
    grad[off + p + 1] = float(np.sum(d_lam)) * lam  # chain to log lam

    return ll - kl, grad


def _build_inducing(points: np.ndarray, cfg: FitConfig) -> np.ndarray:
    """Distinct data points plus Sobol fill of the unit box."""
    unique = np.unique(points, axis=0)
    target = max(cfg.sobol_min, unique.shape[0])
    n_fill = target - unique.shape[0]
    if n_fill <= 0:
        return unique
    sob = qmc.Sobol(d=points.shape[1], scramble=True, seed=cfg.seed)
    fill = sob.random_base2(max(int(np.ceil(np.log2(n_fill))), 0))[:n_fill]
    return np.concatenate([unique, fill], axis=0)


def fit(dataset: PreferenceDataset, config: FitConfig | None = None) -> UtilityPosterior:
    """Maximize the ELBO over variational and kernel parameters.

    Inducing points are the distinct dataset points plus Sobol fill up to
    max(sobol_min, #distinct).  Returns the best state seen; if neither the
    gradient tolerance nor an ELBO plateau was reached within the iteration
    cap the posterior is flagged converged=False.
    """
    cfg = config or FitConfig()
    if len(dataset) == 0:
        raise ModelError("cannot fit an empty dataset")
    win, lose = dataset.winners_losers()
    all_points = np.concatenate([win, lose], axis=0)

    if cfg.input_space == DECISION_SPACE:
        if cfg.bounds is None:
            raise ModelError("decision-space fitting requires box bounds")
        bounds = np.asarray(cfg.bounds, dtype=float)
        normalizer = AffineNormalizer.from_bounds(bounds[:, 0], bounds[:, 1])
    else:
        normalizer = AffineNormalizer.from_points(all_points)

    U = normalizer.transform(all_points)
    Z = _build_inducing(U, cfg)
    n, p = Z.shape

    # map each comparison point to its inducing index (exact match on rows)
    order = np.lexsort(Z.T[::-1])
    Zs = Z[order]

    def locate(rows: np.ndarray) -> np.ndarray:
        idx = np.empty(rows.shape[0], dtype=int)
        for i, row in enumerate(rows):
            j = np.searchsorted(Zs[:, 0], row[0], side="left")
            while j < Zs.shape[0] and not np.array_equal(Zs[j], row):
                j += 1
            if j >= Zs.shape[0]:
                raise ModelError("data point missing from inducing set")
            idx[i] = order[j]
        return idx

    n_c = win.shape[0]
    win_idx = locate(U[:n_c])
    lose_idx = locate(U[n_c:])

    SQ = (Z[:, None, :] - Z[None, :, :]) ** 2
    quad = _Quad(cfg.quad_nodes)
    pack = _ParamPack(n, p)
    theta = pack.init(cfg)

    # Adam ascent with best-state tracking
    m_t = np.zeros_like(theta)
    v_t = np.zeros_like(theta)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    best_val = -np.inf
    best_theta = theta.copy()
    since_best = 0
    converged = False
    for it in range(1, cfg.max_iters + 1):
        try:
            val, grad = _elbo_and_grad(theta, pack, Z, SQ, win_idx, lose_idx, quad)
        except np.linalg.LinAlgError:
            theta = best_theta.copy()  # back off a diverged trajectory
            m_t[:] = 0.0
            v_t[:] = 0.0
            continue
        if not np.isfinite(val) or not np.all(np.isfinite(grad)):
            theta = best_theta.copy()
            m_t[:] = 0.0
            v_t[:] = 0.0
            continue
        if val > best_val:
            improved = val > best_val + cfg.plateau_rel * (1.0 + abs(val))
            best_val = val
            best_theta = theta.copy()
            since_best = 0 if improved else since_best + 1
        else:
            since_best += 1
        if np.max(np.abs(grad)) < cfg.grad_tol:
            converged = True
            break
        if since_best >= cfg.plateau_iters:
            converged = True
            break
        gmax = np.max(np.abs(grad))
        if gmax > 1e4:  # keep ill-conditioned states from derailing Adam
            grad = grad * (1e4 / gmax)
        m_t = beta1 * m_t + (1.0 - beta1) * grad
        v_t = beta2 * v_t + (1.0 - beta2) * grad**2
        mhat = m_t / (1.0 - beta1**it)
        vhat = v_t / (1.0 - beta2**it)
        theta = theta + cfg.learning_rate * mhat / (np.sqrt(vhat) + eps)
        pack.project(theta)

    w, C, _, ls, sv, lam = pack.unpack(best_theta)
    K, _, _ = _kernel_parts(Z, SQ, ls, sv)
    Lk = np.linalg.cholesky(K)
    LkC = Lk @ C
    posterior = UtilityPosterior(
        Z,
        Lk @ w,
        LkC @ LkC.T,
        GPHyperparams(ls, sv, lam),
        cfg.input_space,
        normalizer,
        converged=converged,
        elbo_value=best_val,
    )
    return posterior

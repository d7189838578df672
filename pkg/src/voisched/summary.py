"""Summary statistics z(x), their MMSE estimates under a Gaussian belief,
and closed-form expected squared errors used by the schedulers.

Built-in statistics: sample mean (avg), unbiased sample variance (var),
maximum (max), and interval count (cnt). A user-supplied scalar function
is accepted wherever a statistic is (estimated by Monte Carlo).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import owens_t
from scipy.stats import norm

from .kalman import BeliefState

AVG = "avg"
VAR = "var"
MAX = "max"
CNT = "cnt"
CUSTOM = "custom"

DEFAULT_MC_SAMPLES = 1000
_DEGENERATE_VAR = 1e-24


@dataclass(frozen=True)
class SummaryStatistic:
    kind: str
    lower: float = 0.0
    upper: float = 0.0
    fn: Callable[[np.ndarray], float] | None = None
    label: str | None = None

    def __post_init__(self):
        if self.kind not in (AVG, VAR, MAX, CNT, CUSTOM):
            raise ValueError(f"unknown statistic kind {self.kind!r}")
        if self.kind == CNT and self.lower > self.upper:
            raise ValueError("count interval requires lower <= upper")
        if self.kind == CUSTOM and self.fn is None:
            raise ValueError("custom statistic requires a function")

    @property
    def name(self) -> str:
        return self.label or self.kind

    @property
    def has_closed_form_estimate(self) -> bool:
        return self.kind in (AVG, VAR, CNT)


def avg_statistic() -> SummaryStatistic:
    return SummaryStatistic(AVG)


def var_statistic() -> SummaryStatistic:
    return SummaryStatistic(VAR)


def max_statistic() -> SummaryStatistic:
    return SummaryStatistic(MAX)


def count_statistic(lower: float, upper: float) -> SummaryStatistic:
    return SummaryStatistic(CNT, lower=lower, upper=upper)


def custom_statistic(fn: Callable[[np.ndarray], float], label: str = "custom") -> SummaryStatistic:
    return SummaryStatistic(CUSTOM, fn=fn, label=label)


def centering_matrix(n: int) -> np.ndarray:
    """M = I - J/N; symmetric idempotent projector with trace N-1, M 1 = 0."""
    return np.eye(n) - np.full((n, n), 1.0 / n)


def eval_statistic(stat: SummaryStatistic, x: np.ndarray) -> float | np.ndarray:
    """Evaluate z(x); batched over the leading axes if x has shape (..., N)."""
    x = np.asarray(x, dtype=float)
    if stat.kind == AVG:
        return np.mean(x, axis=-1)
    if stat.kind == VAR:
        return np.var(x, axis=-1, ddof=1)
    if stat.kind == MAX:
        return np.max(x, axis=-1)
    if stat.kind == CNT:
        inside = (x >= stat.lower) & (x <= stat.upper)
        return np.sum(inside, axis=-1).astype(float)
    if x.ndim == 1:
        return float(stat.fn(x))
    return np.apply_along_axis(stat.fn, -1, x)


def sample_belief(belief: BeliefState, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Draw (n_samples, N) states from N(xhat, psi); PSD-safe factorization."""
    cov = belief.covariance
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        # psi may be singular (e.g. a freshly pinned coordinate)
        w, v = np.linalg.eigh((cov + cov.T) / 2)
        factor = v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))
    z = rng.standard_normal((n_samples, belief.mean.shape[0]))
    return belief.mean + z @ factor.T


def estimate_statistic(stat: SummaryStatistic, belief: BeliefState,
                       mc_samples: int = DEFAULT_MC_SAMPLES,
                       rng: np.random.Generator | None = None) -> float:
    """MMSE estimate zhat = E[z(x)] under the belief.

    avg, var, and cnt have closed forms; max and custom statistics fall
    back to a Monte Carlo mean over mc_samples belief draws.
    """
    xhat, psi = belief.mean, belief.covariance
    n = xhat.shape[0]
    if stat.kind == AVG:
        return float(np.mean(xhat))
    if stat.kind == VAR:
        m = centering_matrix(n)
        return float((np.trace(m @ psi) + xhat @ m @ xhat) / (n - 1))
    if stat.kind == CNT:
        # expectation of a sum of indicators needs only the Gaussian marginals
        var = np.diag(psi)
        total = 0.0
        for i in range(n):
            if var[i] <= _DEGENERATE_VAR:
                total += float(stat.lower <= xhat[i] <= stat.upper)
            else:
                sd = np.sqrt(var[i])
                total += norm.cdf((stat.upper - xhat[i]) / sd) - norm.cdf((stat.lower - xhat[i]) / sd)
        return float(total)
    if mc_samples < 1:
        raise ValueError(f"statistic {stat.name!r} has no closed form; mc_samples must be >= 1")
    if rng is None:
        raise ValueError(f"statistic {stat.name!r} needs a random generator for Monte Carlo")
    draws = sample_belief(belief, mc_samples, rng)
    return float(np.mean(eval_statistic(stat, draws)))


def expected_err_mse(belief: BeliefState) -> float:
    """E[||x - xhat||^2] under the belief: the trace of psi."""
    return float(np.trace(belief.covariance))


def expected_err_avg(belief: BeliefState) -> float:
    """Variance of the sample mean under the belief: sum of psi entries over N^2."""
    n = belief.mean.shape[0]
    return float(np.sum(belief.covariance) / n**2)


def expected_err_var(belief: BeliefState, form: str = "standard") -> float:
    """Variance of the sample-variance statistic under the belief.

    form="standard" is the quadratic-form variance
    [2 tr(M psi M psi) + 4 xhat^T M psi M xhat] / (N-1)^2; form="printed"
    keeps the variant with tr(M psi^2) and xhat^T M psi xhat, which agrees
    with it only for isotropic psi. The sampling oracle in the test suite
    confirms the standard form.
    """
    xhat, psi = belief.mean, belief.covariance
    n = xhat.shape[0]
    m = centering_matrix(n)
    if form == "standard":
        mp = m @ psi
        num = 2 * np.trace(mp @ mp) + 4 * xhat @ mp @ m @ xhat
    elif form == "printed":
        num = 2 * np.trace(m @ psi @ psi) + 4 * xhat @ m @ psi @ xhat
    else:
        raise ValueError(f"unknown form {form!r}")
    return float(num / (n - 1) ** 2)


def bvn_cdf(h, k, rho):
    """Standard bivariate normal CDF P(X <= h, Y <= k) via Owen's T function.

    Vectorized over broadcastable arrays; rho is clamped slightly inside
    (-1, 1) and exact zeros of h, k are nudged to avoid the removable
    singularities of the Owen decomposition.
    """
    h = np.where(h == 0.0, 1e-15, np.asarray(h, dtype=float))
    k = np.where(k == 0.0, 1e-15, np.asarray(k, dtype=float))
    rho = np.clip(np.asarray(rho, dtype=float), -1 + 1e-12, 1 - 1e-12)
    denom = np.sqrt(1.0 - rho**2)
    a_h = (k - rho * h) / (h * denom)
    a_k = (h - rho * k) / (k * denom)
    delta = np.where(h * k > 0, 0.0, 0.5)
    return 0.5 * (norm.cdf(h) + norm.cdf(k)) - owens_t(h, a_h) - owens_t(k, a_k) - delta


def count_variance(mean: np.ndarray, cov: np.ndarray, lower: float, upper: float):
    """Exact variance of the interval-count statistic under N(mean, cov).

    Var(sum of indicators) = sum p_i(1-p_i) + 2 sum_{i<j} (P_ij - p_i p_j)
    with P_ij the bivariate normal rectangle probability. Batched over the
    leading axes of `mean` (the covariance is shared).
    """
    mean = np.asarray(mean, dtype=float)
    squeeze = mean.ndim == 1
    means = np.atleast_2d(mean)
    sd = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    live = sd > np.sqrt(_DEGENERATE_VAR)
    # degenerate coordinates are constants: zero variance, zero covariance
    p = np.where((means >= lower) & (means <= upper), 1.0, 0.0)
    safe_sd = np.where(live, sd, 1.0)
    alpha = (lower - means) / safe_sd
    beta = (upper - means) / safe_sd
    p = np.where(live, norm.cdf(beta) - norm.cdf(alpha), p)
    total = np.sum(np.where(live, p * (1.0 - p), 0.0), axis=-1)
    idx = np.nonzero(live)[0]
    if idx.size > 1:
        i, j = np.triu_indices(idx.size, k=1)
        gi, gj = idx[i], idx[j]
        rho = cov[gi, gj] / (sd[gi] * sd[gj])
        rect = (bvn_cdf(beta[..., gi], beta[..., gj], rho)
                - bvn_cdf(beta[..., gi], alpha[..., gj], rho)
                - bvn_cdf(alpha[..., gi], beta[..., gj], rho)
                + bvn_cdf(alpha[..., gi], alpha[..., gj], rho))
        total = total + 2.0 * np.sum(rect - p[..., gi] * p[..., gj], axis=-1)
    total = np.maximum(total, 0.0)
    return float(total[0]) if squeeze else total


def realized_error(stat: SummaryStatistic, x_true: np.ndarray, z_hat: float) -> float:
    """Squared estimation error (z(x) - zhat)^2."""
    return float((eval_statistic(stat, np.asarray(x_true, dtype=float)) - z_hat) ** 2)

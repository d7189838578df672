"""Shared helpers: random model/belief generators and a brute-force
joint-Gaussian conditioning oracle for the filter tests."""

from __future__ import annotations

import numpy as np
import pytest

from voisched import BeliefState, SystemModel


def random_psd(n: int, rng: np.random.Generator, jitter: float = 1e-3) -> np.ndarray:
    b = rng.standard_normal((n, n))
    return b @ b.T + jitter * np.eye(n)


def random_model(n: int, rng: np.random.Generator,
                 eps_max: float = 0.3) -> SystemModel:
    """Random stable model: A scaled to spectral radius < 1, PD noises."""
    a = rng.standard_normal((n, n))
    rho = np.max(np.abs(np.linalg.eigvals(a)))
    a = a * (rng.uniform(0.3, 0.95) / max(rho, 1e-12))
    sigma_v = random_psd(n, rng, jitter=0.1)
    sigma_w = random_psd(n, rng, jitter=0.1)
    eps = rng.uniform(0.0, eps_max, size=n)
    return SystemModel(n, a, sigma_v, sigma_w, eps)


def random_belief(n: int, rng: np.random.Generator,
                  mean_scale: float = 2.0) -> BeliefState:
    return BeliefState(mean=mean_scale * rng.standard_normal(n),
                       covariance=random_psd(n, rng, jitter=0.05))


def conditioned_belief(model: SystemModel, steps: int, actions: list[int],
                       received: list[tuple[int, int, float]],
                       prior_cov0: np.ndarray | None = None
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Posterior of x(steps) given the received observations, by direct
    joint-Gaussian conditioning.

    `received` lists (slot t, sensor n, value y) for the successful slots.
    The state starts at x(0) ~ N(0, prior_cov0); observations are
    y = x_t[n] + w with w ~ N(0, Sigma_w[n,n]) independent per slot. The
    stacked covariance of (x(1..steps), y(...)) is assembled from powers
    of A and conditioned with the generic Schur-complement formula, with
    no use of the Kalman recursion.
    """
    n = model.n_sensors
    a = model.transition
    p0 = np.eye(n) if prior_cov0 is None else prior_cov0
    powers = [np.eye(n)]
    for _ in range(steps):
        powers.append(a @ powers[-1])
    # Cov(x_s, x_t) = A^s P0 (A^t)^T + sum_{k<=min(s,t)} A^{s-k} Sigma_v (A^{t-k})^T
    cov_x = np.zeros((steps * n, steps * n))
    for s in range(1, steps + 1):
        for t in range(1, steps + 1):
            block = powers[s] @ p0 @ powers[t].T
            for k in range(1, min(s, t) + 1):
                block = block + powers[s - k] @ model.process_noise_cov @ powers[t - k].T
            cov_x[(s - 1) * n:s * n, (t - 1) * n:t * n] = block
    m = len(received)
    mean_full = np.zeros(steps * n + m)
    cov = np.zeros((steps * n + m, steps * n + m))
    cov[:steps * n, :steps * n] = cov_x
    for i, (t, sensor, _) in enumerate(received):
        row = (t - 1) * n + (sensor - 1)
        cov[steps * n + i, :steps * n] = cov_x[row, :]
        cov[:steps * n, steps * n + i] = cov_x[:, row]
        for j, (t2, sensor2, _) in enumerate(received):
            row2 = (t2 - 1) * n + (sensor2 - 1)
            cov[steps * n + i, steps * n + j] = cov_x[row, row2]
        cov[steps * n + i, steps * n + i] += model.meas_noise_cov[sensor - 1, sensor - 1]
    last = slice((steps - 1) * n, steps * n)
    if m == 0:
        return mean_full[last], cov_x[last, last]
    y = np.array([v for (_, _, v) in received])
    cxy = cov[last, steps * n:]
    cyy = cov[steps * n:, steps * n:]
    gain = np.linalg.solve(cyy, cxy.T).T
    mean = mean_full[last] + gain @ (y - mean_full[steps * n:])
    cov_post = cov[last, last] - gain @ cxy.T
    return mean, cov_post


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

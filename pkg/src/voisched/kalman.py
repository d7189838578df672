"""Kalman recursions for the base station's Gaussian belief N(xhat, psi).

The schedule delivers at most one scalar observation per slot, so the
correction step is specialized to a scalar innovation: the innovation
covariance is inverted as a number, never as a matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ChannelOutcome, SystemModel

INNOVATION_FLOOR = 1e-15

PRIOR = "prior"
POSTERIOR = "posterior"


@dataclass(frozen=True)
class BeliefState:
    mean: np.ndarray
    covariance: np.ndarray
    time: int = 0
    phase: str = POSTERIOR

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "covariance", np.asarray(self.covariance, dtype=float))

    @classmethod
    def initial(cls, n_sensors: int, mean: np.ndarray | None = None,
                covariance: np.ndarray | None = None) -> "BeliefState":
        """Default initialization: zero mean, identity covariance, t=0."""
        if mean is None:
            mean = np.zeros(n_sensors)
        if covariance is None:
            covariance = np.eye(n_sensors)
        return cls(mean=mean, covariance=covariance, time=0, phase=POSTERIOR)


def prior_update(belief: BeliefState, model: SystemModel) -> BeliefState:
    """Prediction step: mean -> A xhat, covariance -> A psi A^T + Sigma_v."""
    if belief.mean.shape[0] != model.n_sensors:
        raise ValueError("belief dimension does not match model")
    a = model.transition
    mean = a @ belief.mean
    cov = a @ belief.covariance @ a.T + model.process_noise_cov
    return BeliefState(mean=mean, covariance=cov, time=belief.time + 1, phase=PRIOR)


def innovation_covariance(belief_f: BeliefState, model: SystemModel, n: int) -> float:
    """Predicted variance of the scalar observation y_n: psi_F[n,n] + Sigma_w[n,n]."""
    s = float(belief_f.covariance[n - 1, n - 1] + model.meas_noise_cov[n - 1, n - 1])
    if s <= INNOVATION_FLOOR:
        raise ValueError(f"degenerate innovation covariance {s} for sensor {n}")
    return s


def kalman_gain(belief_f: BeliefState, model: SystemModel, n: int) -> np.ndarray:
    """Gain vector: n-th column of psi_F scaled by the inverse innovation covariance."""
    s = innovation_covariance(belief_f, model, n)
    return belief_f.covariance[:, n - 1] / s


def posterior_update(belief_f: BeliefState, model: SystemModel, n: int, y: float) -> BeliefState:
    """Correction step for a received scalar observation y from sensor n.

    The rank-one form (I - k 1_n) psi_F is numerically asymmetric; the
    result is re-symmetrized.
    """
    if not np.isfinite(y):
        raise ValueError("observation must be finite")
    k = kalman_gain(belief_f, model, n)
    mean = belief_f.mean + k * (y - belief_f.mean[n - 1])
    cov = belief_f.covariance - np.outer(k, belief_f.covariance[n - 1, :])
    cov = (cov + cov.T) / 2
    return BeliefState(mean=mean, covariance=cov, time=belief_f.time, phase=POSTERIOR)


def filter_step(belief: BeliefState, model: SystemModel, action: int,
                outcome: ChannelOutcome) -> BeliefState:
    """One slot of filtering: predict, then correct iff the channel succeeded."""
    belief_f = prior_update(belief, model)
    if not outcome.success:
        return belief_f
    return posterior_update(belief_f, model, action, outcome.observation)

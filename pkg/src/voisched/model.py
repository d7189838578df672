"""System model, ground-truth simulation, and the two reference scenarios.

A model is the tuple (N, A, Sigma_v, Sigma_w, epsilon): linear dynamics
x(t) = A x(t-1) + v(t) with v ~ N(0, Sigma_v), per-sensor observations
y_n = x_n + w_n with w ~ N(0, Sigma_w), and a Bernoulli erasure channel
with per-sensor failure probability epsilon_n.

Sensor indices are 1-based at every public interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SYMMETRY_RTOL = 1e-12
PD_PIVOT_FLOOR = 1e-12


def _cholesky_or_none(mat: np.ndarray) -> np.ndarray | None:
    """Lower-triangular factor of a PD matrix, or None if not PD.

    A pivot below PD_PIVOT_FLOOR (relative to the largest diagonal entry)
    counts as failure even if LAPACK succeeds.
    """
    try:
        chol = np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        return None
    floor = PD_PIVOT_FLOOR * np.max(np.abs(np.diag(mat)))
    if np.min(np.diag(chol)) ** 2 < floor:
        return None
    return chol


@dataclass(frozen=True)
class SystemModel:
    """Immutable model tuple; the process-noise factor is cached at build time."""

    n_sensors: int
    transition: np.ndarray
    process_noise_cov: np.ndarray
    meas_noise_cov: np.ndarray
    erasure_prob: np.ndarray
    _noise_chol: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "transition", np.asarray(self.transition, dtype=float))
        object.__setattr__(self, "process_noise_cov", np.asarray(self.process_noise_cov, dtype=float))
        object.__setattr__(self, "meas_noise_cov", np.asarray(self.meas_noise_cov, dtype=float))
        object.__setattr__(self, "erasure_prob", np.asarray(self.erasure_prob, dtype=float))
        n = self.n_sensors
        for name in ("transition", "process_noise_cov", "meas_noise_cov"):
            if getattr(self, name).shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}")
        if self.erasure_prob.shape != (n,):
            raise ValueError(f"erasure_prob must have length {n}")
        object.__setattr__(self, "_noise_chol", _cholesky_or_none(self.process_noise_cov))

    def process_noise_chol(self) -> np.ndarray:
        if self._noise_chol is None:
            raise ValueError("process noise covariance is not positive definite")
        return self._noise_chol


@dataclass(frozen=True)
class GroundTruth:
    state: np.ndarray
    time: int


@dataclass
class AgeVector:
    """Slots since the last successful reception from each sensor."""

    ages: np.ndarray

    @classmethod
    def zeros(cls, n_sensors: int) -> "AgeVector":
        return cls(np.zeros(n_sensors, dtype=int))

    def advance(self, action: int, success: bool) -> "AgeVector":
        """Next-slot ages: every entry +1, then the polled sensor resets on success."""
        ages = self.ages + 1
        if success:
            ages[action - 1] = 0
        return AgeVector(ages)


@dataclass(frozen=True)
class ChannelOutcome:
    success: bool
    observation: float | None = None

    def __post_init__(self):
        if self.success != (self.observation is not None):
            raise ValueError("observation must be present iff success")


def _scenario_noise_and_channel(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sigma_v = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                sigma_v[i - 1, j - 1] = (11 + i % 10) / 5
            elif (i - j) % 6 == 0:
                sigma_v[i - 1, j - 1] = 1.0
    sigma_w = np.eye(n)
    eps = np.array([0.02 * math.ceil((s - 1) / 10) for s in range(1, n + 1)])
    return sigma_v, sigma_w, eps


def build_scenario_1() -> SystemModel:
    """First reference scenario: N=20, sparse coupling where 7 divides i-2j."""
    n = 20
    a = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                a[i - 1, j - 1] = 3 / 4
            elif (i - 2 * j) % 7 == 0:
                a[i - 1, j - 1] = -1 / 8
    sigma_v, sigma_w, eps = _scenario_noise_and_channel(n)
    return SystemModel(n, a, sigma_v, sigma_w, eps)


def build_scenario_2() -> SystemModel:
    """Second reference scenario: coupling where 7 divides ceil(i - 2.3 j)."""
    n = 20
    a = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                a[i - 1, j - 1] = 4 / 5
            elif math.ceil(i - 2.3 * j) % 7 == 0:
                a[i - 1, j - 1] = -1 / 9
    sigma_v, sigma_w, eps = _scenario_noise_and_channel(n)
    return SystemModel(n, a, sigma_v, sigma_w, eps)


_PRESETS = {"paper1": build_scenario_1, "paper2": build_scenario_2}


def build_preset(name: str) -> SystemModel:
    try:
        return _PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(_PRESETS)}") from None


@dataclass(frozen=True)
class ValidationReport:
    sigma_v_symmetric: bool
    sigma_w_symmetric: bool
    sigma_v_positive_definite: bool
    sigma_w_diag_positive: bool
    spectral_radius: float
    spectral_radius_stable: bool
    erasure_in_range: bool

    @property
    def passed(self) -> bool:
        return (
            self.sigma_v_symmetric
            and self.sigma_w_symmetric
            and self.sigma_v_positive_definite
            and self.sigma_w_diag_positive
            and self.spectral_radius_stable
            and self.erasure_in_range
        )

    def lines(self) -> list[str]:
        def mark(ok: bool) -> str:
            return "ok" if ok else "FAIL"

        return [
            f"Sigma_v symmetric:          {mark(self.sigma_v_symmetric)}",
            f"Sigma_w symmetric:          {mark(self.sigma_w_symmetric)}",
            f"Sigma_v positive definite:  {mark(self.sigma_v_positive_definite)}",
            f"Sigma_w diagonal positive:  {mark(self.sigma_w_diag_positive)}",
            f"spectral radius of A:       {self.spectral_radius:.6f} "
            f"({mark(self.spectral_radius_stable)})",
            f"erasure probs in [0, 1]:    {mark(self.erasure_in_range)}",
        ]


def _is_symmetric(mat: np.ndarray) -> bool:
    scale = max(np.max(np.abs(mat)), 1.0)
    return bool(np.max(np.abs(mat - mat.T)) <= SYMMETRY_RTOL * scale)


def spectral_radius(mat: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(mat))))


def validate_model(model: SystemModel) -> ValidationReport:
    """Check the invariants a model needs before simulation; never raises."""
    rho = spectral_radius(model.transition)
    return ValidationReport(
        sigma_v_symmetric=_is_symmetric(model.process_noise_cov),
        sigma_w_symmetric=_is_symmetric(model.meas_noise_cov),
        sigma_v_positive_definite=_cholesky_or_none(model.process_noise_cov) is not None,
        sigma_w_diag_positive=bool(np.all(np.diag(model.meas_noise_cov) > 0)),
        spectral_radius=rho,
        spectral_radius_stable=rho < 1.0,
        erasure_in_range=bool(np.all((model.erasure_prob >= 0) & (model.erasure_prob <= 1))),
    )


def sample_process_noise(model: SystemModel, rng: np.random.Generator) -> np.ndarray:
    """Draw v ~ N(0, Sigma_v) through the cached Cholesky factor."""
    return model.process_noise_chol() @ rng.standard_normal(model.n_sensors)


def step_process(truth: GroundTruth, model: SystemModel, rng: np.random.Generator) -> GroundTruth:
    """Advance the true state one slot: x(t) = A x(t-1) + v(t)."""
    state = model.transition @ truth.state + sample_process_noise(model, rng)
    return GroundTruth(state=state, time=truth.time + 1)


def observe(truth: GroundTruth, model: SystemModel, n: int, rng: np.random.Generator) -> float:
    """Noisy scalar reading of coordinate n (1-based): y_n = x_n + w_n.

    Only one coordinate is ever transmitted per slot, so the noise is the
    Gaussian marginal w_n ~ N(0, Sigma_w[n,n]); cross-correlations of
    Sigma_w cannot enter a single-coordinate observation.
    """
    if not 1 <= n <= model.n_sensors:
        raise IndexError(f"sensor index {n} out of range 1..{model.n_sensors}")
    std = math.sqrt(model.meas_noise_cov[n - 1, n - 1])
    return float(truth.state[n - 1] + std * rng.standard_normal())

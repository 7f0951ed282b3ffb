"""Parameter-choice rules over a candidate grid.

All rules return an index into the grid; ties break to the smallest index.
The a-posteriori rule compares empirical estimator distances against
pairwise thresholds kappa_{m1,m2} = sigma * z_{m1,m2}(x_{m1}) + beta *
sqrt(v_{m1,m2}); the classical balancing rule uses 4 * kappa * sqrt(v_{m2})
instead; the oracle rule is the deterministic analogue built from true
biases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .candidates import CandidateGrid, pairwise_variance_v
from .errors import InvalidParameterError
from .filters import FilterSpec
from .genchi2 import critical_value_z
from .sequence_model import SpectralProblem


@dataclass(frozen=True)
class ThresholdTable:
    """Pairwise thresholds kappa (upper triangle, NaN elsewhere), tail budgets
    x_m = 2 (1+gamma) log(v_{m+1}/v_0), and the tuning constants."""

    kappa: np.ndarray
    x: np.ndarray
    beta: float
    gamma: float

    def __post_init__(self):
        kappa = np.asarray(self.kappa, dtype=float).copy()
        x = np.asarray(self.x, dtype=float).copy()
        if kappa.ndim != 2 or kappa.shape[0] != kappa.shape[1]:
            raise InvalidParameterError("kappa must be a square table")
        if x.size != kappa.shape[0] - 1:
            raise InvalidParameterError("x must have one entry per non-final index")
        kappa.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "x", x)

    @property
    def m_max(self) -> int:
        return self.kappa.shape[0] - 1


def build_thresholds(
    problem: SpectralProblem,
    spec: FilterSpec,
    grid: CandidateGrid,
    beta: float = 1.0,
    gamma: float = 1.0,
) -> ThresholdTable:
    """Fill the full upper-triangular threshold table for a grid."""
    if beta <= 0:
        raise InvalidParameterError("beta must be positive")
    if gamma <= 0:
        raise InvalidParameterError("gamma must be positive")
    mm = grid.m_max
    x = 2.0 * (1.0 + gamma) * np.log(grid.v[1:] / grid.v[0])
    kappa = np.full((mm + 1, mm + 1), np.nan)
    for m1 in range(mm):
        for m2 in range(m1 + 1, mm + 1):
            z = critical_value_z(problem, spec, grid.alphas[m1], grid.alphas[m2], x[m1])
            vp = pairwise_variance_v(
                problem, spec, grid.alphas[m1], grid.alphas[m2], grid.sigma
            )
            kappa[m1, m2] = grid.sigma * z + beta * math.sqrt(vp)
    return ThresholdTable(kappa=kappa, x=x, beta=beta, gamma=gamma)


def solit_select(bhat: np.ndarray, thresholds: ThresholdTable) -> int:
    """Smallest m1 whose estimator stays within threshold of every finer
    candidate: max_{m2 > m1} (bhat_{m1,m2} - kappa_{m1,m2}) <= 0.  When no
    m1 < m_max qualifies the maximum over the empty set at m_max is vacuous,
    so m_max is returned."""
    mm = thresholds.m_max
    bhat = np.asarray(bhat, dtype=float)
    for m1 in range(mm):
        if np.all(bhat[m1, m1 + 1 :] <= thresholds.kappa[m1, m1 + 1 :]):
            return m1
    return mm


def oracle_select(b: np.ndarray, v: np.ndarray, beta: float) -> int:
    """Deterministic oracle: smallest m with b_{m1,m2}^2 <= beta^2 v_{m1,m2}
    for every pair m2 > m1 >= m; m_max if no smaller index qualifies."""
    b = np.asarray(b, dtype=float)
    v = np.asarray(v, dtype=float)
    if b.shape != v.shape or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise InvalidParameterError("bias and variance tables must be square and matching")
    mm = b.shape[0] - 1
    ok = np.ones((mm + 1, mm + 1), dtype=bool)
    iu = np.triu_indices(mm + 1, k=1)
    ok[iu] = b[iu] ** 2 <= beta**2 * v[iu]
    for m in range(mm + 1):
        sub = ok[m:, m:][np.triu_indices(mm + 1 - m, k=1)]
        if np.all(sub):
            return m
    return mm


def lepskii_select(
    bhat: np.ndarray,
    grid: CandidateGrid,
    sigma: float | None = None,
    kappa_tune: float = 1.0,
) -> int:
    """Classical balancing rule: smallest m1 with
    bhat_{m1,m2} <= 4 * kappa_tune * mu_{m2} for all m2 > m1, where
    mu_k = sigma * sqrt(V(alpha_k))."""
    if kappa_tune < 1:
        raise InvalidParameterError("kappa_tune must be at least 1")
    mu = np.sqrt(grid.v)
    if sigma is not None and sigma != grid.sigma:
        mu = mu * (sigma / grid.sigma)
    mm = grid.m_max
    bhat = np.asarray(bhat, dtype=float)
    for m1 in range(mm):
        if np.all(bhat[m1, m1 + 1 :] <= 4.0 * kappa_tune * mu[m1 + 1 :]):
            return m1
    return mm


def optimal_select(errors) -> int:
    """Index of the smallest error; ties break to the smallest index."""
    err = np.asarray(errors, dtype=float)
    if err.size == 0:
        raise InvalidParameterError("error list must be nonempty")
    return int(np.argmin(err))


def noise_level_select(grid: CandidateGrid, sigma: float) -> int:
    """Candidate whose alpha is closest to sigma on the log scale."""
    if sigma <= 0:
        raise InvalidParameterError("noise level must be positive")
    return int(np.argmin(np.abs(np.log(grid.alphas) - math.log(sigma))))


def oracle_constants(
    grid: CandidateGrid,
    m_star: int,
    u_mstar: float,
    beta: float = 1.0,
    gamma: float = 1.0,
) -> tuple[float, float]:
    """Constants of the oracle inequality at the oracle index:

      C1 = (2 sqrt(3) / (theta1^gamma - 1)) * (v_0 / v_{m*})^{1+gamma}
      C2 = beta sqrt(v_{m*})
           + sqrt(2 u_{m*} (2 (1+gamma) log(v_{m*}/v_0) + log(1 + m_max)))
    """
    if not (0 <= m_star <= grid.m_max):
        raise InvalidParameterError("oracle index outside the grid")
    v0 = grid.v[0]
    vm = grid.v[m_star]
    c1 = 2.0 * math.sqrt(3.0) / (grid.theta1**gamma - 1.0) * (v0 / vm) ** (1.0 + gamma)
    inner = 2.0 * (1.0 + gamma) * math.log(vm / v0) + math.log(1.0 + grid.m_max)
    c2 = beta * math.sqrt(vm) + math.sqrt(2.0 * u_mstar * inner)
    return float(c1), float(c2)


def price_of_adaptation(r_mstar: float, c2: float) -> float:
    """(sqrt(R_{m*}) + C2)^2, the oracle-inequality surcharge."""
    if r_mstar < 0:
        raise InvalidParameterError("risk must be nonnegative")
    return (math.sqrt(r_mstar) + c2) ** 2

"""Variance functionals and the geometric-in-variance candidate grid.

Candidates alpha_0 > ... > alpha_{m_max} are chosen so that the normalized
variance V(alpha) = sum_k lam_k q_alpha(lam_k)^2 grows by a factor close to a
tuning parameter theta from one candidate to the next, with achieved ratios
certified to lie in [theta1, theta2].  For filters with a continuous
parameter dependence a log-scale bisection hits the target ratio; for the
spectral cut-off the admissible set is the discrete eigenvalue set and the
builder takes the closest achievable jump, enlarging theta2 when the
spectrum forces an overshoot.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidParameterError
from .filters import FilterSpec, filter_weight
from .sequence_model import SpectralProblem

MAX_CANDIDATES = 10_000
_MAX_BISECTION_STEPS = 200


def variance_V(problem: SpectralProblem, spec: FilterSpec, alpha: float) -> float:
    """Normalized estimator variance V(alpha) = sum_k lam_k q_alpha(lam_k)^2."""
    q = filter_weight(spec, alpha, problem.eigenvalues)
    return float(np.sum(problem.eigenvalues * q * q))


def weak_variance_u(problem: SpectralProblem, spec: FilterSpec, alpha: float, sigma: float) -> float:
    """Operator-norm variance sigma^2 * max_k lam_k q_alpha(lam_k)^2.

    Measures the amplification of a single noise coordinate; bounded by
    cq_prime * sigma^2 / alpha for ordered filters.
    """
    if sigma < 0:
        raise InvalidParameterError("noise level must be nonnegative")
    q = filter_weight(spec, alpha, problem.eigenvalues)
    return float(sigma**2 * np.max(problem.eigenvalues * q * q))


def pairwise_variance_v(
    problem: SpectralProblem, spec: FilterSpec, alpha_a: float, alpha_b: float, sigma: float
) -> float:
    """Variance of the estimator difference,
    sigma^2 * sum_k lam_k (q_{alpha_a}(lam_k) - q_{alpha_b}(lam_k))^2.
    Symmetric in its alpha arguments."""
    if sigma < 0:
        raise InvalidParameterError("noise level must be nonnegative")
    qa = filter_weight(spec, alpha_a, problem.eigenvalues)
    qb = filter_weight(spec, alpha_b, problem.eigenvalues)
    d = qa - qb
    return float(sigma**2 * np.sum(problem.eigenvalues * d * d))


def line_search_variance(
    problem: SpectralProblem,
    spec: FilterSpec,
    target: float,
    tol: float,
    bracket: tuple[float, float],
):
    """Solve V(alpha) = target for alpha inside ``bracket`` = (alpha_lo, alpha_hi).

    Returns ``(alpha, gap)`` with ``gap = log(V(alpha)) - log(target)``.  For
    filters with continuous V the bisection terminates with |gap| <= tol
    whenever the target lies between V(alpha_hi) and V(alpha_lo).  For the
    spectral cut-off the candidates are the eigenvalues inside the bracket and
    the largest one whose V meets or exceeds the target is returned (smallest
    achievable overshoot).  Targets outside the attainable range clamp to the
    corresponding bracket end, with the signed gap reporting the miss.
    """
    if target <= 0:
        raise InvalidParameterError("target variance must be positive")
    if tol <= 0:
        raise InvalidParameterError("tolerance must be positive")
    a_lo, a_hi = bracket
    if not (0 < a_lo <= a_hi):
        raise InvalidParameterError(f"invalid bracket {bracket}")
    log_target = math.log(target)

    if spec.kind == "cutoff":
        lams = problem.eigenvalues
        cands = np.unique(lams[(lams >= a_lo) & (lams <= a_hi)])[::-1]
        if cands.size == 0:
            raise InvalidParameterError("no admissible cut-off parameters inside the bracket")
        vals = np.array([variance_V(problem, spec, a) for a in cands])
        gaps = np.log(vals) - log_target
        within = np.abs(gaps) <= tol
        if np.any(within):
            idx = int(np.argmin(np.abs(gaps)))
            return float(cands[idx]), float(gaps[idx])
        above = gaps >= 0
        if np.any(above):
            idx = int(np.argmax(above))  # largest alpha with V >= target
            return float(cands[idx]), float(gaps[idx])
        return float(cands[-1]), float(gaps[-1])

    lo, hi = a_lo, a_hi
    v_lo = variance_V(problem, spec, lo)
    v_hi = variance_V(problem, spec, hi)
    if target > v_lo:
        return float(lo), math.log(v_lo) - log_target
    if target < v_hi:
        return float(hi), math.log(v_hi) - log_target
    for _ in range(_MAX_BISECTION_STEPS):
        mid = math.sqrt(lo * hi)
        v_mid = variance_V(problem, spec, mid)
        if v_mid <= 0:
            hi = mid
            continue
        gap = math.log(v_mid) - log_target
        if abs(gap) <= tol:
            return float(mid), float(gap)
        if v_mid > target:
            lo = mid
        else:
            hi = mid
    v_lo = variance_V(problem, spec, lo)
    return float(lo), math.log(v_lo) - log_target


@dataclass(frozen=True)
class CandidateGrid:
    """Decreasing candidates with geometrically growing variances.

    ``v`` holds v_m = sigma^2 * V(alpha_m); ratios v_m / v_{m-1} lie in
    [theta1, theta2].  ``theta2`` may exceed the requested value when a
    discrete admissible set forces an overshoot (``theta2_enlarged``).
    """

    alphas: np.ndarray
    v: np.ndarray
    theta1: float
    theta2: float
    sigma: float
    theta2_requested: float = math.nan
    theta2_enlarged: bool = False
    truncation_tail_ratio: float = math.nan

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=float).copy()
        v = np.asarray(self.v, dtype=float).copy()
        if alphas.size != v.size or alphas.size == 0:
            raise InvalidParameterError("alphas and v must be nonempty and of equal length")
        if np.any(np.diff(alphas) >= 0):
            raise InvalidParameterError("alphas must be strictly decreasing")
        if np.any(np.diff(v) <= 0):
            raise InvalidParameterError("v must be strictly increasing")
        alphas.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "v", v)

    @property
    def m_max(self) -> int:
        return self.alphas.size - 1

    @property
    def ratios(self) -> np.ndarray:
        """Successive variance ratios v_m / v_{m-1}, length m_max."""
        return self.v[1:] / self.v[:-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("m,alpha,v_m,ratio\n")
        for m in range(self.alphas.size):
            ratio = "" if m == 0 else f"{self.v[m] / self.v[m - 1]:.17g}"
            buf.write(f"{m},{self.alphas[m]:.17g},{self.v[m]:.17g},{ratio}\n")
        return buf.getvalue()


def _estimate_tail_ratio(problem: SpectralProblem, alpha_min: float, v_at_min: float) -> float:
    """Crude bound on the variance mass omitted by truncation, relative to the
    retained variance at the deepest candidate.  The eigenvalue tail beyond
    lam_n is extended geometrically from the last two retained eigenvalues."""
    lam = problem.eigenvalues
    if lam.size < 2 or v_at_min <= 0:
        return math.nan
    r = lam[-1] / lam[-2]
    if r >= 1.0:
        return math.inf
    tail_trace = lam[-1] * r / (1.0 - r)
    # q <= 1/alpha bounds each omitted term by lam / alpha^2
    return float(tail_trace / (alpha_min**2 * v_at_min))


def build_grid(
    problem: SpectralProblem,
    spec: FilterSpec,
    sigma: float,
    theta: float = 2.0,
    v_start: float = 1.0,
    max_candidates: int = MAX_CANDIDATES,
) -> CandidateGrid:
    """Construct the candidate grid for noise level ``sigma``.

    The first candidate solves V(alpha_0) = v_start (so v_0 = sigma^2 by
    default); each subsequent candidate solves log V = log theta + log V_prev
    by line search; the grid stops at the first candidate with
    sigma^2 V >= 1.  theta1 = theta - (theta-1)/2 and theta2 = theta +
    (theta-1)/2; the line-search exit tolerance log(theta2/theta) keeps every
    achieved ratio inside [theta1, theta2] for continuous filters (since
    theta1 * theta2 <= theta^2).
    """
    if sigma <= 0:
        raise InvalidParameterError("noise level must be positive")
    if theta <= 1:
        raise InvalidParameterError("theta must exceed 1")
    if v_start <= 0:
        raise InvalidParameterError("v_start must be positive")

    theta1 = theta - (theta - 1.0) / 2.0
    theta2_req = theta + (theta - 1.0) / 2.0
    tol = math.log(theta2_req / theta)

    lam = problem.eigenvalues
    a_floor = float(lam[-1])
    # V(alpha) <= trace / alpha^2, so V(sqrt(trace)) <= 1 <= v_start anchors
    # the upper bracket end even when V(lam_1) > v_start.
    a_ceil = max(float(lam[0]), math.sqrt(float(np.sum(lam)) / v_start)) * 2.0
    v_cap = variance_V(problem, spec, a_floor)

    alpha0, _ = line_search_variance(problem, spec, v_start, tol, (a_floor, a_ceil))
    alphas = [alpha0]
    big_v = [variance_V(problem, spec, alpha0)]

    theta2 = theta2_req
    enlarged = False
    while sigma**2 * big_v[-1] < 1.0:
        if len(alphas) >= max_candidates:
            raise ConfigurationError(
                f"candidate grid exceeded the hard cap of {max_candidates} entries"
            )
        target = theta * big_v[-1]
        if target > v_cap * (1.0 - 1e-12):
            raise ConfigurationError(
                "variance cannot reach 1/sigma^2 on this truncation: "
                f"max attainable V = {v_cap:.3g}, needed {1.0 / sigma**2:.3g}; "
                "increase the truncation dimension or the noise level"
            )
        alpha_next, _ = line_search_variance(
            problem, spec, target, tol, (a_floor, alphas[-1])
        )
        v_next = variance_V(problem, spec, alpha_next)
        ratio = v_next / big_v[-1]
        if ratio < theta1 or alpha_next >= alphas[-1]:
            raise ConfigurationError(
                f"grid construction stalled at m={len(alphas)}: achieved ratio {ratio:.4g}"
            )
        if ratio > theta2:
            theta2 = float(ratio)
            enlarged = True
        alphas.append(alpha_next)
        big_v.append(v_next)

    tail_ratio = _estimate_tail_ratio(problem, alphas[-1], big_v[-1])
    if math.isfinite(tail_ratio) and tail_ratio > 1e-4:
        warnings.warn(
            f"omitted variance tail is ~{tail_ratio:.2g} of the retained variance "
            "at the deepest candidate; consider a larger truncation dimension",
            stacklevel=2,
        )
    return CandidateGrid(
        alphas=np.asarray(alphas),
        v=sigma**2 * np.asarray(big_v),
        theta1=theta1,
        theta2=theta2,
        sigma=float(sigma),
        theta2_requested=theta2_req,
        theta2_enlarged=enlarged,
        truncation_tail_ratio=tail_ratio,
    )


def hutchinson_trace(apply, dim: int, probes: int, seed: int) -> float:
    """Rademacher trace estimate: average of z^T (A z) over random sign vectors.

    ``apply`` maps a length-``dim`` vector to A @ vector.  Unbiased for
    trace(A); exact for the identity since z^T z = dim for sign vectors.
    """
    if probes < 1:
        raise InvalidParameterError("at least one probe vector is required")
    if dim < 1:
        raise InvalidParameterError("dimension must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    total = 0.0
    for _ in range(probes):
        z = rng.integers(0, 2, size=dim).astype(float) * 2.0 - 1.0
        total += float(z @ np.asarray(apply(z), dtype=float))
    return total / probes

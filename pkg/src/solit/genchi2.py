"""Tail probabilities and quantiles of generalized chi-squared variables.

The variable of interest is Z = sum_i a_i eps_i^2 with nonnegative weights
a_i and independent standard normal eps_i.  Its upper tail is approximated by
matching skewness and kurtosis to a (possibly non-central) chi-squared
distribution; quantiles follow by monotone bisection.  A seeded Monte Carlo
quantile is provided as the independent cross-check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InvalidParameterError
from .filters import FilterSpec, filter_weight
from .sequence_model import SpectralProblem

_POISSON_MASS_TOL = 1e-14
_QUANTILE_REL_TOL = 1e-10


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative diagonal weights of the quadratic form."""

    a: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.a, dtype=float).copy()
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidParameterError("weights must form a nonempty vector")
        if np.any(arr < 0):
            raise InvalidParameterError("weights must be nonnegative")
        arr.flags.writeable = False
        object.__setattr__(self, "a", arr)


def _weights_array(w) -> np.ndarray:
    if isinstance(w, WeightVector):
        return w.a
    arr = np.asarray(w, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidParameterError("weights must form a nonempty vector")
    if np.any(arr < 0):
        raise InvalidParameterError("weights must be nonnegative")
    return arr


def cumulant_traces(w) -> tuple[float, float, float, float]:
    """Power sums (sum a, sum a^2, sum a^3, sum a^4) of the weights."""
    a = _weights_array(w)
    return (
        float(np.sum(a)),
        float(np.sum(a**2)),
        float(np.sum(a**3)),
        float(np.sum(a**4)),
    )


def noncentral_chi2_sf(l: float, delta: float, x: float) -> float:
    """Survival function P(chi2_l(delta) > x) for l > 0 degrees of freedom and
    non-centrality delta >= 0.

    The non-central case is a Poisson(delta/2) mixture of central terms,
    truncated once the remaining Poisson mass drops below 1e-14; the central
    case reduces to the regularized upper incomplete gamma function.
    """
    if l <= 0 or not math.isfinite(l):
        raise InvalidParameterError("degrees of freedom must be positive")
    if delta < 0:
        raise InvalidParameterError("non-centrality must be nonnegative")
    if x <= 0:
        return 1.0
    if delta == 0:
        return float(special.gammaincc(l / 2.0, x / 2.0))
    rate = delta / 2.0
    # the 12-sigma window leaves a true Poisson tail far below the 1e-14
    # truncation target; the float sum of the kept weights still carries
    # ~1e-13 of gammaln/exp rounding dust, hence the looser sanity bound
    j_hi = int(math.ceil(rate + 12.0 * math.sqrt(rate + 1.0) + 60.0))
    j = np.arange(0, j_hi + 1)
    logw = j * math.log(rate) - rate - special.gammaln(j + 1.0)
    wts = np.exp(logw)
    mass = float(np.sum(wts))
    if mass < 1.0 - 1e-9:  # pragma: no cover - window is generous
        raise InvalidParameterError("Poisson mixture failed to capture enough mass")
    keep = wts > _POISSON_MASS_TOL * 1e-3
    sf = float(np.sum(wts[keep] * special.gammaincc((l + 2.0 * j[keep]) / 2.0, x / 2.0)))
    return min(max(sf, 0.0), 1.0)


def _gaussian_tail_sf(c1: float, c2: float, t: float) -> float:
    z = (t - c1) / math.sqrt(2.0 * c2)
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def ltz_tail_sf(cumulants, t: float) -> float:
    """Skewness/kurtosis-matched chi-squared approximation of P(Z > t).

    With s1 = c3 / c2^{3/2} and s2 = c4 / c2^2 the matched parameters are

      if s1^2 > s2:  a = 1/(s1 - sqrt(s1^2 - s2)), delta = s1 a^3 - a^2,
                     l = a^2 - 2 delta
      else:          delta = 0, l = c2^3 / c3^2, a = 1/s1

    and P(Z > t) ~ P(chi2_l(delta) > sqrt(2) a (t - c1)/sqrt(2 c2) + l + delta).
    A vanishing third cumulant (possible only for degenerate weights) falls
    back to the Gaussian tail.
    """
    c1, c2, c3, c4 = (float(c) for c in cumulants)
    if c2 <= 0:
        raise InvalidParameterError("second cumulant trace must be positive")
    s1 = c3 / c2**1.5
    s2 = c4 / c2**2
    if c3 <= 0 or s1 < 1e-150:
        return _gaussian_tail_sf(c1, c2, t)
    if s1 * s1 > s2:
        root = math.sqrt(s1 * s1 - s2)
        a = 1.0 / (s1 - root)
        delta = s1 * a**3 - a**2
        l = a * a - 2.0 * delta
    else:
        delta = 0.0
        l = c2**3 / c3**2
        a = 1.0 / s1
    if not (math.isfinite(l) and l > 0 and math.isfinite(delta) and delta >= 0):
        return _gaussian_tail_sf(c1, c2, t)
    x = math.sqrt(2.0) * a * (t - c1) / math.sqrt(2.0 * c2) + l + delta
    return noncentral_chi2_sf(l, delta, x)


def ltz_tail_quantile(cumulants, p: float) -> float:
    """Upper-tail quantile: the t with ltz_tail_sf(t) = p, 0 < p < 1.

    Monotone bisection starting from the bracket
    [0, c1 + 20 sqrt(2 c2) + 20 c4^{1/4}] (c4^{1/4} bounds max a_i); the upper
    end is doubled when the requested tail lies beyond it.  Relative
    tolerance 1e-10.
    """
    if not (0.0 < p < 1.0):
        raise InvalidParameterError("tail probability must lie strictly in (0, 1)")
    c1, c2, c3, c4 = (float(c) for c in cumulants)
    if c2 <= 0:
        raise InvalidParameterError("second cumulant trace must be positive")
    hi = c1 + 20.0 * math.sqrt(2.0 * c2) + 20.0 * c4**0.25
    for _ in range(200):
        if ltz_tail_sf(cumulants, hi) <= p:
            break
        hi *= 2.0
    else:  # pragma: no cover - tail bound grows much faster than this
        raise InvalidParameterError("failed to bracket the requested quantile")
    lo = 0.0
    while hi - lo > _QUANTILE_REL_TOL * max(hi, 1e-300):
        mid = 0.5 * (lo + hi)
        if ltz_tail_sf(cumulants, mid) > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ltz_quantile_for_weights(w, p: float) -> float:
    """Approximated upper-tail quantile of Z = sum a_i eps_i^2.

    Works on the normalized weight scale internally (quantiles are
    scale-equivariant), which keeps the fourth power sum inside float64
    range for strongly amplifying weight vectors.
    """
    a = _weights_array(w)
    amax = float(np.max(a))
    if amax == 0.0:
        return 0.0
    return amax * ltz_tail_quantile(cumulant_traces(a / amax), p)


def mc_sample_quadratic_form(w, samples: int, seed: int) -> np.ndarray:
    """Seeded draws of Z = sum a_i eps_i^2.

    Weights below 1e-9 of the largest are dropped: their total mean mass
    shifts any quantile by a relative amount far below the Monte Carlo noise
    at the supported sample sizes.  Normals are generated in float32 (the
    per-draw rounding of eps^2 is ~1e-7 relative, again far below the MC
    noise); the draws are deterministic given the seed.
    """
    a = _weights_array(w)
    amax = float(np.max(a))
    if amax > 0:
        a = a[a > amax * 1e-9]
    if amax == 0.0:
        return np.zeros(samples)
    a32 = a.astype(np.float32)
    rng = np.random.Generator(np.random.PCG64DXSM(seed))
    z = np.empty(samples)
    chunk = max(1, int(2**23 // a.size))
    filled = 0
    while filled < samples:
        m = min(chunk, samples - filled)
        eps = rng.standard_normal((m, a.size), dtype=np.float32)
        np.square(eps, out=eps)
        z[filled : filled + m] = eps @ a32
        filled += m
    return z


def mc_tail_quantiles(w, ps, samples: int, seed: int) -> np.ndarray:
    """Empirical upper-tail quantiles at several tail probabilities from a
    single batch of seeded draws."""
    if samples < 1000:
        raise InvalidParameterError("at least 1000 Monte Carlo samples are required")
    ps = np.asarray(ps, dtype=float)
    if np.any((ps <= 0) | (ps >= 1)):
        raise InvalidParameterError("tail probabilities must lie strictly in (0, 1)")
    z = mc_sample_quadratic_form(w, samples, seed)
    return np.quantile(z, 1.0 - ps)


def mc_tail_quantile(w, p: float, samples: int, seed: int) -> float:
    """Empirical upper-tail quantile of Z = sum a_i eps_i^2 from ``samples``
    seeded draws."""
    return float(mc_tail_quantiles(w, [p], samples, seed)[0])


def critical_value_z(
    problem: SpectralProblem,
    spec: FilterSpec,
    alpha_a: float,
    alpha_b: float,
    x: float,
) -> float:
    """Critical value z(x): the e^{-x} upper-tail point of the norm of the
    pure-noise estimator difference between two candidates.

    The squared norm is a generalized chi-squared with weights
    a_i = lam_i (q_{alpha_a}(lam_i) - q_{alpha_b}(lam_i))^2, so z(x) is the
    square root of its e^{-x} tail quantile.  Identical filters on the whole
    spectrum yield z = 0 with a warning.
    """
    if x < 0:
        raise InvalidParameterError("tail exponent x must be nonnegative")
    if alpha_a == alpha_b:
        raise InvalidParameterError("critical values need two distinct candidates")
    if x == 0.0:
        return 0.0
    qa = filter_weight(spec, alpha_a, problem.eigenvalues)
    qb = filter_weight(spec, alpha_b, problem.eigenvalues)
    a = problem.eigenvalues * (qa - qb) ** 2
    amax = float(np.max(a))
    if amax == 0.0:
        warnings.warn(
            "the two candidates have identical filters on the retained spectrum; "
            "critical value is 0",
            stacklevel=2,
        )
        return 0.0
    p = math.exp(-x)
    if p == 0.0:
        raise InvalidParameterError(f"tail exponent x={x} underflows e^-x")
    return math.sqrt(ltz_quantile_for_weights(a, p))

"""Ordered spectral filters q_alpha(lambda) and validation of their axioms.

Four built-in families are provided, all with alpha * q_alpha(lambda) <= 1
and lambda * q_alpha(lambda) <= 1 on their admissible parameter sets:

  * Tikhonov:          q_alpha(lam) = 1 / (lam + alpha)
  * Showalter:         q_alpha(lam) = (1 - exp(-lam/alpha)) / lam
  * spectral cut-off:  q_alpha(lam) = (1/lam) * 1{lam >= alpha}
  * Landweber:         q_alpha(lam) = step * sum_{j<N} (1 - step*lam)^j,
                       with iteration count N = ceil(1/alpha)

The cut-off includes ties lam == alpha (closed indicator).  Landweber is
indexed by a real alpha through the iteration count N = ceil(1/alpha); the
axioms hold exactly when alpha is the reciprocal of an integer and the step
satisfies step * lam_max <= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

FILTER_KINDS = ("tikhonov", "showalter", "cutoff", "landweber")

CONTINUUM = "continuum (0, inf)"
DISCRETE_EIGENVALUES = "discrete: eigenvalues of the problem at hand"


@dataclass(frozen=True)
class FilterSpec:
    """Which ordered filter to use, plus its constants.

    ``cq_prime`` is the bound in alpha * q_alpha <= cq_prime; it equals 1 for
    all four built-in families.  ``landweber_step`` is the relaxation factor
    (only for Landweber) and must satisfy step * lam_max <= 1 on the problem
    at hand.
    """

    kind: str
    cq_prime: float = 1.0
    landweber_step: float | None = None

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise InvalidParameterError(
                f"unknown filter kind {self.kind!r}; expected one of {FILTER_KINDS}"
            )
        if self.cq_prime <= 0:
            raise InvalidParameterError("cq_prime must be positive")
        if self.kind == "landweber":
            if self.landweber_step is None or self.landweber_step <= 0:
                raise InvalidParameterError(
                    "landweber requires a positive relaxation step"
                )

    @property
    def admissible_set(self) -> str:
        """Descriptor of the admissible parameter set."""
        return DISCRETE_EIGENVALUES if self.kind == "cutoff" else CONTINUUM

    @classmethod
    def from_name(cls, name: str, landweber_step: float | None = None) -> "FilterSpec":
        """Build a spec from a CLI/config name string."""
        name = name.strip().lower()
        if name == "landweber":
            return cls(kind="landweber", landweber_step=landweber_step)
        return cls(kind=name)


def _as_lambda_array(lam):
    arr = np.asarray(lam, dtype=float)
    if np.any(arr < 0):
        raise InvalidParameterError("eigenvalue arguments must be nonnegative")
    return arr


def _maybe_scalar(arr, scalar_input: bool):
    return float(arr) if scalar_input else arr


def filter_weight(spec: FilterSpec, alpha: float, lam):
    """Evaluate q_alpha(lambda).

    ``lam`` may be a scalar or an array; the return type matches.
    """
    if alpha <= 0 or not math.isfinite(alpha):
        raise InvalidParameterError(f"regularization parameter must be positive, got {alpha}")
    scalar = np.isscalar(lam) or (isinstance(lam, np.ndarray) and lam.ndim == 0)
    x = _as_lambda_array(lam)

    if spec.kind == "tikhonov":
        q = 1.0 / (x + alpha)
    elif spec.kind == "showalter":
        q = np.empty_like(x)
        pos = x > 0
        # -expm1 avoids cancellation of 1 - exp(-lam/alpha) for small lam/alpha
        q[pos] = -np.expm1(-x[pos] / alpha) / x[pos]
        q[~pos] = 1.0 / alpha
    elif spec.kind == "cutoff":
        q = np.zeros_like(x)
        keep = x >= alpha
        q[keep] = 1.0 / x[keep]
    else:  # landweber
        step = spec.landweber_step
        if np.any(step * x > 1.0 + 1e-12):
            raise InvalidParameterError(
                "landweber step violates step * lambda <= 1 on these eigenvalues"
            )
        # guard against 1/alpha landing a few ulp above an integer
        n_iter = math.ceil((1.0 / alpha) * (1.0 - 1e-12))
        q = np.empty_like(x)
        pos = x > 0
        base = np.clip(1.0 - step * x[pos], 0.0, 1.0)
        q[pos] = (1.0 - base**n_iter) / x[pos]
        q[~pos] = step * n_iter
    return _maybe_scalar(q, scalar)


def residual_weight(spec: FilterSpec, alpha: float, lam):
    """Evaluate the residual factor 1 - lambda * q_alpha(lambda) in [0, 1].

    Showalter and Landweber residuals are evaluated in closed form
    (exp(-lam/alpha) and (1 - step*lam)^N) to avoid cancellation when the
    filter weight is close to 1/lambda.
    """
    if alpha <= 0 or not math.isfinite(alpha):
        raise InvalidParameterError(f"regularization parameter must be positive, got {alpha}")
    scalar = np.isscalar(lam) or (isinstance(lam, np.ndarray) and lam.ndim == 0)
    x = _as_lambda_array(lam)

    if spec.kind == "tikhonov":
        r = alpha / (x + alpha)
    elif spec.kind == "showalter":
        r = np.exp(-x / alpha)
    elif spec.kind == "cutoff":
        r = np.where(x >= alpha, 0.0, 1.0)
    else:  # landweber
        step = spec.landweber_step
        if np.any(step * x > 1.0 + 1e-12):
            raise InvalidParameterError(
                "landweber step violates step * lambda <= 1 on these eigenvalues"
            )
        n_iter = math.ceil((1.0 / alpha) * (1.0 - 1e-12))
        r = np.clip(1.0 - step * x, 0.0, 1.0) ** n_iter
    return _maybe_scalar(r, scalar)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the ordered-filter axiom checks on a sample grid."""

    n_points: int
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_ordered_filter(
    spec: FilterSpec,
    alpha_samples,
    lam_samples,
    weight_fn=None,
    tol: float = 1e-9,
) -> ValidationReport:
    """Check the ordered-filter axioms on a finite sample grid.

    Checks, for every sampled (alpha, lambda): q >= 0, alpha*q <= cq_prime,
    lambda*q <= 1, and that q is pointwise non-increasing as alpha grows.
    Violations are collected in the report rather than raised.  ``weight_fn``
    overrides the built-in weight evaluation (useful to probe a deliberately
    corrupted filter against the same axioms).
    """
    alphas = np.sort(np.asarray(alpha_samples, dtype=float))[::-1]
    lams = np.asarray(lam_samples, dtype=float)
    if weight_fn is None:
        weight_fn = lambda a, l: filter_weight(spec, a, l)  # noqa: E731

    violations: list[str] = []
    prev_q = None
    for a in alphas:
        q = np.asarray(weight_fn(a, lams), dtype=float)
        if np.any(q < -tol):
            violations.append(f"negative weight at alpha={a:g}")
        if np.any(a * q > spec.cq_prime * (1.0 + tol) + tol):
            worst = float(np.max(a * q))
            violations.append(f"alpha*q = {worst:g} exceeds C_q' = {spec.cq_prime:g} at alpha={a:g}")
        if np.any(lams * q > 1.0 + tol):
            worst = float(np.max(lams * q))
            violations.append(f"lambda*q = {worst:g} exceeds 1 at alpha={a:g}")
        if prev_q is not None and np.any(q < prev_q - tol):
            violations.append(f"ordering violated between alpha={a:g} and the previous alpha")
        prev_q = q
    return ValidationReport(n_points=alphas.size * lams.size, violations=tuple(violations))

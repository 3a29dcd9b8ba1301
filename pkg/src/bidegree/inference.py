"""Plug-in asymptotic variances, standardized contrasts, and confidence intervals.

For any fixed set of coordinates the centered MLE is asymptotically normal
with covariance given by the approximate inverse of the Fisher matrix, so a
contrast of two out-effects has variance ``1/v[i] + 1/v[j]`` with ``v`` the
Fisher diagonal evaluated at the fitted parameters (the shared corner term
cancels in differences and is dropped for pair sums as well).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fisher import fisher_info
from .model import ParamVector, WeightFamily

__all__ = [
    "AsymptoticCov",
    "ci_for_contrast",
    "contrast_stat",
    "normal_quantile",
    "plug_in_variances",
]

CONTRAST_KINDS = ("alpha_diff", "pair_sum", "beta_diff")


@dataclass(frozen=True)
class AsymptoticCov:
    """Plug-in Fisher diagonals: n out-effect entries, n-1 in-effect entries,
    and the corner weight of the eliminated in-effect as entry 2n."""

    v_hat_diag: np.ndarray
    level: float

    def __post_init__(self) -> None:
        if not 0.0 < self.level < 1.0:
            raise ValueError("confidence level must lie in (0, 1)")
        if np.any(self.v_hat_diag <= 0.0):
            raise ValueError("all plug-in variances must be positive")

    @property
    def n(self) -> int:
        return self.v_hat_diag.size // 2

    def var_alpha(self, i: int) -> float:
        if not 0 <= i < self.n:
            raise IndexError(f"out-effect index {i} out of range for n={self.n}")
        return float(self.v_hat_diag[i])

    def var_beta(self, j: int) -> float:
        if not 0 <= j < self.n - 1:
            raise IndexError(
                f"in-effect index {j} out of range (vertex n's in-effect is pinned)"
            )
        return float(self.v_hat_diag[self.n + j])


def plug_in_variances(
    theta_hat: ParamVector, family: WeightFamily, level: float = 0.95
) -> AsymptoticCov:
    """Fisher diagonals evaluated at the fitted parameters."""
    fisher = fisher_info(theta_hat, family)
    return AsymptoticCov(
        v_hat_diag=np.concatenate([fisher.row_sums, fisher.col_sums]),
        level=level,
    )


def contrast_stat(
    kind: str,
    i: int,
    j: int,
    theta_hat: ParamVector,
    theta_star: ParamVector,
    cov: AsymptoticCov,
) -> float:
    """Standardized contrast, asymptotically standard normal under the model.

    Kinds (indices are 0-based vertex indices):
      alpha_diff -- (alpha_i - alpha_j) centered at the truth;
      pair_sum   -- (alpha_i + beta_j) centered at the truth, j < n-1;
      beta_diff  -- (beta_i - beta_j) centered at the truth, i, j < n-1.
    """
    if kind not in CONTRAST_KINDS:
        raise ValueError(f"unknown contrast kind {kind!r}; expected one of {CONTRAST_KINDS}")
    if kind == "alpha_diff":
        num = (theta_hat.alpha[i] - theta_hat.alpha[j]) - (
            theta_star.alpha[i] - theta_star.alpha[j]
        )
        var = 1.0 / cov.var_alpha(i) + 1.0 / cov.var_alpha(j)
    elif kind == "pair_sum":
        num = (theta_hat.alpha[i] + theta_hat.beta[j]) - (
            theta_star.alpha[i] + theta_star.beta[j]
        )
        var = 1.0 / cov.var_alpha(i) + 1.0 / cov.var_beta(j)
    else:
        num = (theta_hat.beta[i] - theta_hat.beta[j]) - (
            theta_star.beta[i] - theta_star.beta[j]
        )
        var = 1.0 / cov.var_beta(i) + 1.0 / cov.var_beta(j)
    return float(num / math.sqrt(var))


def ci_for_contrast(
    i: int,
    j: int,
    theta_hat: ParamVector,
    cov: AsymptoticCov,
    level: float | None = None,
) -> tuple[float, float]:
    """Two-sided interval for ``alpha_i - alpha_j`` (0-based indices)."""
    level = cov.level if level is None else level
    z = normal_quantile(0.5 * (1.0 + level))
    center = float(theta_hat.alpha[i] - theta_hat.alpha[j])
    half = z * math.sqrt(1.0 / cov.var_alpha(i) + 1.0 / cov.var_alpha(j))
    return center - half, center + half


# ---------------------------------------------------------------------------
# standard normal quantile (no statistical-table dependency)

# Rational minimax coefficients (Acklam's inverse normal CDF approximation,
# |relative error| < 1.15e-9 on (0,1)); one Halley step with erfc then takes
# the result to close to machine precision.  Bit-reproducible by design.
_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_P_LOW = 0.02425


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile probability must lie in (0, 1), got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (
            ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        ) / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = (
            (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5])
            * q
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
        )
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(
            ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        ) / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    # Halley refinement against the exact CDF via erfc.
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)

"""Newton-Raphson fitting of the bi-degree MLE with existence detection.

The likelihood equations say the fitted expected degrees must reproduce the
observed ones, i.e. the moment residual ``F`` vanishes at the MLE.  Newton
iterates solve the structured Fisher system exactly (Schur complement) or
take the cheap approximate-inverse step; both drive ``F`` to zero whenever
the MLE exists.

The MLE exists iff the observed bi-degree sequence lies in the interior of
the mean polytope, and is then unique.  Interior membership has no practical
test, but its failure has an observable signature: the iterates run off to
infinity while the residual stalls.  ``newton_fit`` combines a cheap
coordinate-boundary screen with that divergence heuristic to classify each
fit as Exists / NonExistent / Undetermined.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .fisher import (
    SingularFisherError,
    apply_approx_inverse,
    approx_inverse,
    fisher_info,
    solve_structured,
)
from .model import (
    BiDegree,
    InvalidParameterError,
    ParamVector,
    WeightFamily,
    _finite_moments,
    moment_residual,
    validate_params,
)

__all__ = [
    "Existence",
    "Feasibility",
    "FitConfig",
    "FitResult",
    "NewtonDiagnostics",
    "default_start",
    "existence_check",
    "newton_diagnostics",
    "newton_fit",
]


class Existence(enum.Enum):
    EXISTS = "exists"
    NON_EXISTENT = "nonexistent"
    UNDETERMINED = "undetermined"


class Feasibility(enum.Enum):
    FEASIBLE = "feasible"
    BOUNDARY = "boundary"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class FitConfig:
    """Solver knobs.  ``tol_residual=None`` means ``1e-10 * (n - 1)``.

    ``step_mode`` is "exact" (structured solve) or "sapprox" (approximate
    inverse step, optionally polished by one exact solve at the end).
    """

    step_mode: str = "exact"
    tol_residual: float | None = None
    tol_step: float = 1e-10
    max_iter: int = 100
    divergence_bound: float = 30.0
    polish: bool = True

    def __post_init__(self) -> None:
        if self.step_mode not in ("exact", "sapprox"):
            raise ValueError(f"step_mode must be 'exact' or 'sapprox', got {self.step_mode!r}")
        if self.tol_residual is not None and self.tol_residual <= 0:
            raise ValueError("tol_residual must be positive")
        if self.tol_step <= 0 or self.divergence_bound <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class FitResult:
    theta_hat: ParamVector
    converged: bool
    existence: Existence
    iterations: int
    residual_norm_inf: float
    trace: tuple[tuple[float, float], ...] = field(default_factory=tuple)
    """Per-iteration pairs (residual inf-norm, step inf-norm)."""


@dataclass(frozen=True)
class NewtonDiagnostics:
    """Contraction certificate pieces for a Newton run started at ``theta0``.

    ``r`` is the exact first-step norm; ``K1``/``K2`` are family-specific
    smoothness constants; ``rho`` assembles them with a configurable leading
    constant.  ``contraction_ok`` (rho * r < 1/2) is advisory only.
    """

    r: float
    rho: float
    K1: float
    K2: float
    contraction_ok: bool
    reason: str | None = None


# The approximate inverse responds to the flat all-ones direction with an
# exact factor 2 (V S e = 2e), so a unit approximate step is marginally
# oscillatory on that mode; relaxing it by 2/3 turns every mode into a
# contraction (spectrum of I - (2/3) V S lies in [-1/3, 1)).
_SAPPROX_RELAX = 2.0 / 3.0

# Stability cap on the step inf-norm.  Inactive near a solution; during
# divergence it turns the blow-up into a steady march that the divergence
# heuristic can classify.
_MAX_STEP = 5.0


# ---------------------------------------------------------------------------
# feasibility screen and warm start


def existence_check(g: BiDegree, family: WeightFamily, n: int | None = None) -> Feasibility:
    """Fast necessary screen on coordinate bounds of the mean polytope.

    Feasible is necessary, not sufficient; the final verdict comes from the
    Newton run.  Degrees outside the closed support range are Infeasible,
    degrees on its boundary (e.g. an isolated or saturated vertex) Boundary.
    """
    n = g.n if n is None else n
    hi = family.max_weight * (n - 1)
    values = np.concatenate([g.d, g.b])
    if np.any(values < 0) or (math.isfinite(hi) and np.any(values > hi)):
        return Feasibility.INFEASIBLE
    at_zero = np.any(values == 0)
    at_top = math.isfinite(hi) and np.any(values == hi)
    if at_zero or at_top:
        return Feasibility.BOUNDARY
    return Feasibility.FEASIBLE


def _finite_mean_inverse(q: int, targets: np.ndarray) -> np.ndarray:
    """Invert the strictly decreasing finite-family mean by bisection."""
    lo = np.full_like(targets, -60.0)
    hi = np.full_like(targets, 60.0)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        above = _finite_moments(q, mid)[0] > targets
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def default_start(g: BiDegree, family: WeightFamily) -> ParamVector:
    """Moment-matched warm start with ``beta[-1] = 0``.

    Binary: logits of clamped degree ratios, in-effects re-centered on vertex
    n.  Finite: the same construction through the numeric inverse of the
    family mean.  Rate families: ``(n-1) / (2 max(degree, 1/2))`` with the
    re-centering shift moved into alpha so every pair sum stays positive.
    """
    n = g.n
    nm1 = n - 1
    lo = 1.0 / (2.0 * nm1)
    if family.kind == "binary":
        rd = np.clip(g.d / nm1, lo, 1.0 - lo)
        rb = np.clip(g.b / nm1, lo, 1.0 - lo)
        alpha = np.log(rd) - np.log1p(-rd)
        beta_raw = np.log(rb) - np.log1p(-rb)
        return ParamVector(alpha, beta_raw - beta_raw[-1], negated=False)
    if family.kind == "finite":
        top = family.max_weight
        rd = np.clip(g.d / nm1, top * lo, top * (1.0 - lo))
        rb = np.clip(g.b / nm1, top * lo, top * (1.0 - lo))
        alpha = _finite_mean_inverse(family.support_size, rd)
        beta_raw = _finite_mean_inverse(family.support_size, rb)
        return ParamVector(alpha, beta_raw - beta_raw[-1], negated=True)
    eps = 0.5
    alpha = nm1 / (2.0 * np.maximum(g.d, eps))
    beta_raw = nm1 / (2.0 * np.maximum(g.b, eps))
    shift = beta_raw[-1]
    return ParamVector(alpha + shift, beta_raw - shift, negated=True)


# ---------------------------------------------------------------------------
# Newton iteration


def _damping(theta: ParamVector, delta: np.ndarray, family: WeightFamily) -> float:
    """Largest lambda in (0, 1] keeping min pair sum >= half its current value."""
    if not family.positive_pair_sums:
        return 1.0
    n = theta.n
    sums = theta.pair_sums()
    np.fill_diagonal(sums, np.inf)
    dbeta = np.zeros(n)
    dbeta[: n - 1] = delta[n:]
    dsums = delta[:n, None] + dbeta[None, :]
    np.fill_diagonal(dsums, 0.0)
    target = 0.5 * sums.min()
    after = sums + dsums
    if after.min() >= target:
        return 1.0
    shrinking = dsums < 0
    lam = float(np.min((target - sums[shrinking]) / dsums[shrinking]))
    return min(max(lam, 0.0), 1.0)


def _stagnant(residuals: list[float]) -> bool:
    # Relative decrease below 1% over the last 10 iterations.
    return len(residuals) >= 11 and residuals[-1] > 0.99 * residuals[-11]


def newton_fit(
    g: BiDegree,
    family: WeightFamily,
    theta0: ParamVector | None = None,
    config: FitConfig | None = None,
) -> FitResult:
    """Fit the MLE by Newton iteration; classify existence.

    Stops on residual tolerance, step tolerance, iteration budget, or the
    divergence heuristic.  A run that reaches the residual tolerance only
    with ``|theta|_inf`` beyond the divergence bound is a boundary limit, not
    an interior solution, and is reported NonExistent.
    """
    cfg = config or FitConfig()
    n = g.n
    theta = default_start(g, family) if theta0 is None else theta0
    validate_params(theta, family)
    if not theta.is_normalized:
        raise InvalidParameterError("starting point must have beta[-1] == 0")
    tol_residual = cfg.tol_residual if cfg.tol_residual is not None else 1e-10 * (n - 1)

    screen = existence_check(g, family, n)
    if screen is not Feasibility.FEASIBLE:
        resid = float(np.abs(moment_residual(theta, g, family)).max())
        return FitResult(theta, False, Existence.NON_EXISTENT, 0, resid, ())

    sign = -1.0 if family.negated else 1.0
    trace: list[tuple[float, float]] = []
    residuals: list[float] = []
    existence = Existence.UNDETERMINED
    converged = False
    iterations = 0
    residual = moment_residual(theta, g, family)
    resid_norm = float(np.abs(residual).max())

    for iterations in range(1, cfg.max_iter + 1):
        residuals.append(resid_norm)
        theta_norm = float(np.abs(theta.free).max())
        if not math.isfinite(resid_norm):
            existence = (
                Existence.NON_EXISTENT
                if theta_norm > cfg.divergence_bound
                else Existence.UNDETERMINED
            )
            break
        if resid_norm <= tol_residual:
            if theta_norm > cfg.divergence_bound:
                existence = Existence.NON_EXISTENT
            else:
                converged = True
                existence = Existence.EXISTS
            break
        if theta_norm > cfg.divergence_bound and _stagnant(residuals):
            existence = Existence.NON_EXISTENT
            break
        try:
            fisher = fisher_info(theta, family)
            if cfg.step_mode == "exact":
                raw = solve_structured(fisher, residual)
            else:
                raw = _SAPPROX_RELAX * apply_approx_inverse(approx_inverse(fisher), residual)
        except SingularFisherError:
            existence = (
                Existence.NON_EXISTENT
                if theta_norm > cfg.divergence_bound
                else Existence.UNDETERMINED
            )
            break
        delta = sign * raw
        cap = min(1.0, _MAX_STEP / max(float(np.abs(delta).max()), 1e-300))
        lam = cap * _damping(theta, cap * delta, family)
        # Exact mode backtracks until the residual stops increasing; the
        # Newton direction always admits such a step, and the accepted trial
        # doubles as the next iteration's residual evaluation.  The relaxed
        # approximate step is a contraction in its own eigenbasis but not
        # monotone in the inf-norm, so it is accepted as is.
        for _ in range(30):
            candidate = theta.with_step(lam * delta)
            trial = moment_residual(candidate, g, family)
            trial_norm = float(np.abs(trial).max())
            if (
                cfg.step_mode != "exact"
                or trial_norm <= resid_norm
                or lam * float(np.abs(delta).max()) <= cfg.tol_step
            ):
                break
            lam *= 0.5
        step_norm = lam * float(np.abs(delta).max())
        theta, residual, resid_norm = candidate, trial, trial_norm
        trace.append((residuals[-1], step_norm))
        if step_norm <= cfg.tol_step:
            residuals.append(resid_norm)
            if resid_norm <= tol_residual and float(np.abs(theta.free).max()) <= cfg.divergence_bound:
                converged = True
                existence = Existence.EXISTS
            break
    else:  # budget exhausted without a break
        theta_norm = float(np.abs(theta.free).max())
        if theta_norm > cfg.divergence_bound and _stagnant(residuals + [resid_norm]):
            existence = Existence.NON_EXISTENT

    if (
        cfg.step_mode == "sapprox"
        and cfg.polish
        and existence is not Existence.NON_EXISTENT
        and math.isfinite(resid_norm)
    ):
        try:
            fisher = fisher_info(theta, family)
            residual = moment_residual(theta, g, family)
            delta = sign * solve_structured(fisher, residual)
            lam = _damping(theta, delta, family)
            polished = theta.with_step(lam * delta)
            polished_norm = float(np.abs(moment_residual(polished, g, family)).max())
            if polished_norm <= resid_norm:
                theta = polished
                resid_norm = polished_norm
                trace.append((resid_norm, float(np.abs(lam * delta).max())))
        except SingularFisherError:
            pass
        if resid_norm <= tol_residual and float(np.abs(theta.free).max()) <= cfg.divergence_bound:
            converged = True
            existence = Existence.EXISTS

    return FitResult(theta, converged, existence, iterations, resid_norm, tuple(trace))


# ---------------------------------------------------------------------------
# contraction diagnostics


def _finite_abs_third_moment(q: int, s: np.ndarray) -> np.ndarray:
    support = np.arange(q, dtype=float)
    logits = -s[..., None] * support
    logits -= logits.max(axis=-1, keepdims=True)
    w = np.exp(logits)
    p = w / w.sum(axis=-1, keepdims=True)
    mean = p @ support
    return np.abs(((support[None, :] - mean[..., None]) ** 3 * p).sum(axis=-1))


def _lipschitz_constants(
    family: WeightFamily, theta0: ParamVector, n: int, r: float
) -> tuple[float, float, str | None]:
    """Second-derivative (K1) and per-row (K2) smoothness constants.

    Binary values are fixed; the rate families use the pair-sum margin
    ``q_n - 4r`` and fail with a reason code when it is not positive.  The
    finite family has no published constants, so we bound the mean's second
    derivative (the pmf's third central moment) on a grid over the pair-sum
    range widened by 4r.
    """
    nm1 = n - 1
    if family.kind == "binary":
        return float(nm1), nm1 / 2.0, None
    sums = theta0.pair_sums()
    np.fill_diagonal(sums, np.inf)
    q_n = float(sums.min())
    if family.kind == "finite":
        hi = float(np.max(np.where(np.isinf(sums), -np.inf, sums)))
        grid = np.linspace(q_n - 4.0 * r, hi + 4.0 * r, 513)
        bound = float(_finite_abs_third_moment(family.support_size, grid).max())
        return 2.0 * nm1 * bound, nm1 * bound, None
    margin = q_n - 4.0 * r
    if margin <= 0.0:
        return math.inf, math.inf, f"pair-sum margin q_n - 4r = {margin:.3g} is not positive"
    if family.kind == "exponential":
        return 2.0 * nm1 / margin**3, nm1 / margin**3, None
    eu = math.exp(margin)
    base = nm1 * eu * (1.0 + eu) / (eu - 1.0) ** 2
    return 2.0 * base, base, None


def newton_diagnostics(
    theta0: ParamVector, g: BiDegree, family: WeightFamily, c1: float = 1.0
) -> NewtonDiagnostics:
    """Exact first-step norm plus the assembled contraction factor.

    The leading constant of the inverse-approximation bound is unknown;
    ``c1`` defaults to 1 and should be calibrated from :func:`approx_error`
    sweeps when a sharper certificate is wanted.
    """
    validate_params(theta0, family)
    n = g.n
    fisher = fisher_info(theta0, family)
    residual = moment_residual(theta0, g, family)
    r = float(np.abs(solve_structured(fisher, residual)).max())
    k1, k2, reason = _lipschitz_constants(family, theta0, n, r)
    m, big_m = fisher.cross_min, fisher.cross_max
    rho = c1 * (2 * n - 1) * big_m**2 * k1 / (2.0 * m**3 * n**2) + k2 / ((n - 1) * m)
    ok = reason is None and rho * r < 0.5
    return NewtonDiagnostics(r=r, rho=float(rho), K1=k1, K2=k2, contraction_ok=ok, reason=reason)

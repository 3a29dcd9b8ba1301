"""Structured Fisher information matrices and their closed-form approximate inverse.

The Fisher matrix of the 2n-1 free parameters is symmetric and diagonally
dominant with a very particular shape: two diagonal blocks plus a positive
cross block of per-edge variances.  We never store the dense (2n-1)^2 array
outside the test oracle; the block structure is the representation, which
also makes applying the approximate inverse an O(n) operation.

The approximate inverse replaces ``V^{-1}`` by reciprocals of V's diagonal
plus a rank-one-style correction ``1/corner`` attached to the eliminated
in-effect of the last vertex; its entrywise error decays like
``max_offdiag^2 / (min_offdiag^3 * (n-1)^2)`` for well-behaved parameter
sequences, which :func:`approx_error` lets callers measure directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import ParamVector, WeightFamily, edge_variance, validate_params

__all__ = [
    "ApproxError",
    "ApproxInverse",
    "SingularFisherError",
    "StructuredFisher",
    "apply_approx_inverse",
    "approx_error",
    "approx_inverse",
    "dense_inverse",
    "fisher_info",
    "materialize",
    "materialize_approx",
    "solve_structured",
]

DENSE_GUARD = 5000


class SingularFisherError(RuntimeError):
    """Positive-definite factorization failed; the inputs are degenerate."""


@dataclass(frozen=True)
class StructuredFisher:
    """Fisher information stored by its block structure.

    ``cross[i, j]`` is the variance of edge (i, j) (zero diagonal).
    ``row_sums[i]`` is the alpha-block diagonal, ``col_sums[j]`` the
    beta-block diagonal for j < n-1; ``col_sums[-1]`` is the corner weight
    attached to the eliminated in-effect of vertex n.
    """

    cross: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    cross_min: float
    cross_max: float

    @property
    def n(self) -> int:
        return self.cross.shape[0]

    @property
    def corner(self) -> float:
        return float(self.col_sums[-1])


@dataclass(frozen=True)
class ApproxInverse:
    """Closed-form surrogate for the inverse Fisher matrix.

    ``inv_diag`` holds the 2n-1 diagonal reciprocals; ``inv_corner`` the
    reciprocal corner weight that enters with sign +1 on out-effect
    coordinates and -1 on in-effect coordinates.
    """

    inv_diag: np.ndarray
    inv_corner: float


@dataclass(frozen=True)
class ApproxError:
    max_abs_err: float
    bound_shape: float


def fisher_info(theta: ParamVector, family: WeightFamily) -> StructuredFisher:
    """Build the structured Fisher matrix at ``theta``.

    The sign convention follows the storage orientation, so the returned
    matrix is positive for every family.
    """
    validate_params(theta, family)
    sums = theta.pair_sums()
    np.fill_diagonal(sums, 1.0)
    cross = edge_variance(family, sums)
    np.fill_diagonal(cross, 0.0)
    off = cross[~np.eye(theta.n, dtype=bool)]
    return StructuredFisher(
        cross=cross,
        row_sums=cross.sum(axis=1),
        col_sums=cross.sum(axis=0),
        cross_min=float(off.min()),
        cross_max=float(off.max()),
    )


def approx_inverse(fisher: StructuredFisher) -> ApproxInverse:
    n = fisher.n
    diag = np.concatenate([fisher.row_sums, fisher.col_sums[: n - 1]])
    if np.any(diag <= 0.0) or fisher.corner <= 0.0:
        raise SingularFisherError("Fisher diagonal has nonpositive entries")
    return ApproxInverse(inv_diag=1.0 / diag, inv_corner=1.0 / fisher.corner)


def apply_approx_inverse(approx: ApproxInverse, x: np.ndarray) -> np.ndarray:
    """Apply the approximate inverse to a vector in O(n)."""
    x = np.asarray(x, dtype=float)
    if x.shape != approx.inv_diag.shape:
        raise ValueError(f"vector length {x.size} does not match {approx.inv_diag.size}")
    n = (x.size + 1) // 2
    slack = x[:n].sum() - x[n:].sum()
    out = x * approx.inv_diag
    out[:n] += slack * approx.inv_corner
    out[n:] -= slack * approx.inv_corner
    return out


def materialize(fisher: StructuredFisher) -> np.ndarray:
    """Dense (2n-1) x (2n-1) matrix; test oracle and small-n fallback only."""
    n = fisher.n
    if n > DENSE_GUARD:
        raise ValueError(f"refusing to materialize a dense matrix for n={n} > {DENSE_GUARD}")
    full = np.zeros((2 * n - 1, 2 * n - 1))
    full[:n, :n] = np.diag(fisher.row_sums)
    full[n:, n:] = np.diag(fisher.col_sums[: n - 1])
    full[:n, n:] = fisher.cross[:, : n - 1]
    full[n:, :n] = fisher.cross[:, : n - 1].T
    return full


def materialize_approx(approx: ApproxInverse) -> np.ndarray:
    size = approx.inv_diag.size
    n = (size + 1) // 2
    sign = np.concatenate([np.ones(n), -np.ones(n - 1)])
    return np.diag(approx.inv_diag) + approx.inv_corner * np.outer(sign, sign)


def dense_inverse(fisher: StructuredFisher) -> np.ndarray:
    """Exact inverse through a Cholesky factorization of the dense matrix."""
    full = materialize(fisher)
    try:
        factor = scipy.linalg.cho_factor(full, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularFisherError(f"Fisher matrix is not positive definite: {exc}") from exc
    return scipy.linalg.cho_solve(factor, np.eye(full.shape[0]))


def solve_structured(fisher: StructuredFisher, rhs: np.ndarray) -> np.ndarray:
    """Solve ``V x = rhs`` via the Schur complement on the in-effect block.

    O(n^3) worst case but only O(n^2) memory; the alpha block is diagonal, so
    the only factorization is an (n-1) x (n-1) Cholesky.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = fisher.n
    if rhs.shape != (2 * n - 1,):
        raise ValueError(f"rhs length {rhs.size} does not match 2n-1 = {2 * n - 1}")
    d1 = fisher.row_sums
    if np.any(d1 <= 0.0):
        raise SingularFisherError("Fisher out-effect diagonal has nonpositive entries")
    w = fisher.cross[:, : n - 1]
    w_over_d1 = w / d1[:, None]
    schur = np.diag(fisher.col_sums[: n - 1]) - w.T @ w_over_d1
    r1, r2 = rhs[:n], rhs[n:]
    try:
        factor = scipy.linalg.cho_factor(schur, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularFisherError(f"Schur complement is not positive definite: {exc}") from exc
    x2 = scipy.linalg.cho_solve(factor, r2 - w_over_d1.T @ r1)
    x1 = (r1 - w @ x2) / d1
    return np.concatenate([x1, x2])


def approx_error(fisher: StructuredFisher) -> ApproxError:
    """Entrywise gap between the exact and approximate inverses.

    ``bound_shape`` is the scale term ``max^2 / (min^3 (n-1)^2)`` so callers
    can estimate the unknown leading constant empirically instead of
    hard-coding one.
    """
    exact = dense_inverse(fisher)
    approx = materialize_approx(approx_inverse(fisher))
    gap = float(np.max(np.abs(exact - approx)))
    shape = fisher.cross_max**2 / (fisher.cross_min**3 * (fisher.n - 1) ** 2)
    return ApproxError(max_abs_err=gap, bound_shape=float(shape))

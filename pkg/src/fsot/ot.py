"""Entropy-regularized optimal transport solved by Sinkhorn matrix scaling.

Kernel convention: K_ij = exp(-lam * L_ij), i.e. lam multiplies the cost.
Large lam gives sharp, low-entropy plans; lam -> 0 gives the independence
coupling. Equivalently the plan minimizes

    sum_ij M_ij L_ij + (1/lam) * sum_ij M_ij (log M_ij - 1)

over nonnegative matrices with row sums a and column sums b.

When the plain kernel would underflow (a whole row or column of
exp(-lam*L) rounding to zero), the solver switches to log-domain sweeps;
both paths produce the same plan up to floating-point error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .core import (
    DimensionMismatch,
    FeatureSet,
    NumericalError,
    NumericalUnderflow,
    TransportPlan,
    UnbalancedMarginals,
)

__all__ = ["CostMatrix", "cost_matrix", "sinkhorn"]

# below this, exp() underflows for some row/column and the log path is used
_LOG_SWITCH = -690.0


@dataclass(frozen=True)
class CostMatrix:
    """Dense wq x w matrix of squared Euclidean distances."""

    l: np.ndarray

    def __post_init__(self) -> None:
        l = np.ascontiguousarray(self.l, dtype=np.float64)
        if l.ndim != 2:
            raise DimensionMismatch(f"cost matrix must be 2-d, got shape {l.shape}")
        if not np.all(np.isfinite(l)):
            raise NumericalError("cost matrix has non-finite entries")
        if l.min() < 0:
            raise NumericalError("cost matrix has negative entries")
        l.setflags(write=False)
        object.__setattr__(self, "l", l)


def cost_matrix(queries: FeatureSet, centers: np.ndarray) -> CostMatrix:
    """L_ij = squared Euclidean distance between query row i and center j."""
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[1] != queries.d:
        raise DimensionMismatch(
            f"centers of shape {centers.shape} do not match query dimension {queries.d}"
        )
    return CostMatrix(kernels.pairwise_sqdist(queries.data, centers))


def sinkhorn(
    l: CostMatrix,
    a: np.ndarray,
    b: np.ndarray,
    lam: float,
    max_iter: int = 1000,
    tol: float = 1e-6,
) -> TransportPlan:
    """Scale K = exp(-lam * L) to the transport plan with marginals (a, b).

    Alternates u <- a / Kv and v <- b / K^T u until the max-norm marginal
    violation drops to ``tol`` or ``max_iter`` sweeps have run. Hitting the
    cap is a flagged success: the plan is returned with converged=False.
    """
    L = l.l
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.shape != (L.shape[0],) or b.shape != (L.shape[1],):
        raise DimensionMismatch(
            f"marginals {a.shape}, {b.shape} do not match cost matrix {L.shape}"
        )
    if np.any(a <= 0) or np.any(b <= 0):
        raise UnbalancedMarginals("marginals must be strictly positive")
    if not lam > 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    if abs(a.sum() - b.sum()) > 1e-9 * max(1.0, a.sum()):
        raise UnbalancedMarginals(
            f"marginal masses differ: sum(a)={a.sum()!r}, sum(b)={b.sum()!r}"
        )

    logK = -lam * L
    plain_safe = (
        logK.max(axis=1).min() > _LOG_SWITCH and logK.max(axis=0).min() > _LOG_SWITCH
    )
    if plain_safe:
        K = np.exp(logK)
        u, v, iters, trace, status = kernels.sinkhorn_plain(K, a, b, tol, max_iter)
        if status == 0:
            m = u[:, None] * K * v[None, :]
            return _plan(m, a, b, iters, trace, tol)
        # fall through: scaling blew up mid-run, redo in log space

    f, g, iters, trace, status = kernels.sinkhorn_log(
        logK, np.log(a), np.log(b), tol, max_iter
    )
    if status != 0:
        raise NumericalUnderflow("a kernel row is identically zero in log space")
    m = np.exp(f[:, None] + logK + g[None, :])
    return _plan(m, a, b, iters, trace, tol)


def _plan(m, a, b, iters, trace, tol) -> TransportPlan:
    trace = np.asarray(trace)
    viol = float(trace[-1]) if trace.size else 0.0
    return TransportPlan(
        m=m,
        row_marginal=a,
        col_marginal=b,
        converged=bool(viol <= tol),
        iterations=int(iters),
        violation=viol,
        violation_trace=trace,
    )

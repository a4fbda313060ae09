"""Pure-NumPy fallback for the hot kernels.

Mirrors the signatures of the compiled module ``fsot._kernels`` exactly;
one of the two is picked at import time by ``fsot._backend``. Status codes
instead of exceptions: 0 = clean, 1 = numerical trouble (the caller decides
whether to retry in log space).
"""

from __future__ import annotations

import numpy as np

STATUS_OK = 0
STATUS_NUMERICAL = 1


def pairwise_sqdist(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between rows of x (m,r) and c (w,r)."""
    diff = x[:, None, :] - c[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def sinkhorn_plain(K, a, b, tol, max_iter):
    """Alternating scaling on the positive kernel K.

    Returns (u, v, iterations, violation_trace, status). The trace entry for
    sweep t is the max-norm row-marginal violation of diag(u) K diag(v)
    measured after that sweep (column marginals are exact by construction).
    """
    u = np.ones_like(a)
    v = np.ones_like(b)
    trace = np.empty(max_iter)
    kv = K @ v
    it = 0
    for it in range(1, max_iter + 1):
        if not np.all(kv > 0):
            return u, v, it - 1, trace[: it - 1], STATUS_NUMERICAL
        u = a / kv
        ktu = K.T @ u
        if not np.all(ktu > 0):
            return u, v, it - 1, trace[: it - 1], STATUS_NUMERICAL
        v = b / ktu
        kv = K @ v
        viol = np.max(np.abs(u * kv - a))
        if not np.isfinite(viol):
            return u, v, it - 1, trace[: it - 1], STATUS_NUMERICAL
        trace[it - 1] = viol
        if viol <= tol:
            break
    return u, v, it, trace[:it], STATUS_OK


def sinkhorn_log(logK, loga, logb, tol, max_iter):
    """Log-domain Sinkhorn: potentials f, g with M = exp(f + logK + g).

    Same sweep structure and violation semantics as ``sinkhorn_plain``.
    Status 1 means a log-sum-exp row collapsed to -inf, i.e. the kernel row
    is identically zero even in log space.
    """
    wq = loga.shape[0]
    f = np.zeros(wq)
    g = np.zeros(logb.shape[0])
    trace = np.empty(max_iter)
    lkv = _lse_rows(logK + g[None, :])
    it = 0
    for it in range(1, max_iter + 1):
        if np.any(np.isneginf(lkv)):
            return f, g, it - 1, trace[: it - 1], STATUS_NUMERICAL
        f = loga - lkv
        lktu = _lse_cols(logK + f[:, None])
        if np.any(np.isneginf(lktu)):
            return f, g, it - 1, trace[: it - 1], STATUS_NUMERICAL
        g = logb - lktu
        lkv = _lse_rows(logK + g[None, :])
        viol = np.max(np.abs(np.exp(f + lkv) - np.exp(loga)))
        trace[it - 1] = viol
        if viol <= tol:
            break
    return f, g, it, trace[:it], STATUS_OK


def _lse_rows(m: np.ndarray) -> np.ndarray:
    hi = np.max(m, axis=1)
    safe = np.where(np.isfinite(hi), hi, 0.0)
    out = safe + np.log(np.sum(np.exp(m - safe[:, None]), axis=1))
    return np.where(np.isfinite(hi), out, hi)


def _lse_cols(m: np.ndarray) -> np.ndarray:
    hi = np.max(m, axis=0)
    safe = np.where(np.isfinite(hi), hi, 0.0)
    out = safe + np.log(np.sum(np.exp(m - safe[None, :]), axis=0))
    return np.where(np.isfinite(hi), out, hi)

"""Iterative MAP label estimation with Sinkhorn mapping and damped center updates.

Starting from the support class means, each outer step builds the squared
distance cost between queries and centers, solves the entropic transport
with unit row mass per query and q units of column mass per class, then
moves each center a fraction alpha toward the plan-weighted mean of its
queries plus its support points. Labels are decoded from the last plan by
row-wise argmax.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DimensionMismatch,
    Episode,
    FeatureSet,
    MapParams,
    MissingClass,
    TransportPlan,
    validate_episode,
)
from .ot import cost_matrix, sinkhorn

__all__ = ["ClassCenters", "init_centers", "update_centers", "map_classify"]


@dataclass(frozen=True)
class ClassCenters:
    """One row per class, in episode-local class order."""

    c: np.ndarray

    def __post_init__(self) -> None:
        c = np.ascontiguousarray(self.c, dtype=np.float64)
        if c.ndim != 2:
            raise DimensionMismatch(f"centers must be w x r, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("centers have non-finite entries")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def w(self) -> int:
        return self.c.shape[0]


def init_centers(support: FeatureSet, w: int) -> ClassCenters:
    """Arithmetic mean of the support rows of each class."""
    c = np.empty((w, support.d))
    for j in range(w):
        rows = support.data[support.labels == j]
        if rows.shape[0] == 0:
            raise MissingClass(f"class {j} has no support rows")
        c[j] = rows.mean(axis=0)
    return ClassCenters(c)


def update_centers(
    plan: TransportPlan,
    support: FeatureSet,
    query: FeatureSet,
    centers: ClassCenters,
    alpha: float,
) -> ClassCenters:
    """Move each center a fraction alpha toward its mass-weighted mean.

    The target for class j mixes the plan-weighted query rows with the raw
    support rows of j, normalized by the support count plus the plan's
    column mass. The input centers are left untouched.
    """
    m = plan.m
    if m.shape != (query.n, centers.w):
        raise DimensionMismatch(
            f"plan {m.shape} does not match {query.n} queries x {centers.w} classes"
        )
    if support.d != query.d or centers.c.shape[1] != query.d:
        raise DimensionMismatch("support, query and centers disagree on dimension")
    weighted = m.T @ query.data
    support_sum = np.zeros_like(centers.c)
    np.add.at(support_sum, support.labels, support.data)
    support_count = np.bincount(support.labels, minlength=centers.w)
    mu = (weighted + support_sum) / (support_count + m.sum(axis=0))[:, None]
    return ClassCenters(centers.c + alpha * (mu - centers.c))


def map_classify(e: Episode, params: MapParams):
    """Run the full iterative estimation on an already-transformed episode.

    Returns (labels, plan, centers): the argmax-decoded query labels from
    the final plan, that plan, and the final centers. Exactly
    ``params.n_steps`` outer steps are run; there is no early stopping.
    Argmax ties break toward the smaller class index.
    """
    validate_episode(e)
    centers = init_centers(e.support, e.w)
    a = np.ones(e.w * e.q)
    b = np.full(e.w, float(e.q))
    plan = None
    for _ in range(params.n_steps):
        l = cost_matrix(e.query, centers.c)
        plan = sinkhorn(
            l, a, b, params.lam,
            max_iter=params.sinkhorn_max_iter, tol=params.sinkhorn_tol,
        )
        centers = update_centers(plan, e.support, e.query, centers, params.alpha)
    labels = np.argmax(plan.m, axis=1)
    return labels, plan, centers

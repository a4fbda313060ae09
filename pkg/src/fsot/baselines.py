"""Substitution classifiers: k-means refinement, Gaussian mixture EM, and 1-NN.

All three consume an already-transformed episode, are deterministic, and
break distance ties toward the smaller class index. The mixture uses a
single shared spherical variance and uniform weights so it matches the
model behind the transport classifier minus the balanced-assignment
constraint; support points take part in EM with their responsibilities
clamped to the true one-hot labels.
"""

from __future__ import annotations

import warnings

import numpy as np

from ._backend import kernels
from .core import (
    DegenerateVarianceWarning,
    EmptyClusterWarning,
    Episode,
    validate_episode,
)
from .map_classifier import init_centers

__all__ = ["kmeans_classify", "gmm_classify", "nn_classify"]


def _nearest(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # argmin returns the first minimum, i.e. the smaller class index on ties
    return np.argmin(kernels.pairwise_sqdist(points, centers), axis=1)


def kmeans_classify(e: Episode, n_iter: int = 20) -> np.ndarray:
    """Lloyd refinement seeded with the support class means.

    Each round assigns every query to its nearest center, then recomputes
    center j as the mean of class-j support rows plus the queries currently
    assigned to j. Stops after ``n_iter`` rounds or when assignments are
    stable. With ``n_iter=0`` this is plain nearest-centroid classification.
    """
    validate_episode(e)
    centers = init_centers(e.support, e.w).c.copy()
    assign = None
    for _ in range(n_iter):
        new = _nearest(e.query.data, centers)
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        for j in range(e.w):
            members = e.query.data[assign == j]
            own = e.support.data[e.support.labels == j]
            if members.shape[0] == 0:
                warnings.warn(
                    f"class {j} lost all query members", EmptyClusterWarning,
                    stacklevel=2,
                )
                centers[j] = own.mean(axis=0)
            else:
                centers[j] = np.vstack([own, members]).mean(axis=0)
    if assign is None:
        assign = _nearest(e.query.data, centers)
    return assign


def gmm_classify(
    e: Episode,
    n_iter: int = 20,
    var_floor: float = 1e-6,
    resp_log: list | None = None,
) -> np.ndarray:
    """EM on a w-component mixture with shared spherical covariance.

    Means start at the support class means; the shared variance starts from
    the scatter of the hard nearest-mean assignment. Support rows keep
    one-hot responsibilities throughout. Queries are labeled by argmax
    responsibility under the final parameters. Pass a list as ``resp_log``
    to capture the responsibility matrix of every E-step.
    """
    validate_episode(e)
    x = np.vstack([e.support.data, e.query.data])
    n, d = x.shape
    ns = e.support.n
    means = init_centers(e.support, e.w).c.copy()

    hard = np.concatenate([e.support.labels, _nearest(e.query.data, means)])
    sq = kernels.pairwise_sqdist(x, means)
    sigma2 = _floor_var(sq[np.arange(n), hard].sum() / (n * d), var_floor)

    resp = _responsibilities(sq, sigma2, e.support.labels, ns)
    if resp_log is not None:
        resp_log.append(resp)
    for _ in range(n_iter):
        means = (resp.T @ x) / resp.sum(axis=0)[:, None]
        sq = kernels.pairwise_sqdist(x, means)
        sigma2 = _floor_var((resp * sq).sum() / (n * d), var_floor)
        resp = _responsibilities(sq, sigma2, e.support.labels, ns)
        if resp_log is not None:
            resp_log.append(resp)
    return np.argmax(resp[ns:], axis=1)


def _responsibilities(sq, sigma2, support_labels, ns):
    logits = -sq / (2.0 * sigma2)
    logits -= logits.max(axis=1, keepdims=True)
    resp = np.exp(logits)
    resp /= resp.sum(axis=1, keepdims=True)
    resp[:ns] = 0.0
    resp[np.arange(ns), support_labels] = 1.0
    return resp


def _floor_var(sigma2: float, var_floor: float) -> float:
    if sigma2 < var_floor:
        warnings.warn(
            f"shared variance {sigma2:.3e} clamped to {var_floor:.3e}",
            DegenerateVarianceWarning,
            stacklevel=3,
        )
        return var_floor
    return sigma2


def nn_classify(e: Episode) -> np.ndarray:
    """Label each query by the class of its nearest support row."""
    validate_episode(e)
    sq = kernels.pairwise_sqdist(e.query.data, e.support.data)
    tie = sq == sq.min(axis=1, keepdims=True)
    labels = np.where(tie, e.support.labels[None, :], np.iinfo(np.int64).max)
    return labels.min(axis=1)

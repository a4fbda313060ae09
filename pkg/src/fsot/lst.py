"""The three-step latent-space transform from backbone features to final features.

Step 1 raises every (shifted) component to a power and divides the row by a
fractional power of its norm; step 2 drops the dimensions that are zero for
the episode's points via a QR change of basis; step 3 subtracts the joint
centroid and semi-normalizes again. Steps 2 and 3 are transductive: the QR
basis and the centroid are fit on support and query of one episode jointly,
never across episodes.
"""

from __future__ import annotations

import numpy as np

from .core import (
    Episode,
    FeatureSet,
    LstParams,
    NegativeFeatureError,
    NumericalError,
)

__all__ = [
    "power_semi_normalize",
    "qr_reduce",
    "center_semi_normalize",
    "lst_transform",
]


def _power(m: np.ndarray, p: LstParams) -> np.ndarray:
    if m.min() < 0:
        raise NegativeFeatureError(
            f"power step needs nonnegative features, min entry is {m.min()}"
        )
    v = np.power(m + p.epsilon, p.beta)
    if p.delta == 0.0:
        return v
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms == 0.0):
        raise NumericalError("zero-norm row after power step with delta > 0")
    return v / (norms**p.delta)[:, None]


def _qr(m: np.ndarray) -> np.ndarray:
    # Thin QR of the transposed data matrix; the column-sign convention of Q
    # is irrelevant because only distances and inner products survive.
    try:
        q, _ = np.linalg.qr(m.T, mode="reduced")
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"QR factorization failed: {exc}") from exc
    return m @ q


def _center(m: np.ndarray, p: LstParams) -> np.ndarray:
    centroid = m.mean(axis=0)
    centered = m - centroid
    if p.gamma == 0.0:
        return centered
    ref = centered if p.center_before_norm else m
    norms = np.linalg.norm(ref, axis=1)
    if np.any(norms == 0.0):
        raise NumericalError("zero-norm row in centering step with gamma > 0")
    return centered / (norms**p.gamma)[:, None]


def power_semi_normalize(x: FeatureSet, p: LstParams) -> FeatureSet:
    """Replace each row u by (u + eps)^beta / ||(u + eps)^beta||^delta.

    The power is component-wise; features must be nonnegative (this is what
    a ReLU backbone emits). Dimension and labels are unchanged.
    """
    return x.with_data(_power(x.data, p))


def qr_reduce(x: FeatureSet) -> FeatureSet:
    """Drop the dimensions that carry no data via an orthogonal basis change.

    Output has r = min(d, n) columns; all pairwise distances and inner
    products between rows are preserved.
    """
    return x.with_data(_qr(x.data))


def center_semi_normalize(x: FeatureSet, p: LstParams) -> FeatureSet:
    """Replace each row u by (u - mean) / ||u||^gamma.

    The mean is the component-wise centroid over all rows of ``x``. The
    denominator uses the uncentered row norm unless ``p.center_before_norm``
    is set.
    """
    return x.with_data(_center(x.data, p))


def lst_transform(e: Episode, p: LstParams) -> Episode:
    """Run the full three-step transform on one episode.

    Support and query rows are stacked into one matrix so the QR basis and
    the centroid see the whole task, then re-split in the original row
    order.
    """
    joint = np.vstack([e.support.data, e.query.data])
    joint = _center(_qr(_power(joint, p)), p)
    ns = e.support.n
    return Episode(
        support=e.support.with_data(joint[:ns]),
        query=e.query.with_data(joint[ns:]),
        w=e.w,
        s=e.s,
        q=e.q,
        class_ids=e.class_ids,
    )

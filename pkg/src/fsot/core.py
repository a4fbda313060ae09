"""Shared domain types and validated constructors.

This module is the contract between all other parts of the package: feature
matrices with labels, few-shot episodes, hyperparameter records, transport
plans, and the exception hierarchy. All types are immutable after
construction (arrays are made read-only), so instances can be shared freely
across threads and worker processes.

Floating-point data is always held as float64 internally, even when a file
stored float32: the Sinkhorn kernel exp(-lambda*L) underflows in 32-bit
arithmetic for moderately large lambda*L.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class FewShotError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(FewShotError):
    """A matrix/vector has the wrong shape or per-class counts are off."""


class LabelError(FewShotError):
    """A class label lies outside the valid id range."""


class NegativeFeatureError(FewShotError):
    """Features violate the nonnegativity precondition of the power step."""


class NumericalError(FewShotError):
    """A numerical operation degenerated (zero norm, failed factorization)."""


class DimensionMismatch(FewShotError):
    """Two operands disagree on their feature dimension."""


class UnbalancedMarginals(FewShotError):
    """Transport marginals do not carry the same total mass."""


class NumericalUnderflow(FewShotError):
    """An entire kernel row underflowed to zero even in log space."""


class MissingClass(FewShotError):
    """A class id has no support rows."""


class InsufficientData(FewShotError):
    """The dataset cannot supply the requested episode layout."""


class LengthMismatch(FewShotError):
    """Paired vectors have different lengths."""


class FeatureFileError(FewShotError):
    """Base class for feature-file format violations."""


class BadMagic(FeatureFileError):
    """The file does not start with the expected magic bytes."""


class TruncatedFile(FeatureFileError):
    """File length is inconsistent with the header."""


class LabelOutOfRange(FeatureFileError):
    """A stored label is not in [0, class_count)."""


class NonFiniteValue(FeatureFileError):
    """A stored feature value is NaN or infinite."""


class ValueOverflow(FeatureFileError):
    """A value cannot be represented in the 32-bit storage type."""


class EmptyClusterWarning(UserWarning):
    """A class lost all its query members during Lloyd iteration."""


class DegenerateVarianceWarning(UserWarning):
    """A mixture variance fell below the floor and was clamped."""


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a)
    if out is a:
        out = a.copy()
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureSet:
    """A labeled matrix of n feature vectors in d dimensions.

    ``labels[i]`` is the class id of row i, in ``[0, class_count)``. Unless
    the set is an explicit query partition, every class id must appear at
    least once.
    """

    data: np.ndarray
    labels: np.ndarray
    class_count: int
    is_query_partition: bool = False

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ShapeError(f"feature matrix must be n x d with n,d >= 1, got {data.shape}")
        if labels.ndim != 1 or labels.shape[0] != data.shape[0]:
            raise ShapeError(
                f"need one label per row: {labels.shape[0]} labels for {data.shape[0]} rows"
            )
        if self.class_count < 1:
            raise LabelError(f"class_count must be >= 1, got {self.class_count}")
        if labels.min() < 0 or labels.max() >= self.class_count:
            raise LabelError(
                f"labels must lie in [0, {self.class_count}), "
                f"got range [{labels.min()}, {labels.max()}]"
            )
        if not self.is_query_partition:
            present = np.unique(labels)
            if present.size != self.class_count:
                missing = sorted(set(range(self.class_count)) - set(present.tolist()))
                raise LabelError(f"classes {missing} have no rows")
        object.__setattr__(self, "data", _freeze(data))
        object.__setattr__(self, "labels", _freeze(labels))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def with_data(self, data: np.ndarray) -> "FeatureSet":
        """Same labels and class space, new feature matrix."""
        return FeatureSet(data, self.labels, self.class_count, self.is_query_partition)


@dataclass(frozen=True)
class Episode:
    """A w-way s-shot task with q unlabeled queries per class.

    Query labels are present but exist only for scoring; classifiers must
    not read them. ``class_ids`` optionally records the original dataset
    class id behind each episode-local id in [0, w).
    """

    support: FeatureSet
    query: FeatureSet
    w: int
    s: int
    q: int
    class_ids: Optional[Tuple[int, ...]] = None


@dataclass(frozen=True)
class LstParams:
    """Hyperparameters of the three-step latent-space transform.

    ``beta`` is the power exponent, ``delta`` and ``gamma`` the strengths of
    the two semi-normalizations (0 = none, 1 = full projection onto the unit
    sphere), ``epsilon`` the positive shift applied before the power.

    ``center_before_norm`` switches the final step's denominator from the
    norm of the uncentered row (the default, literal form) to the norm of
    the centered row.
    """

    beta: float
    delta: float
    gamma: float
    epsilon: float = 1e-6
    center_before_norm: bool = False

    def __post_init__(self) -> None:
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must be in [0, 1], got {self.delta}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        # epsilon == 0 is permitted so exact hand-computable cases stay
        # constructible; the default keeps the positive shift.
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


@dataclass(frozen=True)
class MapParams:
    """Hyperparameters of the transport-based MAP classifier.

    ``lam`` multiplies the cost inside the kernel exp(-lam * L): larger
    values give sharper, lower-entropy plans. ``alpha`` damps the center
    update, ``n_steps`` fixes the outer iteration count.
    """

    lam: float
    alpha: float
    n_steps: int
    sinkhorn_max_iter: int = 1000
    sinkhorn_tol: float = 1e-6

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        # alpha == 0 (frozen centers) is allowed so the one-shot decode
        # equivalence stays expressible; normal operation uses (0, 1].
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.sinkhorn_max_iter < 1:
            raise ValueError(f"sinkhorn_max_iter must be >= 1, got {self.sinkhorn_max_iter}")
        if not self.sinkhorn_tol > 0:
            raise ValueError(f"sinkhorn_tol must be > 0, got {self.sinkhorn_tol}")


@dataclass(frozen=True)
class TransportPlan:
    """A nonnegative wq x w mapping matrix with its target marginals.

    On success row sums match ``row_marginal`` and column sums match
    ``col_marginal`` within the solver tolerance. ``converged`` is False
    when the iteration cap was hit first; the plan is still usable.
    ``violation_trace`` holds the max-norm marginal violation measured
    after each completed Sinkhorn sweep.
    """

    m: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray
    converged: bool = True
    iterations: int = 0
    violation: float = 0.0
    violation_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        m = np.asarray(self.m, dtype=np.float64)
        a = np.asarray(self.row_marginal, dtype=np.float64)
        b = np.asarray(self.col_marginal, dtype=np.float64)
        if m.ndim != 2 or a.shape != (m.shape[0],) or b.shape != (m.shape[1],):
            raise ShapeError(
                f"plan {m.shape} does not match marginals {a.shape}, {b.shape}"
            )
        if m.min() < 0:
            raise NumericalError("transport plan has negative entries")
        if not np.all(np.isfinite(m)):
            raise NumericalError("transport plan has non-finite entries")
        object.__setattr__(self, "m", _freeze(m))
        object.__setattr__(self, "row_marginal", _freeze(a))
        object.__setattr__(self, "col_marginal", _freeze(b))
        object.__setattr__(
            self, "violation_trace", _freeze(np.asarray(self.violation_trace, dtype=np.float64))
        )


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def validate_episode(e: Episode) -> Episode:
    """Return ``e`` unchanged iff all episode invariants hold.

    Raises ShapeError when per-class counts are wrong or the partitions
    disagree on dimension, LabelError when a label falls outside [0, w).
    Idempotent by construction: nothing is mutated.
    """
    if e.w < 1 or e.s < 1 or e.q < 1:
        raise ShapeError(f"need w,s,q >= 1, got w={e.w} s={e.s} q={e.q}")
    if e.support.d != e.query.d:
        raise ShapeError(
            f"support dimension {e.support.d} != query dimension {e.query.d}"
        )
    for part, count, name in ((e.support, e.s, "support"), (e.query, e.q, "query")):
        if part.labels.min(initial=0) < 0 or part.labels.max(initial=0) >= e.w:
            bad = part.labels[(part.labels < 0) | (part.labels >= e.w)][0]
            raise LabelError(f"{name} label {bad} outside [0, {e.w})")
        if part.n != e.w * count:
            raise ShapeError(f"{name} has {part.n} rows, expected w*{name[0]} = {e.w * count}")
        counts = np.bincount(part.labels, minlength=e.w)
        if not np.all(counts == count):
            off = int(np.flatnonzero(counts != count)[0])
            raise ShapeError(
                f"{name} has {counts[off]} rows for class {off}, expected {count}"
            )
    return e

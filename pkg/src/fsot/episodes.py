"""Episode sampling from a feature dataset and synthetic generation for oracles.

Randomness is counter-based: each (seed, draw_index) pair keys a disjoint
Philox stream, so the episode emitted for a draw index is a pure function of
the pair — independent of thread schedule, worker count, or how many other
episodes were drawn before it. That stability is what makes paired
comparisons between methods on a shared episode stream valid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Episode, FeatureSet, InsufficientData

__all__ = ["EpisodeSpec", "episode_rng", "sample_episode", "synth_episode", "synth_dataset"]


@dataclass(frozen=True)
class EpisodeSpec:
    """Way/shot/query counts plus the stream seed."""

    w: int
    s: int
    q: int
    seed: int

    def __post_init__(self) -> None:
        if self.w < 2:
            raise ValueError(f"w must be >= 2, got {self.w}")
        if self.s < 1 or self.q < 1:
            raise ValueError(f"s and q must be >= 1, got s={self.s} q={self.q}")


def episode_rng(seed: int, draw_index: int) -> np.random.Generator:
    """Generator for one (seed, draw_index) pair.

    The draw index is planted in the high word of the Philox counter, so
    consecutive indices own disjoint 2^192-block ranges of one keyed stream.
    """
    draw_index = int(draw_index)
    if draw_index < 0:
        raise ValueError(f"draw_index must be >= 0, got {draw_index}")
    key = int(seed) & ((1 << 128) - 1)
    return np.random.Generator(np.random.Philox(key=key, counter=draw_index << 192))


def sample_episode(dataset: FeatureSet, spec: EpisodeSpec, draw_index: int) -> Episode:
    """Draw one w-way s-shot episode, uniformly and without replacement.

    w distinct classes are drawn from the dataset, then s+q distinct rows
    per class; the first s become support. Episode-local class ids are the
    draw order, with the original dataset ids kept in ``class_ids``.
    """
    if dataset.class_count < spec.w:
        raise InsufficientData(
            f"need {spec.w} classes, dataset has {dataset.class_count}"
        )
    counts = np.bincount(dataset.labels, minlength=dataset.class_count)
    need = spec.s + spec.q
    if counts.min() < need:
        lacking = int(np.argmin(counts))
        raise InsufficientData(
            f"class {lacking} has {counts[lacking]} rows, need s+q = {need}"
        )
    rng = episode_rng(spec.seed, draw_index)
    classes = rng.choice(dataset.class_count, size=spec.w, replace=False)
    sup_rows, qry_rows = [], []
    for cls in classes:
        rows = np.flatnonzero(dataset.labels == cls)
        picked = rng.choice(rows, size=need, replace=False)
        sup_rows.append(picked[: spec.s])
        qry_rows.append(picked[spec.s:])
    sup_idx = np.concatenate(sup_rows)
    qry_idx = np.concatenate(qry_rows)
    sup_labels = np.repeat(np.arange(spec.w), spec.s)
    qry_labels = np.repeat(np.arange(spec.w), spec.q)
    return Episode(
        support=FeatureSet(dataset.data[sup_idx], sup_labels, spec.w),
        query=FeatureSet(dataset.data[qry_idx], qry_labels, spec.w, is_query_partition=True),
        w=spec.w,
        s=spec.s,
        q=spec.q,
        class_ids=tuple(int(c) for c in classes),
    )


def synth_episode(
    spec: EpisodeSpec, dim: int, center_scale: float, sigma: float, seed: int
) -> Episode:
    """Gaussian-blob episode with nonnegative features.

    Class centers are uniform in [0, center_scale]^dim; each sample is its
    center plus spherical noise, clamped at zero so the power step's
    nonnegativity precondition holds. sigma == 0 gives zero noise: every
    sample coincides with its class center.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    rng = episode_rng(seed, 0)
    centers = rng.uniform(0.0, center_scale, size=(spec.w, dim))
    sup = _blob(rng, centers, spec.s, sigma)
    qry = _blob(rng, centers, spec.q, sigma)
    return Episode(
        support=FeatureSet(sup, np.repeat(np.arange(spec.w), spec.s), spec.w),
        query=FeatureSet(
            qry, np.repeat(np.arange(spec.w), spec.q), spec.w, is_query_partition=True
        ),
        w=spec.w,
        s=spec.s,
        q=spec.q,
    )


def synth_dataset(
    class_count: int,
    per_class: int,
    dim: int,
    center_scale: float,
    sigma: float,
    seed: int,
) -> FeatureSet:
    """Full synthetic dataset under the same generative model as synth_episode."""
    if class_count < 1 or per_class < 1 or dim < 1:
        raise ValueError("class_count, per_class and dim must all be >= 1")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    rng = episode_rng(seed, 0)
    centers = rng.uniform(0.0, center_scale, size=(class_count, dim))
    data = _blob(rng, centers, per_class, sigma)
    labels = np.repeat(np.arange(class_count), per_class)
    return FeatureSet(data, labels, class_count)


def _blob(rng, centers, per_class, sigma):
    w, dim = centers.shape
    noise = rng.normal(0.0, sigma, size=(w, per_class, dim))
    return np.maximum(centers[:, None, :] + noise, 0.0).reshape(w * per_class, dim)

import numpy as np
import pytest

from fsot import Episode, FeatureSet


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def episode_from_matrix(x, w, s, q):
    """Wrap an (w*(s+q), d) matrix as an episode, support rows first."""
    ns = w * s
    return Episode(
        support=FeatureSet(x[:ns], np.repeat(np.arange(w), s), w),
        query=FeatureSet(x[ns:], np.repeat(np.arange(w), q), w, is_query_partition=True),
        w=w,
        s=s,
        q=q,
    )

"""Transductive few-shot classification on pre-extracted embedding features.

The pipeline: a three-step latent-space transform (component-wise power
with semi-normalization, QR dimension removal, centering with a second
semi-normalization) followed by iterative class-center estimation where the
expectation step is an entropy-regularized optimal transport solved by
Sinkhorn scaling. Baseline classifiers, an episode sampler, and a
statistical evaluation harness round out the package.
"""

from ._backend import BACKEND
from .baselines import gmm_classify, kmeans_classify, nn_classify
from .core import (
    Episode,
    FeatureSet,
    FewShotError,
    LstParams,
    MapParams,
    TransportPlan,
    validate_episode,
)
from .episodes import EpisodeSpec, sample_episode, synth_dataset, synth_episode
from .evaluation import EvalReport, TTestResult, compare, evaluate, paired_t_test
from .io import read_features, write_features
from .lst import center_semi_normalize, lst_transform, power_semi_normalize, qr_reduce
from .map_classifier import ClassCenters, init_centers, map_classify, update_centers
from .ot import CostMatrix, cost_matrix, sinkhorn

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ClassCenters",
    "CostMatrix",
    "Episode",
    "EpisodeSpec",
    "EvalReport",
    "FeatureSet",
    "FewShotError",
    "LstParams",
    "MapParams",
    "TTestResult",
    "TransportPlan",
    "center_semi_normalize",
    "compare",
    "cost_matrix",
    "evaluate",
    "gmm_classify",
    "init_centers",
    "kmeans_classify",
    "lst_transform",
    "map_classify",
    "nn_classify",
    "paired_t_test",
    "power_semi_normalize",
    "qr_reduce",
    "read_features",
    "sample_episode",
    "sinkhorn",
    "synth_dataset",
    "synth_episode",
    "update_centers",
    "validate_episode",
    "write_features",
]

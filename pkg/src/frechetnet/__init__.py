"""Neural networks on coordinate models of Frechet and Hilbert spaces.

Elements of the space are coefficient vectors in a Schauder basis, stored at
a fixed ambient dimension. The package provides the seminorm and metric
structure (:mod:`~frechetnet.space`), a catalog of separating activations
(:mod:`~frechetnet.activation`), shallow, deep and vector-valued networks
with basis projection (:mod:`~frechetnet.network`), sampling and training
with exact gradients (:mod:`~frechetnet.training`), functional-data
ingestion and persistence (:mod:`~frechetnet.data`) and an experiment
harness with a command line (:mod:`~frechetnet.experiments`,
:mod:`~frechetnet.cli`).
"""

from .activation import (CoordinateWise, ReluLike, RankOne, ScalarSigmoid, SeparatingBump,
                         ThreeCoord, TruncatedSum, activation_from_dict, default_activation)
from .errors import DimensionError, DivergenceError, FrechetNetError, ParseError, ValidationError
from .network import (ArchSpec, DeepNet, InitScheme, ShallowNet, VectorNet, deserialize, init_params,
                      project_network, serialize)
from .space import SeminormFamily, metric, project, project_operator, seminorm
from .training import (CompactBox, Dataset, TrainConfig, grad, mse_loss, sample_compact, sup_error,
                       tail_dimension, train)

__version__ = "0.1.0"

__all__ = [
    "ArchSpec", "CompactBox", "CoordinateWise", "Dataset", "DeepNet", "DimensionError",
    "DivergenceError", "FrechetNetError", "InitScheme", "ParseError", "RankOne", "ReluLike",
    "ScalarSigmoid", "SeminormFamily", "SeparatingBump", "ShallowNet", "ThreeCoord", "TrainConfig",
    "TruncatedSum", "ValidationError", "VectorNet", "activation_from_dict", "default_activation",
    "deserialize", "grad", "init_params", "metric", "mse_loss", "project", "project_network",
    "project_operator", "sample_compact", "seminorm", "serialize", "sup_error", "tail_dimension",
    "train",
]

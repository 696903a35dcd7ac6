"""Graph classification with quantum-walk grid convolution.

Pipeline: depth-based entropy representations of vertices → k-means
prototypes shared across all graphs → transitive alignment of every
graph onto a fixed M-row grid → graph convolutions weighted by the
quantum walk's average mixing matrix → per-scale 1-D convolutional
heads and a softmax classifier, trained with Adam under k-fold
cross-validation.
"""

__version__ = "0.1.0"

from .alignment import (
    AlignedGrid,
    CorrespondenceMatrix,
    PrototypeSet,
    affinity_matrix,
    aligned_grid,
    aligned_grid_level,
    apply_prototype_order,
    correspondence_matrix,
    discover_prototypes,
    kmeans_prototypes,
    prototype_order,
)
from .depth import (
    DBRepresentation,
    dataset_db_representations,
    db_representation,
    expansion_subgraph,
    steady_state_entropy,
)
from .graphs import (
    Dataset,
    Graph,
    degree_features,
    feature_dimension,
    load_tu_dataset,
    one_hot_features,
    save_tu_dataset,
    validate_graph,
    vertex_features,
)
from .network import (
    NetworkConfig,
    NetworkParams,
    backward,
    classifier_forward,
    conv1d_forward,
    conv_stack_forward,
    finite_difference_check,
    forward,
    head_forward,
    init_params,
    maxpool1d,
    quantum_conv_forward,
)
from .quantum import (
    SpectralDecomposition,
    average_mixing_matrix,
    cesaro_mixing_estimate,
    spectral_decomposition,
)
from .training import (
    AdamState,
    TrainConfig,
    TrainResult,
    adam_step,
    cross_entropy,
    evaluate,
    kfold_split,
    prepare_inputs,
    train,
)

__all__ = [
    "AlignedGrid",
    "AdamState",
    "CorrespondenceMatrix",
    "DBRepresentation",
    "Dataset",
    "Graph",
    "NetworkConfig",
    "NetworkParams",
    "PrototypeSet",
    "SpectralDecomposition",
    "TrainConfig",
    "TrainResult",
    "adam_step",
    "affinity_matrix",
    "aligned_grid",
    "aligned_grid_level",
    "apply_prototype_order",
    "average_mixing_matrix",
    "backward",
    "cesaro_mixing_estimate",
    "classifier_forward",
    "conv1d_forward",
    "conv_stack_forward",
    "correspondence_matrix",
    "cross_entropy",
    "dataset_db_representations",
    "db_representation",
    "degree_features",
    "discover_prototypes",
    "evaluate",
    "expansion_subgraph",
    "feature_dimension",
    "finite_difference_check",
    "forward",
    "head_forward",
    "init_params",
    "kfold_split",
    "kmeans_prototypes",
    "load_tu_dataset",
    "maxpool1d",
    "one_hot_features",
    "prepare_inputs",
    "prototype_order",
    "quantum_conv_forward",
    "save_tu_dataset",
    "spectral_decomposition",
    "steady_state_entropy",
    "train",
    "validate_graph",
    "vertex_features",
]

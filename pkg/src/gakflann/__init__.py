"""K-FLANN clustering with genetic search for vigilance and tolerances."""

from .data import (
    PRESETS,
    DataError,
    Dataset,
    FeatureBounds,
    SyntheticSpec,
    distance_matrix,
    feature_bounds,
    generate_synthetic,
    load_builtin,
    load_csv,
    write_csv,
)
from .ga import Chromosome, GaConfig, GAKFLANNSearch, Individual, evolve
from .kflann import KFLANN, ClusteringOutcome, KflannParams, Network, cluster
from .validity import ValidityReport, cs_measure, error_rate, fitness

__all__ = [
    "PRESETS", "DataError", "Dataset", "FeatureBounds", "SyntheticSpec", "distance_matrix",
    "feature_bounds", "generate_synthetic", "load_builtin", "load_csv", "write_csv",
    "Chromosome", "GaConfig", "GAKFLANNSearch", "Individual", "evolve",
    "KFLANN", "ClusteringOutcome", "KflannParams", "Network", "cluster",
    "ValidityReport", "cs_measure", "error_rate", "fitness",
]

__version__ = "0.1.0"

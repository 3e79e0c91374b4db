"""Graph-diffusion similarities on object-feature bipartite graphs."""

__version__ = "0.1.0"

from .diffusion import (Variant, SimilarityVector, forward_row, normalized_row, operator_for,
                        pair, reversed_row, similarity_matrix, to_distance)
from .errors import DataError
from .graph import (DiffusionOperator, FeatureMatrix, build, from_dense, make_operator,
                    row_normalize, row_sum_ratio)

__all__ = [
    "DataError", "DiffusionOperator", "FeatureMatrix", "SimilarityVector", "Variant",
    "build", "forward_row", "from_dense", "make_operator", "normalized_row", "operator_for",
    "pair", "reversed_row", "row_normalize", "row_sum_ratio", "similarity_matrix",
    "to_distance",
]

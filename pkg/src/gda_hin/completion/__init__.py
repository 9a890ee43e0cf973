from gda_hin.completion.block import (
    CompletionBlock,
    assemble_block_matrix,
    completion_loss,
    fit_completion,
    laplacian_quadratic,
    nuclear_norm,
    recovered_features,
)

__all__ = [
    "CompletionBlock",
    "assemble_block_matrix",
    "completion_loss",
    "fit_completion",
    "laplacian_quadratic",
    "nuclear_norm",
    "recovered_features",
]

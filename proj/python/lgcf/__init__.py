"""Lorentz graph convolution for collaborative filtering.

Thin wrapper over the C++ core; see ``train`` for the end-to-end entry point.
"""

from ._lgcf import (
    Error,
    distance,
    exp_map,
    from_klein,
    generate_tree_benchmark,
    load_checkpoint,
    log_map,
    lorentz_inner,
    to_klein,
    train,
)

__all__ = [
    "Error",
    "distance",
    "exp_map",
    "from_klein",
    "generate_tree_benchmark",
    "load_checkpoint",
    "log_map",
    "lorentz_inner",
    "to_klein",
    "train",
]

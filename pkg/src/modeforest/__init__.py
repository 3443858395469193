"""Quick Shift mode seeking: density estimation, forests, cluster trees and modal regression."""

from ._util import InputError, InvariantError
from .analysis import certify_separation_1d, hausdorff, match_modes
from .cluster_tree import ClusterTree, cluster_tree, level_subgraph, link, merge_height, tree_from_forest
from .kernels import KERNELS, DensityModel, Kernel, get_kernel, kde_evaluate, kde_self_evaluate, recommended_bandwidth
from .modal_regression import ConditionalModeResult, modal_regression, modal_regression_batch
from .quickshift import (
    ModeSet,
    QuickShiftForest,
    assignments,
    build_forest,
    directed_path_exists,
    modes,
    quickshift,
    tau_schedule,
)
from . import verify

__version__ = "0.1.0"

__all__ = [
    "InputError",
    "InvariantError",
    "KERNELS",
    "Kernel",
    "DensityModel",
    "get_kernel",
    "kde_evaluate",
    "kde_self_evaluate",
    "recommended_bandwidth",
    "QuickShiftForest",
    "ModeSet",
    "build_forest",
    "quickshift",
    "modes",
    "assignments",
    "directed_path_exists",
    "tau_schedule",
    "ClusterTree",
    "cluster_tree",
    "tree_from_forest",
    "level_subgraph",
    "link",
    "merge_height",
    "ConditionalModeResult",
    "modal_regression",
    "modal_regression_batch",
    "hausdorff",
    "match_modes",
    "certify_separation_1d",
    "verify",
]

"""
Dendroflow

Level-set trees of time series, Horton-Strahler and Tokunaga statistics, and
Monte Carlo experiments on Markov chains, Galton-Watson trees and fractional
Brownian motion.
"""
__version__ = "0.2.0"
__author__ = "Sharfuddin Shawon"
__email__ = "sharf@shawon.me"

from .exceptions import (
    DegenerateSeriesError,
    DendroflowConfigurationError,
    DendroflowError,
    DendroflowValidationError,
    ExperimentConfigError,
    NonBinaryTreeError,
    SeriesParseError,
    TreeConstructionError,
)
from .horton import assign_orders, branch_decomposition, horton_stats, tokunaga_matrix
from .level_set import Series, level_set_tree, prune_series
from .tree_core import Tree, build_tree

# Default Django app configuration
default_app_config = 'dendroflow.apps.DendroflowConfig'

__all__ = [
    'Tree',
    'Series',
    'build_tree',
    'level_set_tree',
    'prune_series',
    'assign_orders',
    'branch_decomposition',
    'horton_stats',
    'tokunaga_matrix',
    'DendroflowError',
    'DendroflowValidationError',
    'DegenerateSeriesError',
    'DendroflowConfigurationError',
    'ExperimentConfigError',
    'SeriesParseError',
    'TreeConstructionError',
    'NonBinaryTreeError',
]

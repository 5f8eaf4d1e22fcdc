"""Exact simulation of linear-optical circuits built from loops on a time-bin rail."""

from .circuits import (HADAMARD, MIRROR, WINDOW, BeamSplitterConfig, CircuitOp, beam_splitter,
                       spatial_compose, temporal_compose, verify_interchange)
from .fock import FockVector, OccupationVector, enumerate_sector
from .functor import apply, matrix_element, permanent, sector_matrix
from .measurement import OutcomeDistribution, feed_forward, outcome_distribution, project_block, sample

__version__ = "0.1.0"

__all__ = [
    "BeamSplitterConfig", "CircuitOp", "FockVector", "HADAMARD", "MIRROR", "OccupationVector",
    "OutcomeDistribution", "WINDOW", "apply", "beam_splitter", "enumerate_sector", "feed_forward",
    "matrix_element", "outcome_distribution", "permanent", "project_block", "sample",
    "sector_matrix", "spatial_compose", "temporal_compose", "verify_interchange",
]

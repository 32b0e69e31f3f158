"""Core entropy of quadratic polynomials from rational external angles.

Two independent routes are provided: the Perron eigenvalue of the finite pair
matrix, and the smallest zero of the spectral determinant of the infinite
labeled-wedge graph, with a rigorous enclosure.
"""

from .angles import Angle, OrbitInfo, PairLabel, PartitionSide, doubling, is_separated, make_angle, orbit, parse_angle, partition_side
from .engine import EntropyReport, compute_entropy, holder_probe, one_sided_probe
from .finite_model import finite_graph_adjacency, leading_eigenvalue, thurston_matrix, two_cover_adjacency
from .spectral import GrowthResult, InsufficientDepth, Method, SpectralPolynomial, smallest_positive_root, tail_bound
from .wedge import LabeledWedge, closed_path_counts, enumerate_multicycles, wedge_from_angle

__all__ = [
    "Angle",
    "EntropyReport",
    "GrowthResult",
    "InsufficientDepth",
    "LabeledWedge",
    "Method",
    "OrbitInfo",
    "PairLabel",
    "PartitionSide",
    "SpectralPolynomial",
    "closed_path_counts",
    "compute_entropy",
    "doubling",
    "enumerate_multicycles",
    "finite_graph_adjacency",
    "holder_probe",
    "is_separated",
    "leading_eigenvalue",
    "make_angle",
    "one_sided_probe",
    "orbit",
    "parse_angle",
    "partition_side",
    "smallest_positive_root",
    "tail_bound",
    "thurston_matrix",
    "two_cover_adjacency",
    "wedge_from_angle",
]

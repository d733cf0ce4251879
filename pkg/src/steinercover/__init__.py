"""Spanning trees, Steiner trees and Steiner ratios on flat cones and disphenoids."""

from .coverings import (
    ConeCovering,
    CoveringReport,
    DeckElement,
    DisphenoidCovering,
    covering_for,
    lifts,
    project,
    verify_covering,
)
from .errors import (
    ConvergenceError,
    EnumerationLimitError,
    InvalidPointError,
    UnsupportedSpaceError,
    VerificationFailure,
)
from .quotient import smt_quotient, smt_quotient_length, smt_upper_star
from .ratio import RatioReport, TheoremReport, repro, search_inf, steiner_ratio, verify_theorem
from .spaces import Cone, ConePoint, Disphenoid, FacePoint, Plane, PlanePoint, distance, pairwise_distances
from .spanning import Tree, mst, mst_length
from .steiner import Topology, enumerate_full_topologies, optimize_fixed_topology, smt_plane, smt_plane_length

__version__ = "0.1.0"

__all__ = [
    "Cone", "ConeCovering", "ConePoint", "ConvergenceError", "CoveringReport", "DeckElement",
    "Disphenoid", "DisphenoidCovering", "EnumerationLimitError", "FacePoint", "InvalidPointError",
    "Plane", "PlanePoint", "RatioReport", "TheoremReport", "Topology", "Tree",
    "UnsupportedSpaceError", "VerificationFailure", "covering_for", "distance",
    "enumerate_full_topologies", "lifts", "mst", "mst_length", "optimize_fixed_topology",
    "pairwise_distances", "project", "repro", "search_inf", "smt_plane", "smt_plane_length",
    "smt_quotient", "smt_quotient_length", "smt_upper_star", "steiner_ratio", "verify_covering",
    "verify_theorem",
]

"""Approximate diagonalization of commuting normal matrix fields over simplicial carriers."""
from .dense import (
    SpectralDecomp,
    expih,
    hermitian_eig,
    joint_diagonalize,
    normal_decompose,
    polar_batch,
    snap,
    unitary_log_gap,
)
from .diag1d import cycle_monodromy, diagonalize_cycle, diagonalize_path, edge_transport
from .disk2d import BoundaryData, diagonalize_complex2, extend_triangle, snap_vertex_homomorphism
from .domain import SimplicialDomain, build_domain, cycle, interval, s3, sphere2
from .errors import MfdError, Obstructed, ToleranceNotMet
from .field import (
    DiagonalFrameField,
    FunctionDictionary,
    Generator,
    GeneratorField,
    residual_report,
)
from .homotopy import HomotopyPath, basic_homotopy
from .matching import MatchingPlan, bottleneck_match, cluster_by_radius, match_decompositions
from .obstruction import ObstructionReport, certify, chern_number, degree3, det_winding

__version__ = "0.1.0"

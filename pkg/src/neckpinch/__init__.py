"""Volume-normalized DeTurck (Ricci) flow of corseted three-sphere metrics.

Evolves spherically symmetric S^3 geometries pinched at the equator,
classifies each run as converging to the round sphere or forming a neck
pinch, and bisects the corseting parameter to the critical threshold.
"""

from .classify import (Assessment, Classifier, OutcomeKind, PinchDiagnostics,
                       RunOutcome, pinch_diagnostics)
from .critsearch import BisectionIteration, BisectionResult, BracketError, bisect
from .flow import BlowUpError, FlowConfig, evolve, rhs, stable_dt, step
from .geometry import (CurvatureProfile, FieldState, average_scalar_curvature,
                       corseted_initial_data, curvature_invariants,
                       deturck_vector, ricci_eigenvalues, sphere_area,
                       sphere_areas, stable_mu, stable_phi, volume_normalizer,
                       w_of)
from .grid import Grid, build_grid, d1, d2, fill_ghosts, integrate

__version__ = "0.1.0"

__all__ = [
    "Assessment",
    "BisectionIteration",
    "BisectionResult",
    "BlowUpError",
    "BracketError",
    "Classifier",
    "CurvatureProfile",
    "FieldState",
    "FlowConfig",
    "Grid",
    "OutcomeKind",
    "PinchDiagnostics",
    "RunOutcome",
    "average_scalar_curvature",
    "bisect",
    "build_grid",
    "corseted_initial_data",
    "curvature_invariants",
    "d1",
    "d2",
    "deturck_vector",
    "evolve",
    "fill_ghosts",
    "integrate",
    "pinch_diagnostics",
    "rhs",
    "ricci_eigenvalues",
    "sphere_area",
    "sphere_areas",
    "stable_dt",
    "stable_mu",
    "stable_phi",
    "step",
    "volume_normalizer",
    "w_of",
]

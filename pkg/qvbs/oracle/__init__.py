"""
QVBS v1 - Brute-force oracle

Materializes the ground state from its bond polynomial and from its matrix
product form, builds the projector Hamiltonian, and checks the lowering
identity for two-site highest-weight vectors.
"""

from .polynomial import Polynomial, coproduct_lowering
from .projectors import (
    AnnihilationReport,
    GapProbe,
    ProjectorAlgebraReport,
    apply_hamiltonian,
    check_annihilation,
    check_projector_algebra,
    ground_state_gap,
    hamiltonian,
    local_term,
    projector,
)
from .proposition import PropositionReport, highest_weight_vector, lowered_closed_form, verify_proposition1
from .states import (
    PolynomialState,
    RouteComparison,
    SpinState,
    build_vbs_poly,
    check_budget,
    expectation,
    mps_state,
    oracle_correlator,
    poly_to_spin_state,
    proportionality,
)

__all__ = [
    "AnnihilationReport",
    "GapProbe",
    "Polynomial",
    "PolynomialState",
    "ProjectorAlgebraReport",
    "PropositionReport",
    "RouteComparison",
    "SpinState",
    "apply_hamiltonian",
    "build_vbs_poly",
    "check_annihilation",
    "check_budget",
    "check_projector_algebra",
    "coproduct_lowering",
    "expectation",
    "ground_state_gap",
    "hamiltonian",
    "highest_weight_vector",
    "local_term",
    "lowered_closed_form",
    "mps_state",
    "oracle_correlator",
    "poly_to_spin_state",
    "projector",
    "proportionality",
    "verify_proposition1",
]

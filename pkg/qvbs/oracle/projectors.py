"""
QVBS v1 - Projectors and the parent Hamiltonian

pi_J on V_S (x) V_S from q-Clebsch-Gordan coefficients, the periodic
Hamiltonian sum_k sum_{J>S} C_J(k,k+1) (pi_J)_{k,k+1}, and the checks that
the materialized ground state is annihilated by it.
"""

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..config import get_config
from ..errors import BudgetExceededError, InvalidParameterError, InvalidSpinError
from ..qcore import q_cgc, validate_q
from .states import SpinState, check_budget

logger = logging.getLogger(__name__)

Coefficients = Mapping[int, float] | Mapping[tuple[int, int], float] | None


@dataclass(frozen=True)
class TwoSiteOperator:
    """Dense operator on V_S (x) V_S, index (m1+S)(2S+1) + (m2+S)"""
    S: int
    q: float
    label: str
    matrix: np.ndarray


@dataclass
class ProjectorAlgebraReport:
    """Idempotency, orthogonality, completeness and rank of the pi_J family"""
    S: int
    q: float
    max_product_residual: float = 0.0
    completeness_residual: float = 0.0
    max_symmetry_residual: float = 0.0
    max_rank_residual: float = 0.0
    error_messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.error_messages


@dataclass
class AnnihilationReport:
    """Largest ||(pi_J)_{k,k+1} Psi|| / ||Psi|| over bonds and J > S"""
    S: int
    q: float
    L: int
    max_residual: float = 0.0
    hamiltonian_residual: float = 0.0
    worst: tuple[int, int] | None = None
    error_messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.error_messages


@dataclass(frozen=True)
class GapProbe:
    """Lowest part of the dense spectrum of the Hamiltonian"""
    lowest: float
    second: float
    eigenvalues: np.ndarray


def projector(S: int, J: int, q: float) -> TwoSiteOperator:
    """pi_J = sum_M v_{J,M} v_{J,M}^T with v_{J,M}(m1, m2) = <S m1; S m2 | J M>_q."""
    if S < 1:
        raise InvalidSpinError(f"spin S must be a positive integer, got {S!r}")
    if not 0 <= J <= 2 * S:
        raise InvalidSpinError(f"J must lie in 0..2S={2 * S}, got {J}")
    q = validate_q(q)
    d = 2 * S + 1
    matrix = np.zeros((d * d, d * d))
    for M in range(-J, J + 1):
        vector = np.zeros(d * d)
        for m1 in range(-S, S + 1):
            m2 = M - m1
            if abs(m2) <= S:
                vector[(m1 + S) * d + (m2 + S)] = q_cgc(S, S, J, m1, m2, M, q)
        matrix += np.outer(vector, vector)
    return TwoSiteOperator(S=S, q=q, label=f"pi_{J}", matrix=matrix)


def check_projector_algebra(S: int, q: float, tol: float | None = None) -> ProjectorAlgebraReport:
    """pi_J pi_J' = delta_JJ' pi_J, sum_J pi_J = Id, Tr pi_J = 2J+1, pi_J symmetric."""
    tol = get_config().tolerances.oracle if tol is None else tol
    report = ProjectorAlgebraReport(S=S, q=validate_q(q))
    family = [projector(S, J, q).matrix for J in range(2 * S + 1)]
    identity = np.eye(family[0].shape[0])
    for J, pj in enumerate(family):
        report.max_symmetry_residual = max(report.max_symmetry_residual, float(np.max(np.abs(pj - pj.T))))
        report.max_rank_residual = max(report.max_rank_residual, abs(float(np.trace(pj)) - (2 * J + 1)))
        for Jp, pk in enumerate(family):
            target = pj if J == Jp else 0.0
            residual = float(np.max(np.abs(pj @ pk - target)))
            report.max_product_residual = max(report.max_product_residual, residual)
    report.completeness_residual = float(np.max(np.abs(sum(family) - identity)))

    checks = {
        "product": report.max_product_residual,
        "completeness": report.completeness_residual,
        "symmetry": report.max_symmetry_residual,
    }
    for name, value in checks.items():
        if value > tol:
            report.error_messages.append(f"S={S} q={q}: projector {name} residual {value:.3e}")
    if report.max_rank_residual > 1e-8:
        report.error_messages.append(f"S={S} q={q}: projector rank residual {report.max_rank_residual:.3e}")
    return report


def _coefficient(C: Coefficients, J: int, k: int) -> float:
    if not C:
        return 1.0
    value = C.get((J, k), C.get(J, 1.0)) if isinstance(C, Mapping) else 1.0
    return float(value)


def _validate_coefficients(C: Coefficients) -> None:
    for key, value in (C or {}).items():
        if not value > 0:
            raise InvalidParameterError(f"Hamiltonian coefficient C[{key}] must be positive, got {value}")


def local_term(S: int, q: float, C: Coefficients = None, k: int = 0) -> TwoSiteOperator:
    """sum_{J=S+1}^{2S} C_J(k,k+1) pi_J on one bond."""
    _validate_coefficients(C)
    matrix = sum(_coefficient(C, J, k) * projector(S, J, q).matrix for J in range(S + 1, 2 * S + 1))
    return TwoSiteOperator(S=S, q=validate_q(q), label=f"h_{k},{k + 1}", matrix=matrix)


def apply_two_site(amplitudes: np.ndarray, S: int, L: int, operator: np.ndarray, k: int) -> np.ndarray:
    """
    Apply a two-site operator to sites (k, k+1 mod L). `amplitudes` may
    carry trailing batch axes after the (2S+1)^L state axis.
    """
    d = 2 * S + 1
    batch = amplitudes.shape[1:]
    tensor = amplitudes.reshape((d,) * L + batch)
    k2 = (k + 1) % L
    op4 = operator.reshape(d, d, d, d)
    out = np.tensordot(op4, tensor, axes=([2, 3], [k, k2]))
    out = np.moveaxis(out, [0, 1], [k, k2])
    return out.reshape(amplitudes.shape)


def apply_hamiltonian(state: SpinState, q: float, C: Coefficients = None) -> np.ndarray:
    """H |psi> as a sum of local terms, without forming H."""
    _validate_coefficients(C)
    out = np.zeros_like(state.amplitudes)
    for k in range(state.L):
        term = local_term(state.S, q, C, k).matrix
        out += apply_two_site(state.amplitudes, state.S, state.L, term, k)
    return out


def hamiltonian(S: int, q: float, L: int, C: Coefficients = None) -> np.ndarray:
    """Dense periodic Hamiltonian; limited to the configured dimension."""
    dim = check_budget(S, L)
    limit = get_config().budgets.max_hamiltonian_dim
    if dim > limit:
        raise BudgetExceededError(f"dense Hamiltonian of dimension {dim} exceeds {limit}")
    _validate_coefficients(C)
    identity = np.eye(dim)
    out = np.zeros((dim, dim))
    for k in range(L):
        out += apply_two_site(identity, S, L, local_term(S, q, C, k).matrix, k)
    return out


def check_annihilation(state: SpinState, q: float, tol: float | None = None) -> AnnihilationReport:
    """(pi_J)_{k,k+1} |Psi> = 0 for every bond k and every J in S+1..2S."""
    tol = get_config().tolerances.annihilation if tol is None else tol
    S, L = state.S, state.L
    report = AnnihilationReport(S=S, q=validate_q(q), L=L)
    norm = float(np.linalg.norm(state.amplitudes))
    for J in range(S + 1, 2 * S + 1):
        pj = projector(S, J, q).matrix
        for k in range(L):
            residual = float(np.linalg.norm(apply_two_site(state.amplitudes, S, L, pj, k))) / norm
            if residual > report.max_residual:
                report.max_residual, report.worst = residual, (J, k)
    report.hamiltonian_residual = float(np.linalg.norm(apply_hamiltonian(state, q))) / norm
    if report.max_residual > tol:
        J, k = report.worst
        report.error_messages.append(
            f"S={S} L={L} q={q}: pi_{J} on bond ({k},{(k + 1) % L}) leaves {report.max_residual:.3e}"
        )
    return report


def ground_state_gap(S: int, q: float, L: int, C: Coefficients = None) -> GapProbe:
    """Dense spectrum of H at desk scale: nonnegativity and the gap above zero."""
    eigenvalues = np.linalg.eigvalsh(hamiltonian(S, q, L, C))
    logger.debug(f"H spectrum S={S} L={L} q={q}: lowest {eigenvalues[:3]}")
    return GapProbe(lowest=float(eigenvalues[0]), second=float(eigenvalues[1]), eigenvalues=eigenvalues)

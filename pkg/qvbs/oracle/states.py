"""
QVBS v1 - Materialized chain states

Builds the ground state two ways, as the expanded bond polynomial and as
the contracted matrix product, converts both to dense amplitudes over
the orthonormal basis |S;m_1> (x) ... (x) |S;m_L>, and evaluates
expectation values by applying one-site operators directly.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..config import get_config
from ..errors import BudgetExceededError, InvalidParameterError, InvalidSpinError
from ..mpsrep import PairTag, SiteOperator, h_coefficients
from ..qcore import q_factorial, validate_q
from .polynomial import Polynomial

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolynomialState:
    """Chain state as a polynomial in (x_1, y_1, ..., x_L, y_L)"""
    L: int
    S: int
    q: float
    poly: Polynomial

    @property
    def terms(self) -> dict[tuple[int, ...], float]:
        return self.poly.terms

    def site_degrees(self) -> set[int]:
        return {key[2 * k] + key[2 * k + 1] for key in self.poly.terms for k in range(self.L)}


@dataclass(frozen=True)
class SpinState:
    """Dense amplitudes, lexicographic in (m_1, ..., m_L) with index m+S per site"""
    L: int
    S: int
    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return (2 * self.S + 1) ** self.L

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2 * self.S + 1,) * self.L)

    def norm_sq(self) -> float:
        return float(self.amplitudes @ self.amplitudes)

    def support(self, rel_tol: float = 1e-12) -> frozenset[int]:
        cutoff = rel_tol * float(np.max(np.abs(self.amplitudes)))
        return frozenset(np.flatnonzero(np.abs(self.amplitudes) > cutoff).tolist())


@dataclass(frozen=True)
class RouteComparison:
    """Relation between the polynomial and matrix-product states"""
    scalar: float
    collinearity: float
    norm_sq_poly: float
    norm_sq_mps: float


def check_budget(S: int, L: int) -> int:
    """Dimension (2S+1)^L, rejected above the configured dense-state budget."""
    if S < 1:
        raise InvalidSpinError(f"spin S must be a positive integer, got {S!r}")
    if L < 2:
        raise InvalidParameterError(f"chain length L must be >= 2, got {L}")
    dim = (2 * S + 1) ** L
    limit = get_config().budgets.max_state_dim
    if dim > limit:
        raise BudgetExceededError(f"dense state of dimension {dim} for S={S}, L={L} exceeds {limit}")
    return dim


def build_vbs_poly(S: int, q: float, L: int) -> PolynomialState:
    """prod_{k in Z_L} prod_{m=1}^{S} (q^m x_k y_{k+1} - q^{-m} y_k x_{k+1})."""
    check_budget(S, L)
    q = validate_q(q)
    nvars = 2 * L
    poly = Polynomial.constant(nvars)
    for k in range(L):
        nxt = (k + 1) % L
        for m in range(1, S + 1):
            bond = Polynomial.binomial_term(
                nvars,
                {2 * k: 1, 2 * nxt + 1: 1}, q ** m,
                {2 * k + 1: 1, 2 * nxt: 1}, -(q ** -m),
            )
            poly = poly * bond
    logger.debug(f"Expanded bond polynomial S={S} L={L}: {len(poly)} monomials")
    return PolynomialState(L=L, S=S, q=q, poly=poly)


def poly_to_spin_state(state: PolynomialState) -> SpinState:
    """x^{S+m} y^{S-m} at a site becomes sqrt([S+m]![S-m]!) |S;m>."""
    S, L = state.S, state.L
    check_budget(S, L)
    degrees = state.site_degrees()
    if degrees != {2 * S}:
        raise InvalidParameterError(f"per-site degrees {sorted(degrees)} are not uniformly 2S={2 * S}")
    q = state.q
    d = 2 * S + 1
    amplitudes = np.zeros(d ** L)
    weights = [math.sqrt(q_factorial(S + m, q) * q_factorial(S - m, q)) for m in range(-S, S + 1)]
    for key, value in state.poly.terms.items():
        index = 0
        factor = value
        for k in range(L):
            m = key[2 * k] - S
            index = index * d + (m + S)
            factor *= weights[m + S]
        amplitudes[index] += factor
    return SpinState(L=L, S=S, amplitudes=amplitudes)


def mps_state(S: int, q: float, L: int) -> SpinState:
    """Tr[g_1 * ... * g_L] with A[m][i, i'] = h_{ii'} when i' - i = m."""
    check_budget(S, L)
    h = h_coefficients(S, q).entries
    d, D = 2 * S + 1, S + 1
    site = np.zeros((d, D, D))
    for i in range(D):
        for ip in range(D):
            site[ip - i + S, i, ip] = h[i, ip]
    chain = site
    for _ in range(L - 1):
        chain = np.einsum("pab,sbc->psac", chain, site).reshape(-1, D, D)
    amplitudes = np.einsum("paa->p", chain)
    return SpinState(L=L, S=S, amplitudes=amplitudes)


def proportionality(poly_state: SpinState, mps: SpinState) -> RouteComparison:
    """Measure c with poly = c * mps, and the cosine between the two vectors."""
    if poly_state.amplitudes.shape != mps.amplitudes.shape:
        raise InvalidParameterError("states live in different spaces")
    overlap = float(poly_state.amplitudes @ mps.amplitudes)
    norm_poly, norm_mps = poly_state.norm_sq(), mps.norm_sq()
    return RouteComparison(
        scalar=overlap / norm_mps,
        collinearity=abs(overlap) / math.sqrt(norm_poly * norm_mps),
        norm_sq_poly=norm_poly,
        norm_sq_mps=norm_mps,
    )


def apply_site_operator(state: SpinState, operator: SiteOperator | np.ndarray, site: int) -> SpinState:
    """Apply a one-site operator at 0-based `site`."""
    if not 0 <= site < state.L:
        raise InvalidParameterError(f"site {site} outside 0..{state.L - 1}")
    matrix = operator.matrix(state.S) if isinstance(operator, SiteOperator) else np.asarray(operator)
    out = np.tensordot(matrix, state.tensor, axes=([1], [site]))
    out = np.moveaxis(out, 0, site)
    return SpinState(L=state.L, S=state.S, amplitudes=out.reshape(-1))


def expectation(state: SpinState, operators: list[tuple[SiteOperator, int]]) -> float:
    """<Psi| A_{k1} B_{k2} ... |Psi> / <Psi|Psi>, rightmost applied first."""
    current = state
    for operator, site in reversed(operators):
        current = apply_site_operator(current, operator, site)
    return float(state.amplitudes @ current.amplitudes) / state.norm_sq()


def oracle_correlator(
    S: int,
    q: float,
    L: int,
    r: int | None = None,
    pair: PairTag | str | None = None,
    single: SiteOperator | str | None = None,
    state: SpinState | None = None,
) -> float:
    """
    <A_1 B_r> (pair, 1 <= r <= L) or <A_1> (single) in the materialized
    ground state; builds the matrix-product state unless one is given.
    """
    if (pair is None) == (single is None):
        raise InvalidParameterError("give exactly one of pair or single")
    state = state if state is not None else mps_state(S, q, L)
    if single is not None:
        operator = single if isinstance(single, SiteOperator) else SiteOperator.parse(single)
        return expectation(state, [(operator, 0)])
    if r is None or not 1 <= r <= L:
        raise InvalidParameterError(f"two-point oracle needs 1 <= r <= L, got r={r}, L={L}")
    first, second = PairTag(pair).operators()
    return expectation(state, [(first, 0), (second, r - 1)])

"""
QVBS v1 - Lowering the two-site highest-weight vectors

Applies Delta X^- n times to the highest-weight vector v_J of V_J inside
V_S (x) V_S and compares the result coefficient by coefficient with its
closed form. For n >= 2J+1 the closed form, and so the result, is zero.
"""

import logging
from dataclasses import dataclass, field

from ..config import get_config
from ..errors import InvalidSpinError
from ..qcore import q_binomial, q_factorial, validate_q
from .polynomial import X_ALPHA, X_BETA, Y_ALPHA, Y_BETA, Polynomial, coproduct_lowering

logger = logging.getLogger(__name__)


@dataclass
class PropositionReport:
    """Coefficient-wise comparison of (Delta X^-)^n v_J with its closed form"""
    S: int
    J: int
    n: int
    q: float
    max_mismatch: float = 0.0
    scale: float = 0.0
    terms_lhs: int = 0
    terms_rhs: int = 0
    vanishing_expected: bool = False
    tolerance: float = 0.0
    error_messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.error_messages


def _bond_product(S: int, J: int, q: float) -> Polynomial:
    # prod_{nu=1}^{2S-J} (x_a y_b - q^{2(nu-S-1)} x_b y_a)
    out = Polynomial.constant(4)
    for nu in range(1, 2 * S - J + 1):
        factor = Polynomial.binomial_term(
            4,
            {X_ALPHA: 1, Y_BETA: 1}, 1.0,
            {X_BETA: 1, Y_ALPHA: 1}, -(q ** (2 * (nu - S - 1))),
        )
        out = out * factor
    return out


def highest_weight_vector(S: int, J: int, q: float) -> Polynomial:
    """v_J = (x_a x_b)^J prod_{nu=1}^{2S-J} (x_a y_b - q^{2(nu-S-1)} x_b y_a)."""
    if S < 1 or not 0 <= J <= 2 * S:
        raise InvalidSpinError(f"need S >= 1 and 0 <= J <= 2S, got S={S}, J={J}")
    q = validate_q(q)
    return Polynomial.monomial((J, 0, J, 0)) * _bond_product(S, J, q)


def lowered_closed_form(S: int, J: int, n: int, q: float) -> Polynomial:
    """
    (x_a x_b)^{J-n} q^{nS} [n]! sum_mu q^{-2 mu S} [J;mu] [J;n-mu]
      (x_a y_b)^mu (x_b y_a)^{n-mu} prod_nu (x_a y_b - q^{2(nu-S-1)} x_b y_a)

    Terms whose q-binomials vanish are skipped, so no negative exponent is
    ever formed.
    """
    q = validate_q(q)
    prefactor = q ** (n * S) * q_factorial(n, q)
    front = Polynomial(4)
    for mu in range(n + 1):
        weight = q ** (-2 * mu * S) * q_binomial(J, mu, q) * q_binomial(J, n - mu, q)
        if weight == 0.0:
            continue
        # x_a^{J-n+mu} y_a^{n-mu} x_b^{J-mu} y_b^{mu}
        front = front + Polynomial.monomial((J - n + mu, n - mu, J - mu, mu), prefactor * weight)
    return front * _bond_product(S, J, q)


def verify_proposition1(S: int, J: int, n: int, q: float, tol: float | None = None) -> PropositionReport:
    """Compare (Delta X^-)^n v_J with lowered_closed_form, relative to the largest intermediate."""
    if not 1 <= S <= 3:
        raise InvalidSpinError(f"the lowering check runs for 1 <= S <= 3, got S={S}")
    if not 0 <= J <= 2 * S:
        raise InvalidSpinError(f"J must lie in 0..2S, got J={J}")
    if not 0 <= n <= 2 * J + 1:
        raise InvalidSpinError(f"n must lie in 0..2J+1, got n={n}")
    q = validate_q(q)
    tol = get_config().tolerances.proposition if tol is None else tol

    current = highest_weight_vector(S, J, q)
    scale = current.max_abs()
    for _ in range(n):
        current = coproduct_lowering(current, q)
        scale = max(scale, current.max_abs())
    expected = lowered_closed_form(S, J, n, q)
    scale = max(scale, expected.max_abs())

    difference = current - expected
    report = PropositionReport(
        S=S, J=J, n=n, q=q,
        max_mismatch=difference.max_abs() / scale,
        scale=scale,
        terms_lhs=len(current),
        terms_rhs=len(expected),
        vanishing_expected=n >= 2 * J + 1,
        tolerance=tol,
    )
    if report.max_mismatch > tol:
        report.error_messages.append(
            f"S={S} J={J} n={n} q={q}: coefficient mismatch {report.max_mismatch:.3e}"
        )
    if report.vanishing_expected and current.max_abs() / scale > tol:
        report.error_messages.append(
            f"S={S} J={J} n={n} q={q}: lowered vector does not vanish ({current.max_abs() / scale:.3e})"
        )
    logger.debug(f"Lowering check S={S} J={J} n={n} q={q}: mismatch {report.max_mismatch:.2e}")
    return report

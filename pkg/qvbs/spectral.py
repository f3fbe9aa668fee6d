"""
QVBS v1 - Closed-form spectrum of the transfer matrix

Eigenvalues lambda_l, edge eigenvectors, the intertwiners I_j that carry
eigenvectors between neighbouring blocks, squared norms, and a cyclic
Jacobi eigensolver used to confirm all of it numerically.

Eigenvectors are unnormalized with leading component 1. For j < 0 the
vectors are expressed in the W_j basis |i-j, i>>, in which they coincide
with their j > 0 mirror images.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .config import BudgetSettings, ToleranceSettings, get_config
from .errors import BudgetExceededError, InvalidSpinError
from .mpsrep import block, transfer_matrix
from .precise import eigen_residual, refine_eigenvalues
from .qcore import q_binomial, q_factorial, q_integer, validate_q

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Intertwiner:
    """I_j: W_j -> W_{j-sign(j)}, two nonzero diagonals"""
    S: int
    q: float
    j: int
    matrix: np.ndarray

    @property
    def target(self) -> int:
        return self.j - (1 if self.j > 0 else -1)


@dataclass(frozen=True)
class SpectralData:
    """Closed-form eigen-data of G indexed by (l, j)"""
    S: int
    q: float
    eigenvalues: dict[int, float]
    eigenvectors: dict[tuple[int, int], np.ndarray]
    squared_norms: dict[tuple[int, int], float]

    @property
    def leading(self) -> float:
        return self.eigenvalues[0]

    @property
    def ratio(self) -> float:
        """lambda_1 / lambda_0."""
        return self.eigenvalues[1] / self.eigenvalues[0]


@dataclass
class JacobiResult:
    """Output of jacobi_eigh; eigenvalues ascending, eigenvectors as columns"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int
    off_norm: float
    converged: bool


@dataclass
class SpectrumReport:
    """Result of verify_spectrum for one (S, q)"""
    S: int
    q: float
    eigenvalues: list[float] = field(default_factory=list)
    degeneracies: list[int] = field(default_factory=list)
    numeric: dict[int, list[float]] = field(default_factory=dict)
    max_eigenvalue_error: float = 0.0
    max_eigen_residual: float = 0.0
    max_eigen_residual_relative: float = 0.0
    max_intertwiner_residual: float = 0.0
    max_norm_residual: float = 0.0
    max_leading_one_error: float = 0.0
    jacobi_sweeps: int = 0
    distinct_eigenvalues: int = 0
    ordering_ok: bool = True
    simple_ok: bool = True
    error_messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.error_messages


def _check_level(S: int, ell: int) -> None:
    if not isinstance(S, (int, np.integer)) or S < 1:
        raise InvalidSpinError(f"spin S must be a positive integer, got {S!r}")
    if not 0 <= ell <= S:
        raise InvalidSpinError(f"level l={ell} outside 0..{S}")


def eigenvalue_closed(S: int, ell: int, q: float) -> float:
    """lambda_l = (-1)^l ([S]!)^2 [2S+1; S-l]."""
    _check_level(S, ell)
    q = validate_q(q)
    sign = -1.0 if ell % 2 else 1.0
    return sign * q_factorial(S, q) ** 2 * q_binomial(2 * S + 1, S - ell, q)


def edge_eigenvector(S: int, ell: int, q: float, side: int = 1) -> np.ndarray:
    """
    |lambda_l>>_{+-l}: components q^{(l+1)i} sqrt([S-l]![i+l]![S-i]! / ([S]![l]![S-i-l]![i]!)).

    `side` (the sign of j) only changes which W basis the components refer
    to, not their values.
    """
    _check_level(S, ell)
    q = validate_q(q)
    if side not in (1, -1):
        raise InvalidSpinError(f"side must be +1 or -1, got {side}")
    f = lambda n: q_factorial(n, q)  # noqa: E731
    components = [
        q ** ((ell + 1) * i)
        * math.sqrt(f(S - ell) * f(i + ell) * f(S - i) / (f(S) * f(ell) * f(S - i - ell) * f(i)))
        for i in range(S - ell + 1)
    ]
    return np.array(components)


def intertwiner(S: int, j: int, q: float) -> Intertwiner:
    """
    I_j for 1 <= |j| <= S, rows indexed by W_{j-sign(j)}, columns by W_j.

    (a, c=a):   q^{-a} sqrt([a+|j|][S-a-|j|+1] / ([|j|][S-|j|+1]))
    (a, c=a-1): -q^{1-a-|j|} sqrt([a][S-a+1] / ([|j|][S-|j|+1]))
    """
    if not isinstance(S, (int, np.integer)) or S < 1:
        raise InvalidSpinError(f"spin S must be a positive integer, got {S!r}")
    if j == 0 or abs(j) > S:
        raise InvalidSpinError(f"intertwiner needs 1 <= |j| <= S, got j={j}, S={S}")
    q = validate_q(q)
    k = abs(j)
    n_rows, n_cols = S - k + 2, S - k + 1
    denominator = q_integer(k, q) * q_integer(S - k + 1, q)
    matrix = np.zeros((n_rows, n_cols))
    for a in range(n_rows):
        if a < n_cols:
            matrix[a, a] = q ** (-a) * math.sqrt(
                q_integer(a + k, q) * q_integer(S - a - k + 1, q) / denominator
            )
        if a >= 1:
            matrix[a, a - 1] = -q ** (1 - a - k) * math.sqrt(
                q_integer(a, q) * q_integer(S - a + 1, q) / denominator
            )
    matrix.setflags(write=False)
    return Intertwiner(S=S, q=q, j=j, matrix=matrix)


def eigenvector(S: int, ell: int, j: int, q: float) -> np.ndarray:
    """|lambda_l>>_j, the edge vector carried down (or up) by intertwiners."""
    _check_level(S, ell)
    if abs(j) > ell:
        raise InvalidSpinError(f"eigenvector needs |j| <= l, got j={j}, l={ell}")
    side = -1 if j < 0 else 1
    vector = edge_eigenvector(S, ell, q, side)
    # I_l first, then I_{l-1}, ... down to I_{|j|+1}
    for k in range(ell, abs(j), -1):
        vector = intertwiner(S, side * k, q).matrix @ vector
    return vector


def squared_norm_closed(S: int, ell: int, j: int, q: float) -> float:
    """
    <<lambda_l|lambda_l>>_j = q^{S(|j|+1) - l(l+1)} [S+l+1]! [l-|j|]! [S-l]! [|j|]!
                              / ([S]! [l+|j|]! [S-|j|]! [2l+1])
    """
    _check_level(S, ell)
    if abs(j) > ell:
        raise InvalidSpinError(f"squared norm needs |j| <= l, got j={j}, l={ell}")
    q = validate_q(q)
    k = abs(j)
    f = lambda n: q_factorial(n, q)  # noqa: E731
    return (
        q ** (S * (k + 1) - ell * (ell + 1))
        * f(S + ell + 1) * f(ell - k) * f(S - ell) * f(k)
        / (f(S) * f(ell + k) * f(S - k) * q_integer(2 * ell + 1, q))
    )


def intertwiner_product_element(S: int, j: int, ell: int, a: int, c: int, q: float) -> float:
    """
    Entry (a, c) of I_{j+1} I_{j+2} ... I_l, for 0 <= j < l <= S:

    (-1)^{a-c} q^{cj - al} [l-j; a-c]
      sqrt([j]![S-l]![a]![S-c]![c+l]![S-a-j]! / ([l]![S-j]![c]![S-a]![a+j]![S-c-l]!))
    """
    if not 0 <= j < ell <= S:
        raise InvalidSpinError(f"product element needs 0 <= j < l <= S, got j={j}, l={ell}, S={S}")
    if not (0 <= a <= S - j and 0 <= c <= S - ell):
        raise InvalidSpinError(f"index (a={a}, c={c}) outside the block pair ({j}, {ell})")
    q = validate_q(q)
    binomial = q_binomial(ell - j, a - c, q) if a >= c else 0.0
    if binomial == 0.0:
        return 0.0
    f = lambda n: q_factorial(n, q)  # noqa: E731
    sign = -1.0 if (a - c) % 2 else 1.0
    return sign * q ** (c * j - a * ell) * binomial * math.sqrt(
        f(j) * f(S - ell) * f(a) * f(S - c) * f(c + ell) * f(S - a - j)
        / (f(ell) * f(S - j) * f(c) * f(S - a) * f(a + j) * f(S - c - ell))
    )


@lru_cache(maxsize=256)
def _closed_spectrum(S: int, q: float) -> SpectralData:
    eigenvalues = {ell: eigenvalue_closed(S, ell, q) for ell in range(S + 1)}
    eigenvectors: dict[tuple[int, int], np.ndarray] = {}
    squared_norms: dict[tuple[int, int], float] = {}
    for ell in range(S + 1):
        for j in range(-ell, ell + 1):
            vector = eigenvector(S, ell, j, q)
            vector.setflags(write=False)
            eigenvectors[(ell, j)] = vector
            squared_norms[(ell, j)] = squared_norm_closed(S, ell, j, q)
    return SpectralData(S=S, q=q, eigenvalues=eigenvalues, eigenvectors=eigenvectors, squared_norms=squared_norms)


def closed_spectrum(S: int, q: float) -> SpectralData:
    """All closed-form eigen-data of G for one (S, q)."""
    _check_level(S, 0)
    return _closed_spectrum(int(S), validate_q(q))


def jacobi_eigh(
    matrix: np.ndarray,
    threshold: float | None = None,
    max_sweeps: int | None = None,
) -> JacobiResult:
    """
    Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    A pair (p, q) is rotated while |a_pq| > threshold * sqrt(|a_pp a_qq|),
    so small diagonal entries of graded matrices keep their relative
    accuracy. Stops after a sweep without rotations.
    """
    budgets = get_config().budgets
    threshold = budgets.jacobi_threshold if threshold is None else threshold
    max_sweeps = budgets.jacobi_max_sweeps if max_sweeps is None else max_sweeps

    a = np.array(matrix, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"jacobi_eigh needs a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=1e-12, atol=0.0):
        raise ValueError("jacobi_eigh needs a symmetric matrix")
    v = np.eye(n)
    scale = np.linalg.norm(a)
    sweeps = 0
    converged = n < 2

    while not converged and sweeps < max_sweeps:
        sweeps += 1
        rotated = False
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if apr == 0.0:
                    continue
                diagonal = math.sqrt(abs(a[p, p] * a[r, r]))
                if abs(apr) <= threshold * (diagonal if diagonal > 0.0 else scale):
                    continue
                rotated = True
                theta = (a[r, r] - a[p, p]) / (2.0 * apr)
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)

                others = [k for k in range(n) if k != p and k != r]
                g = a[others, p].copy()
                h = a[others, r].copy()
                a[others, p] = a[p, others] = g - s * (h + g * tau)
                a[others, r] = a[r, others] = h + s * (g - h * tau)
                a[p, p] -= t * apr
                a[r, r] += t * apr
                a[p, r] = a[r, p] = 0.0

                g = v[:, p].copy()
                h = v[:, r].copy()
                v[:, p] = g - s * (h + g * tau)
                v[:, r] = h + s * (g - h * tau)
        converged = not rotated

    off_norm = float(np.linalg.norm(a - np.diag(np.diag(a))))
    order = np.argsort(np.diag(a))
    logger.debug(f"Jacobi n={n} sweeps={sweeps} off_norm={off_norm:.3e} converged={converged}")
    return JacobiResult(
        eigenvalues=np.diag(a)[order].copy(),
        eigenvectors=v[:, order],
        sweeps=sweeps,
        off_norm=off_norm,
        converged=converged,
    )


def verify_spectrum(
    S: int,
    q: float,
    tol: float | None = None,
    tolerances: ToleranceSettings | None = None,
    budgets: BudgetSettings | None = None,
) -> SpectrumReport:
    """
    Confirm the closed-form spectrum of G against a numeric eigensolve.

    Every block G^{(j)} is diagonalized by Jacobi, the eigenpairs are
    polished by Rayleigh quotient iteration in extended precision, and the
    eigenvalues are paired with lambda_l, l = |j|..S, in order of decreasing
    magnitude. A pairing passes when the relative error is within `tol`.
    The closed-form eigenvectors must satisfy
    ||G^{(j)} v - lambda_l v|| <= tolerances.residual |lambda_l| ||v||,
    evaluated in extended precision; the same residual measured in double
    precision against ||G^{(j)}|| is reported as max_eigen_residual.
    Mismatches are recorded in error_messages, never raised.
    """
    cfg = get_config()
    tolerances = tolerances or cfg.tolerances
    budgets = budgets or cfg.budgets
    tol = tolerances.spectrum if tol is None else tol
    q = validate_q(q)
    _check_level(S, 0)
    if S > budgets.max_spin:
        raise BudgetExceededError(f"spectral verification is limited to S <= {budgets.max_spin}, got S={S}")

    report = SpectrumReport(S=S, q=q)
    G = transfer_matrix(S, q)
    data = closed_spectrum(S, q)
    report.eigenvalues = [data.eigenvalues[ell] for ell in range(S + 1)]

    magnitudes = [abs(value) for value in report.eigenvalues]
    report.ordering_ok = all(magnitudes[k] > magnitudes[k + 1] for k in range(S))
    if not report.ordering_ok:
        report.error_messages.append(f"S={S} q={q}: |lambda_l| is not strictly decreasing")

    matches = {ell: 0 for ell in range(S + 1)}
    all_numeric: list[float] = []
    for j in range(-S, S + 1):
        g_block = block(G, j)
        g_norm = float(np.linalg.norm(g_block))
        result = jacobi_eigh(g_block, budgets.jacobi_threshold, budgets.jacobi_max_sweeps)
        report.jacobi_sweeps = max(report.jacobi_sweeps, result.sweeps)
        if not result.converged:
            report.error_messages.append(f"block j={j}: Jacobi did not converge in {result.sweeps} sweeps")
        refined = refine_eigenvalues(S, j, q, result.eigenvalues, result.eigenvectors)
        numeric = sorted(refined, key=abs, reverse=True)
        report.numeric[j] = numeric
        all_numeric.extend(numeric)

        for k in range(len(numeric) - 1):
            gap = abs(numeric[k] - numeric[k + 1])
            if gap <= 1e-6 * max(abs(numeric[k]), abs(numeric[k + 1])):
                report.simple_ok = False
                report.error_messages.append(f"block j={j}: eigenvalues {numeric[k]} and {numeric[k + 1]} coincide")

        for ell, mu in zip(range(abs(j), S + 1), numeric):
            expected = data.eigenvalues[ell]
            relative = abs(mu - expected) / abs(expected)
            report.max_eigenvalue_error = max(report.max_eigenvalue_error, relative)
            if relative <= tol:
                matches[ell] += 1
            else:
                report.error_messages.append(
                    f"block j={j}: numeric {mu!r} vs lambda_{ell}={expected!r} (relative error {relative:.3e})"
                )

        for ell in range(abs(j), S + 1):
            vector = data.eigenvectors[(ell, j)]
            lam = data.eigenvalues[ell]
            v_norm = float(np.linalg.norm(vector))
            defect = float(np.linalg.norm(g_block @ vector - lam * vector))
            report.max_eigen_residual = max(report.max_eigen_residual, defect / (g_norm * v_norm))
            relative = eigen_residual(S, ell, j, q)
            report.max_eigen_residual_relative = max(report.max_eigen_residual_relative, relative)
            if relative > tolerances.residual:
                report.error_messages.append(f"(l={ell}, j={j}): eigen residual {relative:.3e} relative to |lambda_l|")

            leading = abs(vector[0] - 1.0)
            report.max_leading_one_error = max(report.max_leading_one_error, leading)
            if leading > 1e-12:
                report.error_messages.append(f"(l={ell}, j={j}): leading component {vector[0]!r} != 1")

            dot = float(vector @ vector)
            norm_residual = abs(data.squared_norms[(ell, j)] - dot) / dot
            report.max_norm_residual = max(report.max_norm_residual, norm_residual)
            if norm_residual > tolerances.norm:
                report.error_messages.append(f"(l={ell}, j={j}): squared norm residual {norm_residual:.3e}")

        if j != 0:
            target = j - (1 if j > 0 else -1)
            i_j = intertwiner(S, j, q).matrix
            defect = float(np.linalg.norm(i_j @ g_block - block(G, target) @ i_j))
            residual = defect / g_norm
            report.max_intertwiner_residual = max(report.max_intertwiner_residual, residual)
            if residual > tolerances.intertwiner:
                report.error_messages.append(f"I_{j}: intertwining residual {residual:.3e}")

    report.degeneracies = [matches[ell] for ell in range(S + 1)]
    for ell, count in matches.items():
        if count != 2 * ell + 1:
            report.error_messages.append(f"lambda_{ell} matched in {count} blocks, expected {2 * ell + 1}")

    distinct = sorted(all_numeric)
    report.distinct_eigenvalues = 1 + sum(
        1 for left, right in zip(distinct, distinct[1:]) if right - left > 1e-6 * max(abs(left), abs(right))
    )

    if report.passed:
        logger.info(f"Spectrum verified S={S} q={q}: max eigenvalue error {report.max_eigenvalue_error:.2e}")
    else:
        logger.warning(f"Spectrum check failed S={S} q={q}: {len(report.error_messages)} problems")
    return report

"""
QVBS v1 - Extended-precision spectral arithmetic

Away from q = 1 the blocks G^{(j)} are strongly graded: for S = 4 the
smallest eigenvalue sits up to ten orders of magnitude below ||G^{(j)}||,
so a residual measured against |lambda_l| in double precision is mostly
rounding. The functions here rebuild the blocks and the closed-form
eigenvectors from their formulas in mpmath at PRECISE_DPS digits, and
polish numeric eigenpairs by Rayleigh quotient iteration.

q enters as the exact binary value of the given double.
"""

import logging
from functools import lru_cache

import mpmath
import numpy as np

from .mpsrep import block_indices
from .qcore import validate_q

logger = logging.getLogger(__name__)

PRECISE_DPS = 40
REFINEMENT_STEPS = 4


def _mp_q_integer(n: int, q) -> mpmath.mpf:
    return mpmath.fsum(q ** (n - 1 - 2 * k) for k in range(n))


def _mp_q_factorial(n: int, q) -> mpmath.mpf:
    result = mpmath.mpf(1)
    for k in range(2, n + 1):
        result *= _mp_q_integer(k, q)
    return result


def _mp_q_binomial(n: int, k: int, q) -> mpmath.mpf:
    if k < 0 or k > n:
        return mpmath.mpf(0)
    return _mp_q_factorial(n, q) / (_mp_q_factorial(k, q) * _mp_q_factorial(n - k, q))


def _norm(vector: mpmath.matrix) -> mpmath.mpf:
    return mpmath.sqrt(mpmath.fsum(vector[i] ** 2 for i in range(vector.rows)))


def _h(S: int, q) -> list[list[mpmath.mpf]]:
    f = lambda n: _mp_q_factorial(n, q)  # noqa: E731
    h = []
    for i in range(S + 1):
        sign = -1 if (S - i) % 2 else 1
        row = []
        for ip in range(S + 1):
            radicand = _mp_q_binomial(S, i, q) * _mp_q_binomial(S, ip, q) * f(S - i + ip) * f(S + i - ip)
            row.append(sign * q ** (mpmath.mpf((i + ip - S) * (S + 1)) / 2) * mpmath.sqrt(radicand))
        h.append(row)
    return h


def precise_block(S: int, j: int, q: float) -> mpmath.matrix:
    """G^{(j)} in the basis order of block_indices, entries h_ac h_bd."""
    pairs = [divmod(w, S + 1) for w in block_indices(S, j)]
    q = mpmath.mpf(validate_q(q))
    h = _h(S, q)
    out = mpmath.matrix(len(pairs), len(pairs))
    for row, (a, b) in enumerate(pairs):
        for col, (c, d) in enumerate(pairs):
            out[row, col] = h[a][c] * h[b][d]
    return out


def precise_eigenvalue(S: int, ell: int, q: float) -> mpmath.mpf:
    q = mpmath.mpf(validate_q(q))
    sign = -1 if ell % 2 else 1
    return sign * _mp_q_factorial(S, q) ** 2 * _mp_q_binomial(2 * S + 1, S - ell, q)


def precise_eigenvector(S: int, ell: int, j: int, q: float) -> mpmath.matrix:
    """|lambda_l>>_j: the edge vector carried down by I_l, ..., I_{|j|+1}."""
    q = mpmath.mpf(validate_q(q))
    f = lambda n: _mp_q_factorial(n, q)  # noqa: E731
    qi = lambda n: _mp_q_integer(n, q)  # noqa: E731
    vector = mpmath.matrix([
        q ** ((ell + 1) * i)
        * mpmath.sqrt(f(S - ell) * f(i + ell) * f(S - i) / (f(S) * f(ell) * f(S - i - ell) * f(i)))
        for i in range(S - ell + 1)
    ])
    for k in range(ell, abs(j), -1):
        n_rows, n_cols = S - k + 2, S - k + 1
        denominator = qi(k) * qi(S - k + 1)
        step = mpmath.matrix(n_rows, n_cols)
        for a in range(n_rows):
            if a < n_cols:
                step[a, a] = q ** (-a) * mpmath.sqrt(qi(a + k) * qi(S - a - k + 1) / denominator)
            if a >= 1:
                step[a, a - 1] = -q ** (1 - a - k) * mpmath.sqrt(qi(a) * qi(S - a + 1) / denominator)
        vector = step * vector
    return vector


@lru_cache(maxsize=1024)
def eigen_residual(S: int, ell: int, j: int, q: float) -> float:
    """||G^{(j)} v - lambda_l v|| / (|lambda_l| ||v||) for the closed-form v = |lambda_l>>_j."""
    with mpmath.workdps(PRECISE_DPS):
        g_block = precise_block(S, j, q)
        vector = precise_eigenvector(S, ell, j, q)
        lam = precise_eigenvalue(S, ell, q)
        defect = g_block * vector - lam * vector
        return float(_norm(defect) / (abs(lam) * _norm(vector)))


def refine_eigenvalues(S: int, j: int, q: float, values: np.ndarray, vectors: np.ndarray) -> list[float]:
    """
    Polish the numeric eigenpairs of G^{(j)} (columns of `vectors`) by
    Rayleigh quotient iteration on the extended-precision block.
    """
    with mpmath.workdps(PRECISE_DPS):
        g_block = precise_block(S, j, q)
        n = g_block.rows
        identity = mpmath.eye(n)
        refined = []
        for k in range(n):
            vector = mpmath.matrix([mpmath.mpf(float(x)) for x in vectors[:, k]])
            mu = mpmath.mpf(float(values[k]))
            for _ in range(REFINEMENT_STEPS):
                try:
                    solved = mpmath.lu_solve(g_block - mu * identity, vector)
                except ZeroDivisionError:
                    # shift is an eigenvalue to working precision
                    break
                vector = solved / _norm(solved)
                mu = (vector.T * g_block * vector)[0, 0]
            refined.append(float(mu))
    logger.debug(f"Refined {n} eigenvalues of block j={j} S={S} q={q}")
    return refined

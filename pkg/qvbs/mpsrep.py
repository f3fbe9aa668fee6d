"""
QVBS v1 - Matrix-product ingredients

The coefficients h_{ii'} of the vector-valued site matrix g, the transfer
matrix G on W = span{|a,b>>, 0 <= a,b <= S}, the one-site operator
insertions G_A, and the block decomposition of G by the diagonal shift
j = b - a.

Basis convention of W: row-major in (a, b), a outer. Block W_j has the basis
|i, i+j>> (j >= 0) or |i-j, i>> (j < 0), ordered by increasing i.
"""

import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from .errors import InvalidParameterError, InvalidSpinError
from .qcore import q_binomial, q_factorial, validate_q

logger = logging.getLogger(__name__)


class OperatorTag(str, Enum):
    """One-site operators that can be inserted into the transfer matrix"""
    SZ = "Sz"
    SPLUS = "Splus"
    SMINUS = "Sminus"
    PROJECTOR = "projector"
    SZ2 = "Sz2"


class PairTag(str, Enum):
    """Operator pairs of the two-point functions"""
    ZZ = "zz"
    PM = "pm"

    def operators(self) -> tuple["SiteOperator", "SiteOperator"]:
        if self is PairTag.ZZ:
            return SiteOperator(OperatorTag.SZ), SiteOperator(OperatorTag.SZ)
        return SiteOperator(OperatorTag.SPLUS), SiteOperator(OperatorTag.SMINUS)


_PROJECTOR_PATTERN = re.compile(r"^projector\((-?\d+)\)$")


@dataclass(frozen=True)
class SiteOperator:
    """A one-site operator; `m` is the magnetic label of projector(m)."""
    tag: OperatorTag
    m: int | None = None

    def __post_init__(self):
        if (self.tag is OperatorTag.PROJECTOR) != (self.m is not None):
            raise InvalidParameterError("only projector(m) carries a magnetic label")

    @classmethod
    def parse(cls, text: str) -> "SiteOperator":
        """Parse 'Sz', 'Splus', 'Sminus', 'Sz2' or 'projector(m)'."""
        match = _PROJECTOR_PATTERN.match(text.strip())
        if match:
            return cls(OperatorTag.PROJECTOR, int(match.group(1)))
        try:
            return cls(OperatorTag(text.strip()))
        except ValueError:
            raise InvalidParameterError(f"unknown one-site operator {text!r}") from None

    @property
    def label(self) -> str:
        if self.tag is OperatorTag.PROJECTOR:
            return f"projector({self.m})"
        return self.tag.value

    @property
    def shift(self) -> int:
        """Change of S^z caused by the operator (0, +1 or -1)."""
        return {OperatorTag.SPLUS: 1, OperatorTag.SMINUS: -1}.get(self.tag, 0)

    def matrix(self, S: int) -> np.ndarray:
        """Dense (2S+1)x(2S+1) matrix in the basis |S;m>, index m+S."""
        _check_spin(S)
        m_values = np.arange(-S, S + 1)
        size = 2 * S + 1
        if self.tag is OperatorTag.SZ:
            return np.diag(m_values.astype(float))
        if self.tag is OperatorTag.SZ2:
            return np.diag((m_values ** 2).astype(float))
        if self.tag is OperatorTag.PROJECTOR:
            if abs(self.m) > S:
                raise InvalidSpinError(f"projector({self.m}) needs |m| <= S={S}")
            out = np.zeros((size, size))
            out[self.m + S, self.m + S] = 1.0
            return out
        out = np.zeros((size, size))
        for m in range(-S, S):
            # <m+1|S+|m> = sqrt((S-m)(S+m+1))
            out[m + 1 + S, m + S] = math.sqrt((S - m) * (S + m + 1))
        return out if self.tag is OperatorTag.SPLUS else out.T.copy()

    def element(self, S: int, m_out: int, m_in: int) -> float:
        """<S; m_out| A |S; m_in>, zero outside the spin range."""
        if abs(m_out) > S or abs(m_in) > S:
            return 0.0
        if self.tag is OperatorTag.SZ:
            return float(m_in) if m_out == m_in else 0.0
        if self.tag is OperatorTag.SZ2:
            return float(m_in * m_in) if m_out == m_in else 0.0
        if self.tag is OperatorTag.PROJECTOR:
            return 1.0 if m_out == m_in == self.m else 0.0
        if self.tag is OperatorTag.SPLUS:
            return math.sqrt((S - m_in) * (S + m_in + 1)) if m_out == m_in + 1 else 0.0
        return math.sqrt((S + m_in) * (S - m_in + 1)) if m_out == m_in - 1 else 0.0


@dataclass(frozen=True)
class HCoefficients:
    """h_{ii'}: the coefficient of |S; i'-i> in the site matrix entry g(i, i')"""
    S: int
    q: float
    entries: np.ndarray


@dataclass(frozen=True)
class TransferMatrix:
    """G = sum over the local basis of g^dagger (x) g, dimension (S+1)^2"""
    S: int
    q: float
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return (self.S + 1) ** 2


@dataclass(frozen=True)
class OperatorInsertion:
    """G_A: the transfer matrix with the one-site operator A inserted"""
    S: int
    q: float
    operator: SiteOperator
    matrix: np.ndarray

    @property
    def tag(self) -> OperatorTag:
        return self.operator.tag

    @property
    def block_diagonal(self) -> bool:
        return self.operator.shift == 0


def _check_spin(S: int) -> None:
    if not isinstance(S, (int, np.integer)) or S < 1:
        raise InvalidSpinError(f"spin S must be a positive integer, got {S!r}")


def w_index(S: int, a: int, b: int) -> int:
    """Flat index of |a,b>> in W."""
    return a * (S + 1) + b


def h_coefficients(S: int, q: float) -> HCoefficients:
    """
    h_{ii'} = (-1)^{S-i} q^{(i+i'-S)(S+1)/2}
              sqrt([S;i][S;i'] [S-i+i']! [S+i-i']!)
    """
    _check_spin(S)
    q = validate_q(q)
    entries = np.empty((S + 1, S + 1))
    for i in range(S + 1):
        sign = -1.0 if (S - i) % 2 else 1.0
        for ip in range(S + 1):
            radicand = (
                q_binomial(S, i, q) * q_binomial(S, ip, q)
                * q_factorial(S - i + ip, q) * q_factorial(S + i - ip, q)
            )
            entries[i, ip] = sign * q ** ((i + ip - S) * (S + 1) / 2) * math.sqrt(radicand)
    entries.setflags(write=False)
    return HCoefficients(S=S, q=q, entries=entries)


def _insert(h: np.ndarray, S: int, operator: SiteOperator) -> np.ndarray:
    # G_A((a,b),(c,d)) = h_ac h_bd <S; c-a| A |S; d-b>
    dim = (S + 1) ** 2
    out = np.zeros((dim, dim))
    for a in range(S + 1):
        for b in range(S + 1):
            row = w_index(S, a, b)
            for c in range(S + 1):
                for d in range(S + 1):
                    element = operator.element(S, c - a, d - b)
                    if element:
                        out[row, w_index(S, c, d)] = element * h[a, c] * h[b, d]
    return out


def transfer_matrix(S: int, q: float) -> TransferMatrix:
    """G((a,b),(c,d)) = delta_{c-a,d-b} h_ac h_bd."""
    h = h_coefficients(S, q).entries
    dim = (S + 1) ** 2
    matrix = np.zeros((dim, dim))
    for a in range(S + 1):
        for b in range(S + 1):
            for c in range(S + 1):
                d = b + c - a
                if 0 <= d <= S:
                    matrix[w_index(S, a, b), w_index(S, c, d)] = h[a, c] * h[b, d]
    matrix.setflags(write=False)
    logger.debug(f"Built transfer matrix S={S} q={q} dim={dim}")
    return TransferMatrix(S=S, q=float(q), matrix=matrix)


def operator_insertion(
    S: int,
    q: float,
    tag: OperatorTag | str | SiteOperator,
    m: int | None = None,
) -> OperatorInsertion:
    """
    Build G_A for A in {Sz, Splus, Sminus, projector(m), Sz2}.

    Sz:     delta_{c-a,d-b} (d-b) T_abcd
    Splus:  delta_{c-a,d-b+1} sqrt((S-d+b)(S+d-b+1)) T_abcd
    Sminus: delta_{c-a,d-b-1} sqrt((S+d-b)(S-d+b+1)) T_abcd
    """
    if isinstance(tag, SiteOperator):
        operator = tag
    elif isinstance(tag, str) and tag.startswith("projector("):
        operator = SiteOperator.parse(tag)
    else:
        operator = SiteOperator(OperatorTag(tag), m)
    _check_spin(S)
    if operator.tag is OperatorTag.PROJECTOR and abs(operator.m) > S:
        raise InvalidSpinError(f"projector({operator.m}) needs |m| <= S={S}")
    h = h_coefficients(S, q).entries
    matrix = _insert(h, S, operator)
    matrix.setflags(write=False)
    return OperatorInsertion(S=S, q=validate_q(q), operator=operator, matrix=matrix)


def block_indices(S: int, j: int) -> list[int]:
    """Flat W indices spanning W_j, ordered by increasing i."""
    _check_spin(S)
    if abs(j) > S:
        raise InvalidSpinError(f"block index |j|={abs(j)} exceeds S={S}")
    if j >= 0:
        return [w_index(S, i, i + j) for i in range(S - j + 1)]
    return [w_index(S, i - j, i) for i in range(S + j + 1)]


def block(M: TransferMatrix | OperatorInsertion | np.ndarray, j: int, S: int | None = None) -> np.ndarray:
    """Restriction G^{(j)} of a block-diagonal W operator to W_j."""
    if isinstance(M, OperatorInsertion) and not M.block_diagonal:
        raise InvalidParameterError(f"{M.operator.label} insertion is not block diagonal")
    if isinstance(M, (TransferMatrix, OperatorInsertion)):
        S, matrix = M.S, M.matrix
    else:
        if S is None:
            raise InvalidParameterError("S is required for a bare matrix")
        matrix = np.asarray(M)
    idx = block_indices(S, j)
    return matrix[np.ix_(idx, idx)].copy()


def assemble_from_blocks(S: int, blocks: Mapping[int, np.ndarray]) -> np.ndarray:
    """Rebuild the full W matrix from its blocks j = -S..S (direct sum)."""
    _check_spin(S)
    dim = (S + 1) ** 2
    out = np.zeros((dim, dim))
    for j in range(-S, S + 1):
        idx = block_indices(S, j)
        sub = np.asarray(blocks[j])
        if sub.shape != (len(idx), len(idx)):
            raise InvalidParameterError(f"block {j} has shape {sub.shape}, expected {(len(idx), len(idx))}")
        out[np.ix_(idx, idx)] = sub
    return out


def block_element_closed(S: int, j: int, a: int, c: int, q: float) -> float:
    """
    <<a,a+j|G^{(j)}|c,c+j>> = (-1)^j q^{(a+c+j-S)(S+1)} [S-a+c]! [S+a-c]!
                               sqrt([S;a][S;a+j][S;c][S;c+j]),  j >= 0
    """
    q = validate_q(q)
    if not 0 <= j <= S:
        raise InvalidSpinError(f"closed block element needs 0 <= j <= S, got j={j}")
    sign = -1.0 if j % 2 else 1.0
    return (
        sign * q ** ((a + c + j - S) * (S + 1))
        * q_factorial(S - a + c, q) * q_factorial(S + a - c, q)
        * math.sqrt(
            q_binomial(S, a, q) * q_binomial(S, a + j, q)
            * q_binomial(S, c, q) * q_binomial(S, c + j, q)
        )
    )

"""
QVBS v1 - Correlation functions

Finite-chain norms, one- and two-point functions as traces of transfer
matrix products, their thermodynamic limits through the closed-form
spectrum, the large-distance amplitudes and the correlation length.

All powers of G are taken on G / lambda_0; the normalization cancels in
every ratio. Two-point functions use sites 1 and r, so the reported
distance is r - 1.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError, InvalidSpinError
from .mpsrep import (
    OperatorTag,
    PairTag,
    SiteOperator,
    block_indices,
    operator_insertion,
    transfer_matrix,
)
from .qcore import q_binomial, q_factorial, q_integer, validate_q
from .spectral import closed_spectrum, eigenvalue_closed

logger = logging.getLogger(__name__)

ONE_POINT_TAGS = (OperatorTag.SZ, OperatorTag.PROJECTOR, OperatorTag.SZ2)


@dataclass(frozen=True)
class CorrelatorRequest:
    """One correlator evaluation; L=None means the thermodynamic limit"""
    S: int
    q: float
    r: int | None = None
    L: int | None = None
    pair: PairTag | None = None
    single: SiteOperator | None = None

    def __post_init__(self):
        if (self.pair is None) == (self.single is None):
            raise InvalidParameterError("give exactly one of pair or single")
        if self.pair is not None:
            if self.r is None or self.r < 2:
                raise InvalidParameterError(f"two-point functions need r >= 2, got {self.r}")
            if self.L is not None and self.r > self.L:
                raise InvalidParameterError(f"finite chains need r <= L, got r={self.r}, L={self.L}")
        if self.single is not None and self.single.tag not in ONE_POINT_TAGS:
            raise InvalidParameterError(f"{self.single.label} has no one-point function")

    @property
    def thermodynamic(self) -> bool:
        return self.L is None

    def evaluate(self) -> float:
        if self.single is not None:
            if self.thermodynamic:
                return one_point_thermo(self.S, self.q, self.single)
            return one_point_finite(self.S, self.q, self.L, self.single)
        if self.thermodynamic:
            return two_point_thermo(self.S, self.q, self.r, self.pair)
        return two_point_finite(self.S, self.q, self.L, self.r, self.pair)


@dataclass(frozen=True)
class AsymptoticResult:
    """Large-distance form amplitude * ratio^r of a two-point function"""
    amplitude: float
    ratio: float
    correlation_length: float
    validity_radius: int

    def value(self, r: int) -> float:
        return self.amplitude * self.ratio ** r


@dataclass(frozen=True)
class NormSquared:
    """Tr G^L = mantissa * exp(log_scale), with log_scale = L ln lambda_0"""
    mantissa: float
    log_scale: float

    @property
    def log_value(self) -> float:
        return self.log_scale + math.log(self.mantissa)

    @property
    def value(self) -> float:
        try:
            return self.mantissa * math.exp(self.log_scale)
        except OverflowError:
            return math.inf


@dataclass
class GapProfile:
    """|finite(L) - thermo| over L with measured and predicted decay"""
    S: int
    q: float
    r: int
    pair: PairTag
    lengths: list[int] = field(default_factory=list)
    gaps: list[float] = field(default_factory=list)
    measured_ratios: list[float] = field(default_factory=list)
    predicted_ratios: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class CorrelationFit:
    """Least-squares line through ln|<A_1 B_r>| over a window of r"""
    slope: float
    intercept: float
    correlation_length: float
    expected_slope: float


def _as_pair(pair: PairTag | str) -> PairTag:
    try:
        return PairTag(pair)
    except ValueError:
        raise InvalidParameterError(f"unknown pair {pair!r}, expected zz or pm") from None


def _as_single(operator: SiteOperator | str) -> SiteOperator:
    single = operator if isinstance(operator, SiteOperator) else SiteOperator.parse(operator)
    if single.tag not in ONE_POINT_TAGS:
        raise InvalidParameterError(f"{single.label} has no one-point function")
    return single


def _check_length(L: int) -> None:
    if L < 2:
        raise InvalidParameterError(f"chain length L must be >= 2, got {L}")


@lru_cache(maxsize=512)
def _normalized(S: int, q: float, label: str | None) -> np.ndarray:
    lam0 = eigenvalue_closed(S, 0, q)
    if label is None:
        matrix = transfer_matrix(S, q).matrix
    else:
        matrix = operator_insertion(S, q, SiteOperator.parse(label)).matrix
    out = matrix / lam0
    out.setflags(write=False)
    return out


def _g_hat(S: int, q: float, operator: SiteOperator | None = None) -> np.ndarray:
    return _normalized(int(S), validate_q(q), None if operator is None else operator.label)


def _power(matrix: np.ndarray, n: int) -> np.ndarray:
    return np.linalg.matrix_power(matrix, n)


def norm_sq_finite(S: int, q: float, L: int) -> NormSquared:
    """<Psi|Psi> = Tr G^L on a periodic chain of L sites."""
    _check_length(L)
    g_hat = _g_hat(S, q)
    mantissa = float(np.trace(_power(g_hat, L)))
    return NormSquared(mantissa=mantissa, log_scale=L * math.log(eigenvalue_closed(S, 0, q)))


def one_point_finite(S: int, q: float, L: int, A: SiteOperator | str) -> float:
    """Tr(G_A G^{L-1}) / Tr G^L."""
    _check_length(L)
    operator = _as_single(A)
    g_hat = _g_hat(S, q)
    numerator = np.trace(_g_hat(S, q, operator) @ _power(g_hat, L - 1))
    return float(numerator / np.trace(_power(g_hat, L)))


def two_point_finite(S: int, q: float, L: int, r: int, pair: PairTag | str) -> float:
    """Tr(G_A G^{r-2} G_B G^{L-r}) / Tr G^L for 2 <= r <= L."""
    _check_length(L)
    if not 2 <= r <= L:
        raise InvalidParameterError(f"two-point functions need 2 <= r <= L, got r={r}, L={L}")
    first, second = _as_pair(pair).operators()
    g_hat = _g_hat(S, q)
    product = (
        _g_hat(S, q, first) @ _power(g_hat, r - 2) @ _g_hat(S, q, second) @ _power(g_hat, L - r)
    )
    return float(np.trace(product) / np.trace(_power(g_hat, L)))


def _embedded(S: int, q: float, ell: int, j: int) -> np.ndarray:
    vector = np.zeros((S + 1) ** 2)
    vector[block_indices(S, j)] = closed_spectrum(S, q).eigenvectors[(ell, j)]
    return vector


def one_point_thermo(S: int, q: float, A: SiteOperator | str) -> float:
    """lambda_0^{-1} <<lambda_0|G_A|lambda_0>>_0 / <<lambda_0|lambda_0>>_0."""
    operator = _as_single(A)
    q = validate_q(q)
    v0 = _embedded(S, q, 0, 0)
    return float(v0 @ _g_hat(S, q, operator) @ v0 / closed_spectrum(S, q).squared_norms[(0, 0)])


def prob_sz(S: int, q: float, m: int) -> float:
    """
    Probability of S^z = m at one site of the infinite chain:

    ([S+m]![S-m]!/[2S+1]!) sum_i q^{(S+2)(2i-m-S)} [S; i-m] [S; i]
    """
    if not isinstance(S, (int, np.integer)) or S < 1:
        raise InvalidSpinError(f"spin S must be a positive integer, got {S!r}")
    if abs(m) > S:
        raise InvalidSpinError(f"|m| must not exceed S={S}, got m={m}")
    q = validate_q(q)
    total = math.fsum(
        q ** ((S + 2) * (2 * i - m - S)) * q_binomial(S, i - m, q) * q_binomial(S, i, q)
        for i in range(S + 1)
    )
    return q_factorial(S + m, q) * q_factorial(S - m, q) / q_factorial(2 * S + 1, q) * total


def two_point_thermo(S: int, q: float, r: int, pair: PairTag | str) -> float:
    """
    Spectral sum over (l, j) of
    lambda_l^{-2} (lambda_l/lambda_0)^r <<lambda_0|G_A|lambda_l>>_j <<lambda_l|G_B|lambda_0>>_0
    divided by the squared norms of both eigenvectors.
    """
    if r < 2:
        raise InvalidParameterError(f"two-point functions need r >= 2, got {r}")
    q = validate_q(q)
    first, second = _as_pair(pair).operators()
    data = closed_spectrum(S, q)
    lam0 = data.eigenvalues[0]
    left = _embedded(S, q, 0, 0) @ _g_hat(S, q, first)
    right = _g_hat(S, q, second) @ _embedded(S, q, 0, 0)
    n0 = data.squared_norms[(0, 0)]
    terms = []
    for ell in range(S + 1):
        weight = (data.eigenvalues[ell] / lam0) ** (r - 2)
        for j in range(-ell, ell + 1):
            vector = _embedded(S, q, ell, j)
            product = float(left @ vector) * float(vector @ right)
            if product:
                terms.append(weight * product / (n0 * data.squared_norms[(ell, j)]))
    return math.fsum(terms)


def matrix_element_zz(S: int, q: float) -> float:
    """
    0<<lambda_1|G_Sz|lambda_0>>_0 in the form that is regular at q = 1:

    [2] q^{-S^2-2S-1} / (2[S]) sum_{i,i'} |i-i'| [|i-i'|] q^{(S+3)(i+i')}
        [S+i-i']! [S-i+i']! [S;i] [S;i']
    """
    q = validate_q(q)
    f = lambda n: q_factorial(n, q)  # noqa: E731
    total = math.fsum(
        abs(i - ip) * q_integer(abs(i - ip), q) * q ** ((S + 3) * (i + ip))
        * f(S + i - ip) * f(S - i + ip) * q_binomial(S, i, q) * q_binomial(S, ip, q)
        for i in range(S + 1)
        for ip in range(S + 1)
    )
    return q_integer(2, q) * q ** (-S * S - 2 * S - 1) / (2 * q_integer(S, q)) * total


def matrix_element_zz_printed(S: int, q: float) -> float:
    """
    The same element as the literal double sum with the 1/(q^S - q^{-S})
    prefactor; undefined at q = 1.
    """
    q = validate_q(q)
    if q == 1.0:
        raise InvalidParameterError("the printed longitudinal sum is 0/0 at q = 1; use matrix_element_zz")
    f = lambda n: q_factorial(n, q)  # noqa: E731
    total = math.fsum(
        (i - ip) * q ** ((S + 2) * (i + ip))
        * (q ** (S + 1) + q ** (-S - 1) - (q + 1 / q) * q ** (2 * ip - S))
        * f(S + i - ip) * f(S + ip - i) * q_binomial(S, i, q) * q_binomial(S, ip, q)
        for i in range(S + 1)
        for ip in range(S + 1)
    )
    return q ** (-S * S - S - 1) / (q ** S - q ** (-S)) * total


def matrix_element_pm(S: int, q: float) -> float:
    """-1<<lambda_1|G_S-|lambda_0>>_0 as the closed double sum over i = 0..S, i' = 0..S-1."""
    q = validate_q(q)
    f = lambda n: q_factorial(n, q)  # noqa: E731
    qi = lambda n: q_integer(n, q)  # noqa: E731
    terms = []
    for i in range(S + 1):
        for ip in range(S):
            radicand = (S + i - ip) * qi(S + i - ip) * (S - i + ip + 1) * qi(S - i + ip + 1)
            terms.append(
                q ** ((S + 2) * i + (S + 3) * ip)
                * math.sqrt(q_binomial(S, ip + 1, q) * q_binomial(S, ip, q))
                * math.sqrt(radicand)
                * math.sqrt(qi(ip + 1) * qi(S - ip) / qi(S))
                * f(S + ip - i) * f(S + i - ip - 1) * q_binomial(S, i, q)
            )
    return -q ** (-S * S - S / 2 + 0.5) * math.fsum(terms)


def matrix_element_contracted(S: int, q: float, pair: PairTag | str) -> float:
    """
    The same matrix elements by explicit contraction: <<lambda_1|_0 G_Sz |lambda_0>>_0
    for zz, <<lambda_1|_{-1} G_S- |lambda_0>>_0 for pm.
    """
    pair = _as_pair(pair)
    q = validate_q(q)
    lam0 = eigenvalue_closed(S, 0, q)
    j = 0 if pair is PairTag.ZZ else -1
    operator = SiteOperator(OperatorTag.SZ if pair is PairTag.ZZ else OperatorTag.SMINUS)
    return float(_embedded(S, q, 1, j) @ _g_hat(S, q, operator) @ _embedded(S, q, 0, 0)) * lam0


# (l, j) of the bra for each insertion; the ket is always |lambda_0>>_0
VANISHING_ELEMENTS = (
    ((0, 0), OperatorTag.SZ),
    ((1, 1), OperatorTag.SZ),
    ((1, -1), OperatorTag.SZ),
    ((0, 0), OperatorTag.SMINUS),
    ((1, 1), OperatorTag.SMINUS),
    ((1, 0), OperatorTag.SMINUS),
)


def vanishing_matrix_elements(S: int, q: float) -> dict[str, float]:
    """
    <<lambda_l|_j G_A |lambda_0>>_0 for the elements that drop out of the
    spectral sums, on G_A / lambda_0 and unit eigenvectors.
    """
    q = validate_q(q)
    data = closed_spectrum(S, q)
    ket = _embedded(S, q, 0, 0)
    out = {}
    for (ell, j), tag in VANISHING_ELEMENTS:
        value = float(_embedded(S, q, ell, j) @ _g_hat(S, q, SiteOperator(tag)) @ ket)
        scale = math.sqrt(data.squared_norms[(ell, j)] * data.squared_norms[(0, 0)])
        out[f"<<l{ell}|_{j} G_{tag.value} |l0>>_0"] = value / scale
    return out


def ratio(S: int, q: float) -> float:
    """lambda_1 / lambda_0 = -[S]/[S+2]."""
    q = validate_q(q)
    return -q_integer(S, q) / q_integer(S + 2, q)


def correlation_length(S: int, q: float) -> float:
    """zeta = 1 / ln([S+2]/[S])."""
    if not isinstance(S, (int, np.integer)) or S < 1:
        raise InvalidSpinError(f"spin S must be a positive integer, got {S!r}")
    q = validate_q(q)
    return 1.0 / math.log(q_integer(S + 2, q) / q_integer(S, q))


def amplitude_zz(S: int, q: float) -> float:
    """r-independent prefactor of the longitudinal asymptotic form."""
    q = validate_q(q)
    prefactor = q_integer(3, q) * q_integer(S + 2, q) / (
        q ** (2 * S - 2) * q_integer(S, q) * q_factorial(2 * S + 1, q) ** 2
    )
    return -prefactor * matrix_element_zz(S, q) ** 2


def amplitude_pm(S: int, q: float) -> float:
    """r-independent prefactor of the transverse asymptotic form."""
    q = validate_q(q)
    prefactor = q_integer(2, q) * q_integer(3, q) * q_integer(S + 2, q) / (
        q ** (3 * S - 2) * (q_factorial(2 * S + 1, q) * q_integer(S, q)) ** 2
    )
    return -prefactor * matrix_element_pm(S, q) ** 2


def zz_asymptotic(S: int, q: float, r: int) -> float:
    """Large-r form of <S^z_1 S^z_r>."""
    if r < 2:
        raise InvalidParameterError(f"two-point functions need r >= 2, got {r}")
    return amplitude_zz(S, q) * ratio(S, q) ** r


def pm_asymptotic(S: int, q: float, r: int) -> float:
    """Large-r form of <S^+_1 S^-_r>."""
    if r < 2:
        raise InvalidParameterError(f"two-point functions need r >= 2, got {r}")
    return amplitude_pm(S, q) * ratio(S, q) ** r


def asymptotic_validity_radius(S: int, q: float, threshold: float = 1e-6) -> int:
    """
    Smallest r >= 2 with |lambda_2/lambda_1|^r below `threshold`. For S = 1
    only one level contributes and the asymptotic form is exact from r = 2.
    """
    q = validate_q(q)
    if S == 1:
        return 2
    subleading = q_integer(S - 1, q) / q_integer(S + 3, q)
    return max(2, math.ceil(math.log(threshold) / math.log(subleading)))


def asymptotic_result(S: int, q: float, pair: PairTag | str) -> AsymptoticResult:
    pair = _as_pair(pair)
    amplitude = amplitude_zz(S, q) if pair is PairTag.ZZ else amplitude_pm(S, q)
    return AsymptoticResult(
        amplitude=amplitude,
        ratio=ratio(S, q),
        correlation_length=correlation_length(S, q),
        validity_radius=asymptotic_validity_radius(S, q),
    )


def correlator_gap_profile(
    S: int,
    q: float,
    r: int,
    lengths: list[int],
    pair: PairTag | str = PairTag.ZZ,
    step: int = 4,
) -> GapProfile:
    """
    finite(L) - thermo for each L, with the measured ratio gap(L+step)/gap(L)
    next to the predicted (lambda_1/lambda_0)^step.
    """
    pair = _as_pair(pair)
    thermo = two_point_thermo(S, q, r, pair)
    profile = GapProfile(S=S, q=validate_q(q), r=r, pair=pair, lengths=list(lengths))
    profile.gaps = [two_point_finite(S, q, L, r, pair) - thermo for L in lengths]
    predicted = ratio(S, q) ** step
    for L, gap in zip(lengths, profile.gaps):
        if L + step in lengths:
            later = profile.gaps[lengths.index(L + step)]
            profile.measured_ratios.append(later / gap if gap else math.nan)
            profile.predicted_ratios.append(predicted)
    return profile


def fit_correlation_length(
    S: int,
    q: float,
    r_min: int,
    r_max: int,
    pair: PairTag | str = PairTag.ZZ,
) -> CorrelationFit:
    """Fit ln|<A_1 B_r>| = slope * r + intercept over r_min..r_max in the infinite chain."""
    if r_min < 2 or r_max <= r_min:
        raise InvalidParameterError(f"need 2 <= r_min < r_max, got {r_min}..{r_max}")
    rs = np.arange(r_min, r_max + 1)
    values = np.array([two_point_thermo(S, q, int(r), pair) for r in rs])
    slope, intercept = np.polyfit(rs, np.log(np.abs(values)), 1)
    return CorrelationFit(
        slope=float(slope),
        intercept=float(intercept),
        correlation_length=float(-1.0 / slope),
        expected_slope=-1.0 / correlation_length(S, q),
    )

"""
QVBS v1 - Parameter grids and grid-point workers

Parses the grid flags of the CLI, evaluates one grid point per task in a
process pool and returns the rows in grid order. Every task is a frozen
dataclass handled by a module-level function so it pickles cleanly.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

from .config import ToleranceSettings, get_config
from .correlators import (
    asymptotic_validity_radius,
    correlation_length,
    correlator_gap_profile,
    fit_correlation_length,
    matrix_element_contracted,
    matrix_element_pm,
    matrix_element_zz,
    matrix_element_zz_printed,
    norm_sq_finite,
    one_point_finite,
    one_point_thermo,
    pm_asymptotic,
    prob_sz,
    ratio,
    two_point_finite,
    two_point_thermo,
    vanishing_matrix_elements,
    zz_asymptotic,
)
from .errors import InvalidParameterError
from .models import CheckRow, CorrelatorRow, SpectrumRow
from .mpsrep import OperatorTag, PairTag, SiteOperator
from .oracle import (
    build_vbs_poly,
    check_annihilation,
    check_projector_algebra,
    ground_state_gap,
    mps_state,
    oracle_correlator,
    poly_to_spin_state,
    proportionality,
    verify_proposition1,
)
from .qcore import q_integer, q_vandermonde_residual
from .spectral import verify_spectrum

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_Q_GRID = "0.25:4:13:log"
PALINDROME_TOL = 1e-12
VANDERMONDE_SAMPLES = 16
ASYMPTOTIC_THRESHOLD = 1e-12
ASYMPTOTIC_WINDOW = 8
ASYMPTOTIC_TOL = 1e-6
FIT_SLOPE_TOL = 1e-4
GAP_DECAY_LENGTHS = (12, 16)
GAP_DECAY_FLOOR = 1e-12
GAP_DECAY_TOL = 0.1


# =============================================================================
# Grid parsing
# =============================================================================

def parse_q_values(text: str) -> list[float]:
    """'0.5,1,2' -> [0.5, 1.0, 2.0]"""
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidParameterError(f"cannot read q values from {text!r}") from None
    if not values:
        raise InvalidParameterError("empty q list")
    return values


def parse_q_grid(text: str) -> list[float]:
    """'start:stop:count[:log|lin]', log-spaced unless 'lin' is given."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise InvalidParameterError(f"q grid must be start:stop:count[:log|lin], got {text!r}")
    spacing = parts[3].strip().lower() if len(parts) == 4 else "log"
    if spacing not in ("log", "lin"):
        raise InvalidParameterError(f"q grid spacing must be log or lin, got {spacing!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InvalidParameterError(f"cannot read q grid {text!r}") from None
    if count < 1:
        raise InvalidParameterError(f"q grid needs at least one point, got {count}")
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise InvalidParameterError("log-spaced q grids need positive endpoints")
        return np.geomspace(start, stop, count).tolist()
    return np.linspace(start, stop, count).tolist()


def parse_int_range(text: str) -> list[int]:
    """'2..10' -> [2, ..., 10]; '4,6,8' -> [4, 6, 8]; parts may be mixed."""
    values: list[int] = []
    try:
        for part in (piece.strip() for piece in text.split(",")):
            if not part:
                continue
            if ".." in part:
                low, high = (int(bound) for bound in part.split("..", 1))
                if high < low:
                    raise InvalidParameterError(f"empty range {part!r}")
                values.extend(range(low, high + 1))
            else:
                values.append(int(part))
    except InvalidParameterError:
        raise
    except ValueError:
        raise InvalidParameterError(f"cannot read integer range {text!r}") from None
    if not values:
        raise InvalidParameterError("empty integer range")
    return values


def run_grid(func: Callable[[T], R], points: Sequence[T], jobs: int = 1) -> list[R]:
    """Evaluate func over points; results come back in the order of `points`."""
    if jobs <= 1 or len(points) <= 1:
        return [func(point) for point in points]
    with ProcessPoolExecutor(max_workers=min(jobs, len(points))) as pool:
        return list(pool.map(func, points))


def tolerance_settings(overrides: dict[str, float]) -> ToleranceSettings:
    """Environment tolerances with CLI overrides applied by field name."""
    fields = ToleranceSettings.model_fields
    return ToleranceSettings(**{fields[name].alias: value for name, value in overrides.items()})


# =============================================================================
# spectrum
# =============================================================================

@dataclass(frozen=True)
class SpectrumPoint:
    S: int
    q: float
    tolerances: tuple[tuple[str, float], ...] = ()


def spectrum_point(point: SpectrumPoint) -> SpectrumRow:
    report = verify_spectrum(point.S, point.q, tolerances=tolerance_settings(dict(point.tolerances)))
    if report.passed:
        logger.info(f"spectrum S={point.S} q={point.q:.6g}: passed")
    else:
        logger.warning(f"spectrum S={point.S} q={point.q:.6g}: {len(report.error_messages)} failures")
    return SpectrumRow(
        S=point.S,
        q=point.q,
        eigenvalues=report.eigenvalues,
        degeneracies=report.degeneracies,
        max_eigenvalue_error=report.max_eigenvalue_error,
        max_eigen_residual=report.max_eigen_residual,
        max_eigen_residual_relative=report.max_eigen_residual_relative,
        max_intertwiner_residual=report.max_intertwiner_residual,
        max_norm_residual=report.max_norm_residual,
        jacobi_sweeps=report.jacobi_sweeps,
        correlation_length=correlation_length(point.S, point.q),
        passed=report.passed,
        detail="; ".join(report.error_messages),
    )


# =============================================================================
# correlate
# =============================================================================

@dataclass(frozen=True)
class CorrelatePoint:
    S: int
    q: float
    pair: str
    mode: str
    lengths: tuple[int, ...] = ()
    separations: tuple[int, ...] = ()


def expand_modes(mode: str) -> list[str]:
    return {
        "both": ["finite", "thermo"],
        "all": ["finite", "thermo", "asymptotic"],
    }.get(mode, [mode])


def _fitted_zeta(rs: list[int], values: list[float]) -> float | None:
    points = [(r, math.log(abs(v))) for r, v in zip(rs, values) if v != 0.0]
    if len(points) < 2:
        return None
    slope, _ = np.polyfit([p[0] for p in points], [p[1] for p in points], 1)
    return float(-1.0 / slope) if slope < 0 else None


def _series_rows(point: CorrelatePoint, mode: str, L: int | None, values: dict[int, float]) -> list[CorrelatorRow]:
    rs = sorted(values)
    zeta = _fitted_zeta(rs, [values[r] for r in rs])
    rows = []
    for r in rs:
        value = values[r]
        previous = values.get(r - 1)
        rows.append(CorrelatorRow(
            S=point.S,
            q=point.q,
            pair=point.pair,
            mode=mode,
            L=L,
            r=r,
            distance=r - 1,
            value=value,
            log_abs_value=math.log(abs(value)) if value != 0.0 else None,
            local_ratio=value / previous if previous else None,
            fitted_zeta=zeta,
        ))
    return rows


def correlate_point(point: CorrelatePoint) -> list[CorrelatorRow]:
    """All rows of one (S, q): finite series per L, then thermo, then asymptotic."""
    S, q, pair = point.S, point.q, PairTag(point.pair)
    modes = expand_modes(point.mode)
    thermo = {r: two_point_thermo(S, q, r, pair) for r in point.separations} if "thermo" in modes else {}
    rows: list[CorrelatorRow] = []
    if "finite" in modes:
        for L in point.lengths:
            values = {r: two_point_finite(S, q, L, r, pair) for r in point.separations}
            series = _series_rows(point, "finite", L, values)
            if "thermo" in modes:
                for row in series:
                    row.gap = row.value - thermo[row.r]
            rows.extend(series)
    if "thermo" in modes:
        rows.extend(_series_rows(point, "thermo", None, thermo))
    if "asymptotic" in modes:
        asymptotic = zz_asymptotic if pair is PairTag.ZZ else pm_asymptotic
        rows.extend(_series_rows(point, "asymptotic", None, {r: asymptotic(S, q, r) for r in point.separations}))
    logger.info(f"correlate S={S} q={q:.6g} pair={pair.value}: {len(rows)} rows")
    return rows


# =============================================================================
# verify
# =============================================================================

@dataclass(frozen=True)
class VerifyPoint:
    S: int
    q: float
    lengths: tuple[int, ...] = ()
    tolerances: tuple[tuple[str, float], ...] = ()
    seed: int = 0
    index: int = 0


def _row(check: str, point: VerifyPoint, residual: float, tolerance: float, L: int | None = None,
         passed: bool | None = None, detail: str = "") -> CheckRow:
    ok = residual <= tolerance if passed is None else passed
    if not ok:
        logger.warning(f"{check} S={point.S} q={point.q:.6g} L={L}: residual {residual:.3e} > {tolerance:.1e}")
    return CheckRow(
        check=check, S=point.S, q=point.q, L=L,
        max_residual=residual, tolerance=tolerance, passed=ok, detail=detail,
    )


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _point_checks(point: VerifyPoint, tolerances: ToleranceSettings) -> list[CheckRow]:
    S, q = point.S, point.q
    rows = []

    palindrome = max(_relative(q_integer(n, q), q_integer(n, 1.0 / q)) for n in range(1, 2 * S + 3))
    rows.append(_row("qcore.palindromic", point, palindrome, PALINDROME_TOL))

    rng = np.random.default_rng([point.seed, S, point.index])
    samples = [
        (int(a), int(b), int(n))
        for a, b, n in zip(rng.integers(0, 7, VANDERMONDE_SAMPLES), rng.integers(0, 7, VANDERMONDE_SAMPLES),
                           rng.integers(0, 9, VANDERMONDE_SAMPLES))
    ]
    vandermonde = max(q_vandermonde_residual(a, b, n, q) for a, b, n in samples)
    rows.append(_row("qcore.vandermonde", point, vandermonde, tolerances.oracle,
                     detail=f"{VANDERMONDE_SAMPLES} samples, seed {point.seed}"))

    algebra = check_projector_algebra(S, q, tol=tolerances.oracle)
    rows.append(_row(
        "projectors.algebra", point,
        max(algebra.max_product_residual, algebra.completeness_residual, algebra.max_symmetry_residual),
        tolerances.oracle, passed=algebra.passed, detail="; ".join(algebra.error_messages),
    ))

    spectrum = verify_spectrum(S, q, tolerances=tolerances)
    rows.append(_row(
        "spectrum", point, spectrum.max_eigenvalue_error, tolerances.spectrum,
        passed=spectrum.passed, detail="; ".join(spectrum.error_messages),
    ))

    vanishing = vanishing_matrix_elements(S, q)
    worst = max(vanishing, key=lambda name: abs(vanishing[name]))
    rows.append(_row("correlators.vanishing", point, abs(vanishing[worst]), tolerances.vanishing, detail=worst))

    elements = [
        _relative(matrix_element_zz(S, q), matrix_element_contracted(S, q, PairTag.ZZ)),
        _relative(matrix_element_pm(S, q), matrix_element_contracted(S, q, PairTag.PM)),
    ]
    if q != 1.0:
        elements.append(_relative(matrix_element_zz(S, q), matrix_element_zz_printed(S, q)))
    rows.append(_row("correlators.matrix_elements", point, max(elements), tolerances.oracle))

    probabilities = [prob_sz(S, q, m) for m in range(-S, S + 1)]
    rows.append(_row("correlators.prob_normalization", point, abs(math.fsum(probabilities) - 1.0), tolerances.vanishing))
    thermo_gap = max(
        abs(p - one_point_thermo(S, q, SiteOperator(OperatorTag.PROJECTOR, m)))
        for m, p in zip(range(-S, S + 1), probabilities)
    )
    rows.append(_row("correlators.prob_thermo", point, thermo_gap, tolerances.oracle))

    rows.extend(_asymptotic_checks(point))
    return rows


def _asymptotic_checks(point: VerifyPoint) -> list[CheckRow]:
    """Asymptotic forms, finite-size gap decay and the fitted correlation length."""
    S, q = point.S, point.q
    rows = []

    start = asymptotic_validity_radius(S, q, threshold=ASYMPTOTIC_THRESHOLD)
    window = range(start, start + ASYMPTOTIC_WINDOW + 1)
    asymptotic = max(
        max(_relative(zz_asymptotic(S, q, r), two_point_thermo(S, q, r, PairTag.ZZ)),
            _relative(pm_asymptotic(S, q, r), two_point_thermo(S, q, r, PairTag.PM)))
        for r in window
    )
    rows.append(_row("correlators.asymptotic", point, asymptotic, ASYMPTOTIC_TOL, detail=f"r={start}..{window[-1]}"))

    fit = fit_correlation_length(S, q, start, start + ASYMPTOTIC_WINDOW)
    rows.append(_row("correlators.correlation_fit", point, abs(fit.slope - fit.expected_slope), FIT_SLOPE_TOL,
                     detail=f"zeta={fit.correlation_length:.9g}"))

    if abs(ratio(S, q)) ** max(GAP_DECAY_LENGTHS) >= GAP_DECAY_FLOOR:
        profile = correlator_gap_profile(S, q, 2, list(GAP_DECAY_LENGTHS))
        decay = max(
            abs(measured / predicted - 1.0)
            for measured, predicted in zip(profile.measured_ratios, profile.predicted_ratios)
        )
        rows.append(_row("correlators.gap_decay", point, decay, GAP_DECAY_TOL,
                         detail=f"L={','.join(map(str, GAP_DECAY_LENGTHS))}"))
    return rows


def _chain_checks(point: VerifyPoint, L: int, tolerances: ToleranceSettings) -> list[CheckRow]:
    S, q = point.S, point.q
    rows = []
    mps = mps_state(S, q, L)
    poly = poly_to_spin_state(build_vbs_poly(S, q, L))
    trace = norm_sq_finite(S, q, L).value

    rows.append(_row("states.norm_trace", point, _relative(mps.norm_sq(), trace), tolerances.norm, L=L))
    routes = proportionality(poly, mps)
    rows.append(_row("states.routes", point, 1.0 - routes.collinearity, tolerances.norm, L=L,
                     detail=f"poly = {routes.scalar:.17g} * mps"))

    annihilation = check_annihilation(mps, q, tol=tolerances.annihilation)
    rows.append(_row("projectors.annihilation", point, annihilation.max_residual, tolerances.annihilation, L=L,
                     passed=annihilation.passed, detail="; ".join(annihilation.error_messages)))

    if mps.dim <= get_config().budgets.max_hamiltonian_dim:
        probe = ground_state_gap(S, q, L)
        rows.append(_row("projectors.ground_energy", point, abs(probe.lowest), tolerances.annihilation, L=L,
                         detail=f"next level {probe.second:.17g}"))

    for pair in PairTag:
        mismatch = max(
            abs(two_point_finite(S, q, L, r, pair) - oracle_correlator(S, q, L, r=r, pair=pair, state=mps))
            for r in range(2, L + 1)
        )
        rows.append(_row(f"correlators.finite_{pair.value}", point, mismatch, tolerances.oracle, L=L))

    sz = SiteOperator(OperatorTag.SZ)
    one_point = max(abs(one_point_finite(S, q, L, sz)), abs(oracle_correlator(S, q, L, single=sz, state=mps)))
    rows.append(_row("correlators.one_point_sz", point, one_point, tolerances.vanishing, L=L))

    projector_gap = max(
        abs(one_point_finite(S, q, L, op) - oracle_correlator(S, q, L, single=op, state=mps))
        for op in (SiteOperator(OperatorTag.PROJECTOR, m) for m in range(-S, S + 1))
    )
    rows.append(_row("correlators.one_point_projector", point, projector_gap, tolerances.oracle, L=L))
    return rows


def verify_point(point: VerifyPoint) -> list[CheckRow]:
    """Every chain check of one (S, q), point-level checks first, then one block per L."""
    tolerances = tolerance_settings(dict(point.tolerances))
    rows = _point_checks(point, tolerances)
    for L in point.lengths:
        rows.extend(_chain_checks(point, L, tolerances))
    failed = sum(1 for row in rows if not row.passed)
    logger.info(f"verify S={point.S} q={point.q:.6g}: {len(rows) - failed}/{len(rows)} checks passed")
    return rows


@dataclass(frozen=True)
class LoweringPoint:
    S: int
    J: int
    n: int
    q: float
    tolerance: float


def lowering_point(point: LoweringPoint) -> CheckRow:
    report = verify_proposition1(point.S, point.J, point.n, point.q, tol=point.tolerance)
    if not report.passed:
        logger.warning("; ".join(report.error_messages))
    detail = f"J={point.J} n={point.n} terms={report.terms_lhs}"
    if report.vanishing_expected:
        detail += " (vanishing)"
    return CheckRow(
        check="lowering",
        S=point.S,
        q=point.q,
        max_residual=report.max_mismatch,
        tolerance=point.tolerance,
        passed=report.passed,
        detail=detail,
    )


def lowering_grid(S: int, q_values: Sequence[float], n_max: int | None, tolerance: float) -> list[LoweringPoint]:
    """All (q, J, n) with 0 <= J <= 2S and 0 <= n <= min(2J+1, n_max)."""
    points = []
    for q in q_values:
        for J in range(2 * S + 1):
            top = 2 * J + 1 if n_max is None else min(2 * J + 1, n_max)
            points.extend(LoweringPoint(S=S, J=J, n=n, q=q, tolerance=tolerance) for n in range(top + 1))
    return points

"""
QVBS v1 - Run Configuration and Report Models

Pydantic models for the validated CLI configuration and for the rows of
every report. Field order is the column order of the CSV output.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

COMMANDS = ("spectrum", "correlate", "verify")
TOLERANCE_NAMES = (
    "spectrum", "intertwiner", "norm", "residual", "oracle", "annihilation", "proposition", "vanishing",
)
FINITE_MODES = ("finite", "both", "all")


class ReportModel(BaseModel):
    """Base of every written model; non-finite floats serialize as Infinity / NaN"""
    model_config = ConfigDict(ser_json_inf_nan="constants")


class RunConfig(ReportModel):
    """Validated configuration of one CLI run"""
    command: Literal["spectrum", "correlate", "verify"]
    spin: int = Field(..., ge=1, description="Spin S of every site")
    q_values: list[float] = Field(..., min_length=1, description="Deformation parameters, grid order")
    lengths: list[int] = Field(default_factory=list, description="Chain lengths L")
    separations: list[int] = Field(default_factory=list, description="Operator sites r (A at 1, B at r)")
    pair: Optional[Literal["zz", "pm"]] = Field(None, description="Operator pair of two-point functions")
    mode: Optional[Literal["finite", "thermo", "asymptotic", "both", "all"]] = Field(None, description="Correlator evaluation mode")
    output_format: Literal["json", "csv"] = "csv"
    output_path: str = Field(..., description="Report file")
    tolerances: dict[str, float] = Field(default_factory=dict, description="Tolerance overrides by name")
    seed: int = Field(default=0, ge=0, description="Seed of sampled property checks")
    jobs: int = Field(default=1, ge=1, description="Worker processes")
    prop1: bool = Field(default=False, description="Run the lowering-operator grid instead of the chain checks")
    n_max: Optional[int] = Field(None, ge=0, description="Largest lowering power in the lowering-operator grid")

    @field_validator("q_values")
    @classmethod
    def _positive_q(cls, values: list[float]) -> list[float]:
        for value in values:
            if not value > 0 or value == float("inf"):
                raise ValueError(f"q must be finite and positive, got {value}")
        return values

    @field_validator("lengths")
    @classmethod
    def _valid_lengths(cls, values: list[int]) -> list[int]:
        if any(value < 2 for value in values):
            raise ValueError("chain lengths must be >= 2")
        return values

    @field_validator("separations")
    @classmethod
    def _valid_separations(cls, values: list[int]) -> list[int]:
        if any(value < 2 for value in values):
            raise ValueError("two-point functions need r >= 2 (same-site moments use Sz2)")
        return values

    @field_validator("tolerances")
    @classmethod
    def _positive_tolerances(cls, values: dict[str, float]) -> dict[str, float]:
        for name, value in values.items():
            if name not in TOLERANCE_NAMES:
                raise ValueError(f"unknown tolerance {name!r}; expected one of {', '.join(TOLERANCE_NAMES)}")
            if not value > 0:
                raise ValueError(f"tolerance {name} must be positive, got {value}")
        return values

    @model_validator(mode="after")
    def _separations_fit_chain(self) -> "RunConfig":
        if self.mode in FINITE_MODES and self.lengths and self.separations:
            if max(self.separations) > min(self.lengths):
                raise ValueError(
                    f"finite-chain correlators need r <= L, got r={max(self.separations)} with L={min(self.lengths)}"
                )
        return self


class SpectrumRow(ReportModel):
    """One (S, q) point of the spectrum report"""
    S: int
    q: float
    eigenvalues: list[float] = Field(..., description="lambda_l for l = 0..S")
    degeneracies: list[int] = Field(..., description="Blocks in which lambda_l was matched")
    max_eigenvalue_error: float
    max_eigen_residual: float = Field(..., description="||G v - lambda v|| / (||G^(j)|| ||v||)")
    max_eigen_residual_relative: float = Field(..., description="||G v - lambda v|| / (|lambda| ||v||)")
    max_intertwiner_residual: float
    max_norm_residual: float
    jacobi_sweeps: int
    correlation_length: float
    passed: bool
    detail: str = ""


class CorrelatorRow(ReportModel):
    """One plot-ready correlator value; distance = r - 1"""
    S: int
    q: float
    pair: str
    mode: Literal["finite", "thermo", "asymptotic"]
    L: Optional[int] = None
    r: int
    distance: int
    value: float
    log_abs_value: Optional[float] = None
    local_ratio: Optional[float] = None
    fitted_zeta: Optional[float] = None
    gap: Optional[float] = Field(None, description="finite minus thermo, when both are computed")


class CheckRow(ReportModel):
    """One named verification with its worst residual"""
    check: str
    S: int
    q: float
    L: Optional[int] = None
    max_residual: float
    tolerance: float
    passed: bool
    detail: str = ""


class RunReport(ReportModel):
    """Top-level JSON document written by every command"""
    version: str
    command: Literal["spectrum", "correlate", "verify"]
    config: RunConfig
    passed: bool
    spectrum: list[SpectrumRow] = Field(default_factory=list)
    correlators: list[CorrelatorRow] = Field(default_factory=list)
    checks: list[CheckRow] = Field(default_factory=list)

    def rows(self) -> list[BaseModel]:
        return {"spectrum": self.spectrum, "correlate": self.correlators, "verify": self.checks}[self.command]

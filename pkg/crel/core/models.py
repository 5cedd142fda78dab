"""
Common models, error codes, and request/response schemas for crel.
"""

from enum import Enum
from typing import Optional, Any, Dict, List

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import DEFAULT_BURN_IN, DEFAULT_CHAIN_LENGTH


# ============================================================================
# Error Models & Codes
# ============================================================================

class ErrorCode(str, Enum):
    """Stable error identifiers."""
    DOMAIN_ERROR = "DOMAIN_ERROR"
    SCHEMA_ERROR = "SCHEMA_ERROR"
    NON_SMOOTH = "NON_SMOOTH"
    CONVERGENCE_FAILED = "CONVERGENCE_FAILED"
    HULL_INFEASIBLE = "HULL_INFEASIBLE"
    SINGULAR_MATRIX = "SINGULAR_MATRIX"
    EXPANSION_FAILED = "EXPANSION_FAILED"
    SAMPLER_FAILED = "SAMPLER_FAILED"
    DEGENERATE_CHAIN = "DEGENERATE_CHAIN"
    QUADRATURE_FAILED = "QUADRATURE_FAILED"
    INVALID_REQUEST = "INVALID_REQUEST"
    INTERNAL_ERROR = "INTERNAL_ERROR"

    @property
    def exit_code(self) -> int:
        """Process exit status used by the command line."""
        if self is ErrorCode.HULL_INFEASIBLE:
            return 2
        if self in (ErrorCode.SAMPLER_FAILED, ErrorCode.DEGENERATE_CHAIN):
            return 3
        if self in (ErrorCode.INVALID_REQUEST, ErrorCode.SCHEMA_ERROR):
            return 64
        return 1

    @property
    def http_status(self) -> int:
        if self is ErrorCode.HULL_INFEASIBLE:
            return 409
        if self in (ErrorCode.INVALID_REQUEST, ErrorCode.SCHEMA_ERROR, ErrorCode.DOMAIN_ERROR,
                    ErrorCode.NON_SMOOTH):
            return 400
        return 422 if self is not ErrorCode.INTERNAL_ERROR else 500


class ErrorResponse(BaseModel):
    """Standard error response model."""
    code: ErrorCode
    message: str
    details: Optional[Dict[str, Any]] = None


# ============================================================================
# Data Generating Process Models
# ============================================================================

class ContaminationConfig(BaseModel):
    """Response contamination for the Poisson regression study."""
    model_config = ConfigDict(frozen=True)

    clean_fraction: float = Field(0.9, gt=0.0, le=1.0)
    outlier_mean: float = 42.5
    outlier_spread: float = Field(0.01, gt=0.0)
    spread_is_variance: bool = True

    @property
    def outlier_sd(self) -> float:
        return self.outlier_spread ** 0.5 if self.spread_is_variance else self.outlier_spread


# ============================================================================
# Posterior Models
# ============================================================================

class PosteriorConfig(BaseModel):
    """Random-walk Metropolis settings."""
    model_config = ConfigDict(frozen=True)

    chain_length: int = Field(DEFAULT_CHAIN_LENGTH, gt=1)
    burn_in: int = Field(DEFAULT_BURN_IN, ge=0)
    proposal_scale: Optional[List[float]] = Field(
        None, description="Per-component proposal sd; None selects 2.4*sqrt(nu_jj/n)"
    )
    adapt: bool = True
    seed: int = 0
    thin: int = Field(1, ge=1)

    @field_validator("proposal_scale")
    @classmethod
    def _positive_scale(cls, value):
        if value is not None and any(s <= 0 for s in value):
            raise ValueError("proposal_scale entries must be positive")
        return value

    @model_validator(mode="after")
    def _burn_in_shorter(self):
        if self.burn_in >= self.chain_length:
            raise ValueError("burn_in must be smaller than chain_length")
        return self

    def scaled(self, factor: int, seed: Optional[int] = None) -> "PosteriorConfig":
        """Same settings with chain and burn-in multiplied by ``factor``."""
        return self.model_copy(update={
            "chain_length": self.chain_length * factor,
            "burn_in": self.burn_in * factor,
            "seed": self.seed if seed is None else seed,
        })


class QuantileEstimate(BaseModel):
    """Posterior quantile with batch-means Monte Carlo error."""
    level: float
    value: float
    mc_se: float


# ============================================================================
# Experiment Models
# ============================================================================

class BiasReport(BaseModel):
    """Analytic and plug-in bias quantities at one level alpha."""
    psi: Optional[str] = None
    alpha: float
    bias_coverage: float
    bias_quantile: float
    r_term: Optional[float] = None
    rstar_term: Optional[float] = None
    eff_inv: float


class CoverageCell(BaseModel):
    """One reduced cell of a repeated-sampling table."""
    psi: str
    gamma: float
    alpha: float
    parameter: Optional[str] = None
    value: Optional[float] = None
    replications: int
    failures: int = 0


class CoverageResult(BaseModel):
    """Reduced table with provenance."""
    table: str
    statistic: str
    seed: int
    M: int
    n: int
    gammas: List[float]
    psis: List[str]
    alphas: List[float]
    cells: List[CoverageCell]
    failed_replications: int = 0

    def cell(self, psi: str, gamma: float, alpha: float,
             parameter: Optional[str] = None) -> CoverageCell:
        for c in self.cells:
            if (c.psi == psi and abs(c.gamma - gamma) < 1e-12 and abs(c.alpha - alpha) < 1e-12
                    and c.parameter == parameter):
                return c
        raise KeyError((psi, gamma, alpha, parameter))


class CalibrationResult(BaseModel):
    """Kolmogorov-Smirnov distance of a replicated statistic from its limit law."""
    study: str
    psi: str
    gamma: float
    M: int
    n: int
    seed: int
    ks: float
    pvalue: float
    failures: int = 0


class VarianceRow(BaseModel):
    gamma: float
    variance: float
    diff_vs_reference: float = Field(0.0, description="variance minus the gamma=0 variance, paired")
    se_diff: float = 0.0


class VarianceStudyResult(BaseModel):
    """Monte Carlo variance of a posterior quantile per gamma on shared datasets."""
    family: str
    alpha: float
    M: int
    n: int
    seed: int
    rows: List[VarianceRow]
    failures: int = 0

    def variance(self, gamma: float) -> float:
        for row in self.rows:
            if abs(row.gamma - gamma) < 1e-12:
                return row.variance
        raise KeyError(gamma)


class ScalingRow(BaseModel):
    n: int
    value: float
    order: Optional[int] = None
    term: Optional[str] = None


class ScalingResult(BaseModel):
    """A statistic tracked over sample sizes with fitted log-log slopes."""
    study: str
    seed: int
    reps: int
    rows: List[ScalingRow]
    slopes: Dict[str, float] = Field(default_factory=dict)


# ============================================================================
# Command Line Models
# ============================================================================

class RunConfig(BaseModel):
    """Parameters accepted from a config file or command-line flags."""
    model_config = ConfigDict(extra="forbid")

    data: Optional[str] = None
    psi: str = "mean"
    gamma: float = 0.0
    theta: Optional[List[float]] = None
    grid: Optional[str] = None
    parametric: Optional[str] = None
    prior: str = "flat"
    alpha: List[float] = Field(default_factory=lambda: [0.025, 0.5, 0.975])
    chain_length: int = DEFAULT_CHAIN_LENGTH
    burn_in: int = DEFAULT_BURN_IN
    thin: int = 1
    adapt: bool = True
    proposal_scale: Optional[List[float]] = None
    component: int = 0
    chain: bool = False
    table: Optional[str] = None
    scale: str = "desk"
    reference: str = "contaminated"
    seed: Optional[int] = None
    out: Optional[str] = None
    threads: int = 1

    @field_validator("theta", "alpha", "proposal_scale", mode="before")
    @classmethod
    def _comma_list(cls, value):
        if isinstance(value, str):
            return [float(v) for v in value.split(",") if v.strip()]
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return [float(value)]
        return value

    @field_validator("scale")
    @classmethod
    def _known_scale(cls, value):
        if value not in ("desk", "paper"):
            raise ValueError("scale must be 'desk' or 'paper'")
        return value

    @field_validator("reference")
    @classmethod
    def _known_reference(cls, value):
        if value not in ("contaminated", "clean"):
            raise ValueError("reference must be 'contaminated' or 'clean'")
        return value


# ============================================================================
# HTTP Models
# ============================================================================

class PsiSpec(BaseModel):
    """Estimating function selection by name and tuning constant."""
    name: str = Field("mean", description="mean, median, huber, tukey, glm, glm_robust")
    tuning: Optional[float] = None


class WeightsRequest(BaseModel):
    data: List[List[float]] = Field(..., min_length=1)
    psi: PsiSpec = Field(default_factory=PsiSpec)
    gamma: float = 0.0
    theta: List[float]


class WeightsResponse(BaseModel):
    weights: List[float]
    lambda_: List[float] = Field(..., alias="lambda")
    gamma: float
    gelr: float
    iterations: int
    residual_norm: float

    model_config = ConfigDict(populate_by_name=True)


class GELRResponse(BaseModel):
    value: Optional[float] = Field(None, description="null when 0 is outside the convex hull")
    hull_ok: bool


class GridSpec(BaseModel):
    lo: float
    hi: float
    m: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _ordered(self):
        if self.m > 1 and self.hi <= self.lo:
            raise ValueError("grid requires lo < hi")
        return self


class ProfileRequest(BaseModel):
    data: List[List[float]] = Field(..., min_length=1)
    psi: PsiSpec = Field(default_factory=PsiSpec)
    gamma: float = 0.0
    grid: GridSpec
    parametric: Optional[str] = None


class ProfilePoint(BaseModel):
    theta: float
    gelr: Optional[float] = None
    parametric: Optional[float] = None


class ProfileResponse(BaseModel):
    points: List[ProfilePoint]


class PosteriorRequest(BaseModel):
    data: List[List[float]] = Field(..., min_length=1)
    psi: PsiSpec = Field(default_factory=PsiSpec)
    gamma: float = 0.0
    prior: str = "flat"
    alpha: List[float] = Field(default_factory=lambda: [0.025, 0.5, 0.975])
    component: int = Field(0, ge=0, description="Zero-based parameter index of the reported quantiles")
    sampler: PosteriorConfig = Field(default_factory=lambda: PosteriorConfig(chain_length=20000, burn_in=2000))


class PosteriorResponse(BaseModel):
    quantiles: List[QuantileEstimate]
    acceptance_rate: float
    ess: List[float]
    failures: int

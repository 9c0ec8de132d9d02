"""Data models for kaczeros."""

import math
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ModelKind(str, Enum):
    """Coefficient law family."""
    FRACTIONAL_INCREMENT = "fractional_increment"
    LIMIT_ZERO = "limit_zero"


class RegionSpec(str, Enum):
    """Integration region on the real line."""
    NEG_INF_TO_MINUS_ONE = "NegInfToMinusOne"
    MINUS_ONE_TO_ZERO = "MinusOneToZero"
    ZERO_TO_ONE = "ZeroToOne"
    ONE_TO_INF = "OneToInf"
    NEGATIVE_AXIS = "NegativeAxis"
    POSITIVE_AXIS = "PositiveAxis"
    ALL = "All"


class SamplingMethod(str, Enum):
    """Gaussian vector generation method."""
    CHOLESKY = "cholesky"
    CIRCULANT = "circulant"


class CountMethod(str, Enum):
    """Real-root counting method."""
    EIGEN = "Eigen"
    SIGN_GRID = "SignGrid"


class ExperimentMode(str, Enum):
    """Experiment runner."""
    EXPECTED = "Expected"
    SIMULATE = "Simulate"
    ASYMPTOTICS = "Asymptotics"
    COMPARE = "Compare"


class OutputFormat(str, Enum):
    """Result file format."""
    CSV = "CSV"
    JSON = "JSON"


class RecordMethod(str, Enum):
    """Estimator that produced a result row."""
    QUADRATURE = "quadrature"
    MONTECARLO = "montecarlo"
    ASYMPTOTIC = "asymptotic"


class RowStatus(str, Enum):
    """Outcome of a result row."""
    OK = "ok"
    NONCONVERGED = "nonconverged"


class CoefficientModel(BaseModel):
    """Gaussian law of the coefficient vector: fractional increments or the H=0 limit."""
    model_config = ConfigDict(frozen=True)

    kind: ModelKind
    h: Optional[float] = Field(default=None, description="Hurst index, FractionalIncrement only")

    @model_validator(mode="after")
    def validate_parameter(self) -> "CoefficientModel":
        """Hurst index must lie strictly inside (0, 1); LimitZero takes none."""
        if self.kind == ModelKind.FRACTIONAL_INCREMENT:
            if self.h is None or not 0.0 < self.h < 1.0:
                raise ValueError(f"Hurst index must be strictly between 0 and 1, got {self.h}")
        elif self.h is not None:
            raise ValueError(f"LimitZero takes no Hurst index, got {self.h}")
        return self

    @classmethod
    def fractional(cls, h: float) -> "CoefficientModel":
        return cls(kind=ModelKind.FRACTIONAL_INCREMENT, h=h)

    @classmethod
    def limit_zero(cls) -> "CoefficientModel":
        return cls(kind=ModelKind.LIMIT_ZERO)

    @property
    def is_limit_zero(self) -> bool:
        return self.kind == ModelKind.LIMIT_ZERO

    @property
    def descriptor(self) -> str:
        """Short text form used in result files, e.g. 'H=0.3' or 'limit_zero'."""
        if self.is_limit_zero:
            return ModelKind.LIMIT_ZERO.value
        return f"H={self.h!r}"

    @classmethod
    def from_descriptor(cls, text: str) -> "CoefficientModel":
        """Inverse of `descriptor`."""
        text = text.strip()
        if text == ModelKind.LIMIT_ZERO.value:
            return cls.limit_zero()
        if text.startswith("H="):
            return cls.fractional(float(text[2:]))
        raise ValueError(f"Unrecognized model descriptor: {text!r}")


class CovarianceMatrix(BaseModel):
    """Dense Toeplitz covariance of (a_0, ..., a_{n-1})."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int = Field(ge=1)
    entries: np.ndarray

    @field_validator("entries")
    @classmethod
    def validate_square(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"Covariance entries must be a square matrix, got shape {v.shape}")
        return v


class CoefficientSample(BaseModel):
    """One realized coefficient vector, lowest degree first."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    coeffs: np.ndarray
    model: CoefficientModel
    seed: int = Field(ge=0, le=2**64 - 1)
    trial_index: int = Field(ge=0)
    method: SamplingMethod = SamplingMethod.CHOLESKY
    fallback: bool = Field(default=False, description="Circulant embedding was rejected and Cholesky used")

    @property
    def n(self) -> int:
        return int(self.coeffs.shape[0])


class MomentTriple(BaseModel):
    """Second moments of P_n and P_n' at a point, with Δ = αβ − γ²."""
    x: float
    alpha: float
    beta: float
    gamma: float
    delta: float = Field(ge=0.0)


class QuadratureResult(BaseModel):
    """Expected zero count over a region with the quadrature's own error bound."""
    value: float
    abs_err_estimate: float
    evaluations: int = Field(ge=0)


class AsymptoticConstants(BaseModel):
    """Limit constants for a Hurst index."""
    k_h: float = Field(description="Slope of E_n against log n")
    c_h: float = Field(description="Limit of sqrt(ell) at 1+")
    m_h: float = Field(description="Limit of sqrt(ell) at +/- infinity")
    h0_positive_limit: float = Field(description="Integral of the H=0 pointwise limit density over [0, inf) over pi")
    h0_boundary_mass: float = Field(description="Expected H=0 positive roots in the O(1/n) layers around x=1")

    @property
    def h0_positive_total(self) -> float:
        return self.h0_positive_limit + self.h0_boundary_mass


class EllSample(BaseModel):
    """One point of the ell table."""
    x: float
    ell: float
    density: float


class ZeroCount(BaseModel):
    """Real zeros of one polynomial split by sign."""
    negative: int = Field(ge=0)
    positive: int = Field(ge=0)
    total: int = Field(ge=0)
    method: CountMethod = CountMethod.EIGEN
    suspect: bool = False

    @model_validator(mode="after")
    def validate_total(self) -> "ZeroCount":
        if self.total != self.negative + self.positive:
            raise ValueError(f"total {self.total} != negative {self.negative} + positive {self.positive}")
        return self


class RootCountConfig(BaseModel):
    """Tuning for count_real_zeros."""
    imag_tol: float = Field(default=1e-8, gt=0.0)
    grid_refine: int = Field(default=3, ge=0, le=12)
    cross_check: bool = True


class ExperimentConfig(BaseModel):
    """One experiment run. Every published table is regenerable from this document."""
    mode: ExperimentMode
    model: CoefficientModel
    n_values: List[int]
    trials: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, le=2**64 - 1)
    tol: float = Field(default=1e-8, gt=0.0)
    region: RegionSpec = RegionSpec.ALL
    output_path: Optional[str] = None
    output_format: OutputFormat = OutputFormat.CSV
    workers: Optional[int] = Field(default=None, ge=1)
    eval_budget: Optional[int] = Field(default=None, ge=1)
    sampling_method: SamplingMethod = SamplingMethod.CHOLESKY
    cross_check: bool = True
    ell_points: List[float] = Field(default_factory=list)
    boundary_correction: bool = False

    @field_validator("n_values")
    @classmethod
    def validate_n_values(cls, v: List[int]) -> List[int]:
        """Nonempty, positive and sorted ascending."""
        if not v:
            raise ValueError("n_values must not be empty")
        if any(n < 1 for n in v):
            raise ValueError(f"n_values must be positive, got {v}")
        if list(v) != sorted(v):
            raise ValueError(f"n_values must be sorted ascending, got {v}")
        return v


class ExperimentRecord(BaseModel):
    """One persisted result row. Field order is the CSV column order."""
    n: int = Field(ge=1)
    model: str
    region: RegionSpec
    method: RecordMethod
    value: float
    err: float
    trials: Optional[int] = None
    seed: Optional[int] = None
    wall_time_ms: float = 0.0
    suspect_fraction: Optional[float] = None
    residual_asymptotic: Optional[float] = None
    residual_sigma: Optional[float] = None
    status: RowStatus = RowStatus.OK

    def same_result(self, other: "ExperimentRecord") -> bool:
        """Equality ignoring wall_time_ms, with NaN equal to NaN."""
        for name in type(self).model_fields:
            if name == "wall_time_ms":
                continue
            a, b = getattr(self, name), getattr(other, name)
            if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
                continue
            if a != b:
                return False
        return True

import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.config import DEFAULT_SEED
from core.constants import (
    DEFAULT_ALPHA_VALUES,
    DEFAULT_AXIS_SIMILARITY_RATIO,
    DEFAULT_CUTOFF_RADIUS,
    DEFAULT_EXTRA_RANDOM_STARTS,
    DEFAULT_GRADIENT_TOLERANCE,
    DEFAULT_INITIAL_STEP,
    DEFAULT_K_VALUES,
    DEFAULT_LAMBDA,
    DEFAULT_LAMBDA_VALUES,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_OVERLAP_TOLERANCE,
    DEFAULT_RADIUS_VALUES,
    DEFAULT_SCORE_TOLERANCE,
    DEFAULT_SIGMA,
    DEFAULT_SIGMA_VALUES,
)


class Orientation(str, Enum):
    SIMILARITY = "similarity"
    DISSIMILARITY = "dissimilarity"


class MeasureKind(str, Enum):
    SUP_CK = "sup_ck"
    SUP_CK_L = "sup_ck_l"
    VOL = "vol"
    PRINC_AXIS = "princ_axis"
    SUP_PI = "sup_pi"
    SUP_CK_VOL = "sup_ck_vol"
    SUP_CK_L_VOL = "sup_ck_l_vol"

    @property
    def orientation(self) -> Orientation:
        if self in (MeasureKind.VOL, MeasureKind.PRINC_AXIS):
            return Orientation.DISSIMILARITY
        return Orientation.SIMILARITY

    @property
    def uses_alignment(self) -> bool:
        return self not in (MeasureKind.VOL, MeasureKind.PRINC_AXIS)

    @property
    def uses_labels(self) -> bool:
        return self in (MeasureKind.SUP_CK_L, MeasureKind.SUP_CK_L_VOL)

    @property
    def uses_volume(self) -> bool:
        return self in (MeasureKind.SUP_CK_VOL, MeasureKind.SUP_CK_L_VOL)


class MissingChargePolicy(str, Enum):
    ZERO = "zero"
    SKIP = "skip"
    ERROR = "error"


class AlignConfig(BaseModel):
    """
    Pydantic schema for the sup-CK optimizer.
    Attributes:
        sigma (float): Gaussian width in Angstrom.
        lambda_ (float): Label-kernel width; infinity ignores labels.
        max_iterations (int): Iteration cap per start.
        gradient_tolerance (float): Stop when the max-norm of the gradient drops below.
        score_tolerance (float): Stop when the relative score gain drops below.
        initial_step (float): First trial step of the line search.
        axis_similarity_ratio (float): Axis-length ratio that triggers axis-swapped starts.
        extra_random_starts (int): Uniform random rotations added to the PCA starts.
        seed (int): Seed of the random starts.
    """
    model_config = ConfigDict(populate_by_name=True, frozen=True)

    sigma: float = Field(default=DEFAULT_SIGMA, gt=0)
    lambda_: float = Field(default=DEFAULT_LAMBDA, gt=0, alias="lambda")
    max_iterations: int = Field(default=DEFAULT_MAX_ITERATIONS, ge=1)
    gradient_tolerance: float = Field(default=DEFAULT_GRADIENT_TOLERANCE, gt=0)
    score_tolerance: float = Field(default=DEFAULT_SCORE_TOLERANCE, gt=0)
    initial_step: float = Field(default=DEFAULT_INITIAL_STEP, gt=0)
    axis_similarity_ratio: float = Field(default=DEFAULT_AXIS_SIMILARITY_RATIO, gt=0, le=1)
    extra_random_starts: int = Field(default=DEFAULT_EXTRA_RANDOM_STARTS, ge=0)
    seed: int = DEFAULT_SEED

    @field_validator("sigma", "gradient_tolerance", "score_tolerance", "initial_step")
    @classmethod
    def finite_positive(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value


class MeasureConfig(BaseModel):
    """
    Pydantic schema for a similarity measure.
    Attributes:
        kind (MeasureKind): Which measure.
        align (AlignConfig): Optimizer settings of the aligning measures.
        overlap_tolerance (float): Overlap distance of sup-PI in Angstrom.
        alpha (float): Vol coefficient of the combined measures.
    """
    model_config = ConfigDict(frozen=True)

    kind: MeasureKind = MeasureKind.SUP_CK
    align: AlignConfig = Field(default_factory=AlignConfig)
    overlap_tolerance: float = Field(default=DEFAULT_OVERLAP_TOLERANCE, gt=0)
    alpha: float = Field(default=0.0, ge=0)

    @property
    def orientation(self) -> Orientation:
        return self.kind.orientation

    def effective_align(self) -> AlignConfig:
        """Optimizer settings with labels switched off for the unlabelled kinds."""
        if self.kind.uses_labels:
            return self.align
        return self.align.model_copy(update={"lambda_": math.inf})


class ExtractionConfig(BaseModel):
    """
    Pydantic schema for pocket extraction.
    Attributes:
        cutoff_radius (float): Distance R in Angstrom; atoms strictly closer are kept.
        ligand_code (str): Het code of the ligand.
        ligand_chain (str, optional): Chain used to disambiguate the het group.
        ligand_res_seq (int, optional): Residue number used to disambiguate.
        charge_table (Dict[Tuple[str, str], float]): (residue name, atom name) -> partial charge.
        missing_charge_policy (MissingChargePolicy): zero | skip | error.
        include_hetero (bool): Also take non-ligand het atoms into pockets.
        include_water (bool): With include_hetero, also take waters.
    """
    cutoff_radius: float = Field(default=DEFAULT_CUTOFF_RADIUS, gt=0)
    ligand_code: str
    ligand_chain: Optional[str] = None
    ligand_res_seq: Optional[int] = None
    charge_table: Dict[Tuple[str, str], float] = Field(default_factory=dict)
    missing_charge_policy: MissingChargePolicy = MissingChargePolicy.ZERO
    include_hetero: bool = False
    include_water: bool = False


class ParamPoint(BaseModel):
    """
    One point of the hyperparameter grid; unused parameters are None.
    Attributes:
        sigma (float, optional): Kernel width.
        lambda_ (float, optional): Label width.
        radius (float, optional): Pocket cutoff radius the clouds were extracted at.
        alpha (float, optional): Vol coefficient (absolute, already normalised).
    """
    model_config = ConfigDict(populate_by_name=True, frozen=True)

    sigma: Optional[float] = None
    lambda_: Optional[float] = Field(default=None, alias="lambda")
    radius: Optional[float] = None
    alpha: Optional[float] = None

    def as_record(self) -> Dict[str, Any]:
        return {"sigma": self.sigma, "lambda": self.lambda_, "radius": self.radius, "alpha": self.alpha}


class HyperGrid(BaseModel):
    """
    Pydantic schema for the double cross-validation grid.
    Attributes:
        k_values (List[int]): Neighbour counts.
        sigma_values (List[float]): Kernel widths.
        lambda_values (List[float]): Label widths (infinity allowed).
        radius_values (List[float]): Pocket cutoff radii.
        alpha_values (List[float]): Multipliers of the median(sup-CK)/median(Vol) scale.
        seed (int): Seed recorded with the report.
    """
    model_config = ConfigDict(frozen=True)

    k_values: List[int] = Field(default_factory=lambda: list(DEFAULT_K_VALUES), min_length=1)
    sigma_values: List[float] = Field(default_factory=lambda: list(DEFAULT_SIGMA_VALUES), min_length=1)
    lambda_values: List[float] = Field(default_factory=lambda: list(DEFAULT_LAMBDA_VALUES), min_length=1)
    radius_values: List[float] = Field(default_factory=lambda: list(DEFAULT_RADIUS_VALUES), min_length=1)
    alpha_values: List[float] = Field(default_factory=lambda: list(DEFAULT_ALPHA_VALUES), min_length=1)
    seed: int = DEFAULT_SEED

    @field_validator("k_values")
    @classmethod
    def k_positive(cls, values: List[int]) -> List[int]:
        if any(k < 1 for k in values):
            raise ValueError("k values must be positive")
        return values

    @field_validator("sigma_values", "lambda_values", "radius_values")
    @classmethod
    def strictly_positive(cls, values: List[float]) -> List[float]:
        if any(not (v > 0) for v in values):
            raise ValueError("values must be strictly positive")
        return values

    @field_validator("alpha_values")
    @classmethod
    def alpha_non_negative(cls, values: List[float]) -> List[float]:
        if any(not (v >= 0) or math.isinf(v) for v in values):
            raise ValueError("alpha values must be finite and non-negative")
        return values

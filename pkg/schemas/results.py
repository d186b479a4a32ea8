import math
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from schemas.cloud import RigidTransform
from schemas.params import Orientation


class AlignResult(BaseModel):
    """
    Pydantic schema for the outcome of one gradient ascent or of a multi-start search.
    Attributes:
        score (float): Kernel value at ``transform``.
        transform (RigidTransform): Best rigid motion of the second cloud.
        start_index (int): Index of the start that produced it.
        iterations_used (int): Accepted ascent steps.
        converged (bool): False when the iteration cap was hit.
    """
    score: float
    transform: RigidTransform
    start_index: int = 0
    iterations_used: int = 0
    converged: bool = True


class SimilarityMatrix(BaseModel):
    """
    Pydantic schema for an all-pairs score matrix.
    Attributes:
        ids (List[str]): Cloud identifiers, row/column order.
        classes (List[str]): Ligand class of every cloud.
        scores (List[List[float]]): scores[i][j] = measure(cloud i, cloud j).
        orientation (Orientation): similarity (larger = closer) or dissimilarity.
        measure (str, optional): Measure kind name.
        params (Dict[str, Any]): Parameters the matrix was computed with.
        symmetrized (bool): Whether (M + M^T) / 2 has been applied.
    """
    ids: List[str]
    classes: List[str]
    scores: List[List[float]]
    orientation: Orientation = Orientation.SIMILARITY
    measure: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    symmetrized: bool = False

    @model_validator(mode="after")
    def square_and_finite(self) -> "SimilarityMatrix":
        n = len(self.ids)
        if len(self.classes) != n:
            raise ValueError(f"{len(self.classes)} classes for {n} ids")
        if len(self.scores) != n or any(len(row) != n for row in self.scores):
            raise ValueError(f"score matrix is not {n}x{n}")
        if not all(math.isfinite(v) for row in self.scores for v in row):
            raise ValueError("score matrix has non-finite entries")
        return self

    def array(self) -> np.ndarray:
        return np.asarray(self.scores, dtype=float)

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def from_array(cls, ids, classes, scores, orientation: Orientation, **extra) -> "SimilarityMatrix":
        return cls(
            ids=list(ids),
            classes=list(classes),
            scores=np.asarray(scores, dtype=float).tolist(),
            orientation=orientation,
            **extra,
        )


class EvalReport(BaseModel):
    """
    Pydantic schema for a double cross-validation report.
    Attributes:
        ids (List[str]): Query identifiers.
        classes (List[str]): True classes.
        predictions (List[str]): Predicted classes.
        per_query_auc (List[Optional[float]]): AUC per query, None when undefined.
        mean_auc (float, optional): Mean over defined AUCs.
        auc_std (float, optional): Standard deviation over defined AUCs.
        classification_error (float): Fraction of wrong predictions.
        confusion (Dict[str, Dict[str, int]]): confusion[true][predicted] counts.
        chosen_params (List[Dict[str, Any]]): Selected parameters per outer fold.
        skipped_params (List[Dict[str, Any]]): Grid entries dropped as degenerate.
        auc_protocol (str): How per-query AUC parameters were chosen.
        measure (str, optional): Measure kind name.
        seed (int): Grid seed.
    """
    ids: List[str]
    classes: List[str]
    predictions: List[str]
    per_query_auc: List[Optional[float]]
    mean_auc: Optional[float] = None
    auc_std: Optional[float] = None
    classification_error: float = Field(ge=0, le=1)
    confusion: Dict[str, Dict[str, int]] = Field(default_factory=dict)
    chosen_params: List[Dict[str, Any]] = Field(default_factory=list)
    skipped_params: List[Dict[str, Any]] = Field(default_factory=list)
    auc_protocol: str = ""
    measure: Optional[str] = None
    seed: int = 0

    @model_validator(mode="after")
    def auc_in_range(self) -> "EvalReport":
        for value in self.per_query_auc:
            if value is not None and not (0.0 <= value <= 1.0):
                raise ValueError(f"AUC {value} outside [0, 1]")
        return self


class AucReport(BaseModel):
    """
    Pydantic schema for per-query AUC of one matrix.
    Attributes:
        ids (List[str]): Query identifiers.
        per_query_auc (List[Optional[float]]): AUC per query, None when undefined.
        mean_auc (float, optional): Mean over defined AUCs.
        auc_std (float, optional): Standard deviation over defined AUCs.
        missing (List[str]): Queries whose AUC is undefined (single-class neighbourhood).
        measure (str, optional): Measure kind name.
        orientation (Orientation): Orientation the ranking used.
    """
    ids: List[str]
    per_query_auc: List[Optional[float]]
    mean_auc: Optional[float] = None
    auc_std: Optional[float] = None
    missing: List[str] = Field(default_factory=list)
    measure: Optional[str] = None
    orientation: Orientation = Orientation.SIMILARITY


class Projection(BaseModel):
    """
    Pydantic schema for a kernel PCA projection.
    Attributes:
        ids (List[str]): Cloud identifiers.
        classes (List[str]): Ligand classes.
        coordinates (List[List[float]]): N x d projected coordinates.
        eigenvalues (List[float]): d positive eigenvalues, descending.
        discarded_negative_mass (float): sum|negative eigenvalues| / sum|eigenvalues|.
        requested_components (int): d asked for.
        fewer_components (bool): True when fewer than d positive eigenvalues existed.
        symmetrized (bool): Whether the input was averaged with its transpose.
        centered (bool): Whether the matrix was double-centered.
    """
    ids: List[str]
    classes: List[str]
    coordinates: List[List[float]]
    eigenvalues: List[float]
    discarded_negative_mass: float = 0.0
    requested_components: int = 0
    fewer_components: bool = False
    symmetrized: bool = False
    centered: bool = True

    @model_validator(mode="after")
    def eigenvalues_positive_descending(self) -> "Projection":
        values = self.eigenvalues
        if any(v <= 0 for v in values):
            raise ValueError("projection eigenvalues must be strictly positive")
        if any(a < b for a, b in zip(values, values[1:])):
            raise ValueError("projection eigenvalues must be sorted descending")
        return self

    def array(self) -> np.ndarray:
        return np.asarray(self.coordinates, dtype=float).reshape(len(self.ids), len(self.eigenvalues))


class RunManifest(BaseModel):
    """
    Pydantic schema for the manifest every command writes next to its outputs.
    Attributes:
        command (str): Sub-command name.
        inputs (List[str]): Input paths.
        outputs (List[str]): Output paths.
        config (Dict[str, Any]): Resolved configuration, defaults included.
        seed (int): Random seed.
        tool_version (str): Application version.
        timings (Dict[str, float]): Wall-clock seconds per stage.
        host (Dict[str, Any]): CPU count and platform.
    """
    command: str
    inputs: List[str] = Field(default_factory=list)
    outputs: List[str] = Field(default_factory=list)
    config: Dict[str, Any] = Field(default_factory=dict)
    seed: int = 0
    tool_version: str = ""
    timings: Dict[str, float] = Field(default_factory=dict)
    host: Dict[str, Any] = Field(default_factory=dict)

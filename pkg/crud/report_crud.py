import json
import logging
import math
import os
from typing import Any, Dict, List

import pandas as pd
from pydantic import BaseModel

from core.config import FLOAT_FORMAT
from schemas.results import Projection

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["sigma", "lambda", "mean_auc", "auc_std", "classification_error"]


def _rounded(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return _rounded(value.model_dump(mode="python", by_alias=True))
    if isinstance(value, float):
        return value if not math.isfinite(value) else float(FLOAT_FORMAT % value)
    if isinstance(value, dict):
        return {str(k): _rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_rounded(v) for v in value]
    if hasattr(value, "value"):  # enums
        return value.value
    return value


def to_json_text(data: Any) -> str:
    """JSON with floats at 12 significant digits; infinity written as Infinity."""
    return json.dumps(_rounded(data), indent=2, sort_keys=True) + "\n"


def write_json(data: Any, path: str) -> str:
    """
    Write a model or a plain structure as JSON.

    Args:
        data (Any): pydantic model, dict or list.
        path (str): Output path.

    Returns:
        str: The path written.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(to_json_text(data))
    logger.debug(f"Wrote {path}")
    return path


def read_json(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def save_projection(projection: Projection, path: str) -> str:
    """
    Write projected coordinates as CSV id,class,pc1,...,pcd plus a JSON metadata file.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    columns = [f"pc{c + 1}" for c in range(len(projection.eigenvalues))]
    frame = pd.DataFrame(projection.array(), columns=columns)
    frame.insert(0, "class", projection.classes)
    frame.insert(0, "id", projection.ids)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)

    meta = projection.model_dump(exclude={"ids", "classes", "coordinates"})
    write_json(meta, os.path.splitext(path)[0] + ".json")
    return path


def save_sweep(rows: List[Dict[str, Any]], path: str) -> str:
    """Write sweep rows as CSV sigma,lambda,mean_auc,auc_std,classification_error."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path

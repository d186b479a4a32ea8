import logging
import os

import pandas as pd

from core.config import FLOAT_FORMAT
from core.exceptions import InputError
from crud.report_crud import read_json, write_json
from schemas.results import SimilarityMatrix

logger = logging.getLogger(__name__)


def metadata_path(csv_path: str) -> str:
    return os.path.splitext(csv_path)[0] + ".json"


def save_matrix(matrix: SimilarityMatrix, path: str) -> str:
    """
    Write a matrix as CSV (``id`` column, ids as column headers) plus JSON metadata.

    Args:
        matrix (SimilarityMatrix): Matrix to write.
        path (str): CSV path; metadata goes next to it with a .json suffix.

    Returns:
        str: The CSV path.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame = pd.DataFrame(matrix.array(), index=pd.Index(matrix.ids, name="id"), columns=matrix.ids)
    frame.to_csv(path, float_format=FLOAT_FORMAT)
    write_json(
        {
            "orientation": matrix.orientation,
            "measure": matrix.measure,
            "params": matrix.params,
            "classes": matrix.classes,
            "symmetrized": matrix.symmetrized,
        },
        metadata_path(path),
    )
    logger.info(f"Saved {len(matrix)}x{len(matrix)} matrix to {path}")
    return path


def load_matrix(path: str, require_classes: bool = False) -> SimilarityMatrix:
    """
    Read a matrix written by save_matrix.

    Args:
        path (str): CSV path.
        require_classes (bool): Fail when an item has no ligand class.

    Raises:
        InputError: Missing files or a header that does not match the id column.
    """
    if not os.path.isfile(path):
        raise InputError(f"Matrix file not found: {path}")
    if not os.path.isfile(metadata_path(path)):
        raise InputError(f"Matrix metadata not found: {metadata_path(path)}")
    frame = pd.read_csv(path, index_col="id", dtype={"id": str})
    ids = [str(i) for i in frame.index]
    if [str(c) for c in frame.columns] != ids:
        raise InputError(f"Matrix {path}: column headers do not match the id column")

    meta = read_json(metadata_path(path))
    classes = [c or "" for c in (meta.get("classes") or [""] * len(ids))]
    if require_classes and any(not c for c in classes):
        raise InputError(f"Matrix {path}: every item needs a ligand class")
    return SimilarityMatrix.from_array(
        ids,
        classes,
        frame.to_numpy(dtype=float),
        meta.get("orientation", "similarity"),
        measure=meta.get("measure"),
        params=meta.get("params") or {},
        symmetrized=bool(meta.get("symmetrized", False)),
    )

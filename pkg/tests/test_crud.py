import json
import math

import numpy as np
import pandas as pd
import pytest

from core.exceptions import InputError
from crud.cloud_crud import load_cloud, load_cloud_directory, save_cloud, sidecar_path
from crud.matrix_crud import load_matrix, metadata_path, save_matrix
from crud.report_crud import save_projection, save_sweep, to_json_text
from schemas.cloud import Atom, AtomCloud
from schemas.params import Orientation
from schemas.results import Projection, SimilarityMatrix
from tests.conftest import cloud_from


class TestCloudFiles:
    def test_save_and_load(self, tmp_path):
        cloud = AtomCloud(
            id="1abc_ATP",
            ligand_class="ATP",
            atoms=[
                Atom(position=(1.0, 2.0, 3.0), label=-0.28, element="N", res_name="NA", res_seq=7, atom_name="N"),
                Atom(position=(0.1, 0.2, 0.3), label=0.0, element="C", res_name="ALA", res_seq=8, atom_name="CA"),
            ],
        )
        path = save_cloud(cloud, str(tmp_path / "pocket.csv"), source_file="1abc.pdb", cutoff_radius=5.3)
        frame = pd.read_csv(path, keep_default_na=False)
        assert list(frame.columns) == ["x", "y", "z", "charge", "element", "res_name", "res_seq", "atom_name"]
        with open(sidecar_path(path)) as handle:
            assert json.load(handle) == {
                "id": "1abc_ATP", "ligand_class": "ATP", "source_file": "1abc.pdb", "cutoff_radius": 5.3
            }
        loaded, meta = load_cloud(path)
        assert loaded == cloud
        assert meta["cutoff_radius"] == 5.3

    def test_id_defaults_to_stem(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("x,y,z\n0,0,0\n1,0,0\n")
        cloud, meta = load_cloud(str(path))
        assert cloud.id == "bare"
        assert cloud.ligand_class is None
        assert meta == {}
        assert list(cloud.labels) == [0.0, 0.0]

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "broken.csv"
        path.write_text("x,y\n0,0\n")
        with pytest.raises(InputError):
            load_cloud(str(path))

    def test_directory_grouped_by_radius(self, tmp_path, rng):
        for radius in (4.5, 5.3):
            for name in ("b", "a"):
                cloud = cloud_from(rng.uniform(size=(4, 3)), cloud_id=name, ligand_class="X")
                save_cloud(cloud, str(tmp_path / f"{name}_r{radius:g}.csv"), cutoff_radius=radius)
        groups = load_cloud_directory(str(tmp_path))
        assert list(groups) == [4.5, 5.3]
        assert [cloud.id for cloud in groups[5.3]] == ["a", "b"]

    def test_directory_radius_mismatch(self, tmp_path, rng):
        save_cloud(cloud_from(rng.uniform(size=(4, 3)), cloud_id="a"), str(tmp_path / "a.csv"), cutoff_radius=4.5)
        save_cloud(cloud_from(rng.uniform(size=(4, 3)), cloud_id="b"), str(tmp_path / "b.csv"), cutoff_radius=5.3)
        with pytest.raises(InputError):
            load_cloud_directory(str(tmp_path))

    def test_empty_directory(self, tmp_path):
        with pytest.raises(InputError):
            load_cloud_directory(str(tmp_path))


class TestMatrixFiles:
    def test_save_and_load(self, tmp_path):
        matrix = SimilarityMatrix.from_array(
            ["p1", "p2"], ["ATP", "NAD"], [[3.0, 1.0 / 3.0], [0.25, 2.0]], Orientation.SIMILARITY,
            measure="sup_ck", params={"sigma": 1.0, "lambda": math.inf},
        )
        path = save_matrix(matrix, str(tmp_path / "m.csv"))
        assert open(path).readline().strip() == "id,p1,p2"
        loaded = load_matrix(path)
        assert loaded.ids == ["p1", "p2"]
        assert loaded.classes == ["ATP", "NAD"]
        assert math.isinf(loaded.params["lambda"])
        np.testing.assert_allclose(loaded.array(), matrix.array(), rtol=1e-11)

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("id,p1,p3\np1,1,0\np2,0,1\n")
        (tmp_path / "m.json").write_text('{"orientation": "similarity"}')
        with pytest.raises(InputError):
            load_matrix(str(path))

    def test_classes_required(self, tmp_path):
        matrix = SimilarityMatrix.from_array(["p1", "p2"], ["", ""], np.eye(2), Orientation.SIMILARITY)
        path = save_matrix(matrix, str(tmp_path / "m.csv"))
        assert metadata_path(path).endswith("m.json")
        with pytest.raises(InputError):
            load_matrix(path, require_classes=True)


class TestReports:
    def test_json_rounding_and_infinity(self):
        text = to_json_text({"value": 0.1 + 0.2, "lambda": math.inf, "orientation": Orientation.DISSIMILARITY})
        data = json.loads(text)
        assert data["value"] == 0.3
        assert math.isinf(data["lambda"])
        assert data["orientation"] == "dissimilarity"
        assert "Infinity" in text

    def test_projection_csv(self, tmp_path):
        projection = Projection(
            ids=["a", "b"], classes=["X", "Y"], coordinates=[[1.0, 0.5], [-1.0, -0.5]], eigenvalues=[2.0, 0.5]
        )
        path = save_projection(projection, str(tmp_path / "proj.csv"))
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["id", "class", "pc1", "pc2"]
        assert (tmp_path / "proj.json").exists()

    def test_sweep_csv(self, tmp_path):
        rows = [{"sigma": 1.0, "lambda": math.inf, "mean_auc": 0.8, "auc_std": 0.1, "classification_error": 0.2}]
        path = save_sweep(rows, str(tmp_path / "sweep.csv"))
        assert open(path).readline().strip() == "sigma,lambda,mean_auc,auc_std,classification_error"

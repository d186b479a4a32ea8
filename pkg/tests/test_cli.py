import json
import math

import pandas as pd
import pytest

from crud.cloud_crud import load_cloud, save_cloud
from main import main
from utils.geometry import kernel_ck, transform_cloud
from utils.synthetic import planted_classes, random_cloud, random_rigid_motion


def write_clouds(directory, clouds):
    directory.mkdir(exist_ok=True)
    return [save_cloud(cloud, str(directory / f"{cloud.id}.csv")) for cloud in clouds]


def read_json(path):
    with open(path) as handle:
        return json.load(handle)


@pytest.fixture
def planted_dir(tmp_path):
    directory = tmp_path / "clouds"
    write_clouds(directory, planted_classes(2, 3, n_atoms=8, seed=11))
    return directory


@pytest.fixture
def cloud_pair(tmp_path, rng):
    cloud = random_cloud(rng, 15, cloud_id="a")
    paths = write_clouds(tmp_path / "pair", [cloud, transform_cloud(cloud, random_rigid_motion(rng), "b")])
    return cloud, paths


class TestEntryPoint:
    def test_version(self):
        assert main(["--version"]) == 0

    def test_usage_error(self):
        assert main(["compare"]) == 1

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 1


class TestExtract:
    def test_one_structure(self, tmp_path, pocket_pdb_text, capsys):
        structure = tmp_path / "1abc.pdb"
        structure.write_text(pocket_pdb_text)
        out_dir = tmp_path / "pockets"
        code = main(["extract", str(structure), "--ligand", "ATP", "--out-dir", str(out_dir), "--jobs", "1"])
        assert code == 0
        assert "pocket 2 atoms at R=5.3" in capsys.readouterr().out
        cloud, meta = load_cloud(str(out_dir / "1abc.csv"))
        assert cloud.ligand_class == "ATP"
        assert meta["cutoff_radius"] == 5.3
        manifest = read_json(out_dir / "extract.manifest.json")
        assert manifest["command"] == "extract"
        assert manifest["config"]["radius"] == [5.3]
        assert manifest["config"]["missing_charge"] == "zero"
        assert "extract" in manifest["timings"]

    def test_several_radii(self, tmp_path, pocket_pdb_text):
        structure = tmp_path / "1abc.pdb"
        structure.write_text(pocket_pdb_text)
        out_dir = tmp_path / "pockets"
        code = main(["extract", str(structure), "--ligand", "ATP", "--radius", "5.3", "6",
                     "--out-dir", str(out_dir), "--jobs", "1"])
        assert code == 0
        assert (out_dir / "1abc_r5.3.csv").exists()
        assert (out_dir / "1abc_r6.csv").exists()

    def test_unknown_ligand(self, tmp_path, pocket_pdb_text, capsys):
        structure = tmp_path / "1abc.pdb"
        structure.write_text(pocket_pdb_text)
        code = main(["extract", str(structure), "--ligand", "NAD", "--out-dir", str(tmp_path / "out"),
                     "--jobs", "1"])
        assert code == 1
        assert "candidates: ATP, HOH" in capsys.readouterr().err

    def test_partial_failure_exits_zero(self, tmp_path, pocket_pdb_text):
        good = tmp_path / "1abc.pdb"
        good.write_text(pocket_pdb_text)
        bad = tmp_path / "2bad.pdb"
        bad.write_text("HEADER    NOTHING\n")
        out_dir = tmp_path / "out"
        assert main(["extract", str(good), str(bad), "--ligand", "ATP", "--out-dir", str(out_dir),
                     "--jobs", "1"]) == 0
        assert list(read_json(out_dir / "extract.manifest.json")["config"]["failed"]) == [str(bad)]


class TestCompare:
    def test_self_score(self, tmp_path, cloud_pair, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cloud, paths = cloud_pair
        assert main(["compare", paths[0], paths[0]]) == 0
        score = float(capsys.readouterr().out.split()[0])
        assert score == pytest.approx(kernel_ck(cloud, cloud), rel=1e-2)
        assert (tmp_path / "compare.manifest.json").exists()

    def test_vol_on_rigid_copy(self, tmp_path, cloud_pair, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        _, paths = cloud_pair
        assert main(["compare", *paths, "--measure", "vol"]) == 0
        assert float(capsys.readouterr().out.split()[0]) == pytest.approx(0.0, abs=1e-6)

    def test_symmetrize_takes_better_direction(self, tmp_path, cloud_pair, capsys):
        _, paths = cloud_pair
        out = tmp_path / "s.json"
        assert main(["compare", *paths, "--out", str(out)]) == 0
        directed = float(capsys.readouterr().out.split()[0])
        assert main(["compare", *paths, "--symmetrize", "--out", str(out)]) == 0
        assert float(capsys.readouterr().out.split()[0]) >= directed

    def test_dump_transform_round_trip(self, tmp_path, cloud_pair, capsys):
        _, paths = cloud_pair
        dump = tmp_path / "best.json"
        assert main(["compare", *paths, "--dump-transform", str(dump)]) == 0
        capsys.readouterr()
        dumped = read_json(dump)
        assert set(dumped["transform"]) == {"phi", "theta", "psi", "translation"}
        moved = tmp_path / "best_moved.csv"
        assert moved.exists()
        assert (tmp_path / "best.manifest.json").exists()

        assert main(["compare", paths[0], str(moved), "--no-align", "--out", str(tmp_path / "s.json")]) == 0
        score = float(capsys.readouterr().out.split()[0])
        assert score == pytest.approx(dumped["kernel_score"], rel=1e-6)

    def test_finite_lambda_needs_labels(self, tmp_path, cloud_pair, capsys):
        _, paths = cloud_pair
        code = main(["compare", *paths, "--measure", "sup_ck_l", "--lambda", "0.5",
                     "--out", str(tmp_path / "s.json")])
        assert code == 1
        assert "unlabelled" in capsys.readouterr().err


class TestMatrixPipeline:
    def test_matrix_auc_kpca(self, tmp_path, planted_dir, capsys):
        matrix_path = tmp_path / "sup.csv"
        args = ["matrix", str(planted_dir), "--out", str(matrix_path), "--jobs", "1", "--extra-random-starts", "0"]
        assert main(args) == 0
        frame = pd.read_csv(matrix_path)
        assert list(frame.columns) == ["id"] + list(frame["id"])
        assert frame.shape == (6, 7)
        manifest = read_json(tmp_path / "sup.manifest.json")
        assert manifest["config"]["sigma"] == 1.0
        assert math.isinf(manifest["config"]["lam"])
        assert manifest["seed"] == 0

        first_bytes = matrix_path.read_bytes()
        assert main(args) == 0
        assert matrix_path.read_bytes() == first_bytes

        assert main(["auc", str(matrix_path), "--out", str(tmp_path / "auc.json")]) == 0
        report = read_json(tmp_path / "auc.json")
        assert len(report["per_query_auc"]) == 6

        assert main(["kpca", str(matrix_path), "--out", str(tmp_path / "proj.csv")]) == 0
        projection = pd.read_csv(tmp_path / "proj.csv")
        assert list(projection.columns)[:2] == ["id", "class"]
        assert len(projection) == 6

    def test_kpca_rejects_dissimilarity(self, tmp_path, planted_dir):
        matrix_path = tmp_path / "vol.csv"
        assert main(["matrix", str(planted_dir), "--measure", "vol", "--out", str(matrix_path), "--jobs", "1"]) == 0
        assert main(["kpca", str(matrix_path), "--out", str(tmp_path / "proj.csv")]) == 1


class TestClassify:
    def test_planted_vol_directory(self, tmp_path):
        directory = tmp_path / "planted"
        write_clouds(directory, planted_classes(4, 5, seed=12))
        out = tmp_path / "report.json"
        assert main(["classify", str(directory), "--measure", "vol", "--k-values", "1", "3",
                     "--out", str(out), "--jobs", "1"]) == 0
        report = read_json(out)
        assert report["classification_error"] == 0.0
        assert report["measure"] == "vol"
        assert (tmp_path / "report.manifest.json").exists()

    def test_saved_matrix(self, tmp_path):
        directory = tmp_path / "planted"
        write_clouds(directory, planted_classes(4, 5, seed=12))
        matrix_path = tmp_path / "vol.csv"
        assert main(["matrix", str(directory), "--measure", "vol", "--out", str(matrix_path), "--jobs", "1"]) == 0
        out = tmp_path / "report.json"
        assert main(["classify", str(matrix_path), "--k-values", "1", "--out", str(out)]) == 0
        assert read_json(out)["classification_error"] == 0.0

    def test_missing_classes(self, tmp_path, rng, capsys):
        directory = tmp_path / "unlabelled"
        write_clouds(directory, [random_cloud(rng, 6, cloud_id=f"c{i}") for i in range(4)])
        code = main(["classify", str(directory), "--out", str(tmp_path / "r.json"), "--jobs", "1"])
        assert code == 1
        assert "ligand class" in capsys.readouterr().err
        assert not (tmp_path / "r.json").exists()


class TestSweep:
    def test_rows_per_sigma(self, tmp_path, planted_dir):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", str(planted_dir), "--sigma-values", "0.5", "1", "2", "4", "--lambda-values", "inf",
                     "--k-values", "1", "--extra-random-starts", "0", "--max-iterations", "50",
                     "--out", str(out), "--jobs", "1"])
        assert code == 0
        frame = pd.read_csv(out)
        assert list(frame["sigma"]) == [0.5, 1.0, 2.0, 4.0]
        assert list(frame.columns) == ["sigma", "lambda", "mean_auc", "auc_std", "classification_error"]

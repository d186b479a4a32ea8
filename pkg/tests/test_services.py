import math

import numpy as np
import pytest

from core.exceptions import InputError, ParameterError
from schemas.params import AlignConfig, ExtractionConfig, HyperGrid, MeasureConfig, MeasureKind
from services.evaluation_service import grid_candidates, loo_double_cv, sweep
from services.extraction_service import extract_many
from services.matrix_service import ScoreCache, similarity_matrix
from tests.conftest import cloud_from
from utils.geometry import kernel_ck
from utils.synthetic import planted_classes, random_cloud


class TestSimilarityMatrix:
    def test_vol_symmetric_with_zero_diagonal(self, rng):
        clouds = [random_cloud(rng, 10, cloud_id=f"c{i}") for i in range(4)]
        matrix = similarity_matrix(clouds, MeasureConfig(kind=MeasureKind.VOL), jobs=1)
        scores = matrix.array()
        np.testing.assert_array_equal(scores, scores.T)
        np.testing.assert_array_equal(np.diag(scores), 0.0)
        assert matrix.orientation.value == "dissimilarity"

    def test_identical_clouds(self, small_cloud):
        clouds = [cloud_from(small_cloud.positions, cloud_id=f"same{i}") for i in range(3)]
        matrix = similarity_matrix(clouds, MeasureConfig(), jobs=1)
        self_score = kernel_ck(small_cloud, small_cloud)
        np.testing.assert_allclose(matrix.array(), self_score, rtol=1e-2)
        assert matrix.params["sigma"] == 1.0
        assert math.isinf(matrix.params["lambda"])

    def test_symmetrize(self, rng):
        clouds = [random_cloud(rng, 6, box=4.0, cloud_id=f"c{i}") for i in range(3)]
        matrix = similarity_matrix(clouds, MeasureConfig(), jobs=1, symmetrize=True)
        np.testing.assert_array_equal(matrix.array(), matrix.array().T)
        assert matrix.symmetrized

    def test_sup_ck_matrix_close_to_transpose(self, rng):
        clouds = [random_cloud(rng, int(rng.integers(20, 41)), cloud_id=f"c{i}") for i in range(6)]
        scores = similarity_matrix(clouds, MeasureConfig(), jobs=1).array()
        relative = np.abs(scores - scores.T) / np.maximum(scores, scores.T)
        assert relative.max() < 0.02

    def test_cache_reused(self, rng):
        clouds = [random_cloud(rng, 6, box=4.0, cloud_id=f"c{i}") for i in range(3)]
        cache = ScoreCache()
        first = similarity_matrix(clouds, MeasureConfig(), jobs=1, cache=cache)
        assert len(cache) == 9
        second = similarity_matrix(clouds, MeasureConfig(), jobs=1, cache=cache)
        assert len(cache) == 9
        assert first.scores == second.scores
        similarity_matrix(clouds, MeasureConfig(kind=MeasureKind.VOL), jobs=1, cache=cache)
        assert len(cache) == 9 + 6

    def test_cache_key_separates_radius_and_tolerance(self):
        cfg = MeasureConfig(kind=MeasureKind.SUP_PI)
        assert ScoreCache.key("a", "b", cfg, 5.3) != ScoreCache.key("a", "b", cfg, 6.0)
        wider = cfg.model_copy(update={"overlap_tolerance": 2.0})
        assert ScoreCache.key("a", "b", cfg) != ScoreCache.key("a", "b", wider)
        vol = MeasureConfig(kind=MeasureKind.VOL)
        assert ScoreCache.key("a", "b", vol) == ScoreCache.key("b", "a", vol)

    @pytest.mark.parametrize("update", [
        {"max_iterations": 50},
        {"seed": 3},
        {"extra_random_starts": 0},
        {"axis_similarity_ratio": 0.5},
    ])
    def test_cache_key_separates_optimizer_settings(self, update):
        cfg = MeasureConfig()
        other = cfg.model_copy(update={"align": cfg.align.model_copy(update=update)})
        assert ScoreCache.key("a", "b", cfg) != ScoreCache.key("a", "b", other)
        assert ScoreCache.key("a", "b", cfg) == ScoreCache.key("a", "b", MeasureConfig())

    def test_shared_cache_recomputes_under_new_settings(self, rng):
        clouds = [random_cloud(rng, 6, box=4.0, cloud_id=f"c{i}") for i in range(3)]
        cache = ScoreCache()
        similarity_matrix(clouds, MeasureConfig(), jobs=1, cache=cache)
        capped = MeasureConfig(align=AlignConfig(max_iterations=1, extra_random_starts=0))
        similarity_matrix(clouds, capped, jobs=1, cache=cache)
        assert len(cache) == 9 + 9

    def test_duplicate_ids(self, small_cloud):
        with pytest.raises(InputError):
            similarity_matrix([small_cloud, small_cloud], MeasureConfig(kind=MeasureKind.VOL), jobs=1)

    def test_worker_pool_matches_sequential(self, rng):
        clouds = [random_cloud(rng, 10, cloud_id=f"c{i}") for i in range(4)]
        cfg = MeasureConfig(kind=MeasureKind.PRINC_AXIS)
        assert similarity_matrix(clouds, cfg, jobs=2).scores == similarity_matrix(clouds, cfg, jobs=1).scores


class TestGridCandidates:
    def test_combined_measure_grid(self):
        clouds = planted_classes(2, 2, n_atoms=8, seed=1)
        grid = HyperGrid(k_values=[1], sigma_values=[1.0], lambda_values=[math.inf], alpha_values=[0.0, 1.0])
        candidates = grid_candidates(clouds, MeasureKind.SUP_CK_VOL, grid)
        assert len(candidates) == 2
        (zero_point, zero), (one_point, one) = candidates
        assert zero_point.alpha == 0.0
        assert one_point.alpha > 0.0
        vol = similarity_matrix(clouds, MeasureConfig(kind=MeasureKind.VOL), jobs=1).array()
        np.testing.assert_allclose(zero.array() - one.array(), one_point.alpha * vol, rtol=1e-9, atol=1e-9)

    def test_radius_groups_must_match(self, rng):
        first = [random_cloud(rng, 5, cloud_id="a", ligand_class="X")]
        second = [random_cloud(rng, 5, cloud_id="b", ligand_class="X")]
        grid = HyperGrid(k_values=[1])
        with pytest.raises(InputError):
            grid_candidates({4.5: first, 5.3: second}, MeasureKind.VOL, grid)


class TestLooDoubleCV:
    def test_sup_ck_two_planted_classes(self):
        clouds = planted_classes(2, 3, n_atoms=12, seed=2)
        grid = HyperGrid(k_values=[1], sigma_values=[1.0], lambda_values=[math.inf])
        report = loo_double_cv(clouds, MeasureKind.SUP_CK, grid, jobs=1)
        assert report.classification_error == 0.0
        assert report.measure == "sup_ck"
        assert all(chosen["k"] == 1 and chosen["sigma"] == 1.0 for chosen in report.chosen_params)

    def test_vol_over_radii(self):
        clouds = planted_classes(3, 4, seed=4)
        groups = {4.5: clouds, 5.3: clouds}
        report = loo_double_cv(groups, MeasureKind.VOL, HyperGrid(k_values=[1, 3]), jobs=1)
        assert report.classification_error == 0.0
        assert {chosen["radius"] for chosen in report.chosen_params} <= {4.5, 5.3}

    def test_missing_classes_fail_first(self, rng):
        clouds = [random_cloud(rng, 5, cloud_id=f"c{i}") for i in range(4)]
        with pytest.raises(InputError):
            loo_double_cv(clouds, MeasureKind.SUP_CK, jobs=1)

    def test_single_class(self, rng):
        clouds = [random_cloud(rng, 5, cloud_id=f"c{i}", ligand_class="ATP") for i in range(4)]
        with pytest.raises(InputError):
            loo_double_cv(clouds, MeasureKind.VOL, jobs=1)


class TestSweep:
    def test_one_row_per_grid_point(self):
        clouds = planted_classes(2, 3, n_atoms=8, seed=6)
        grid = HyperGrid(k_values=[1], sigma_values=[0.5, 1.0, 2.0, 4.0], lambda_values=[math.inf])
        base = MeasureConfig(align={"extra_random_starts": 0, "max_iterations": 50})
        rows = sweep(clouds, MeasureKind.SUP_CK, grid, base, jobs=1)
        assert [row["sigma"] for row in rows] == [0.5, 1.0, 2.0, 4.0]
        assert all(0.0 <= row["classification_error"] <= 1.0 for row in rows)

    def test_labelled_grid(self):
        clouds = planted_classes(2, 3, n_atoms=8, labelled=True, seed=7)
        grid = HyperGrid(k_values=[1], sigma_values=[1.0], lambda_values=[0.5, math.inf])
        base = MeasureConfig(align={"extra_random_starts": 0, "max_iterations": 50})
        rows = sweep(clouds, MeasureKind.SUP_CK_L, grid, base, jobs=1)
        assert [row["lambda"] for row in rows] == [0.5, math.inf]

    def test_rejects_baselines(self):
        clouds = planted_classes(2, 3, n_atoms=8, seed=6)
        with pytest.raises(ParameterError):
            sweep(clouds, MeasureKind.VOL, jobs=1)


class TestExtractMany:
    def test_collects_per_file_errors(self, tmp_path, pocket_pdb_text):
        good = tmp_path / "1abc.pdb"
        good.write_text(pocket_pdb_text)
        bad = tmp_path / "2bad.pdb"
        bad.write_text(pocket_pdb_text.replace("ATP", "GTP"))
        records, errors = extract_many([str(good), str(bad)], ExtractionConfig(ligand_code="ATP"), [5.3, 5.5], jobs=1)
        assert [(r.cloud.id, r.cutoff_radius, len(r.cloud)) for r in records] == [("1abc", 5.3, 2), ("1abc", 5.5, 3)]
        assert list(errors) == [str(bad)]
        assert "GTP" in errors[str(bad)]

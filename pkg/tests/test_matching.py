import numpy as np
import pytest

from graspdec import (
    DEFAULT_WINDOW,
    ActivationPattern,
    GraspClass,
    Paradigm,
    PatternLibrary,
    classify_pattern,
    classify_trial,
    pattern_mse,
)
from graspdec.errors import DimensionMismatch, EmptyLibrary, InvalidConfig
from graspdec.matching import classify_soft


def pat(values, trial_id="p", cls=None):
    return ActivationPattern(np.asarray(values, dtype=np.uint8), trial_id, cls)


def random_pattern(rng, shape=(6, 30)):
    return pat(rng.integers(0, 2, size=shape))


def library_from(values_by_class, window=DEFAULT_WINDOW):
    by_class = {
        cls: tuple(pat(v, f"{cls.name}-{i}", cls) for i, v in enumerate(vals))
        for cls, vals in values_by_class.items()
    }
    n_ch = next(iter(by_class.values()))[0].shape[0]
    return PatternLibrary(by_class, window, n_ch)


class TestPatternMse:
    def test_identical_is_zero(self):
        rng = np.random.default_rng(0)
        a = random_pattern(rng)
        assert pattern_mse(a, pat(a.values)) == 0.0

    def test_complement_is_one(self):
        rng = np.random.default_rng(1)
        a = random_pattern(rng)
        b = pat(1 - a.values)
        assert pattern_mse(a, b) == 1.0

    def test_counts_disagreements(self):
        a = pat(np.zeros((6, 30)))
        values = np.zeros((6, 30), dtype=np.uint8)
        values.ravel()[:18] = 1
        assert pattern_mse(a, pat(values)) == pytest.approx(18 / 180)

    def test_brute_force_count(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a, b = random_pattern(rng), random_pattern(rng)
            n_diff = sum(
                int(a.values[i, j] != b.values[i, j])
                for i in range(6) for j in range(30)
            )
            assert pattern_mse(a, b) == pytest.approx(n_diff / 180)

    def test_times_entries_is_integer(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a, b = random_pattern(rng), random_pattern(rng)
            scaled = pattern_mse(a, b) * 180
            assert scaled == pytest.approx(round(scaled), abs=1e-9)

    def test_metric_properties(self):
        # on binary patterns MSE is the normalized Hamming distance
        rng = np.random.default_rng(4)
        a, b, c = (random_pattern(rng) for _ in range(3))
        assert pattern_mse(a, a) == 0.0
        assert pattern_mse(a, b) == pattern_mse(b, a)
        assert pattern_mse(a, c) <= pattern_mse(a, b) + pattern_mse(b, c) + 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            pattern_mse(pat(np.zeros((6, 30))), pat(np.zeros((6, 29))))


class TestClassifyPattern:
    def test_picks_nearest_class(self):
        rng = np.random.default_rng(5)
        base = rng.integers(0, 2, size=(6, 30)).astype(np.uint8)

        def flipped(n, seed):
            v = base.copy()
            idx = np.random.default_rng(seed).choice(180, size=n, replace=False)
            v.ravel()[idx] ^= 1
            return v

        lib = library_from({
            GraspClass.LATERAL: [flipped(60, s) for s in range(3)],
            GraspClass.PINCER: [flipped(5, 10 + s) for s in range(3)],
            GraspClass.PALMAR: [flipped(60, 20 + s) for s in range(3)],
        })
        report = classify_pattern(pat(base), lib)
        assert report.predicted is GraspClass.PINCER
        assert report.per_class_mean_mse[GraspClass.PINCER] == pytest.approx(
            5 / 180
        )

    def test_tie_breaks_to_lowest_class(self):
        shared = np.zeros((6, 30), dtype=np.uint8)
        lib = library_from({cls: [shared, shared] for cls in GraspClass})
        report = classify_pattern(pat(shared), lib)
        assert report.predicted is GraspClass.LATERAL
        assert all(v == 0.0 for v in report.per_class_mean_mse.values())

    def test_per_pattern_entries_cover_library(self):
        rng = np.random.default_rng(6)
        lib = library_from({
            cls: [rng.integers(0, 2, size=(6, 30)) for _ in range(50)]
            for cls in GraspClass
        })
        report = classify_pattern(random_pattern(rng), lib)
        assert len(report.per_pattern_mse) == 150
        for cls in GraspClass:
            indices = [i for c, i, _ in report.per_pattern_mse if c is cls]
            assert indices == list(range(50))

    def test_class_means_recomputable(self):
        rng = np.random.default_rng(7)
        lib = library_from({
            cls: [rng.integers(0, 2, size=(6, 30)) for _ in range(7)]
            for cls in GraspClass
        })
        report = classify_pattern(random_pattern(rng), lib)
        for cls in GraspClass:
            errors = [e for c, _, e in report.per_pattern_mse if c is cls]
            assert report.per_class_mean_mse[cls] == pytest.approx(
                np.mean(errors), rel=1e-12
            )

    def test_per_pattern_matches_pattern_mse(self):
        rng = np.random.default_rng(8)
        lib = library_from({
            GraspClass.LATERAL: [rng.integers(0, 2, size=(6, 30))
                                 for _ in range(4)],
            GraspClass.PINCER: [rng.integers(0, 2, size=(6, 30))
                                for _ in range(4)],
        })
        probe = random_pattern(rng)
        report = classify_pattern(probe, lib)
        for cls, i, err in report.per_pattern_mse:
            direct = pattern_mse(probe, lib.patterns_by_class[cls][i])
            assert err == pytest.approx(direct, abs=1e-12)

    def test_empty_library(self):
        lib = PatternLibrary({}, DEFAULT_WINDOW, 6)
        with pytest.raises(EmptyLibrary):
            classify_pattern(pat(np.zeros((6, 30))), lib)

    def test_shape_mismatch_vs_library(self):
        lib = library_from({GraspClass.LATERAL: [np.zeros((6, 30))]})
        with pytest.raises(DimensionMismatch):
            classify_pattern(pat(np.zeros((6, 29))), lib)

    def test_min_aggregate_nearest_neighbor(self):
        base = np.zeros((6, 30), dtype=np.uint8)
        near = base.copy()
        near.ravel()[:2] = 1  # 2 flips
        far = base.copy()
        far.ravel()[:90] = 1  # 90 flips
        mid = base.copy()
        mid.ravel()[:20] = 1  # 20 flips
        lib = library_from({
            GraspClass.LATERAL: [mid, mid],          # mean 20, min 20
            GraspClass.PINCER: [near, far],          # mean 46, min 2
        })
        probe = pat(base)
        assert classify_pattern(probe, lib, "mean").predicted \
            is GraspClass.LATERAL
        assert classify_pattern(probe, lib, "min").predicted \
            is GraspClass.PINCER

    def test_unknown_aggregate(self):
        lib = library_from({GraspClass.LATERAL: [np.zeros((6, 30))]})
        with pytest.raises(InvalidConfig):
            classify_pattern(pat(np.zeros((6, 30))), lib, "median")

    def test_decision_invariant_to_within_class_order(self):
        rng = np.random.default_rng(9)
        values = {
            cls: [rng.integers(0, 2, size=(6, 30)) for _ in range(6)]
            for cls in GraspClass
        }
        probe = random_pattern(rng)
        forward = classify_pattern(probe, library_from(values))
        reversed_lib = library_from(
            {cls: list(reversed(vals)) for cls, vals in values.items()}
        )
        backward = classify_pattern(probe, reversed_lib)
        assert forward.predicted is backward.predicted
        for cls in GraspClass:
            assert forward.per_class_mean_mse[cls] == pytest.approx(
                backward.per_class_mean_mse[cls], abs=1e-12
            )


class TestClassifySoft:
    def test_accepts_fractional_scores(self):
        lib = library_from({
            GraspClass.LATERAL: [np.zeros((6, 30))],
            GraspClass.PINCER: [np.ones((6, 30))],
        })
        report = classify_soft(np.full((6, 30), 0.1), lib)
        assert report.predicted is GraspClass.LATERAL
        report = classify_soft(np.full((6, 30), 0.9), lib)
        assert report.predicted is GraspClass.PINCER

    def test_rejects_out_of_range(self):
        lib = library_from({GraspClass.LATERAL: [np.zeros((6, 30))]})
        with pytest.raises(InvalidConfig):
            classify_soft(np.full((6, 30), 1.5), lib)
        with pytest.raises(InvalidConfig):
            classify_soft(np.full((6, 30), -0.5), lib)
        with pytest.raises(InvalidConfig):
            classify_soft(np.zeros(30), lib)

    def test_matches_hard_path_on_binary_input(self):
        rng = np.random.default_rng(10)
        lib = library_from({
            cls: [rng.integers(0, 2, size=(6, 30)) for _ in range(3)]
            for cls in GraspClass
        })
        probe = random_pattern(rng)
        hard = classify_pattern(probe, lib)
        soft = classify_soft(probe.values.astype(np.float64), lib)
        assert hard.predicted is soft.predicted
        assert hard.per_class_mean_mse == pytest.approx(soft.per_class_mean_mse)


class TestClassifyTrial:
    def test_correct_on_synthetic(self, trained_model, movement_trials):
        hits = sum(
            classify_trial(trained_model, t).predicted is t.class_label
            for t in movement_trials
        )
        assert hits / len(movement_trials) >= 0.9

    def test_deterministic(self, trained_model, movement_trials):
        trial = movement_trials[11]
        first = classify_trial(trained_model, trial)
        second = classify_trial(trained_model, trial)
        assert first.predicted is second.predicted
        assert first.per_class_mean_mse == second.per_class_mean_mse
        assert first.per_pattern_mse == second.per_pattern_mse

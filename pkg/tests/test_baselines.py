"""Trial-level baseline tests.

Two purpose-built generator configs expose each model's strength: the
"spatial" schedules differ in which muscles fire (separable from a whole
trial covariance), and the band-structured config shifts the coupling
frequency per class (visible only through the filter bank).
"""
import dataclasses

import numpy as np
import pytest

from graspdec import (
    BAND_PRESETS,
    ActivationSchedule,
    BaselineConfig,
    BaselineKind,
    GraspClass,
    Paradigm,
    SynthConfig,
    generate_trial,
    predict_baseline,
    train_baseline,
    trial_covariances,
)
from graspdec.baselines import (
    predict_pairwise,
    train_pairwise_baseline,
)
from graspdec.errors import (
    EmptyInput,
    InvalidConfig,
    SingleClassInput,
    UnlabeledTrial,
)

_SPATIAL_MUSCLES = {
    GraspClass.LATERAL: (0, 1),
    GraspClass.PINCER: (2, 3),
    GraspClass.PALMAR: (4, 5),
}


def spatial_trials(n_per_class=20, **config_kwargs):
    """Classes differ in WHICH muscles fire, active over most of the trial.

    This is the regime trial-level covariances can separate, unlike the
    default schedules where only burst timing differs.
    """
    cfg = SynthConfig(n_trials_per_class=n_per_class, **config_kwargs)
    trials = []
    for k, (cls, muscles) in enumerate(sorted(_SPATIAL_MUSCLES.items())):
        intervals = tuple(
            ((200.0, 3800.0),) if c in muscles else ()
            for c in range(6)
        )
        sch = ActivationSchedule(intervals, cls)
        for i in range(n_per_class):
            trials.append(
                generate_trial(sch, cfg, Paradigm.MOVEMENT, k * 100 + i)
            )
    return trials


def band_coded_trials(n_per_class=30):
    """Classes differ in coupling frequency (2 Hz per class step)."""
    cfg = SynthConfig(n_trials_per_class=n_per_class, class_freq_shift_hz=2.0)
    from graspdec import default_schedules

    schedules = default_schedules()
    trials = []
    for k, cls in enumerate(sorted(schedules)):
        for i in range(n_per_class):
            trials.append(
                generate_trial(schedules[cls], cfg, Paradigm.MOVEMENT,
                               k * 100 + i)
            )
    return trials


def split(trials, fold=0, n_folds=5):
    train = [t for i, t in enumerate(trials) if i % n_folds != fold]
    test = [t for i, t in enumerate(trials) if i % n_folds == fold]
    return train, test


@pytest.fixture(scope="module")
def spatial_set():
    return spatial_trials()


@pytest.fixture(scope="module")
def band_set():
    return band_coded_trials()


class TestModelI:
    def test_separates_spatially_coded_classes(self, spatial_set):
        model = train_baseline(BaselineKind.MODEL_I, spatial_set)
        hits = sum(
            predict_baseline(model, t) is t.class_label for t in spatial_set
        )
        assert hits / len(spatial_set) >= 0.9

    def test_held_out_accuracy(self, spatial_set):
        train, test = split(spatial_set)
        model = train_baseline(BaselineKind.MODEL_I, train)
        hits = sum(predict_baseline(model, t) is t.class_label for t in test)
        assert hits / len(test) >= 0.8

    def test_uses_broadband_single_band(self, spatial_set):
        model = train_baseline(BaselineKind.MODEL_I, spatial_set[::4])
        assert model.filter_bank.n_bands == 1
        assert model.filter_bank == BAND_PRESETS["broadband"]
        for spatial in model.spatial_per_class:
            assert spatial.regularization_gamma == 0.0


class TestModelII:
    def test_separates_band_coded_classes(self, band_set):
        train, test = split(band_set)
        model = train_baseline(BaselineKind.MODEL_II, train)
        hits = sum(predict_baseline(model, t) is t.class_label for t in test)
        assert hits / len(test) >= 0.9

    def test_at_least_matches_model1_on_band_coded(self, band_set):
        train, test = split(band_set)
        m1 = train_baseline(BaselineKind.MODEL_I, train)
        m2 = train_baseline(BaselineKind.MODEL_II, train)
        acc1 = np.mean([predict_baseline(m1, t) is t.class_label for t in test])
        acc2 = np.mean([predict_baseline(m2, t) is t.class_label for t in test])
        assert acc2 >= acc1 - 0.05

    def test_uses_filter_bank_with_regularization(self, spatial_set):
        model = train_baseline(BaselineKind.MODEL_II, spatial_set[::4])
        assert model.filter_bank == BAND_PRESETS["default"]
        assert model.filter_bank.n_bands == 17
        for spatial in model.spatial_per_class:
            assert spatial.regularization_gamma == 0.1


class TestValidation:
    def test_missing_class_rejected(self, spatial_set):
        two_classes = [
            t for t in spatial_set if t.class_label is not GraspClass.PALMAR
        ]
        with pytest.raises(SingleClassInput):
            train_baseline(BaselineKind.MODEL_I, two_classes)

    def test_unlabeled_trial_rejected(self, spatial_set):
        broken = [dataclasses.replace(spatial_set[0], class_label=None)]
        with pytest.raises(UnlabeledTrial):
            train_baseline(BaselineKind.MODEL_I, broken + spatial_set[1:6])

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            train_baseline(BaselineKind.MODEL_I, [])

    def test_config_validation(self):
        with pytest.raises(InvalidConfig):
            BaselineConfig(m_pairs=0)
        with pytest.raises(InvalidConfig):
            BaselineConfig(gamma=2.0)

    def test_config_overrides_survive_resolution(self):
        cfg = BaselineConfig(gamma=0.3, m_pairs=3)
        resolved = cfg.resolved(BaselineKind.MODEL_II)
        assert resolved.gamma == 0.3
        assert resolved.m_pairs == 3
        assert resolved.filter_bank == BAND_PRESETS["default"]

    def test_kind_defaults_fill_none_fields(self):
        resolved = BaselineConfig().resolved(BaselineKind.MODEL_I)
        assert resolved.filter_bank == BAND_PRESETS["broadband"]
        assert resolved.gamma == 0.0
        resolved = BaselineConfig().resolved(BaselineKind.MODEL_II)
        assert resolved.gamma == 0.1


class TestPrediction:
    def test_deterministic(self, spatial_set):
        model = train_baseline(BaselineKind.MODEL_I, spatial_set)
        trial = spatial_set[7]
        first = predict_baseline(model, trial)
        assert all(predict_baseline(model, trial) is first for _ in range(3))

    def test_ignores_emg(self, spatial_set):
        model = train_baseline(BaselineKind.MODEL_I, spatial_set)
        trial = spatial_set[13]
        with_emg = predict_baseline(model, trial)
        without = predict_baseline(model, dataclasses.replace(trial, emg=None))
        assert with_emg is without

    def test_returns_grasp_class(self, spatial_set):
        model = train_baseline(BaselineKind.MODEL_I, spatial_set[::4])
        assert isinstance(predict_baseline(model, spatial_set[0]), GraspClass)


class TestTrialCovariances:
    def test_shape_and_trace(self, spatial_set):
        covs = trial_covariances(spatial_set[0], BAND_PRESETS["default"])
        n_ch = spatial_set[0].eeg.n_channels
        assert covs.shape == (17, n_ch, n_ch)
        np.testing.assert_allclose(
            np.trace(covs, axis1=-2, axis2=-1), 1.0, atol=1e-9
        )


class TestPairwise:
    def test_majority_vote_separates(self, spatial_set):
        train, test = split(spatial_set)
        model = train_pairwise_baseline(BaselineKind.MODEL_I, train)
        assert len(model.pairs) == 3
        assert model.pairs == ((0, 1), (0, 2), (1, 2))
        hits = sum(predict_pairwise(model, t) is t.class_label for t in test)
        assert hits / len(test) >= 0.8

    def test_missing_class_rejected(self, spatial_set):
        sub = [t for t in spatial_set if t.class_label is GraspClass.LATERAL]
        with pytest.raises(SingleClassInput):
            train_pairwise_baseline(BaselineKind.MODEL_I, sub)

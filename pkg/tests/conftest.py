"""Shared fixtures. Session-scoped datasets keep the suite fast: synthetic
generation is cheap but pipeline training is not, so trained models are
built once and reused by read-only tests."""
import pytest

from graspdec import Paradigm, SynthConfig, generate_dataset, train_pipeline


@pytest.fixture(scope="session")
def small_dataset():
    """10 trials/class, default SNR: 30 movement + 30 imagery trials."""
    return generate_dataset(SynthConfig(n_trials_per_class=10))


@pytest.fixture(scope="session")
def movement_trials(small_dataset):
    return [t for t in small_dataset if t.paradigm is Paradigm.MOVEMENT]


@pytest.fixture(scope="session")
def imagery_trials(small_dataset):
    return [t for t in small_dataset if t.paradigm is Paradigm.IMAGERY]


@pytest.fixture(scope="session")
def trained_model(movement_trials):
    return train_pipeline(movement_trials)


@pytest.fixture(scope="session")
def clean_dataset():
    """Higher SNR variant for tests that need reliable per-segment decoding."""
    return generate_dataset(SynthConfig(n_trials_per_class=10, snr_db=3.0))


@pytest.fixture(scope="session")
def clean_movement(clean_dataset):
    return [t for t in clean_dataset if t.paradigm is Paradigm.MOVEMENT]

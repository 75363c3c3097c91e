"""Cross-validation harness, leakage audit, and accuracy reports.

Movement evaluation is stratified k-fold over labeled movement trials.
Imagery evaluation trains once on all movement trials and folds over the
imagery trials only, since imagery carries no EMG to train on. Every fold
records a leakage audit: train and test trial-id sets must be disjoint,
and for the pattern pipeline the library must contain only training-trial
patterns.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from .activation import (
    N_MUSCLE_CHANNELS,
    ActivationPattern,
    PatternLibrary,
    build_pattern,
)
from .baselines import (
    BaselineConfig,
    BaselineKind,
    fit_baseline_from_covariances,
    predict_from_covariances,
    trial_covariances,
)
from .errors import InsufficientData, InvalidConfig
from .matching import classify_pattern
from .pipeline import (
    PipelineConfig,
    PipelineModel,
    band_segment_covariances,
    channel_features,
    fit_channel_from_covariances,
)
from .signals import GraspClass, Paradigm, Trial

N_CLASSES = 3


class Method(Enum):
    PROPOSED = "proposed"
    MODEL_I = "model1"
    MODEL_II = "model2"


_BASELINE_KINDS = {
    Method.MODEL_I: BaselineKind.MODEL_I,
    Method.MODEL_II: BaselineKind.MODEL_II,
}


@dataclass(frozen=True)
class FoldAudit:
    """Per-fold train/test isolation record."""

    fold_index: int
    n_train: int
    n_test: int
    violations: int


@dataclass(frozen=True)
class EvaluationReport:
    """Per-fold accuracies with their aggregation and per-trial detail."""

    method: str
    paradigm: str
    per_fold_accuracy: tuple[float, ...]
    mean_accuracy: float
    std_accuracy: float
    confusion: np.ndarray
    per_trial_records: tuple[tuple[str, int, int], ...]
    audits: tuple[FoldAudit, ...] = ()
    percent: bool = False

    def __post_init__(self):
        confusion = np.ascontiguousarray(self.confusion, dtype=np.int64)
        confusion.setflags(write=False)
        object.__setattr__(self, "confusion", confusion)
        object.__setattr__(self, "per_fold_accuracy",
                           tuple(float(a) for a in self.per_fold_accuracy))
        object.__setattr__(self, "per_trial_records",
                           tuple(self.per_trial_records))
        object.__setattr__(self, "audits", tuple(self.audits))

    @property
    def total_violations(self) -> int:
        return sum(a.violations for a in self.audits)

    @classmethod
    def from_fold_accuracies(cls, accuracies: Sequence[float],
                             method: str = "", paradigm: str = "",
                             confusion=None, records=(), audits=(),
                             percent: bool = False) -> "EvaluationReport":
        """Aggregate raw per-fold values verbatim (sample std, n-1)."""
        values = np.asarray(list(accuracies), dtype=np.float64)
        if values.size == 0:
            raise InsufficientData("need at least one fold accuracy")
        mean = float(values.mean())
        std = float(values.std(ddof=1)) if values.size > 1 else 0.0
        if confusion is None:
            confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
        return cls(method, paradigm, tuple(values), mean, std, confusion,
                   tuple(records), tuple(audits), percent)


def stratified_folds(labels: Sequence[int], k_folds: int) -> list[np.ndarray]:
    """Deterministic stratified folds: class members deal out round-robin.

    Returns k test-index arrays partitioning range(len(labels)).
    """
    labels = np.asarray(labels)
    if k_folds < 2:
        raise InsufficientData("need at least 2 folds")
    folds: list[list[int]] = [[] for _ in range(k_folds)]
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if len(members) < k_folds:
            raise InsufficientData(
                f"class {cls} has {len(members)} trials for {k_folds} folds"
            )
        for i in range(k_folds):
            folds[i].extend(members[i::k_folds])
    return [np.sort(np.asarray(f, dtype=np.intp)) for f in folds]


def shuffle_labels(trials: Sequence[Trial], seed: int) -> list[Trial]:
    """Permute class labels across trials; the label-destruction control."""
    trials = list(trials)
    rng = np.random.default_rng(seed)
    labels = [t.class_label for t in trials]
    order = rng.permutation(len(labels))
    return [
        dataclasses.replace(t, class_label=labels[order[i]])
        for i, t in enumerate(trials)
    ]


def _require_labels(trials: Sequence[Trial]) -> np.ndarray:
    labels = []
    for t in trials:
        if t.class_label is None:
            raise InsufficientData(
                f"trial {t.trial_id!r} is unlabeled; evaluation needs labels"
            )
        labels.append(int(t.class_label))
    return np.asarray(labels)


def _audit(fold_index: int, train_ids: set, test_ids: set,
           library: Optional[PatternLibrary]) -> FoldAudit:
    violations = len(train_ids & test_ids)
    if library is not None:
        for cls in library.classes():
            for p in library.patterns_by_class[cls]:
                if p.trial_id in test_ids or p.trial_id not in train_ids:
                    violations += 1
    return FoldAudit(fold_index, len(train_ids), len(test_ids), violations)


def _fit_pipeline_cached(train_idx: np.ndarray,
                         covs: list[np.ndarray],
                         patterns: list[ActivationPattern],
                         config: PipelineConfig) -> PipelineModel:
    by_class: dict = {}
    for i in train_idx:
        by_class.setdefault(patterns[i].class_label, []).append(patterns[i])
    library = PatternLibrary(
        {cls: tuple(ps) for cls, ps in sorted(by_class.items())},
        config.window, patterns[train_idx[0]].shape[0],
    )
    train_covs = [covs[i] for i in train_idx]
    classifiers = []
    for channel in range(N_MUSCLE_CHANNELS):
        channel_labels = [patterns[i].values[channel] for i in train_idx]
        classifiers.append(
            fit_channel_from_covariances(
                channel, train_covs, channel_labels, config.filter_bank,
                config.m_pairs, config.gamma, config.lda_shrinkage,
            )
        )
    return PipelineModel(tuple(classifiers), config.window, library,
                         Paradigm.MOVEMENT, config)


def _predict_pipeline_cached(model: PipelineModel, trial: Trial,
                             covs: np.ndarray) -> int:
    rows = []
    for clf in model.channel_classifiers:
        features = channel_features(clf.spatial.per_band, covs)
        rows.append(clf.lda.predict(features))
    pattern = ActivationPattern(np.stack(rows), trial.trial_id,
                                trial.class_label)
    return int(classify_pattern(pattern, model.library).predicted)


def cross_validate(trials: Sequence[Trial],
                   config: Union[PipelineConfig, BaselineConfig, None],
                   method: Union[Method, str],
                   k_folds: int = 5,
                   paradigm: Paradigm = Paradigm.MOVEMENT,
                   ) -> EvaluationReport:
    """Stratified k-fold accuracy of one method on one paradigm.

    For movement, folds split the movement trials; for imagery, the model
    is trained on all movement trials and the folds split the imagery
    trials. Accuracies are fractions in [0, 1].
    """
    method = Method(method)
    movement = [t for t in trials if t.paradigm is Paradigm.MOVEMENT]
    imagery = [t for t in trials if t.paradigm is Paradigm.IMAGERY]
    if not movement:
        raise InsufficientData("no movement trials to train on")
    move_labels = _require_labels(movement)

    if paradigm is Paradigm.MOVEMENT:
        eval_trials, eval_labels = movement, move_labels
    else:
        if not imagery:
            raise InsufficientData("no imagery trials to evaluate")
        eval_trials, eval_labels = imagery, _require_labels(imagery)
    folds = stratified_folds(eval_labels, k_folds)

    if method is Method.PROPOSED:
        pipe_config = config or PipelineConfig()
        if not isinstance(pipe_config, PipelineConfig):
            raise InvalidConfig("proposed method takes a PipelineConfig")
        report = _cross_validate_proposed(
            movement, move_labels, eval_trials, eval_labels, folds,
            pipe_config, paradigm,
        )
    else:
        base_config = config or BaselineConfig()
        if not isinstance(base_config, BaselineConfig):
            raise InvalidConfig("baseline methods take a BaselineConfig")
        report = _cross_validate_baseline(
            _BASELINE_KINDS[method], movement, move_labels, eval_trials,
            eval_labels, folds, base_config, paradigm,
        )
    return dataclasses.replace(report, method=method.value,
                               paradigm=paradigm.value)


def _finish_report(fold_accs, confusion, records, audits) -> EvaluationReport:
    return EvaluationReport.from_fold_accuracies(
        fold_accs, confusion=confusion, records=records, audits=audits,
    )


def _cross_validate_proposed(movement, move_labels, eval_trials, eval_labels,
                             folds, config: PipelineConfig,
                             paradigm: Paradigm) -> EvaluationReport:
    # the expensive per-trial work is label-free; compute once, reuse per fold
    covs = [
        band_segment_covariances(t.eeg, config.filter_bank, config.window,
                                 dtype=np.float32)
        for t in movement
    ]
    patterns = [build_pattern(t, config.window, config.threshold)
                for t in movement]

    transfer = paradigm is Paradigm.IMAGERY
    if transfer:
        eval_covs = [
            band_segment_covariances(t.eeg, config.filter_bank, config.window,
                                     dtype=np.float32)
            for t in eval_trials
        ]
        all_train = np.arange(len(movement))
        model = _fit_pipeline_cached(all_train, covs, patterns, config)
        train_ids = {t.trial_id for t in movement}
    else:
        eval_covs = covs

    fold_accs, records, audits = [], [], []
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for fold_index, test_idx in enumerate(folds):
        if not transfer:
            test_set = set(test_idx.tolist())
            train_idx = np.asarray(
                [i for i in range(len(movement)) if i not in test_set],
                dtype=np.intp,
            )
            model = _fit_pipeline_cached(train_idx, covs, patterns, config)
            train_ids = {movement[i].trial_id for i in train_idx}
        test_ids = {eval_trials[i].trial_id for i in test_idx}
        correct = 0
        for i in test_idx:
            predicted = _predict_pipeline_cached(model, eval_trials[i],
                                                 eval_covs[i])
            true = int(eval_labels[i])
            confusion[true, predicted] += 1
            records.append((eval_trials[i].trial_id, true, predicted))
            correct += predicted == true
        fold_accs.append(correct / len(test_idx))
        audits.append(_audit(fold_index, train_ids, test_ids, model.library))
    return _finish_report(fold_accs, confusion, records, audits)


def _cross_validate_baseline(kind, movement, move_labels, eval_trials,
                             eval_labels, folds, config: BaselineConfig,
                             paradigm: Paradigm) -> EvaluationReport:
    bank = config.resolved(kind).filter_bank
    covs = np.stack([trial_covariances(t, bank) for t in movement])

    transfer = paradigm is Paradigm.IMAGERY
    if transfer:
        eval_covs = np.stack([trial_covariances(t, bank)
                              for t in eval_trials])
        model = fit_baseline_from_covariances(kind, covs, move_labels, config)
        train_ids = {t.trial_id for t in movement}
    else:
        eval_covs = covs

    fold_accs, records, audits = [], [], []
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for fold_index, test_idx in enumerate(folds):
        if not transfer:
            test_set = set(test_idx.tolist())
            train_idx = np.asarray(
                [i for i in range(len(movement)) if i not in test_set],
                dtype=np.intp,
            )
            model = fit_baseline_from_covariances(
                kind, covs[train_idx], move_labels[train_idx], config
            )
            train_ids = {movement[i].trial_id for i in train_idx}
        test_ids = {eval_trials[i].trial_id for i in test_idx}
        predicted = predict_from_covariances(model, eval_covs[test_idx])
        correct = 0
        for j, i in enumerate(test_idx):
            true = int(eval_labels[i])
            confusion[true, predicted[j]] += 1
            records.append((eval_trials[i].trial_id, true, int(predicted[j])))
            correct += predicted[j] == true
        fold_accs.append(correct / len(test_idx))
        audits.append(_audit(fold_index, train_ids, test_ids, None))
    return _finish_report(fold_accs, confusion, records, audits)


def _as_percent(report: EvaluationReport, value: float) -> float:
    return value if report.percent else value * 100.0


def emit_report(report: EvaluationReport, format: str = "table") -> str:
    """Render a report; deterministic text, accuracies at two decimals."""
    if format == "csv":
        lines = ["fold,accuracy_percent"]
        for i, acc in enumerate(report.per_fold_accuracy, start=1):
            lines.append(f"{i},{_as_percent(report, acc):.2f}")
        lines.append(f"mean,{_as_percent(report, report.mean_accuracy):.2f}")
        lines.append(f"std,{_as_percent(report, report.std_accuracy):.2f}")
        return "\n".join(lines) + "\n"
    if format != "table":
        raise InvalidConfig(f"unknown report format {format!r}")

    lines = []
    if report.method or report.paradigm:
        lines.append(f"Method: {report.method or '-'}   "
                     f"Paradigm: {report.paradigm or '-'}")
    lines.append("Fold  Accuracy (%)")
    for i, acc in enumerate(report.per_fold_accuracy, start=1):
        lines.append(f"{i:<4d}  {_as_percent(report, acc):.2f}")
    lines.append(
        f"Mean±Std.  {_as_percent(report, report.mean_accuracy):.2f}"
        f"±{_as_percent(report, report.std_accuracy):.2f}"
    )
    if report.per_trial_records:
        names = [str(GraspClass(i)) for i in range(N_CLASSES)]
        width = max(len(n) for n in names) + 2
        lines.append("")
        lines.append("Confusion (rows true, columns predicted):")
        lines.append(" " * width + "".join(f"{n:>{width}}" for n in names))
        for r, name in enumerate(names):
            row = "".join(f"{int(report.confusion[r, c]):>{width}d}"
                          for c in range(N_CLASSES))
            lines.append(f"{name:<{width}}{row}")
    if report.audits:
        lines.append("")
        lines.append(
            f"Leakage audit: {report.total_violations} violations "
            f"across {len(report.audits)} folds"
        )
    return "\n".join(lines) + "\n"

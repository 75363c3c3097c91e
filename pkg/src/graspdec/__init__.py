"""Grasp-action decoding from EEG via EMG-derived muscle activation patterns.

The pipeline trains one CSP+LDA classifier per muscle channel on EEG
segments labeled by EMG binarization, estimates a binary activation
pattern for unseen trials from EEG alone, and classifies the grasp by
minimum mean squared error against an EMG-built pattern library. Trial-
level CSP+LDA and filter-bank regularized CSP baselines, a synthetic
ground-truth generator, persistence, and an evaluation harness round out
the package.
"""
from . import _kernels
from .activation import (
    N_MUSCLE_CHANNELS,
    ActivationPattern,
    PatternLibrary,
    ThresholdPolicy,
    ThresholdSource,
    binarize_channel,
    build_library,
    build_pattern,
    rms,
    segment_rms,
    trial_threshold,
)
from .baselines import (
    BaselineConfig,
    BaselineKind,
    BaselineModel,
    predict_baseline,
    train_baseline,
    trial_covariances,
)
from .csp import (
    CspModel,
    FeatureVector,
    SpatialFilterModel,
    class_covariance,
    extract_features,
    fit_csp,
)
from .dataio import (
    DatasetManifest,
    deserialize_model,
    read_dataset,
    read_manifest,
    read_synth_config,
    serialize_model,
    write_dataset,
    write_manifest,
)
from .errors import (
    ChecksumMismatch,
    FormatError,
    GraspDecError,
    InvalidConfig,
    VersionMismatch,
)
from .evaluate import (
    EvaluationReport,
    FoldAudit,
    Method,
    cross_validate,
    emit_report,
    shuffle_labels,
    stratified_folds,
)
from .filtering import (
    FilterCoefficients,
    apply_bandpass,
    apply_filter_bank,
    design_bandpass,
    notch_filter,
)
from .lda import (
    LdaModel,
    MulticlassLdaModel,
    fit_lda,
    fit_multiclass_lda,
)
from .matching import (
    MatchReport,
    classify_pattern,
    classify_trial,
    pattern_mse,
)
from .pipeline import (
    ChannelClassifier,
    PipelineConfig,
    PipelineModel,
    estimate_pattern,
    predict_segment,
    train_channel_classifier,
    train_pipeline,
)
from .signals import (
    BAND_PRESETS,
    DEFAULT_WINDOW,
    EEG_CHANNELS_DEFAULT,
    EMG_CHANNELS_DEFAULT,
    FilterBankSpec,
    GraspClass,
    Paradigm,
    SignalEpoch,
    Trial,
    WindowSpec,
    segment,
)
from .synth import (
    ActivationSchedule,
    SynthConfig,
    default_schedules,
    expected_pattern,
    generate_dataset,
    generate_trial,
)

__version__ = "0.1.0"

kernel_backend = _kernels.backend

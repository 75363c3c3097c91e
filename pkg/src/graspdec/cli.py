"""Command-line interface.

Subcommands: synth (generate a dataset), train (fit and persist a model),
classify (apply a model to a dataset), eval (cross-validated accuracy),
inspect (dataset summary). Exit codes are a stable contract: 0 success,
1 usage error, 2 data or format error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .activation import ThresholdPolicy
from .baselines import BaselineConfig, BaselineKind, predict_baseline, \
    train_baseline
from .dataio import (
    MANIFEST_NAME,
    deserialize_model,
    read_dataset,
    read_manifest,
    read_synth_config,
    serialize_model,
    write_dataset,
)
from .errors import (
    ChannelCountMismatch,
    DegenerateSegment,
    DimensionMismatch,
    EmptyInput,
    EmptyLibrary,
    EmptySegment,
    FormatError,
    InsufficientData,
    InvalidBand,
    InvalidConfig,
    MissingEMG,
    SingleClassInput,
    SingularComposite,
    SingularCovariance,
    UnlabeledTrial,
    UnstableDesign,
    WindowTooLong,
)
from .evaluate import cross_validate, emit_report, shuffle_labels
from .matching import classify_trial
from .pipeline import PipelineConfig, PipelineModel, train_pipeline
from .signals import (
    BAND_PRESETS,
    DEFAULT_TRIAL_MS,
    FilterBankSpec,
    Paradigm,
    WindowSpec,
)
from .synth import SynthConfig, generate_dataset

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_USAGE_ERRORS = (InvalidConfig, InvalidBand, WindowTooLong)
_DATA_ERRORS = (FormatError, MissingEMG, UnlabeledTrial, ChannelCountMismatch,
                SingleClassInput, InsufficientData, EmptyInput, EmptyLibrary,
                EmptySegment, DimensionMismatch, OSError)
_NUMERIC_ERRORS = (UnstableDesign, SingularComposite, SingularCovariance,
                   DegenerateSegment, np.linalg.LinAlgError)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the exit-code contract
    # reserves 2 for data errors, so usage failures raise instead
    def error(self, message):
        raise _UsageError(message)


def _window_from_args(args) -> WindowSpec:
    expected = int(
        np.floor((DEFAULT_TRIAL_MS - args.window_ms) / args.step_ms + 1e-9)
    ) + 1
    return WindowSpec(args.window_ms, args.step_ms, expected)


def _bands_from_arg(text: Optional[str]) -> Optional[FilterBankSpec]:
    if text is None:
        return None
    if text in BAND_PRESETS:
        return BAND_PRESETS[text]
    parts = text.split(",")
    if len(parts) != 4:
        raise _UsageError(
            f"--bands takes a preset ({', '.join(sorted(BAND_PRESETS))}) "
            f"or low,high,width,step"
        )
    try:
        low, high, width, step = (float(p) for p in parts)
    except ValueError:
        raise _UsageError(f"--bands values must be numbers: {text!r}")
    return FilterBankSpec(low, high, width, step)


def _add_model_options(sub) -> None:
    sub.add_argument("--window-ms", type=float, default=1100.0)
    sub.add_argument("--step-ms", type=float, default=100.0)
    sub.add_argument("--bands", default=None,
                     help="preset name or low,high,width,step in Hz")
    sub.add_argument("--csp-pairs", type=int, default=2)
    sub.add_argument("--gamma", type=float, default=None,
                     help="covariance shrinkage (default per method)")
    sub.add_argument("--shrinkage", type=float, default=0.05,
                     help="LDA covariance shrinkage")
    sub.add_argument("--threshold-scale", type=float, default=1.0,
                     help="EMG activation threshold scale")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graspdec",
                     description="Grasp-action decoding from EEG with "
                                 "EMG-derived activation patterns")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic dataset")
    synth.add_argument("--config", default=None,
                       help="key=value config file (defaults when omitted)")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--seed", type=int, default=None,
                       help="override the config rng_seed")
    synth.set_defaults(func=_cmd_synth)

    train = sub.add_parser("train", help="fit a model and write it to disk")
    train.add_argument("--data", required=True)
    train.add_argument("--method", required=True,
                       choices=["proposed", "model1", "model2"])
    train.add_argument("--out", required=True)
    _add_model_options(train)
    train.set_defaults(func=_cmd_train)

    classify = sub.add_parser("classify",
                              help="classify every trial in a dataset")
    classify.add_argument("--model", required=True)
    classify.add_argument("--data", required=True)
    classify.add_argument("--out", required=True)
    classify.set_defaults(func=_cmd_classify)

    evaluate = sub.add_parser("eval", help="cross-validated accuracy")
    evaluate.add_argument("--data", required=True)
    evaluate.add_argument("--method", required=True,
                          choices=["proposed", "model1", "model2"])
    evaluate.add_argument("--folds", type=int, default=5)
    evaluate.add_argument("--paradigm", default="movement",
                          choices=["movement", "imagery"])
    evaluate.add_argument("--report", default="table",
                          choices=["table", "csv"])
    evaluate.add_argument("--shuffle-seed", type=int, default=None,
                          help="permute labels first (chance-level control)")
    _add_model_options(evaluate)
    evaluate.set_defaults(func=_cmd_eval)

    inspect = sub.add_parser("inspect", help="summarize a dataset")
    inspect.add_argument("--data", required=True)
    inspect.set_defaults(func=_cmd_inspect)
    return parser


def _pipeline_config(args) -> PipelineConfig:
    bands = _bands_from_arg(args.bands) or BAND_PRESETS["default"]
    return PipelineConfig(
        window=_window_from_args(args),
        filter_bank=bands,
        m_pairs=args.csp_pairs,
        gamma=args.gamma if args.gamma is not None else 0.0,
        lda_shrinkage=args.shrinkage,
        threshold=ThresholdPolicy(args.threshold_scale),
    )


def _baseline_config(args) -> BaselineConfig:
    return BaselineConfig(
        filter_bank=_bands_from_arg(args.bands),
        gamma=args.gamma,
        m_pairs=args.csp_pairs,
        lda_shrinkage=args.shrinkage,
    )


def _cmd_synth(args) -> int:
    if args.config is not None:
        config = read_synth_config(args.config)
    else:
        config = SynthConfig()
    if args.seed is not None:
        config = dataclasses.replace(config, rng_seed=args.seed)
    trials = generate_dataset(config)
    manifest = write_dataset(trials, args.out)
    print(f"wrote {len(manifest.trial_entries)} trials to {args.out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    trials = read_dataset(args.data)
    movement = [t for t in trials if t.paradigm is Paradigm.MOVEMENT]
    if args.method == "proposed":
        model = train_pipeline(movement, _pipeline_config(args))
    else:
        kind = BaselineKind(args.method)
        model = train_baseline(kind, movement, _baseline_config(args))
    serialize_model(model, args.out)
    print(f"trained {args.method} on {len(movement)} movement trials "
          f"-> {args.out}")
    return EXIT_OK


def _cmd_classify(args) -> int:
    model = deserialize_model(args.model)
    trials = read_dataset(args.data)
    lines = ["trial_id true predicted"]
    n_labeled = n_correct = 0
    for trial in trials:
        if isinstance(model, PipelineModel):
            predicted = classify_trial(model, trial).predicted
        else:
            predicted = predict_baseline(model, trial)
        true = "unlabeled" if trial.class_label is None \
            else str(trial.class_label)
        lines.append(f"{trial.trial_id} {true} {predicted}")
        if trial.class_label is not None:
            n_labeled += 1
            n_correct += predicted == trial.class_label
    if n_labeled:
        lines.append(f"# accuracy {n_correct / n_labeled:.4f} "
                     f"over {n_labeled} labeled trials")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"classified {len(trials)} trials -> {args.out}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    trials = read_dataset(args.data)
    if args.shuffle_seed is not None:
        trials = shuffle_labels(trials, args.shuffle_seed)
    if args.method == "proposed":
        config = _pipeline_config(args)
    else:
        config = _baseline_config(args)
    report = cross_validate(trials, config, args.method,
                            k_folds=args.folds,
                            paradigm=Paradigm(args.paradigm))
    sys.stdout.write(emit_report(report, args.report))
    return EXIT_OK


def _cmd_inspect(args) -> int:
    manifest = read_manifest(Path(args.data) / MANIFEST_NAME)
    print(f"version: {manifest.version}")
    print(f"sample_rate_hz: {manifest.sample_rate_hz}")
    print(f"eeg_channels ({len(manifest.eeg_channel_names)}): "
          f"{','.join(manifest.eeg_channel_names)}")
    print(f"emg_channels ({len(manifest.emg_channel_names)}): "
          f"{','.join(manifest.emg_channel_names)}")
    print(f"reference_emg_channel: {manifest.reference_emg_channel}")
    print(f"trials: {len(manifest.trial_entries)}")
    for paradigm, counts in sorted(manifest.class_counts().items()):
        breakdown = ", ".join(f"{label}={n}"
                              for label, n in sorted(counts.items()))
        print(f"  {paradigm}: {breakdown}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except _USAGE_ERRORS as e:
        print(f"invalid parameters: {e}", file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except _NUMERIC_ERRORS as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

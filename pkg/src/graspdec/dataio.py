"""Dataset and model persistence.

Signal files are a fixed binary layout (magic, little-endian header,
channel-major float32 samples, CRC32 trailer) chosen for bit-exact
round-trips and trivial parsing. The dataset manifest and config files
share one UTF-8 key=value text format with LF line endings. Models are
stored as a zip of arrays (numpy archive) plus a JSON metadata record.
"""
from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .activation import ActivationPattern, PatternLibrary, ThresholdPolicy
from .baselines import BaselineKind, BaselineModel
from .csp import CspModel, SpatialFilterModel
from .errors import ChecksumMismatch, FormatError, InvalidConfig, VersionMismatch
from .lda import LdaModel, MulticlassLdaModel
from .pipeline import ChannelClassifier, PipelineConfig, PipelineModel
from .signals import (
    FilterBankSpec,
    GraspClass,
    Paradigm,
    SignalEpoch,
    Trial,
    WindowSpec,
)
from .synth import SynthConfig

MAGIC = b"GRSPDAT1" + b"\x00" * 8  # 16 bytes
_HEADER = struct.Struct("<IId")  # n_channels, n_samples, sample_rate
MANIFEST_NAME = "manifest.txt"
MANIFEST_VERSION = 1
MODEL_FORMAT = "graspdec-model"
MODEL_VERSION = 1

PathLike = Union[str, Path]


# --- signal files ---------------------------------------------------------

def write_signal(path: PathLike, samples: np.ndarray,
                 sample_rate_hz: float) -> None:
    """Write one epoch's samples; values are stored as float32."""
    samples = np.ascontiguousarray(samples, dtype=np.float32)
    if samples.ndim != 2:
        raise InvalidConfig("samples must be a [channels x samples] matrix")
    header = _HEADER.pack(samples.shape[0], samples.shape[1],
                          float(sample_rate_hz))
    payload = header + samples.tobytes()
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(payload)
        f.write(struct.pack("<I", crc))


def read_signal(path: PathLike) -> tuple[np.ndarray, float]:
    """Read samples and sample rate; verifies magic, length, and CRC."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read signal file: {e}", path=str(path))
    if len(blob) < len(MAGIC) + _HEADER.size + 4:
        raise FormatError("file shorter than the fixed header", path=str(path))
    if blob[:len(MAGIC)] != MAGIC:
        raise FormatError("bad magic; not a signal file", path=str(path))
    payload, (crc_stored,) = blob[len(MAGIC):-4], struct.unpack("<I", blob[-4:])
    n_channels, n_samples, sample_rate = _HEADER.unpack_from(payload)
    expected = _HEADER.size + 4 * n_channels * n_samples
    if len(payload) != expected:
        raise FormatError(
            f"payload holds {len(payload)} bytes, header implies {expected}",
            path=str(path),
        )
    if zlib.crc32(payload) & 0xFFFFFFFF != crc_stored:
        raise ChecksumMismatch("CRC32 mismatch; file corrupted",
                               path=str(path))
    samples = np.frombuffer(payload[_HEADER.size:], dtype="<f4")
    return samples.reshape(n_channels, n_samples).copy(), sample_rate


# --- key=value text -------------------------------------------------------

def parse_keyvalues(path: PathLike) -> list[tuple[int, str, str]]:
    """Parse `key=value` lines; returns (line_number, key, value) triples.

    Blank lines and `#` comments are skipped. Duplicate keys are allowed
    (the manifest repeats `trial=`); callers decide their semantics.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(f"cannot read: {e}", path=str(path))
    except UnicodeDecodeError as e:
        raise FormatError(f"not UTF-8 text: {e}", path=str(path))
    out = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise FormatError("expected key=value", path=str(path), line=lineno)
        key, _, value = stripped.partition("=")
        out.append((lineno, key.strip(), value.strip()))
    return out


def write_keyvalues(path: PathLike, pairs: Sequence[tuple[str, str]]) -> None:
    text = "".join(f"{k}={v}\n" for k, v in pairs)
    Path(path).write_text(text, encoding="utf-8", newline="\n")


# --- dataset manifest -----------------------------------------------------

@dataclass(frozen=True)
class TrialEntry:
    trial_id: str
    paradigm: str
    class_label: str  # grasp class name or "unlabeled"
    eeg_file: str
    emg_file: str  # file name or "none"


@dataclass(frozen=True)
class DatasetManifest:
    version: int
    sample_rate_hz: float
    eeg_channel_names: tuple[str, ...]
    emg_channel_names: tuple[str, ...]
    reference_emg_channel: Optional[int]
    trial_entries: tuple[TrialEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "eeg_channel_names",
                           tuple(self.eeg_channel_names))
        object.__setattr__(self, "emg_channel_names",
                           tuple(self.emg_channel_names))
        object.__setattr__(self, "trial_entries", tuple(self.trial_entries))
        if not self.eeg_channel_names or not self.emg_channel_names:
            raise InvalidConfig("channel name lists must be non-empty")
        ids = [t.trial_id for t in self.trial_entries]
        if len(set(ids)) != len(ids):
            raise InvalidConfig("trial ids must be unique")

    def class_counts(self) -> dict[str, dict[str, int]]:
        """Per-paradigm class histogram, for the summary views."""
        out: dict[str, dict[str, int]] = {}
        for entry in self.trial_entries:
            bucket = out.setdefault(entry.paradigm, {})
            bucket[entry.class_label] = bucket.get(entry.class_label, 0) + 1
        return out


def write_manifest(manifest: DatasetManifest, path: PathLike) -> None:
    pairs = [
        ("version", str(manifest.version)),
        ("sample_rate_hz", repr(manifest.sample_rate_hz)),
        ("eeg_channels", ",".join(manifest.eeg_channel_names)),
        ("emg_channels", ",".join(manifest.emg_channel_names)),
        ("reference_emg_channel",
         "none" if manifest.reference_emg_channel is None
         else str(manifest.reference_emg_channel)),
    ]
    for t in manifest.trial_entries:
        pairs.append(
            ("trial", f"{t.trial_id} {t.paradigm} {t.class_label} "
                      f"{t.eeg_file} {t.emg_file}")
        )
    write_keyvalues(path, pairs)


def read_manifest(path: PathLike) -> DatasetManifest:
    path = Path(path)
    fields: dict[str, str] = {}
    entries = []
    for lineno, key, value in parse_keyvalues(path):
        if key == "trial":
            parts = value.split()
            if len(parts) != 5:
                raise FormatError(
                    f"trial entry needs 5 fields, got {len(parts)}",
                    path=str(path), line=lineno,
                )
            entries.append(TrialEntry(*parts))
        elif key in fields:
            raise FormatError(f"duplicate key {key!r}", path=str(path),
                              line=lineno)
        else:
            fields[key] = value
    for required in ("version", "sample_rate_hz", "eeg_channels",
                     "emg_channels"):
        if required not in fields:
            raise FormatError(f"missing key {required!r}", path=str(path))
    try:
        version = int(fields["version"])
        sample_rate = float(fields["sample_rate_hz"])
    except ValueError as e:
        raise FormatError(f"bad numeric field: {e}", path=str(path))
    if version > MANIFEST_VERSION:
        raise VersionMismatch(
            f"manifest version {version} is newer than supported "
            f"{MANIFEST_VERSION}", path=str(path),
        )
    ref = fields.get("reference_emg_channel", "none")
    try:
        reference = None if ref == "none" else int(ref)
    except ValueError:
        raise FormatError(f"bad reference_emg_channel {ref!r}", path=str(path))
    try:
        return DatasetManifest(
            version, sample_rate,
            tuple(fields["eeg_channels"].split(",")),
            tuple(fields["emg_channels"].split(",")),
            reference, tuple(entries),
        )
    except InvalidConfig as e:
        raise FormatError(str(e), path=str(path))


# --- dataset read/write ---------------------------------------------------

def write_dataset(trials: Sequence[Trial], directory: PathLike,
                  reference_emg_channel: Optional[int] = None,
                  ) -> DatasetManifest:
    """Write trials and a manifest into a directory; returns the manifest."""
    trials = list(trials)
    if not trials:
        raise InvalidConfig("cannot write an empty dataset")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    first = trials[0]
    emg_names = None
    entries = []
    for trial in trials:
        if trial.eeg.sample_rate_hz != first.eeg.sample_rate_hz:
            raise InvalidConfig("trials disagree in sample rate")
        if trial.eeg.channel_names != first.eeg.channel_names:
            raise InvalidConfig("trials disagree in EEG channel names")
        eeg_file = f"{trial.trial_id}.eeg.bin"
        write_signal(directory / eeg_file, trial.eeg.samples,
                     trial.eeg.sample_rate_hz)
        emg_file = "none"
        if trial.emg is not None:
            if emg_names is None:
                emg_names = trial.emg.channel_names
            elif trial.emg.channel_names != emg_names:
                raise InvalidConfig("trials disagree in EMG channel names")
            emg_file = f"{trial.trial_id}.emg.bin"
            write_signal(directory / emg_file, trial.emg.samples,
                         trial.emg.sample_rate_hz)
        label = "unlabeled" if trial.class_label is None \
            else str(trial.class_label)
        entries.append(TrialEntry(trial.trial_id, trial.paradigm.value,
                                  label, eeg_file, emg_file))
    manifest = DatasetManifest(
        MANIFEST_VERSION, first.eeg.sample_rate_hz,
        first.eeg.channel_names,
        emg_names if emg_names is not None else ("EMG01",),
        reference_emg_channel, tuple(entries),
    )
    write_manifest(manifest, directory / MANIFEST_NAME)
    return manifest


def _load_epoch(directory: Path, file_name: str, names: tuple[str, ...],
                expect_rate: float) -> SignalEpoch:
    path = directory / file_name
    if not path.is_file():
        raise FormatError(f"referenced file missing: {file_name}",
                          path=str(directory / MANIFEST_NAME))
    samples, rate = read_signal(path)
    if rate != expect_rate:
        raise FormatError(
            f"sample rate {rate} disagrees with manifest {expect_rate}",
            path=str(path),
        )
    if samples.shape[0] != len(names):
        raise FormatError(
            f"{samples.shape[0]} channels on disk, manifest names "
            f"{len(names)}", path=str(path),
        )
    return SignalEpoch(samples, rate, names)


def read_dataset(directory: PathLike) -> list[Trial]:
    """Read a dataset directory back into trials.

    When the manifest declares a reference EMG channel, every other EMG
    channel is re-referenced against it (subtraction) and the reference
    itself is dropped.
    """
    directory = Path(directory)
    manifest = read_manifest(directory / MANIFEST_NAME)
    trials = []
    for entry in manifest.trial_entries:
        try:
            paradigm = Paradigm(entry.paradigm)
        except ValueError:
            raise FormatError(f"unknown paradigm {entry.paradigm!r}",
                              path=str(directory / MANIFEST_NAME))
        label = None
        if entry.class_label != "unlabeled":
            try:
                label = GraspClass.from_string(entry.class_label)
            except InvalidConfig as e:
                raise FormatError(str(e), path=str(directory / MANIFEST_NAME))
        eeg = _load_epoch(directory, entry.eeg_file,
                          manifest.eeg_channel_names,
                          manifest.sample_rate_hz)
        emg = None
        if entry.emg_file != "none":
            emg = _load_epoch(directory, entry.emg_file,
                              manifest.emg_channel_names,
                              manifest.sample_rate_hz)
            ref = manifest.reference_emg_channel
            if ref is not None:
                if not 0 <= ref < emg.n_channels:
                    raise FormatError(
                        f"reference channel {ref} out of range",
                        path=str(directory / MANIFEST_NAME),
                    )
                keep = [i for i in range(emg.n_channels) if i != ref]
                emg = SignalEpoch(
                    emg.samples[keep] - emg.samples[ref],
                    emg.sample_rate_hz,
                    tuple(emg.channel_names[i] for i in keep),
                )
        duration = eeg.n_samples / eeg.sample_rate_hz * 1000.0
        trials.append(Trial(entry.trial_id, eeg, paradigm, emg, label,
                            duration_ms=duration))
    return trials


# --- config files ---------------------------------------------------------

_SYNTH_FIELD_TYPES = {
    "n_trials_per_class": int,
    "eeg_channels": int,
    "emg_channels": int,
    "sample_rate_hz": float,
    "snr_db": float,
    "coupling_gain": float,
    "rng_seed": int,
    "emg_burst_gain": float,
    "jitter_ms": float,
    "class_freq_shift_hz": float,
    "trial_ms": float,
}


def read_synth_config(path: PathLike) -> SynthConfig:
    """Build a generator config from a key=value file; keys match the
    SynthConfig field names and unknown keys are rejected."""
    values = {}
    for lineno, key, value in parse_keyvalues(path):
        if key not in _SYNTH_FIELD_TYPES:
            raise FormatError(f"unknown config key {key!r}", path=str(path),
                              line=lineno)
        try:
            values[key] = _SYNTH_FIELD_TYPES[key](value)
        except ValueError:
            raise FormatError(f"bad value for {key!r}: {value!r}",
                              path=str(path), line=lineno)
    try:
        return SynthConfig(**values)
    except InvalidConfig as e:
        raise FormatError(str(e), path=str(path))


# --- model serialization --------------------------------------------------

def _window_meta(window: WindowSpec) -> dict:
    return {"window_ms": window.window_ms, "step_ms": window.step_ms,
            "expected_segments": window.expected_segments}


def _bank_meta(bank: FilterBankSpec) -> dict:
    return {"low_hz": bank.low_hz, "high_hz": bank.high_hz,
            "band_width_hz": bank.band_width_hz,
            "band_step_hz": bank.band_step_hz,
            "filter_order": bank.filter_order, "notch_hz": bank.notch_hz}


def _spatial_arrays(models: Sequence[SpatialFilterModel]
                    ) -> tuple[np.ndarray, np.ndarray]:
    proj = np.stack([
        np.stack([m.projection for m in s.per_band]) for s in models
    ])
    eigs = np.stack([
        np.stack([m.eigenvalues for m in s.per_band]) for s in models
    ])
    return proj, eigs


def _rebuild_spatial(proj: np.ndarray, eigs: np.ndarray, m_pairs: int,
                     bank: FilterBankSpec, gamma: float
                     ) -> list[SpatialFilterModel]:
    out = []
    for unit in range(proj.shape[0]):
        per_band = tuple(
            CspModel(proj[unit, b], eigs[unit, b], m_pairs, band_index=b)
            for b in range(proj.shape[1])
        )
        out.append(SpatialFilterModel(per_band, bank, gamma))
    return out


def serialize_model(model: Union[PipelineModel, BaselineModel],
                    path: PathLike) -> None:
    """Persist a trained model to a single archive file."""
    arrays: dict[str, np.ndarray] = {}
    meta: dict = {"format": MODEL_FORMAT, "format_version": MODEL_VERSION}
    if isinstance(model, PipelineModel):
        config = model.config
        meta.update({
            "kind": "pipeline",
            "window": _window_meta(model.window),
            "filter_bank": _bank_meta(config.filter_bank),
            "m_pairs": config.m_pairs,
            "gamma": config.gamma,
            "lda_shrinkage": config.lda_shrinkage,
            "threshold_scale": config.threshold.scale,
            "trained_on": model.trained_on.value,
            "library_classes": [int(c) for c in model.library.classes()],
            "library_ids": {
                str(int(c)): [p.trial_id
                              for p in model.library.patterns_by_class[c]]
                for c in model.library.classes()
            },
        })
        spatial = [c.spatial for c in model.channel_classifiers]
        arrays["proj"], arrays["eigs"] = _spatial_arrays(spatial)
        arrays["lda_w"] = np.stack(
            [c.lda.weights for c in model.channel_classifiers])
        arrays["lda_b"] = np.array(
            [c.lda.bias for c in model.channel_classifiers])
        arrays["lda_means"] = np.stack(
            [c.lda.class_means for c in model.channel_classifiers])
        for cls in model.library.classes():
            arrays[f"lib_{int(cls)}"] = np.stack(
                [p.values for p in model.library.patterns_by_class[cls]]
            )
    elif isinstance(model, BaselineModel):
        meta.update({
            "kind": "baseline",
            "baseline_kind": model.kind.value,
            "filter_bank": _bank_meta(model.filter_bank),
            "m_pairs": model.m_pairs,
            "gamma": model.spatial_per_class[0].regularization_gamma,
            "lda_shrinkage": model.head.per_class[0].shrinkage,
        })
        arrays["proj"], arrays["eigs"] = _spatial_arrays(
            model.spatial_per_class)
        arrays["lda_w"] = np.stack([m.weights for m in model.head.per_class])
        arrays["lda_b"] = np.array([m.bias for m in model.head.per_class])
        arrays["lda_means"] = np.stack(
            [m.class_means for m in model.head.per_class])
    else:
        raise InvalidConfig(f"cannot serialize {type(model).__name__}")
    with open(path, "wb") as f:
        np.savez(f, meta=np.array(json.dumps(meta)), **arrays)


def deserialize_model(path: PathLike) -> Union[PipelineModel, BaselineModel]:
    """Load a model written by serialize_model; refuses newer versions."""
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as archive:
            data = {k: archive[k] for k in archive.files}
    except FileNotFoundError:
        raise FormatError("model file missing", path=str(path))
    except Exception as e:  # zip/npy parse failures vary by corruption
        raise FormatError(f"unreadable model archive: {e}", path=str(path))
    try:
        meta = json.loads(str(data["meta"][()]))
    except (KeyError, json.JSONDecodeError) as e:
        raise FormatError(f"bad model metadata: {e}", path=str(path))
    if meta.get("format") != MODEL_FORMAT:
        raise FormatError("not a model archive", path=str(path))
    if meta.get("format_version", 0) > MODEL_VERSION:
        raise VersionMismatch(
            f"model version {meta['format_version']} is newer than "
            f"supported {MODEL_VERSION}", path=str(path),
        )
    try:
        bank = FilterBankSpec(**meta["filter_bank"])
        if meta["kind"] == "pipeline":
            window = WindowSpec(**meta["window"])
            spatial = _rebuild_spatial(data["proj"], data["eigs"],
                                       meta["m_pairs"], bank, meta["gamma"])
            classifiers = tuple(
                ChannelClassifier(
                    c,
                    spatial[c],
                    LdaModel(data["lda_w"][c], float(data["lda_b"][c]),
                             data["lda_means"][c], meta["lda_shrinkage"]),
                )
                for c in range(len(spatial))
            )
            by_class = {}
            for k in meta["library_classes"]:
                cls = GraspClass(k)
                ids = meta["library_ids"][str(k)]
                stack = data[f"lib_{k}"]
                by_class[cls] = tuple(
                    ActivationPattern(stack[i], ids[i], cls)
                    for i in range(stack.shape[0])
                )
            library = PatternLibrary(by_class, window,
                                     data["proj"].shape[0])
            config = PipelineConfig(
                window, bank, meta["m_pairs"], meta["gamma"],
                meta["lda_shrinkage"],
                ThresholdPolicy(meta["threshold_scale"]),
            )
            return PipelineModel(classifiers, window, library,
                                 Paradigm(meta["trained_on"]), config)
        if meta["kind"] == "baseline":
            spatial = _rebuild_spatial(data["proj"], data["eigs"],
                                       meta["m_pairs"], bank, meta["gamma"])
            head = MulticlassLdaModel(tuple(
                LdaModel(data["lda_w"][c], float(data["lda_b"][c]),
                         data["lda_means"][c], meta["lda_shrinkage"])
                for c in range(data["lda_w"].shape[0])
            ))
            return BaselineModel(BaselineKind(meta["baseline_kind"]),
                                 tuple(spatial), head, meta["m_pairs"])
        raise FormatError(f"unknown model kind {meta['kind']!r}",
                          path=str(path))
    except (KeyError, IndexError, ValueError) as e:
        raise FormatError(f"malformed model archive: {e}", path=str(path))

"""
Script: audio.py
Created: 2026-09-15
Purpose: WAV ingestion into normalized mono buffers and corpus manifest parsing
Keywords: wav, riff, pcm, manifest, csv, audio-ingest, sffkit
Status: active
Prerequisites:
  - numpy, scipy (scipy.io.wavfile), pandas
Changelog:
  - 2026-09-15: Initial version (load_wav, write_wav, load_manifest)
  - 2026-09-22: RIFF header check for distinct malformed/unsupported errors
See-Also: harness.py (sample-rate validation across a corpus)
"""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
import pandas as pd
from scipy.io import wavfile

from .errors import (
    AudioFileNotFoundError,
    ConflictingClassError,
    DuplicateUtteranceError,
    MalformedWavError,
    ManifestError,
    UnknownTokenError,
    UnsupportedEncodingError,
)
from .models import BalanceReport, CorpusManifest, ManifestEntry, SeverityClass, SpeakingTask

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_COLUMNS = ["audio_path", "speaker_id", "class_label", "task", "utterance_id"]

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


# =============================================================================
# Signal buffer
# =============================================================================

@dataclass(frozen=True)
class SignalBuffer:
    """Mono samples in [-1, 1] plus their sampling rate."""
    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if samples.size == 0:
            raise ValueError("SignalBuffer requires at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("SignalBuffer samples must be finite")
        if np.max(np.abs(samples)) > 1.0:
            raise ValueError("SignalBuffer samples must lie in [-1, 1]")
        if int(self.sample_rate_hz) <= 0:
            raise ValueError("sample_rate_hz must be positive")
        samples = samples.copy()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


# =============================================================================
# WAV
# =============================================================================

def _read_format_header(path: Path) -> Tuple[int, int]:
    """Walk the RIFF chunks up to 'fmt ' and return (format_tag, bits_per_sample)."""
    with path.open("rb") as fh:
        header = fh.read(12)
        if len(header) < 12 or header[:4] not in (b"RIFF", b"RIFX") or header[8:12] != b"WAVE":
            raise MalformedWavError(f"{path}: not a RIFF/WAVE file")
        if header[:4] == b"RIFX":
            raise UnsupportedEncodingError(f"{path}: big-endian RIFX is not supported")
        while True:
            chunk = fh.read(8)
            if len(chunk) < 8:
                raise MalformedWavError(f"{path}: no 'fmt ' chunk")
            chunk_id, size = struct.unpack("<4sI", chunk)
            if chunk_id != b"fmt ":
                fh.seek(size + (size & 1), 1)
                continue
            body = fh.read(size)
            if size < 16 or len(body) < 16:
                raise MalformedWavError(f"{path}: truncated 'fmt ' chunk")
            format_tag, _channels, _rate, _byte_rate, _align, bits = struct.unpack(
                "<HHIIHH", body[:16]
            )
            if format_tag == _WAVE_FORMAT_EXTENSIBLE:
                if len(body) < 26:
                    raise MalformedWavError(f"{path}: truncated WAVE_FORMAT_EXTENSIBLE")
                # first two bytes of the SubFormat GUID carry the real tag
                format_tag = struct.unpack("<H", body[24:26])[0]
            return format_tag, bits


def load_wav(path: PathLike) -> SignalBuffer:
    """Read a PCM/float WAV file as a mono SignalBuffer.

    Integer samples are divided by the full-scale value of their type;
    multichannel audio is averaged to mono. No resampling.
    """
    path = Path(path)
    if not path.is_file():
        raise AudioFileNotFoundError(f"Audio file not found: {path}")

    format_tag, bits = _read_format_header(path)
    if format_tag == _WAVE_FORMAT_PCM:
        if bits not in (8, 16, 24, 32):
            raise UnsupportedEncodingError(f"{path}: {bits}-bit PCM is not supported")
    elif format_tag == _WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise UnsupportedEncodingError(f"{path}: {bits}-bit float is not supported")
    else:
        raise UnsupportedEncodingError(f"{path}: compressed WAV (format tag 0x{format_tag:04x})")

    try:
        rate, data = wavfile.read(str(path))
    except ValueError as exc:
        raise MalformedWavError(f"{path}: {exc}") from exc

    if data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        # scipy left-justifies 24-bit PCM into int32
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
        if np.any(np.abs(samples) > 1.0):
            logger.warning("%s: float samples exceed full scale, clipping", path.name)
            samples = np.clip(samples, -1.0, 1.0)
    else:
        raise UnsupportedEncodingError(f"{path}: sample type {data.dtype} is not supported")

    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if samples.size == 0:
        raise MalformedWavError(f"{path}: no audio frames")
    return SignalBuffer(samples=samples, sample_rate_hz=rate)


def write_wav(path: PathLike, signal: SignalBuffer, encoding: str = "pcm16") -> Path:
    """Write a SignalBuffer as mono WAV; encoding is pcm16, pcm32 or float32."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    x = signal.samples
    if encoding == "pcm16":
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    elif encoding == "pcm32":
        data = np.clip(np.round(x * 2147483648.0), -2147483648, 2147483647).astype(np.int32)
    elif encoding == "float32":
        data = x.astype(np.float32)
    else:
        raise ValueError(f"unsupported encoding {encoding!r}")
    wavfile.write(str(path), signal.sample_rate_hz, data)
    return path


# =============================================================================
# Manifest
# =============================================================================

def _parse_class(token: str, row: int) -> SeverityClass:
    token = token.strip().lower()
    if token.isdigit() and int(token) in SeverityClass._value2member_map_:
        return SeverityClass(int(token))
    if token in SeverityClass.__members__:
        return SeverityClass[token]
    raise UnknownTokenError(f"row {row}: unknown class label {token!r}")


def _parse_task(token: str, row: int) -> SpeakingTask:
    try:
        return SpeakingTask(token.strip().lower())
    except ValueError:
        raise UnknownTokenError(f"row {row}: unknown task {token!r}") from None


def load_manifest(path: PathLike) -> CorpusManifest:
    """Parse a corpus CSV; relative audio paths resolve against the manifest's folder."""
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc

    if list(df.columns) != MANIFEST_COLUMNS:
        raise ManifestError(
            f"{path}: header must be {','.join(MANIFEST_COLUMNS)}, got {','.join(df.columns)}"
        )

    entries = []
    seen = set()
    speaker_class: Dict[str, SeverityClass] = {}
    for i, rec in enumerate(df.itertuples(index=False), start=1):
        label = _parse_class(rec.class_label, i)
        task = _parse_task(rec.task, i)
        key = (rec.speaker_id, rec.utterance_id)
        if key in seen:
            raise DuplicateUtteranceError(
                f"row {i}: duplicate utterance {rec.utterance_id!r} for speaker {rec.speaker_id!r}"
            )
        seen.add(key)
        previous = speaker_class.setdefault(rec.speaker_id, label)
        if previous != label:
            raise ConflictingClassError(
                f"row {i}: conflicting class for speaker {rec.speaker_id!r} "
                f"({previous.name} vs {label.name})"
            )
        audio_path = Path(rec.audio_path)
        if not audio_path.is_absolute():
            audio_path = path.parent / audio_path
        entries.append(ManifestEntry(
            audio_path=str(audio_path),
            speaker_id=rec.speaker_id,
            class_label=label,
            task=task,
            utterance_id=rec.utterance_id,
        ))
    logger.debug("Loaded %d manifest rows from %s", len(entries), path)
    return CorpusManifest(entries=entries)


def write_manifest(manifest: CorpusManifest, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame(
        [
            {
                "audio_path": e.audio_path,
                "speaker_id": e.speaker_id,
                "class_label": e.class_label.name,
                "task": e.task.value,
                "utterance_id": e.utterance_id,
            }
            for e in manifest.entries
        ],
        columns=MANIFEST_COLUMNS,
    )
    df.to_csv(path, index=False)
    return path


def check_balance(manifest: CorpusManifest) -> BalanceReport:
    """Distinct speakers per class; balanced iff all class counts are equal."""
    counts = {c.name: 0 for c in SeverityClass}
    for speaker, label in manifest.speaker_classes().items():
        counts[label.name] += 1
    return BalanceReport(counts=counts, balanced=len(set(counts.values())) <= 1)

"""
Script: synthetic.py
Created: 2026-10-07
Purpose: Synthetic 3-class "speaker" corpus for end-to-end pipeline checks
Keywords: synthetic, corpus, harmonic-source, spectral-tilt, amplitude-modulation, sffkit
Status: active
Prerequisites:
  - numpy
Changelog:
  - 2026-10-07: Initial version
See-Also: harness.py, cli.py (synth)

Each speaker has one class. The class sets the spectral tilt of a harmonic
source (harmonic h scaled by h^-tilt) and the depth of a slow amplitude
modulation with per-period shimmer. f0 and small tilt offsets vary per speaker.
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from .audio import SignalBuffer, write_manifest, write_wav
from .models import CLASS_ORDER, CorpusManifest, ManifestEntry, SeverityClass, SpeakingTask

logger = logging.getLogger(__name__)

CLASS_TILT: Dict[int, float] = {0: 0.6, 1: 1.4, 2: 2.2}
CLASS_AM_DEPTH: Dict[int, float] = {0: 0.02, 1: 0.15, 2: 0.30}

PEAK_LEVEL = 0.5
NOISE_LEVEL = 1e-3


def synthesize_utterance(
    severity: int,
    rng: np.random.Generator,
    sample_rate_hz: int = 8000,
    duration_s: float = 0.5,
    f0_hz: Optional[float] = None,
) -> SignalBuffer:
    if severity not in CLASS_TILT:
        raise ValueError(f"unknown severity class {severity}")
    f0 = float(f0_hz) if f0_hz is not None else float(rng.uniform(100.0, 220.0))
    tilt = CLASS_TILT[severity] + float(rng.uniform(-0.1, 0.1))
    depth = CLASS_AM_DEPTH[severity]

    n = int(round(duration_s * sample_rate_hz))
    t = np.arange(n) / sample_rate_hz
    n_harmonics = int(0.9 * (sample_rate_hz / 2.0) // f0)
    h = np.arange(1, n_harmonics + 1)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=h.size)
    source = (h ** -tilt) @ np.sin(2.0 * np.pi * f0 * np.outer(h, t) + phases[:, None])

    # slow AM plus a random gain per pitch period
    am_rate = float(rng.uniform(4.0, 7.0))
    periods = np.floor(t * f0).astype(int)
    shimmer = 1.0 + depth * rng.standard_normal(periods.max() + 1)
    envelope = (1.0 + depth * np.sin(2.0 * np.pi * am_rate * t)) * shimmer[periods]
    x = source * envelope
    x = PEAK_LEVEL * x / np.max(np.abs(x))
    x = x + NOISE_LEVEL * rng.standard_normal(n)
    return SignalBuffer(samples=np.clip(x, -1.0, 1.0), sample_rate_hz=sample_rate_hz)


def write_synthetic_corpus(
    out_dir: Union[str, Path],
    speakers_per_class: int = 10,
    utterances_per_speaker: int = 1,
    sample_rate_hz: int = 8000,
    duration_s: float = 0.5,
    seed: int = 0,
    task: SpeakingTask = SpeakingTask.read_text,
) -> Path:
    """Write WAVs under out_dir/audio and return the path of out_dir/manifest.csv."""
    out_dir = Path(out_dir)
    rng = np.random.default_rng(seed)
    entries = []
    for severity in CLASS_ORDER:
        for s in range(speakers_per_class):
            speaker = f"{SeverityClass(severity).name}{s:02d}"
            f0 = float(rng.uniform(100.0, 220.0))
            for u in range(utterances_per_speaker):
                sig = synthesize_utterance(severity, rng, sample_rate_hz, duration_s, f0_hz=f0)
                rel = Path("audio") / f"{speaker}_{u}.wav"
                write_wav(out_dir / rel, sig)
                entries.append(ManifestEntry(
                    audio_path=str(rel),
                    speaker_id=speaker,
                    class_label=SeverityClass(severity),
                    task=task,
                    utterance_id=f"{speaker}_{u}",
                ))
    manifest_path = write_manifest(CorpusManifest(entries=entries), out_dir / "manifest.csv")
    logger.info("wrote %d synthetic utterances to %s", len(entries), out_dir)
    return manifest_path

"""
Script: features.py
Created: 2026-09-18
Purpose: 39-dim frame-wise cepstral features (SFFCC, MFCC-SFF, baseline MFCC), deltas, mean pooling
Keywords: sffcc, mfcc, mfcc-sff, cepstrum, delta, mean-pooling, sffkit
Status: active
Prerequisites:
  - numpy
Changelog:
  - 2026-09-18: Initial version
  - 2026-09-25: SFF extractors switched to the streaming envelope mode
See-Also: sff.py, transforms.py
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audio import SignalBuffer
from .errors import ConfigError
from .models import FeatureConfig, FeatureKind, SffConfig
from .sff import sff_envelope_frames
from .transforms import (
    MelFilterbank,
    Spectrogram,
    build_mel_filterbank,
    dct2,
    ifft,
    next_power_of_two,
    stft_magnitude,
)


@dataclass(frozen=True)
class FeatureMatrix:
    """Frames x (static | delta | double-delta)."""
    frames: np.ndarray
    feature_kind: FeatureKind
    hop_s: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.frames)):
            raise ValueError("feature matrix contains non-finite values")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    feature_kind: FeatureKind
    utterance_id: Optional[str] = None


# =============================================================================
# Dynamics and pooling
# =============================================================================

def _regression_delta(c: np.ndarray, m_window: int) -> np.ndarray:
    t = c.shape[0]
    padded = np.pad(c, ((m_window, m_window), (0, 0)), mode="edge")
    num = np.zeros_like(c)
    for m in range(1, m_window + 1):
        num += m * (padded[m_window + m: m_window + m + t] - padded[m_window - m: m_window - m + t])
    return num / (2.0 * sum(m * m for m in range(1, m_window + 1)))


def append_deltas(
    static: np.ndarray,
    delta_window: int = 2,
    feature_kind: FeatureKind = FeatureKind.mfcc,
    hop_s: float = 0.010,
) -> FeatureMatrix:
    """Append delta and double-delta (regression over +-M frames, edges replicated)."""
    static = np.atleast_2d(np.asarray(static, dtype=np.float64))
    if static.shape[0] < 1:
        raise ValueError("at least one frame is required")
    delta = _regression_delta(static, delta_window)
    delta2 = _regression_delta(delta, delta_window)
    return FeatureMatrix(
        frames=np.hstack([static, delta, delta2]),
        feature_kind=feature_kind,
        hop_s=hop_s,
    )


def mean_pool(fm: FeatureMatrix, utterance_id: Optional[str] = None) -> FeatureVector:
    if fm.frames.shape[0] == 0:
        raise ValueError("cannot pool an empty feature matrix")
    return FeatureVector(
        values=fm.frames.mean(axis=0),
        feature_kind=fm.feature_kind,
        utterance_id=utterance_id,
    )


# =============================================================================
# Static cepstra
# =============================================================================

def sffcc_from_spectrum(frames: np.ndarray, n_cepstra: int, log_floor: float) -> np.ndarray:
    """Real cepstrum of the even-symmetric extension of the log SFF spectrum."""
    log_v = np.log(np.maximum(frames, log_floor))
    extended = np.hstack([log_v, log_v[:, ::-1]])
    n = next_power_of_two(extended.shape[1])
    cepstrum = ifft(extended, n, axis=1).real
    return cepstrum[:, :n_cepstra]


def mel_cepstra(power: np.ndarray, fb: MelFilterbank, n_cepstra: int, log_floor: float) -> np.ndarray:
    energies = fb.apply(power)
    return dct2(np.log(np.maximum(energies, log_floor)), axis=1)[:, :n_cepstra]


# =============================================================================
# Extractors
# =============================================================================

def sffcc(sig: SignalBuffer, sff_cfg: SffConfig, feat_cfg: FeatureConfig) -> FeatureMatrix:
    spectrum = sff_envelope_frames(sig, sff_cfg, feat_cfg.hop_s)
    if feat_cfg.n_cepstra > spectrum.frames.shape[1]:
        raise ConfigError(
            f"n_cepstra={feat_cfg.n_cepstra} exceeds the {spectrum.frames.shape[1]} SFF channels"
        )
    static = sffcc_from_spectrum(spectrum.frames, feat_cfg.n_cepstra, feat_cfg.log_floor)
    return append_deltas(static, feat_cfg.delta_window, FeatureKind.sffcc, feat_cfg.hop_s)


def sff_mel_filterbank(spectrum: Spectrogram, sample_rate_hz: int, feat_cfg: FeatureConfig) -> MelFilterbank:
    """Mel bank over the SFF channel grid.

    The band defaults to [first channel, min(last channel, Nyquist)]; there is no
    DC channel to anchor a filter at 0 Hz.
    """
    freqs = spectrum.bin_frequencies_hz
    nyquist = sample_rate_hz / 2.0
    f_min = feat_cfg.mel_f_min if feat_cfg.mel_f_min is not None else float(freqs[0])
    f_max = feat_cfg.mel_f_max if feat_cfg.mel_f_max is not None else min(float(freqs[-1]), nyquist)
    return build_mel_filterbank(
        feat_cfg.resolved_mel_filters(FeatureKind.mfcc_sff),
        freqs.size,
        sample_rate_hz,
        f_min=f_min,
        f_max=f_max,
        bin_frequencies_hz=freqs,
    )


def mfcc_sff(sig: SignalBuffer, sff_cfg: SffConfig, feat_cfg: FeatureConfig) -> FeatureMatrix:
    n_filters = feat_cfg.resolved_mel_filters(FeatureKind.mfcc_sff)
    if n_filters < feat_cfg.n_cepstra:
        raise ConfigError(f"n_mel_filters={n_filters} < n_cepstra={feat_cfg.n_cepstra}")
    spectrum = sff_envelope_frames(sig, sff_cfg, feat_cfg.hop_s)
    fb = sff_mel_filterbank(spectrum, sig.sample_rate_hz, feat_cfg)
    static = mel_cepstra(spectrum.frames ** 2, fb, feat_cfg.n_cepstra, feat_cfg.log_floor)
    return append_deltas(static, feat_cfg.delta_window, FeatureKind.mfcc_sff, feat_cfg.hop_s)


def mfcc_baseline(sig: SignalBuffer, feat_cfg: FeatureConfig) -> FeatureMatrix:
    n_filters = feat_cfg.resolved_mel_filters(FeatureKind.mfcc)
    if n_filters < feat_cfg.n_cepstra:
        raise ConfigError(f"n_mel_filters={n_filters} < n_cepstra={feat_cfg.n_cepstra}")
    spectrum = stft_magnitude(sig, feat_cfg.window_s, feat_cfg.hop_s)
    fb = build_mel_filterbank(
        n_filters,
        spectrum.frames.shape[1],
        sig.sample_rate_hz,
        f_min=feat_cfg.mel_f_min or 0.0,
        f_max=feat_cfg.mel_f_max,
    )
    static = mel_cepstra(spectrum.frames ** 2, fb, feat_cfg.n_cepstra, feat_cfg.log_floor)
    return append_deltas(static, feat_cfg.delta_window, FeatureKind.mfcc, spectrum.hop_s)


def extract(
    kind: FeatureKind, sig: SignalBuffer, sff_cfg: SffConfig, feat_cfg: FeatureConfig
) -> FeatureMatrix:
    if kind == FeatureKind.sffcc:
        return sffcc(sig, sff_cfg, feat_cfg)
    if kind == FeatureKind.mfcc_sff:
        return mfcc_sff(sig, sff_cfg, feat_cfg)
    return mfcc_baseline(sig, feat_cfg)

"""
Script: sff.py
Created: 2026-09-17
Purpose: Single frequency filtering: frequency shift, single-pole filter per channel, envelope and phase
Keywords: sff, single-frequency-filtering, iir, envelope, phase, spectrogram, sffkit
Status: active
Prerequisites:
  - numpy, scipy (scipy.signal.lfilter)
Changelog:
  - 2026-09-17: Initial version (full decomposition)
  - 2026-09-24: Frame-subsampled streaming mode for the 10 ms feature path
See-Also: features.py (SFFCC, MFCC-SFF)
"""

import logging
from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

import numpy as np
from scipy.signal import lfilter

from . import config
from .audio import SignalBuffer
from .errors import TimeOutOfRangeError
from .models import SffConfig
from .transforms import Spectrogram, SpectrogramOrigin

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SffDecomposition:
    """Per-sample, per-channel envelope v[n,k] and phase psi[n,k]."""
    envelope: np.ndarray
    phase: np.ndarray
    frequencies_hz: np.ndarray
    sample_rate_hz: int
    delta_f_hz: float

    @property
    def n_samples(self) -> int:
        return self.envelope.shape[0]

    @property
    def n_channels(self) -> int:
        return self.envelope.shape[1]

    def complex_output(self) -> np.ndarray:
        """Reconstruct y[n,k] from envelope and phase."""
        return self.envelope * np.exp(1j * self.phase)


def channel_frequencies(sample_rate_hz: int, cfg: SffConfig) -> np.ndarray:
    """f_k = k * delta_f for k = 1..K (no DC channel)."""
    k = cfg.num_channels(sample_rate_hz)
    return cfg.delta_f_hz * np.arange(1, k + 1)


def _channel_blocks(n_channels: int) -> Iterator[slice]:
    block = max(1, config.SFFKIT_CHANNEL_BLOCK)
    for start in range(0, n_channels, block):
        yield slice(start, min(start + block, n_channels))


def _filter_block(
    samples: np.ndarray, fs: int, freqs: np.ndarray, r: float
) -> np.ndarray:
    """y[n,k] = -r y[n-1,k] + s[n] exp(-j 2 pi (fs/2 - f_k) n / fs), zero initial state."""
    n = np.arange(samples.size)[:, None]
    shift = fs / 2.0 - freqs[None, :]
    shifted = samples[:, None] * np.exp(-2j * np.pi * shift * n / fs)
    return lfilter([1.0], [1.0, r], shifted, axis=0)


def _phase(y: np.ndarray) -> np.ndarray:
    # a zero sample of either sign has phase 0
    phase = np.where(y == 0, 0.0, np.angle(y))
    # keep psi in (-pi, pi]
    phase[phase <= -np.pi] = np.pi
    return phase


def sff_analyze(sig: SignalBuffer, cfg: SffConfig) -> SffDecomposition:
    """Full-length SFF envelopes and phases for every channel."""
    fs = sig.sample_rate_hz
    freqs = channel_frequencies(fs, cfg)
    envelope = np.empty((len(sig), freqs.size))
    phase = np.empty_like(envelope)
    for block in _channel_blocks(freqs.size):
        y = _filter_block(sig.samples, fs, freqs[block], cfg.r)
        envelope[:, block] = np.abs(y)
        phase[:, block] = _phase(y)
    return SffDecomposition(
        envelope=envelope,
        phase=phase,
        frequencies_hz=freqs,
        sample_rate_hz=fs,
        delta_f_hz=cfg.delta_f_hz,
    )


def frame_sample_indices(n_samples: int, sample_rate_hz: int, hop_s: float) -> np.ndarray:
    """Sample index round(m * hop_s * fs) of every hop-spaced instant inside the signal."""
    hop = hop_s * sample_rate_hz
    n_frames = int(np.floor((n_samples - 1) / hop + 1e-9)) + 1
    return np.round(np.arange(n_frames) * hop).astype(int)


def sff_spectrum_at(dec: SffDecomposition, times_s: Sequence[float]) -> Spectrogram:
    """Envelope rows at round(t * fs) as an SFF spectrogram."""
    times = np.atleast_1d(np.asarray(times_s, dtype=np.float64))
    if times.size == 0:
        raise TimeOutOfRangeError("at least one time instant is required")
    idx = np.round(times * dec.sample_rate_hz).astype(int)
    bad = (idx < 0) | (idx >= dec.n_samples)
    if np.any(bad):
        raise TimeOutOfRangeError(
            f"time {times[bad][0]:.6f}s outside signal of {dec.n_samples / dec.sample_rate_hz:.6f}s"
        )
    hop_s = float(np.mean(np.diff(times))) if times.size > 1 else 1.0 / dec.sample_rate_hz
    return Spectrogram(
        frames=dec.envelope[idx],
        bin_spacing_hz=dec.delta_f_hz,
        hop_s=hop_s,
        origin=SpectrogramOrigin.sff,
        first_bin_hz=float(dec.frequencies_hz[0]),
    )


def sff_envelope_frames(sig: SignalBuffer, cfg: SffConfig, hop_s: float) -> Spectrogram:
    """Streaming mode: run every channel recursion but keep only hop-spaced rows."""
    fs = sig.sample_rate_hz
    freqs = channel_frequencies(fs, cfg)
    idx = frame_sample_indices(len(sig), fs, hop_s)
    frames = np.empty((idx.size, freqs.size))
    for block in _channel_blocks(freqs.size):
        y = _filter_block(sig.samples, fs, freqs[block], cfg.r)
        frames[:, block] = np.abs(y[idx])
    logger.debug("SFF: %d channels x %d frames at %.0f Hz", freqs.size, idx.size, fs)
    return Spectrogram(
        frames=frames,
        bin_spacing_hz=cfg.delta_f_hz,
        hop_s=hop_s,
        origin=SpectrogramOrigin.sff,
        first_bin_hz=float(freqs[0]),
    )


def envelope_bound(cfg: SffConfig) -> float:
    """Geometric-series bound 1/(1-r) on the envelope of any |s| <= 1 input."""
    return 1.0 / (1.0 - cfg.r)


def steady_state_gain(cfg: SffConfig) -> Tuple[float, int]:
    """Matched-channel gain A/2 * 1/(1-r) (per unit A) and a transient length in samples."""
    return 0.5 / (1.0 - cfg.r), int(np.ceil(5.0 / (1.0 - cfg.r)))

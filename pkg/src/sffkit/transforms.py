"""
Script: transforms.py
Created: 2026-09-16
Purpose: Shared numerical transforms: FFT/IFFT, DCT-II, Hamming, STFT magnitude, mel filterbank
Keywords: fft, dct, hamming, stft, mel, filterbank, spectrogram, sffkit
Status: active
Prerequisites:
  - numpy, scipy (scipy.fft)
Changelog:
  - 2026-09-16: Initial version
  - 2026-09-29: Spectrogram CSV + JSON sidecar export
See-Also: sff.py (SFF spectra), features.py (cepstral pipelines)
"""

import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import scipy.fft

from .audio import SignalBuffer
from .errors import ConfigError, FftSizeError, FilterbankError

logger = logging.getLogger(__name__)


# =============================================================================
# FFT / DCT / window
# =============================================================================

def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    return 1 << max(0, int(n) - 1).bit_length()


def _check_fft_size(n: int) -> None:
    if not is_power_of_two(int(n)):
        raise FftSizeError(f"FFT size must be a power of two, got {n}")


def fft(x: Sequence[complex], n: int, axis: int = -1) -> np.ndarray:
    """X[k] = sum_m x[m] exp(-j 2 pi k m / n); x is zero-padded or truncated to n."""
    _check_fft_size(n)
    return np.fft.fft(np.asarray(x), n=n, axis=axis)


def ifft(x: Sequence[complex], n: int, axis: int = -1) -> np.ndarray:
    """Exact inverse of `fft` (1/n scaling on the inverse)."""
    _check_fft_size(n)
    return np.fft.ifft(np.asarray(x), n=n, axis=axis)


def dct2(x: Sequence[float], axis: int = -1) -> np.ndarray:
    """Orthonormal DCT-II: s(0)=sqrt(1/M), s(k>0)=sqrt(2/M)."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0 or x.shape[axis] == 0:
        raise ValueError("dct2 requires a non-empty input")
    return scipy.fft.dct(x, type=2, norm="ortho", axis=axis)


def hamming(n: int) -> np.ndarray:
    """Symmetric Hamming window; n=1 is the unity window."""
    if n < 1:
        raise ValueError("window length must be at least 1")
    return np.hamming(n)


# =============================================================================
# Spectrogram
# =============================================================================

class SpectrogramOrigin(str, Enum):
    stft = "stft"
    sff = "sff"


@dataclass(frozen=True)
class Spectrogram:
    """Time-ordered magnitude spectra (rows = frames)."""
    frames: np.ndarray
    bin_spacing_hz: float
    hop_s: float
    origin: SpectrogramOrigin
    first_bin_hz: float = 0.0

    def __post_init__(self):
        frames = np.atleast_2d(np.asarray(self.frames, dtype=np.float64))
        if not np.all(np.isfinite(frames)) or np.any(frames < 0):
            raise ValueError("spectrogram magnitudes must be finite and non-negative")
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def bin_frequencies_hz(self) -> np.ndarray:
        return self.first_bin_hz + self.bin_spacing_hz * np.arange(self.frames.shape[1])


def frame_starts(n_samples: int, window: int, hop: int) -> np.ndarray:
    """Start indices of full frames, plus one trailing padded frame if any tail remains."""
    if n_samples < window:
        return np.zeros(1, dtype=int)
    n_full = (n_samples - window) // hop + 1
    starts = np.arange(n_full) * hop
    tail = n_samples - (starts[-1] + window)
    if tail > 0:
        starts = np.append(starts, n_full * hop)
    return starts


def stft_magnitude(sig: SignalBuffer, window_s: float, hop_s: float) -> Spectrogram:
    """One-sided |FFT(hamming * frame)| with n_fft the next power of two >= window."""
    fs = sig.sample_rate_hz
    window = int(round(window_s * fs))
    hop = int(round(hop_s * fs))
    if window < 2:
        raise ConfigError(f"window of {window_s}s spans fewer than 2 samples at {fs} Hz")
    if hop < 1:
        raise ConfigError(f"hop of {hop_s}s spans less than one sample at {fs} Hz")
    n_fft = next_power_of_two(window)

    starts = frame_starts(len(sig), window, hop)
    padded = np.zeros(starts[-1] + window)
    padded[:len(sig)] = sig.samples[:padded.size]
    frames = np.stack([padded[s:s + window] for s in starts]) * hamming(window)

    spectrum = fft(frames, n_fft, axis=1)[:, : n_fft // 2 + 1]
    return Spectrogram(
        frames=np.abs(spectrum),
        bin_spacing_hz=fs / n_fft,
        hop_s=hop / fs,
        origin=SpectrogramOrigin.stft,
    )


def write_spectrogram(spec: Spectrogram, path: Union[str, Path]) -> Path:
    """CSV matrix (rows = frames) plus a JSON sidecar with the axis metadata."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, spec.frames, delimiter=",", fmt="%.10e")
    sidecar = {
        "bin_spacing_hz": spec.bin_spacing_hz,
        "first_bin_hz": spec.first_bin_hz,
        "hop_s": spec.hop_s,
        "origin": spec.origin.value,
        "n_frames": spec.n_frames,
        "n_bins": int(spec.frames.shape[1]),
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
    return path


# =============================================================================
# Mel filterbank
# =============================================================================

def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@dataclass(frozen=True)
class MelFilterbank:
    n_filters: int
    fft_bins: int
    weights: np.ndarray
    sample_rate_hz: int
    center_frequencies_hz: np.ndarray
    edge_frequencies_hz: np.ndarray

    def apply(self, power_spectrum: np.ndarray) -> np.ndarray:
        """out[..., i] = sum_k weights[i, k] * power[..., k]."""
        power = np.asarray(power_spectrum, dtype=np.float64)
        if power.shape[-1] != self.fft_bins:
            raise ValueError(
                f"power spectrum has {power.shape[-1]} bins, filterbank expects {self.fft_bins}"
            )
        return power @ self.weights.T


def build_mel_filterbank(
    n_filters: int,
    fft_bins: int,
    sample_rate_hz: int,
    f_min: float = 0.0,
    f_max: Optional[float] = None,
    bin_frequencies_hz: Optional[np.ndarray] = None,
) -> MelFilterbank:
    """Peak-normalized triangular filters, mel-uniform, vertices snapped to the nearest bin.

    Bins default to a linear grid from 0 Hz to Nyquist (the one-sided FFT layout);
    the SFF path passes its channel frequencies instead.
    """
    nyquist = sample_rate_hz / 2.0
    f_max = nyquist if f_max is None else f_max
    if n_filters < 1 or fft_bins < 1:
        raise ConfigError("n_filters and fft_bins must be positive")
    if f_max > nyquist + 1e-9:
        raise ConfigError(f"f_max={f_max} exceeds Nyquist ({nyquist} Hz)")
    if not 0.0 <= f_min < f_max:
        raise ConfigError(f"need 0 <= f_min < f_max, got {f_min}, {f_max}")

    if bin_frequencies_hz is None:
        bin_frequencies_hz = np.linspace(0.0, nyquist, fft_bins)
    bin_frequencies_hz = np.asarray(bin_frequencies_hz, dtype=np.float64)
    if bin_frequencies_hz.size != fft_bins:
        raise ConfigError("bin_frequencies_hz length must equal fft_bins")

    edges_hz = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_filters + 2))
    edge_bins = np.abs(bin_frequencies_hz[None, :] - edges_hz[:, None]).argmin(axis=1)

    weights = np.zeros((n_filters, fft_bins))
    for i in range(n_filters):
        left, center, right = edge_bins[i], edge_bins[i + 1], edge_bins[i + 2]
        if right == left:
            raise FilterbankError(
                f"mel filter {i} is empty: {n_filters} filters exceed the bin resolution",
                filter_index=i,
            )
        for b in range(left, center + 1):
            weights[i, b] = 1.0 if center == left else (b - left) / (center - left)
        for b in range(center + 1, right + 1):
            weights[i, b] = (right - b) / (right - center)

    return MelFilterbank(
        n_filters=n_filters,
        fft_bins=fft_bins,
        weights=weights,
        sample_rate_hz=sample_rate_hz,
        center_frequencies_hz=edges_hz[1:-1],
        edge_frequencies_hz=edges_hz,
    )


def apply_filterbank(fb: MelFilterbank, power_spectrum: Sequence[float]) -> np.ndarray:
    power = np.asarray(power_spectrum, dtype=np.float64)
    if np.any(power < 0):
        raise ValueError("power spectrum entries must be non-negative")
    return fb.apply(power)

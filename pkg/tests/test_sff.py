import numpy as np
import pytest
from pydantic import ValidationError

from sffkit.audio import SignalBuffer
from sffkit.errors import ConfigError, TimeOutOfRangeError
from sffkit.models import SffConfig
from sffkit.sff import (
    channel_frequencies,
    envelope_bound,
    frame_sample_indices,
    sff_analyze,
    sff_envelope_frames,
    sff_spectrum_at,
    steady_state_gain,
)


def direct_sff(samples, fs, f_k, r):
    """Convolution of the shifted signal with (-r)^n."""
    n = np.arange(samples.size)
    shifted = samples * np.exp(-2j * np.pi * (fs / 2.0 - f_k) * n / fs)
    return np.convolve(shifted, (-r) ** n)[: samples.size]


# =============================================================================
# Configuration
# =============================================================================

def test_channel_count_and_frequencies():
    cfg = SffConfig()
    assert cfg.num_channels(16000) == 256
    assert cfg.num_channels(8000) == 128
    freqs = channel_frequencies(16000, cfg)
    assert freqs[0] == pytest.approx(31.25)
    assert freqs[-1] == pytest.approx(8000.0)
    assert SffConfig(explicit_k=10).num_channels(16000) == 10


def test_delta_f_above_nyquist():
    with pytest.raises(ConfigError):
        SffConfig(delta_f_hz=9000.0).num_channels(16000)


@pytest.mark.parametrize("r", [0.0, 1.0, 1.2])
def test_unstable_pole_is_rejected(r):
    with pytest.raises(ValidationError):
        SffConfig(r=r)


# =============================================================================
# Filter response
# =============================================================================

def test_impulse_envelope_is_geometric():
    x = np.zeros(1001)
    x[0] = 1.0
    dec = sff_analyze(SignalBuffer(samples=x, sample_rate_hz=16000), SffConfig(r=0.99))
    expected = 0.99 ** np.arange(1001)
    rel = np.abs(dec.envelope - expected[:, None]) / expected[:, None]
    assert rel.max() <= 1e-8


def test_tone_gain_and_selectivity(tone):
    cfg = SffConfig(r=0.99)
    amplitude = 0.5
    dec = sff_analyze(tone(1000.0, amplitude=amplitude, sample_rate_hz=16000), cfg)
    gain, transient = steady_state_gain(cfg)
    steady = dec.envelope[2 * transient:].mean(axis=0)

    k = int(np.argmin(np.abs(dec.frequencies_hz - 1000.0)))
    peak = gain * amplitude
    assert peak == pytest.approx(50 * amplitude)
    assert steady[k] == pytest.approx(peak, rel=0.01)

    far = np.abs(dec.frequencies_hz - 1000.0) >= 10 * cfg.delta_f_hz
    assert np.all(steady[far] <= 0.1 * peak)


@pytest.mark.parametrize("alpha", [0.25, 1.0, 3.0])
def test_envelope_is_linear_in_amplitude(rng, alpha):
    cfg = SffConfig(delta_f_hz=250.0)
    x = rng.uniform(-0.3, 0.3, 1500)
    base = sff_analyze(SignalBuffer(samples=x, sample_rate_hz=8000), cfg)
    scaled = sff_analyze(SignalBuffer(samples=alpha * x, sample_rate_hz=8000), cfg)
    np.testing.assert_allclose(scaled.envelope, alpha * base.envelope, rtol=1e-10, atol=1e-12)
    live = base.envelope > 1e-6
    wrapped = np.angle(np.exp(1j * (scaled.phase[live] - base.phase[live])))
    assert np.max(np.abs(wrapped)) <= 1e-7


@pytest.mark.parametrize("channel", [2, 5, 10, 17, 24, 30])
def test_tone_on_grid_peaks_at_its_channel(tone, channel):
    cfg = SffConfig(delta_f_hz=125.0)
    f_j = channel * cfg.delta_f_hz
    dec = sff_analyze(tone(f_j, sample_rate_hz=8000, duration_s=0.5), cfg)
    _, transient = steady_state_gain(cfg)
    steady = dec.envelope[2 * transient:].mean(axis=0)
    assert dec.frequencies_hz[int(steady.argmax())] == pytest.approx(f_j)


def test_recursion_matches_direct_convolution(rng):
    cfg = SffConfig(r=0.99, delta_f_hz=500.0)
    fs = 8000
    for _ in range(10):
        x = rng.uniform(-1.0, 1.0, 2000)
        dec = sff_analyze(SignalBuffer(samples=x, sample_rate_hz=fs), cfg)
        y = dec.complex_output()
        for k, f_k in enumerate(dec.frequencies_hz):
            np.testing.assert_allclose(y[:, k], direct_sff(x, fs, f_k, cfg.r), rtol=0, atol=1e-8)


def test_envelope_bound_and_phase_range(rng):
    cfg = SffConfig(r=0.95, delta_f_hz=250.0)
    x = np.sign(rng.standard_normal(4000))
    dec = sff_analyze(SignalBuffer(samples=x, sample_rate_hz=8000), cfg)
    assert dec.envelope.max() <= envelope_bound(cfg) + 1e-9
    assert np.all(dec.phase > -np.pi) and np.all(dec.phase <= np.pi)


def test_zero_signal_has_zero_envelope():
    dec = sff_analyze(SignalBuffer(samples=np.zeros(200), sample_rate_hz=8000), SffConfig())
    assert np.all(dec.envelope == 0.0)
    assert np.all(dec.phase == 0.0)


@pytest.mark.parametrize("delta_f", [1000.0, 31.25])
def test_phase_is_zero_until_signal_onset(delta_f):
    samples = np.zeros(64)
    samples[40] = 0.25
    dec = sff_analyze(SignalBuffer(samples=samples, sample_rate_hz=8000), SffConfig(delta_f_hz=delta_f))
    assert np.all(dec.phase[:40] == 0.0)
    assert np.all(dec.envelope[40:] > 0.0)
    assert np.all((dec.phase > -np.pi) & (dec.phase <= np.pi))


@pytest.mark.parametrize("block", [1, 7, 1000])
def test_channel_blocking_does_not_change_output(monkeypatch, rng, block):
    from sffkit import config

    sig = SignalBuffer(samples=rng.uniform(-0.5, 0.5, 800), sample_rate_hz=8000)
    cfg = SffConfig(delta_f_hz=250.0)
    reference = sff_analyze(sig, cfg).envelope
    monkeypatch.setattr(config, "SFFKIT_CHANNEL_BLOCK", block)
    np.testing.assert_allclose(sff_analyze(sig, cfg).envelope, reference, atol=1e-12)


# =============================================================================
# Sampling
# =============================================================================

def test_frame_indices_for_one_second():
    idx = frame_sample_indices(16000, 16000, 0.010)
    assert idx.size == 100
    assert idx[1] == 160 and idx[-1] == 15840


def test_streaming_frames_match_full_decomposition(tone):
    sig = tone(700.0, sample_rate_hz=8000, duration_s=0.25)
    cfg = SffConfig(delta_f_hz=125.0)
    frames = sff_envelope_frames(sig, cfg, 0.010)
    dec = sff_analyze(sig, cfg)
    times = np.arange(frames.n_frames) * 0.010
    np.testing.assert_allclose(frames.frames, sff_spectrum_at(dec, times).frames, atol=1e-12)
    assert frames.bin_spacing_hz == 125.0
    assert frames.first_bin_hz == 125.0


def test_spectrum_at_rejects_out_of_range(tone):
    dec = sff_analyze(tone(500.0, sample_rate_hz=8000, duration_s=0.1), SffConfig(delta_f_hz=500.0))
    with pytest.raises(TimeOutOfRangeError):
        sff_spectrum_at(dec, [0.5])
    with pytest.raises(TimeOutOfRangeError):
        sff_spectrum_at(dec, [-0.01])
    assert sff_spectrum_at(dec, [0.05]).frames.shape == (1, dec.n_channels)

import numpy as np
import pytest

from sffkit.audio import check_balance, load_manifest
from sffkit.synthetic import PEAK_LEVEL, synthesize_utterance, write_synthetic_corpus


def test_utterance_is_deterministic_per_seed():
    a = synthesize_utterance(1, np.random.default_rng(9))
    b = synthesize_utterance(1, np.random.default_rng(9))
    np.testing.assert_array_equal(a.samples, b.samples)
    assert len(a) == 4000
    assert np.max(np.abs(a.samples)) <= PEAK_LEVEL + 0.01


def test_severity_steepens_spectral_tilt():
    def high_band_share(severity):
        sig = synthesize_utterance(severity, np.random.default_rng(2), f0_hz=150.0)
        power = np.abs(np.fft.rfft(sig.samples)) ** 2
        freqs = np.fft.rfftfreq(len(sig), 1 / sig.sample_rate_hz)
        return power[freqs > 1000].sum() / power.sum()

    shares = [high_band_share(s) for s in (0, 1, 2)]
    assert shares[0] > shares[1] > shares[2]


def test_unknown_class():
    with pytest.raises(ValueError):
        synthesize_utterance(3, np.random.default_rng(0))


def test_corpus_manifest_is_balanced(tmp_path):
    manifest = load_manifest(write_synthetic_corpus(tmp_path, speakers_per_class=2, duration_s=0.1))
    assert len(manifest.entries) == 6
    assert check_balance(manifest).balanced
    assert len(manifest.speakers()) == 6

"""Shared fixtures: deterministic RNG, signal helpers, temp registry, synthetic corpus."""

import numpy as np
import pytest

from sffkit import config
from sffkit.audio import SignalBuffer
from sffkit.synthetic import write_synthetic_corpus


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_tone(freq_hz, amplitude=0.5, sample_rate_hz=16000, duration_s=1.0, phase=0.0):
    n = np.arange(int(round(duration_s * sample_rate_hz)))
    x = amplitude * np.sin(2.0 * np.pi * freq_hz * n / sample_rate_hz + phase)
    return SignalBuffer(samples=x, sample_rate_hz=sample_rate_hz)


@pytest.fixture
def tone():
    return make_tone


@pytest.fixture
def registry_db(tmp_path, monkeypatch):
    """Point the experiment registry at a fresh SQLite file."""
    path = tmp_path / "registry.db"
    monkeypatch.setattr(config, "SFFKIT_DB", str(path))
    return path


@pytest.fixture(scope="session")
def synthetic_corpus(tmp_path_factory):
    """30 speakers, 10 per class, one 0.5 s utterance each at 8 kHz."""
    root = tmp_path_factory.mktemp("synthetic")
    return write_synthetic_corpus(root, speakers_per_class=10, seed=7)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """6 speakers (2 per class), two utterances each."""
    root = tmp_path_factory.mktemp("small")
    return write_synthetic_corpus(root, speakers_per_class=2, utterances_per_speaker=2, seed=3)

"""
sffkit - Single frequency filtering cepstral features for PD severity classification

SFF and STFT spectrograms, SFFCC / MFCC-SFF / MFCC features, a from-scratch
one-vs-one linear SVM and a leave-one-speaker-out experiment harness.
"""

__version__ = "0.1.0"

from sffkit.audio import SignalBuffer, load_manifest, load_wav, write_wav
from sffkit.errors import SffKitError
from sffkit.features import FeatureMatrix, FeatureVector, extract, mean_pool
from sffkit.harness import compare_features, compare_tasks, extract_all, run_loso
from sffkit.models import (
    ExperimentConfig,
    ExperimentReport,
    FeatureConfig,
    FeatureKind,
    SffConfig,
)
from sffkit.sff import sff_analyze, sff_envelope_frames
from sffkit.transforms import stft_magnitude

__all__ = [
    # Version
    "__version__",
    # Audio
    "SignalBuffer",
    "load_wav",
    "write_wav",
    "load_manifest",
    # Analysis
    "sff_analyze",
    "sff_envelope_frames",
    "stft_magnitude",
    "extract",
    "mean_pool",
    "FeatureMatrix",
    "FeatureVector",
    # Experiments
    "extract_all",
    "run_loso",
    "compare_features",
    "compare_tasks",
    # Configuration / reports
    "SffConfig",
    "FeatureConfig",
    "ExperimentConfig",
    "ExperimentReport",
    "FeatureKind",
    "SffKitError",
]


def get_app():
    """
    Get FastAPI app instance (requires server extras).

    Install with: pip install sffkit[server]
    """
    from .app import app
    return app

"""
Script: errors.py
Created: 2026-09-14
Purpose: Exception hierarchy shared by every sffkit module
Keywords: errors, exceptions, sffkit
Status: active
Prerequisites:
  - None
Changelog:
  - 2026-09-14: Initial version
  - 2026-10-02: Added LeakageError and ExtractionError for the LOSO harness
"""

from typing import List, Optional, Tuple


class SffKitError(Exception):
    """Base class for all sffkit errors."""


# =============================================================================
# Audio / manifest
# =============================================================================

class AudioFileNotFoundError(SffKitError, FileNotFoundError):
    """Audio file does not exist."""


class MalformedWavError(SffKitError):
    """RIFF/WAVE structure could not be parsed."""


class UnsupportedEncodingError(SffKitError):
    """WAV is valid but not PCM integer 8/16/24/32-bit or IEEE float 32-bit."""


class ManifestError(SffKitError):
    """Manifest file unreadable or structurally invalid."""


class DuplicateUtteranceError(ManifestError):
    pass


class ConflictingClassError(ManifestError):
    pass


class UnknownTokenError(ManifestError):
    pass


# =============================================================================
# Numerical / configuration
# =============================================================================

class ConfigError(SffKitError, ValueError):
    """Configuration value outside its valid range."""


class FftSizeError(SffKitError, ValueError):
    pass


class FilterbankError(SffKitError, ValueError):
    """Mel filterbank cannot be built; `filter_index` names the offending filter."""

    def __init__(self, message: str, filter_index: Optional[int] = None):
        super().__init__(message)
        self.filter_index = filter_index


class TimeOutOfRangeError(SffKitError, ValueError):
    pass


# =============================================================================
# Classifier
# =============================================================================

class DimensionMismatchError(SffKitError, ValueError):
    pass


class SolverConvergenceError(SffKitError):
    """SMO hit its iteration cap; `kkt_violation` is the last maximal violation."""

    def __init__(self, kkt_violation: float, iterations: int):
        super().__init__(
            f"SMO did not converge after {iterations} iterations "
            f"(KKT violation {kkt_violation:.3e})"
        )
        self.kkt_violation = kkt_violation
        self.iterations = iterations


# =============================================================================
# Harness
# =============================================================================

class ProtocolError(SffKitError):
    """Experiment protocol precondition violated (class missing, too few speakers)."""


class MixedSampleRateError(ProtocolError):
    pass


class LeakageError(ProtocolError):
    """Held-out speaker data reached the training side of a fold."""


class ExtractionError(SffKitError):
    """One or more utterances failed feature extraction."""

    def __init__(self, failures: List[Tuple[str, str]]):
        lines = ", ".join(f"{uid}: {msg}" for uid, msg in failures[:5])
        more = f" (+{len(failures) - 5} more)" if len(failures) > 5 else ""
        super().__init__(f"{len(failures)} utterance(s) failed: {lines}{more}")
        self.failures = failures

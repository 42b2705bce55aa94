"""
Script: config.py
Created: 2026-09-14
Purpose: sffkit runtime configuration (environment) and logging setup
Keywords: config, environment, logging, sffkit
Status: active
Prerequisites:
  - None
Changelog:
  - 2026-09-14: Initial version, env settings for registry, service and extraction
  - 2026-09-30: Added SFFKIT_CHANNEL_BLOCK and setup_logging
See-Also: models.py (experiment-level configuration)
"""

import logging
import os


# =============================================================================
# Configuration
# =============================================================================

SFFKIT_DB = os.getenv("SFFKIT_DB", "/tmp/sffkit.db")
SFFKIT_PORT = int(os.getenv("SFFKIT_PORT", "8097"))
SFFKIT_SECRET = os.getenv("SFFKIT_SECRET", "")  # Empty = no auth required
SFFKIT_LOG_LEVEL = os.getenv("SFFKIT_LOG_LEVEL", "INFO")
SFFKIT_WORKERS = int(os.getenv("SFFKIT_WORKERS", "1"))

# Number of SFF channels filtered together; bounds memory at n_samples x block
SFFKIT_CHANNEL_BLOCK = int(os.getenv("SFFKIT_CHANNEL_BLOCK", "64"))

LOG_FORMAT = "[SffKit] %(levelname)s %(name)s: %(message)s"


# =============================================================================
# Logging
# =============================================================================

_logging_configured = False


def setup_logging(level: str = SFFKIT_LOG_LEVEL) -> None:
    """Configure the root sffkit logger once; later calls only change the level."""
    global _logging_configured
    logger = logging.getLogger("sffkit")
    logger.setLevel(level.upper())
    if _logging_configured:
        return
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    logger.propagate = False
    _logging_configured = True

"""
Script: client.py
Created: 2026-10-11
Purpose: Sync httpx client for the sffkit service
Keywords: client, sdk, http, httpx, sffkit
Status: active
Prerequisites:
  - httpx
Changelog:
  - 2026-10-11: Initial version
See-Also: endpoints.py, cli.py (--publish)
"""

import os
from typing import Any, Dict, Optional, Sequence

import httpx

from .models import ExperimentReport


# =============================================================================
# Configuration
# =============================================================================

SFFKIT_URL = os.getenv("SFFKIT_URL", "")  # e.g. "http://localhost:8097"
SFFKIT_TIMEOUT = float(os.getenv("SFFKIT_TIMEOUT", "30.0"))
CLIENT_SECRET = os.getenv("SFFKIT_SECRET", "")


class SffKitClient:
    """
    Sync client for the sffkit service.

    Usage:
        client = SffKitClient("http://localhost:8097")
        run_id = client.publish_report(report)
        client.get_experiment(run_id)

    An existing httpx.Client (e.g. a FastAPI TestClient) can be injected.
    """

    def __init__(
        self,
        base_url: str = SFFKIT_URL,
        secret: str = CLIENT_SECRET,
        timeout: float = SFFKIT_TIMEOUT,
        http_client: Optional[httpx.Client] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.secret = secret
        self.timeout = timeout
        self._http = http_client

    def _request(self, method: str, path: str, **kwargs) -> Dict[str, Any]:
        headers = kwargs.pop("headers", {})
        if self.secret:
            headers["X-SffKit-Secret"] = self.secret
        if self._http is not None:
            response = self._http.request(method, f"{self.base_url}{path}", headers=headers, **kwargs)
        else:
            with httpx.Client(timeout=self.timeout) as client:
                response = client.request(method, f"{self.base_url}{path}", headers=headers, **kwargs)
        response.raise_for_status()
        return response.json()

    def health(self) -> Dict[str, Any]:
        return self._request("GET", "/health")

    def spectrogram(
        self, samples: Sequence[float], sample_rate_hz: int, method: str = "sff", **options
    ) -> Dict[str, Any]:
        """Spectrogram frames of a signal; options are hop_s, window_s and sff."""
        payload = {"samples": list(map(float, samples)), "sample_rate_hz": sample_rate_hz,
                   "method": method, **options}
        return self._request("POST", "/analyze/spectrogram", json=payload)

    def features(
        self, samples: Sequence[float], sample_rate_hz: int, feature_kind: str = "sffcc", **options
    ) -> Dict[str, Any]:
        payload = {"samples": list(map(float, samples)), "sample_rate_hz": sample_rate_hz,
                   "feature_kind": feature_kind, **options}
        return self._request("POST", "/analyze/features", json=payload)

    def publish_report(self, report: ExperimentReport) -> str:
        """POST a report; returns its run_id."""
        data = self._request(
            "POST", "/experiments",
            content=report.model_dump_json(),
            headers={"Content-Type": "application/json"},
        )
        return data["run_id"]

    def list_experiments(self, limit: int = 50) -> Dict[str, Any]:
        return self._request("GET", "/experiments", params={"limit": limit})

    def get_experiment(self, run_id: str) -> ExperimentReport:
        return ExperimentReport.model_validate(self._request("GET", f"/experiments/{run_id}"))

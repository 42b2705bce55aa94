"""
Script: endpoints.py
Created: 2026-10-10
Purpose: HTTP route handlers: on-demand analysis and the experiment registry
Keywords: endpoints, routes, api, fastapi, spectrogram, features, sffkit
Status: active
Prerequisites:
  - fastapi, aiosqlite
Changelog:
  - 2026-10-10: Initial version
  - 2026-10-18: Analysis routes moved off the event loop
See-Also: app.py, db.py, client.py
"""

from typing import Dict, List, Optional

import numpy as np
from fastapi import APIRouter, Depends, Header, HTTPException, Query
from pydantic import BaseModel, Field

from . import config
from .audio import SignalBuffer
from .db import get_report, insert_report, list_recent_reports
from .features import extract, mean_pool
from .models import ExperimentReport, FeatureConfig, FeatureKind, SffConfig
from .sff import sff_envelope_frames
from .transforms import stft_magnitude


router = APIRouter()


# =============================================================================
# Authentication
# =============================================================================

async def verify_secret(x_sffkit_secret: Optional[str] = Header(None, alias="X-SffKit-Secret")):
    """Write endpoints require X-SffKit-Secret when SFFKIT_SECRET is set; reads are public."""
    if not config.SFFKIT_SECRET:
        return True
    if not x_sffkit_secret:
        raise HTTPException(status_code=401, detail="X-SffKit-Secret header required")
    if x_sffkit_secret != config.SFFKIT_SECRET:
        raise HTTPException(status_code=403, detail="Invalid SffKit secret")
    return True


# =============================================================================
# Request / response models
# =============================================================================

class SignalPayload(BaseModel):
    samples: List[float] = Field(..., min_length=1, description="Mono samples in [-1, 1]")
    sample_rate_hz: int = Field(..., gt=0)

    def to_signal(self) -> SignalBuffer:
        try:
            return SignalBuffer(samples=np.asarray(self.samples, dtype=np.float64),
                                sample_rate_hz=self.sample_rate_hz)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None


class SpectrogramRequest(SignalPayload):
    method: str = Field("sff", description="'sff' or 'stft'")
    hop_s: float = Field(0.010, gt=0)
    window_s: float = Field(0.030, gt=0, description="STFT only")
    sff: SffConfig = Field(default_factory=SffConfig)


class SpectrogramResponse(BaseModel):
    origin: str
    hop_s: float
    bin_spacing_hz: float
    first_bin_hz: float
    frames: List[List[float]]


class FeaturesRequest(SignalPayload):
    feature_kind: FeatureKind = FeatureKind.sffcc
    sff: SffConfig = Field(default_factory=SffConfig)
    features: FeatureConfig = Field(default_factory=FeatureConfig)


class FeaturesResponse(BaseModel):
    feature_kind: FeatureKind
    n_frames: int
    pooled: List[float]


# =============================================================================
# Routes
# =============================================================================

@router.get("/health", tags=["health"])
async def health():
    return {"status": "ok", "service": "sffkit"}


# CPU-bound analysis: plain def, so FastAPI runs it in the threadpool
@router.post("/analyze/spectrogram", tags=["analyze"], response_model=SpectrogramResponse)
def analyze_spectrogram(request: SpectrogramRequest):
    sig = request.to_signal()
    if request.method == "sff":
        spec = sff_envelope_frames(sig, request.sff, request.hop_s)
    elif request.method == "stft":
        spec = stft_magnitude(sig, request.window_s, request.hop_s)
    else:
        raise HTTPException(status_code=400, detail=f"unknown method {request.method!r}")
    return SpectrogramResponse(
        origin=spec.origin.value,
        hop_s=spec.hop_s,
        bin_spacing_hz=spec.bin_spacing_hz,
        first_bin_hz=spec.first_bin_hz,
        frames=spec.frames.tolist(),
    )


@router.post("/analyze/features", tags=["analyze"], response_model=FeaturesResponse)
def analyze_features(request: FeaturesRequest):
    fm = extract(request.feature_kind, request.to_signal(), request.sff, request.features)
    return FeaturesResponse(
        feature_kind=request.feature_kind,
        n_frames=fm.n_frames,
        pooled=mean_pool(fm).values.tolist(),
    )


@router.post("/experiments", tags=["experiments"], dependencies=[Depends(verify_secret)])
async def publish_experiment(report: ExperimentReport) -> Dict[str, str]:
    """Store a LOSO report. Requires X-SffKit-Secret if configured."""
    return {"run_id": await insert_report(report)}


@router.get("/experiments", tags=["experiments"])
async def list_experiments(
    limit: int = Query(50, description="Max reports to return", ge=1, le=1000),
):
    experiments = await list_recent_reports(limit)
    return {"experiments": experiments, "count": len(experiments)}


@router.get("/experiments/{run_id}", tags=["experiments"], response_model=ExperimentReport)
async def get_experiment(run_id: str):
    report = await get_report(run_id)
    if report is None:
        raise HTTPException(status_code=404, detail=f"unknown run_id {run_id}")
    return report

"""
Script: app.py
Created: 2026-10-10
Purpose: FastAPI application and lifespan management for the sffkit service
Keywords: fastapi, app, lifespan, cors, sffkit
Status: active
Prerequisites:
  - fastapi
Changelog:
  - 2026-10-10: Initial version
See-Also: endpoints.py, cli.py (serve)
"""

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import __version__
from .db import init_db
from .endpoints import router
from .errors import SffKitError

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Initialize the experiment registry on startup."""
    await init_db()
    yield


app = FastAPI(
    title="sffkit",
    description="SFF spectrogram, cepstral feature and LOSO experiment service",
    version=__version__,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(SffKitError)
async def sffkit_error_handler(request: Request, exc: SffKitError):
    logger.warning("%s %s: %s", request.method, request.url.path, exc)
    return JSONResponse(status_code=422, content={"detail": str(exc)})


app.include_router(router)

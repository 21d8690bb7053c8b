"""
app/main.py

FastAPI service exposing design checks, HpPDA construction, scheme simulation
and rate-memory sweeps.
"""

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.api.endpoints import designs, hppda, scheme, sweep
from app.core.config import settings
from app.core.logging_config import setup_logging

setup_logging(settings.log_level)

API_PREFIX = settings.api_prefix

app = FastAPI(
    title="Hotplug Coded Caching Toolkit API",
    version="1.0.0",
    openapi_url=f"{API_PREFIX}/openapi.json",
    docs_url=f"{API_PREFIX}/docs",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include Routers
app.include_router(designs.router, prefix=f"{API_PREFIX}", tags=["Designs"])
app.include_router(hppda.router, prefix=f"{API_PREFIX}", tags=["HpPDA"])
app.include_router(scheme.router, prefix=f"{API_PREFIX}", tags=["Scheme"])
app.include_router(sweep.router, prefix=f"{API_PREFIX}", tags=["Sweep"])


@app.get("/", include_in_schema=False)
def root():
    return JSONResponse(
        {"message": "Hotplug Coded Caching Toolkit API", "docs": f"{API_PREFIX}/docs", "openapi": f"{API_PREFIX}/openapi.json"}
    )

"""
crel HTTP service - FastAPI Application

Exposes Cressie-Read weights, GELR values, profile curves, posterior
quantiles and the analytic bias table over HTTP.
"""

import logging
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .likelihood_routes import router as likelihood_router
from .posterior_routes import router as posterior_router
from .tables_routes import router as tables_router

from crel import __version__
from crel.core.audit import setup_logging
from crel.core.config import LOG_DIR, LOG_LEVEL
from crel.core.exceptions import CrelException
from crel.core.models import ErrorCode, ErrorResponse

setup_logging(str(LOG_DIR), LOG_LEVEL)
logger = logging.getLogger(__name__)

app = FastAPI(
    title="crel",
    description="Bayesian Cressie-Read empirical likelihood",
    version=__version__,
    docs_url="/api/docs",
    redoc_url="/api/redoc",
    openapi_url="/api/openapi.json"
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(likelihood_router)
app.include_router(posterior_router)
app.include_router(tables_router)


@app.get("/health")
async def health_check():
    """Health check endpoint."""
    return {"status": "healthy", "service": "crel"}


@app.get("/")
async def root():
    """Root endpoint with service information."""
    return {
        "service": "crel",
        "version": __version__,
        "endpoints": {
            "weights": "/weights",
            "gelr": "/gelr",
            "profile": "/profile",
            "posterior": "/posterior",
            "table2": "/tables/2",
            "docs": "/api/docs"
        }
    }


@app.exception_handler(CrelException)
async def crel_exception_handler(request, exc: CrelException):
    """Map library errors to their HTTP status."""
    body = ErrorResponse(code=exc.code, message=exc.message, details=exc.details)
    return JSONResponse(status_code=exc.code.http_status, content=body.model_dump(mode="json"))


@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request, exc):
    """Handle validation errors."""
    return JSONResponse(
        status_code=422,
        content={
            "code": ErrorCode.INVALID_REQUEST.value,
            "message": "Request validation failed",
            "details": exc.errors()
        }
    )

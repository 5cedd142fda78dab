"""
Configuration settings for the crel toolkit.

Environment variables use the ``CREL_`` prefix (``CREL_SEED``, ``CREL_THREADS``,
``CREL_LOG_LEVEL`` ...). Numeric defaults for solvers and samplers live here as
module constants so every module reads the same values.
"""

from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-level settings read from the environment."""

    model_config = SettingsConfigDict(env_prefix="CREL_", extra="ignore")

    SEED: Optional[int] = None
    THREADS: int = 1
    LOG_LEVEL: str = "INFO"
    LOG_DIR: Path = Path("./logs")
    OUTPUT_DIR: Path = Path("./out")
    SERVER_HOST: str = "0.0.0.0"
    SERVER_PORT: int = 8000


settings = Settings()

# Logging
LOG_LEVEL = settings.LOG_LEVEL
LOG_DIR = settings.LOG_DIR

# Server
SERVER_HOST = settings.SERVER_HOST
SERVER_PORT = settings.SERVER_PORT

# Dual solver
SOLVER_TOL = 1e-10
SOLVER_MAX_ITER = 200
BRANCH_EPS = 1e-6  # gamma within this of 0 or -1 uses the EL / ET branch
POSITIVITY_FLOOR = 1e-10

# M-estimation
MEST_MAX_ITER = 200
MEST_TOL = 1e-10

# Numeric derivatives: h = max(STEP_ABS, STEP_REL * |theta|)
STEP_ABS = 1e-5
STEP_REL = 1e-5

# Poisson expectation truncation: y in [0, ceil(mu + POISSON_TAIL_WIDTH * sqrt(mu))]
POISSON_TAIL_WIDTH = 10.0

# Sampler
DEFAULT_CHAIN_LENGTH = 50000
DEFAULT_BURN_IN = 5000
TARGET_ACCEPTANCE = 0.3
MAX_BURN_IN_FAILURE_SHARE = 0.5
MIN_ESS = 100

# Quantile expansion root search
EXPANSION_SEARCH_CAP = 12.0

# Reproduce: share of failed cells that turns the exit status nonzero
MAX_FAILED_CELL_SHARE = 0.10


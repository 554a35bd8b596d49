from pathlib import Path
import os
from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import field_validator, ValidationInfo
from functools import lru_cache
import logging

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

class Settings(BaseSettings):
    # Base directory and application settings
    BASE_DIR: Path = Path(__file__).resolve().parent
    APP_NAME: str = "lclt"
    DEBUG: bool = os.getenv("LCLT_DEBUG", "False").lower() == "true"
    LOG_LEVEL: str = "INFO"

    # Measure validation
    MASS_TOLERANCE: float = 1e-12
    APERIODICITY_CAP: int = 64
    INTERIOR_MARGIN: float = 1e-12

    # Exact oracles
    CONVOLVED_MASS_TOLERANCE: float = 1e-9
    MAX_GRID_CELLS: int = 4_000_000
    UNDERFLOW_FLUSH: float = 1e-300
    IMAGINARY_RESIDUE_MAX: float = 1e-10

    # Tilt solver
    NEWTON_TOL: float = 1e-11
    NEWTON_MAX_ITER: int = 200
    ARMIJO_C: float = 1e-4

    # Harness
    DEFAULT_ALPHA: float = 0.25
    WEIGHT_FLOOR: float = 1e-280
    MIN_SLOPE_POINTS: int = 5
    N_JOBS: int = 1
    MEASURES_DIR: Path = BASE_DIR / "measures"

    @field_validator('DEFAULT_ALPHA')
    @classmethod
    def validate_alpha(cls, v: float, info: ValidationInfo) -> float:
        """Alpha must lie strictly inside (0, 1/2)"""
        if not 0.0 < v < 0.5:
            logger.warning(f"{info.field_name}={v} outside (0, 1/2), using 0.25")
            return 0.25
        return v

    @field_validator('APERIODICITY_CAP', 'NEWTON_MAX_ITER', 'MAX_GRID_CELLS', 'N_JOBS')
    @classmethod
    def validate_positive(cls, v: int, info: ValidationInfo) -> int:
        if v < 1:
            raise ValueError(f"{info.field_name} must be positive")
        return v

    model_config = SettingsConfigDict(
        env_prefix="LCLT_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        validate_assignment=True,
        extra='ignore'
    )

@lru_cache
def get_settings() -> Settings:
    """
    Create cached instance of settings
    Returns:
        Settings: Application settings
    """
    return Settings()

# Create settings instance
settings = get_settings()

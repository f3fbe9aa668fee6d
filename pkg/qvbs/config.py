"""
QVBS v1 - Shared Configuration Module

This module provides centralized configuration management for the library
and the CLI. It loads settings from environment variables (optionally from a
.env file) and provides typed access.
"""

import logging
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


class ToleranceSettings(BaseSettings):
    """Pass/fail tolerances of the verification suites"""
    spectrum: float = Field(default=1e-9, gt=0, alias="QVBS_TOL_SPECTRUM")
    intertwiner: float = Field(default=1e-11, gt=0, alias="QVBS_TOL_INTERTWINER")
    norm: float = Field(default=1e-10, gt=0, alias="QVBS_TOL_NORM")
    residual: float = Field(default=1e-10, gt=0, alias="QVBS_TOL_RESIDUAL")
    oracle: float = Field(default=1e-10, gt=0, alias="QVBS_TOL_ORACLE")
    annihilation: float = Field(default=1e-8, gt=0, alias="QVBS_TOL_ANNIHILATION")
    proposition: float = Field(default=1e-10, gt=0, alias="QVBS_TOL_PROPOSITION")
    vanishing: float = Field(default=1e-12, gt=0, alias="QVBS_TOL_VANISHING")

    model_config = SettingsConfigDict(env_file=".env", extra="ignore", populate_by_name=True)


class BudgetSettings(BaseSettings):
    """Size guards for dense objects and solver limits"""
    max_state_dim: int = Field(default=390625, gt=0, alias="QVBS_MAX_STATE_DIM")
    max_hamiltonian_dim: int = Field(default=729, gt=0, alias="QVBS_MAX_HAMILTONIAN_DIM")
    max_spin: int = Field(default=6, ge=1, alias="QVBS_MAX_SPIN")
    jacobi_threshold: float = Field(default=1e-14, gt=0, alias="QVBS_JACOBI_THRESHOLD")
    jacobi_max_sweeps: int = Field(default=100, ge=1, alias="QVBS_JACOBI_MAX_SWEEPS")

    model_config = SettingsConfigDict(env_file=".env", extra="ignore", populate_by_name=True)


class RunSettings(BaseSettings):
    """Defaults for CLI runs"""
    output_dir: str = Field(default=".", alias="QVBS_OUTPUT_DIR")
    jobs: int = Field(default=1, ge=1, alias="QVBS_JOBS")
    seed: int = Field(default=0, alias="QVBS_SEED")

    model_config = SettingsConfigDict(env_file=".env", extra="ignore", populate_by_name=True)


class AppSettings(BaseSettings):
    """General application settings"""
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")
    log_format: str = Field(default="text", alias="LOG_FORMAT")

    model_config = SettingsConfigDict(env_file=".env", extra="ignore", populate_by_name=True)


class Config:
    """Main configuration class that combines all settings"""

    def __init__(self):
        self.tolerances = ToleranceSettings()
        self.budgets = BudgetSettings()
        self.run = RunSettings()
        self.app = AppSettings()

    @property
    def output_dir(self) -> Path:
        return Path(self.run.output_dir)


_config: Config | None = None


def get_config() -> Config:
    """Get the global configuration instance, created on first use"""
    global _config
    if _config is None:
        _config = Config()
    return _config


def reset_config() -> None:
    """Drop the cached instance so the next get_config() re-reads the environment"""
    global _config
    _config = None


def load_env(env_file: str = ".env") -> None:
    """Load environment variables from file"""
    from dotenv import load_dotenv
    env_path = Path(env_file)
    if env_path.exists():
        load_dotenv(env_path)
        reset_config()
    else:
        logger.debug(f"{env_file} not found, using process environment only")

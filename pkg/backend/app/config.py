from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


class Settings(BaseSettings):
    app_name: str = Field(default="Invariant Likelihood-Ratio Lab")
    debug: bool = Field(default=False, alias="LR_DEBUG")
    log_level: str = Field(default="INFO", alias="LR_LOG_LEVEL")
    output_dir: Path = Field(default=Path("results"), alias="LR_OUTPUT_DIR")

    # Monte Carlo
    master_seed: int = Field(default=20060101, ge=0, lt=2**64, alias="LR_MASTER_SEED")
    n_calib: int = Field(default=200_000, ge=1000, alias="LR_N_CALIB")
    n_power: int = Field(default=1_000_000, ge=1000, alias="LR_N_POWER")
    workers: int = Field(default=1, ge=1, alias="LR_WORKERS")
    # Fixes how replicates are split into substream chunks; must not depend on workers.
    chunk_size: int = Field(default=65_536, ge=1024, alias="LR_CHUNK_SIZE")

    # Quadrature
    quad_abs_tol: float = Field(default=1e-14, gt=0, alias="LR_QUAD_ABS_TOL")
    quad_rel_tol: float = Field(default=1e-11, gt=0, alias="LR_QUAD_REL_TOL")
    quad_max_subdivisions: int = Field(default=400, ge=10, alias="LR_QUAD_MAX_SUBDIVISIONS")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        populate_by_name=True,
    )

    @field_validator("log_level", mode="before")
    @classmethod
    def _normalize_log_level(cls, value: str | None) -> str:
        if value is None:
            return "INFO"
        level = str(value).strip().upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"log level must be one of {sorted(LOG_LEVELS)}")
        return level


@lru_cache()
def get_settings() -> Settings:
    return Settings()

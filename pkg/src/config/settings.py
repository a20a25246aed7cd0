"""Laboratory settings using Pydantic Settings."""
from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Laboratory configuration settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="RESLAB_",
        extra="ignore",
    )

    # Runs
    seed: int = 20240601
    output_dir: str = "./runs"
    log_level: str = "INFO"

    # Riccati
    dare_tol: float = 1e-12
    dare_max_iter: int = 10_000
    dare_residual_tol: float = 1e-10

    # Norms and verification grids
    grid_size: int = 512
    hinf_rtol: float = 1e-9
    schur_margin: float = 1e-12

    # Simulation
    norm_guard: float = 1e9
    default_noise_variance: float = 1e-6

    # Detector calibration
    glr_calibration_windows: int = 10_000

    # Experiment reproduction
    reproduce_workers: int = 1

    @property
    def output_path(self) -> Path:
        """Get the emission root as a path."""
        return Path(self.output_dir)


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


settings = get_settings()

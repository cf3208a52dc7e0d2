"""Configuration settings for the application."""

from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache


class Settings(BaseSettings):
    """Application settings."""

    # General Settings
    app_name: str = "Aztec Axis Defects"
    log_level: str = "INFO"

    # Oracle Settings
    oracle_vertex_cap: int = 256  # AD_8 has 144 vertices

    # Precision Settings
    mp_dps: int = 30
    exact_path_max_n: int = 100  # above this, evaluate in log space

    # Optimizer Settings
    optimizer_margin: float = 1e-6
    optimizer_grad_tol: float = 1e-10
    optimizer_max_iter: int = 20000
    optimizer_starts: int = 8
    optimizer_seed: int = 20240101
    multistart_tol: float = 1e-8

    # Approximation Settings
    diophantine_q_cap: int = 100000

    # Export Settings
    export_dir: str = "exports"

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8")


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()

# Clear the cache to ensure new settings are loaded
get_settings.cache_clear()

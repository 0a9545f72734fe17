"""Configuration management using pydantic-settings."""
from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict

from src.errors import SizeLimitError


class Settings(BaseSettings):
    """Engine settings loaded from environment variables (prefix GROUPOID_)."""

    # Guardrails
    max_size: int = 1_000_000
    max_group_order: int = 64
    two_iso_node_limit: int = 1_000_000

    # Stack check bounds
    stack_exhaustive_points: int = 3
    stack_exhaustive_parts: int = 3
    stack_exhaustive_arrows: int = 6
    stack_sample_size: int = 200
    stack_pair_limit: int = 40
    default_seed: int = 0

    # Reporting
    progress: bool = False

    model_config = SettingsConfigDict(env_file=".env", env_prefix="GROUPOID_", extra="ignore")


@lru_cache()
def get_config() -> Settings:
    """Get singleton configuration instance."""
    return Settings()


def check_size(count: int, what: str) -> None:
    """Raise SizeLimitError when a derived construction would exceed max_size."""
    limit = get_config().max_size
    if count > limit:
        raise SizeLimitError(f"{what}: {count} elements exceeds max size {limit}")

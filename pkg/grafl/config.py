# grafl/config.py
import os
from dataclasses import dataclass, field
from typing import Optional

from dotenv import load_dotenv

# Load .env
load_dotenv()


def _optional_int(name: str) -> Optional[int]:
    raw = os.getenv(name, "").strip()
    return int(raw) if raw else None


@dataclass
class Settings:
    ENV: str = field(default_factory=lambda: os.getenv("GRAFL_ENV", "dev"))
    LOG_LEVEL: str = field(default_factory=lambda: os.getenv("GRAFL_LOG_LEVEL", "INFO"))
    # Empty URL disables the run registry
    DB_URL: str = field(default_factory=lambda: os.getenv("GRAFL_DB_URL", ""))
    # Overrides --workers and config files when set
    WORKERS: Optional[int] = field(default_factory=lambda: _optional_int("GRAFL_WORKERS"))
    DEFAULT_ALPHA: float = field(default_factory=lambda: float(os.getenv("GRAFL_ALPHA", "0.5")))
    DEFAULT_LAMBDA: float = field(default_factory=lambda: float(os.getenv("GRAFL_LAMBDA", "0.7")))


# Instantiate the Settings class
settings = Settings()


def get_settings() -> Settings:
    return settings

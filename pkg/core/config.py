"""
Centralized configuration management.

Numerical defaults are loaded from the environment once and accessed
throughout the package via the `config` object. Per-run parameters (atom,
profile, grids) live in tools.run_config; this module only holds process-wide
settings such as tolerances and thread counts.
"""

import os
import logging
from dataclasses import dataclass, field
from typing import Optional
from pathlib import Path
from dotenv import load_dotenv

from core.errors import ConfigError

# Load environment variables once at module import
load_dotenv()

logger = logging.getLogger(__name__)


def _env_float(name: str, default: str) -> float:
    raw = os.getenv(name, default)
    try:
        return float(raw)
    except ValueError as e:
        raise ConfigError(f"{name} must be a number, got {raw!r}") from e


def _env_int(name: str, default: str) -> int:
    raw = os.getenv(name, default)
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from e


@dataclass
class Config:
    """Process-wide numerical settings loaded from environment variables."""

    # Quadrature
    rel_tol: float = field(default_factory=lambda: _env_float("LCP_REL_TOL", "1e-6"))
    abs_tol: float = field(default_factory=lambda: _env_float("LCP_ABS_TOL", "1e-30"))

    # Scans
    threads: int = field(default_factory=lambda: _env_int("LCP_THREADS", "1"))

    # Corrugation series cutoff
    n_max: int = field(default_factory=lambda: _env_int("LCP_N_MAX", "50"))

    # Response caching
    z_grid_points: int = field(default_factory=lambda: _env_int("LCP_Z_GRID_POINTS", "201"))
    memo_size: int = field(default_factory=lambda: _env_int("LCP_MEMO_SIZE", "4096"))
    cache_db: str = field(default_factory=lambda: os.getenv("LCP_CACHE_DB", "").strip())

    # Logging
    log_level: str = field(default_factory=lambda: os.getenv("LCP_LOG_LEVEL", "INFO").strip().upper())

    def __post_init__(self):
        """Validate configuration after initialization."""
        self._validate()

    def _validate(self):
        """Collect every invalid value and raise once."""
        errors = []

        if not 0 < self.rel_tol < 1:
            errors.append(f"rel_tol must lie in (0, 1), got {self.rel_tol}")

        if not self.abs_tol >= 0:
            errors.append(f"abs_tol must be non-negative, got {self.abs_tol}")

        if self.threads < 1:
            errors.append(f"threads must be at least 1, got {self.threads}")

        if self.n_max < 1:
            errors.append(f"n_max must be at least 1, got {self.n_max}")

        if self.z_grid_points < 5:
            errors.append(f"z_grid_points must be at least 5, got {self.z_grid_points}")

        if self.memo_size < 0:
            errors.append(f"memo_size must be non-negative, got {self.memo_size}")

        if self.log_level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            errors.append(f"unknown log level {self.log_level!r}")

        if errors:
            error_msg = "Configuration validation failed:\n" + "\n".join(f"  - {e}" for e in errors)
            raise ConfigError(error_msg)

        if self.rel_tol < 1e-12:
            logger.warning(f"rel_tol={self.rel_tol:g} is below double precision quadrature reach")

    @property
    def cache_db_resolved(self) -> Optional[Path]:
        """Resolved path of the persistent response store, or None when disabled."""
        if not self.cache_db:
            return None
        return Path(self.cache_db).resolve()


# Global configuration instance (singleton)
_config_instance: Optional[Config] = None


def get_config() -> Config:
    """Get the global configuration instance."""
    global _config_instance
    if _config_instance is None:
        _config_instance = Config()
    return _config_instance


def reset_config() -> None:
    """Forget the cached configuration so the next access re-reads the environment."""
    global _config_instance
    _config_instance = None


# For convenience, expose config directly (lazy loaded on first access)
class _ConfigProxy:
    """Proxy that resolves the current configuration on every attribute access."""

    def __getattr__(self, name: str):
        return getattr(get_config(), name)


config = _ConfigProxy()

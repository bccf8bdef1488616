"""
Core modules for the lateral Casimir-Polder toolkit.

Provides centralized configuration, physical constants, the exception
hierarchy, polarizability models and the response value stores.
"""

from core.config import config, get_config, reset_config
from core.database import db_session, init_db, get_db_path
from core.errors import LateralCPError

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "config",
    "get_config",
    "reset_config",
    "db_session",
    "init_db",
    "get_db_path",
    "LateralCPError",
]

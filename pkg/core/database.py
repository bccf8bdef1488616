"""
Persistent store of exactly computed response values.

Provides:
- Database path management (from config, overridable for tests)
- Session context manager
- Schema initialization
- Save/load helpers keyed by (k, zA, model fingerprint, rel_tol)

The store is optional: with LCP_CACHE_DB unset every helper is a no-op.
"""

import sqlite3
import logging
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
UTC = timezone.utc
from typing import Generator, Optional

logger = logging.getLogger(__name__)

# Database path - loaded lazily from config to avoid circular imports
_db_path: Optional[str] = None
_db_path_set = False
_initialized_paths: set = set()
_init_lock = threading.Lock()


@dataclass(frozen=True)
class ResponseKey:
    """Identity of one exact response evaluation."""

    k: float
    z: float
    model: str
    rel_tol: float


def get_db_path() -> Optional[str]:
    """Get the database path from configuration (None when persistence is off)."""
    if _db_path_set:
        return _db_path
    from core.config import config
    return config.cache_db or None


def set_db_path(path: Optional[str]) -> None:
    """Set the database path (useful for testing); None disables persistence."""
    global _db_path, _db_path_set
    _db_path = path
    _db_path_set = True


@contextmanager
def db_session() -> Generator[sqlite3.Cursor, None, None]:
    """
    Context manager for database connections.

    Commits on success, rolls back on error and always closes the connection.

    Usage:
        with db_session() as cur:
            cur.execute("SELECT * FROM responses")
            rows = cur.fetchall()

    Yields:
        sqlite3.Cursor: Database cursor for executing queries
    """
    conn = sqlite3.connect(get_db_path(), timeout=30)
    try:
        yield conn.cursor()
        conn.commit()
    except Exception:
        conn.rollback()
        raise
    finally:
        conn.close()


def init_db() -> None:
    """
    Initialize database schema.

    Safe to call multiple times - uses IF NOT EXISTS.
    """
    path = get_db_path()
    if not path:
        return

    with _init_lock:
        if path in _initialized_paths:
            return
        with db_session() as cur:
            cur.execute("""
            CREATE TABLE IF NOT EXISTS responses (
                k REAL NOT NULL,
                z REAL NOT NULL,
                model TEXT NOT NULL,
                rel_tol REAL NOT NULL,
                value REAL NOT NULL,
                error REAL NOT NULL,
                computed_at TEXT NOT NULL,
                PRIMARY KEY (k, z, model, rel_tol)
            )
            """)
        _initialized_paths.add(path)

    logger.info(f"Response store initialized at: {path}")


def save_response(key: ResponseKey, value: float, error: float) -> None:
    """
    Persist one exact response value.

    Args:
        key: Evaluation identity
        value: g(k, zA) in J/m
        error: Absolute error estimate in J/m
    """
    if not get_db_path():
        return
    init_db()
    try:
        with db_session() as cur:
            cur.execute("""
                INSERT OR REPLACE INTO responses (k, z, model, rel_tol, value, error, computed_at)
                VALUES (?, ?, ?, ?, ?, ?, ?)
            """, (key.k, key.z, key.model, key.rel_tol, value, error, datetime.now(UTC).isoformat()))
        logger.debug(f"Stored response k={key.k:g} z={key.z:g}")
    except sqlite3.Error as e:
        logger.error(f"Error saving response to store: {e}")


def load_response(key: ResponseKey) -> Optional[tuple[float, float]]:
    """
    Look up a stored response value.

    Returns:
        (value, error) if present, None otherwise
    """
    if not get_db_path():
        return None
    init_db()
    try:
        with db_session() as cur:
            cur.execute("""
                SELECT value, error FROM responses
                WHERE k = ? AND z = ? AND model = ? AND rel_tol = ?
            """, (key.k, key.z, key.model, key.rel_tol))
            row = cur.fetchone()
    except sqlite3.Error as e:
        logger.error(f"Error reading response store: {e}")
        return None
    if row is None:
        return None
    return float(row[0]), float(row[1])


def clear_responses() -> int:
    """Delete every stored response; returns the number of rows removed."""
    if not get_db_path():
        return 0
    init_db()
    with db_session() as cur:
        cur.execute("DELETE FROM responses")
        deleted = cur.rowcount
    logger.info(f"Cleared {deleted} stored responses")
    return deleted

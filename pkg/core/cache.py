"""
In-process caches for response values.

- LRUCache: bounded, thread-safe memo of scalar evaluations
- ZGridCache: eager z-grid table of g(k, z) for a fixed set of wavenumbers,
  interpolated with a monotone cubic (PCHIP) so the condensate quadrature does
  not need one quadrature per node
"""

import logging
import threading
from collections import OrderedDict
from typing import Callable, Dict, Hashable, Iterable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from core.errors import AccuracyError, ConfigError

logger = logging.getLogger(__name__)


class LRUCache:
    """Thread-safe LRU cache with configurable max size."""

    def __init__(self, max_size: int = 4096):
        self.cache: OrderedDict = OrderedDict()
        self.max_size = max_size
        self.lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: Hashable):
        """Get item from cache, moving it to end (most recent)."""
        with self.lock:
            if key in self.cache:
                self.cache.move_to_end(key)
                self.hits += 1
                return self.cache[key]
            self.misses += 1
            return None

    def set(self, key: Hashable, value) -> None:
        """Set item in cache, evicting oldest if at capacity."""
        if self.max_size <= 0:
            return
        with self.lock:
            if key in self.cache:
                self.cache.move_to_end(key)
            elif len(self.cache) >= self.max_size:
                oldest_key = next(iter(self.cache))
                del self.cache[oldest_key]
                logger.debug(f"Evicted oldest cache entry: {oldest_key}")
            self.cache[key] = value

    def __contains__(self, key: Hashable) -> bool:
        with self.lock:
            return key in self.cache

    def __len__(self) -> int:
        with self.lock:
            return len(self.cache)


class ZGridCache:
    """
    Table of g(k, z) on a uniform z grid for a fixed set of wavenumbers.

    The table is built eagerly in the constructor and never mutated, so lookups
    are safe from any thread. Interpolation runs on log(−g) when every sample
    is negative (the physical case) and on g otherwise.
    """

    def __init__(
        self,
        evaluate: Callable[[float, np.ndarray], np.ndarray],
        ks: Iterable[float],
        z_lo: float,
        z_hi: float,
        points: int = 201,
        rel_tol: float = 1e-6,
    ):
        """
        Build the table.

        Args:
            evaluate: Direct evaluator, evaluate(k, z_array) -> g values in J/m
            ks: Wavenumbers to tabulate (rad/m)
            z_lo: Lowest height (m)
            z_hi: Highest height (m)
            points: Number of grid points per wavenumber
            rel_tol: Tolerance of the direct evaluator; validation allows 10x
        """
        if not 0 < z_lo <= z_hi:
            raise ConfigError(f"invalid cache range [{z_lo}, {z_hi}]")
        if points < 5:
            raise ConfigError(f"z grid needs at least 5 points, got {points}")

        self._evaluate = evaluate
        self.rel_tol = rel_tol
        self.z_lo = float(z_lo)
        self.z_hi = float(z_hi)
        self.degenerate = self.z_hi == self.z_lo
        self.grid = np.linspace(self.z_lo, self.z_hi, points if not self.degenerate else 1)
        self._tables: Dict[float, tuple[bool, object]] = {}

        for k in sorted({float(k) for k in ks}):
            values = np.asarray(evaluate(k, self.grid), dtype=float)
            if self.degenerate:
                self._tables[k] = (False, float(values[0]))
            elif np.all(values < 0):
                self._tables[k] = (True, PchipInterpolator(self.grid, np.log(-values)))
            else:
                self._tables[k] = (False, PchipInterpolator(self.grid, values))

        logger.info(
            f"ZGridCache built for {len(self._tables)} wavenumbers on "
            f"[{self.z_lo:.3e}, {self.z_hi:.3e}] m with {self.grid.size} points"
        )

    @property
    def wavenumbers(self) -> tuple[float, ...]:
        return tuple(self._tables)

    def __contains__(self, k: float) -> bool:
        return float(k) in self._tables

    def g(self, k: float, z):
        """Interpolated g(k, z); z must lie inside the tabulated range."""
        entry = self._tables.get(float(k))
        if entry is None:
            raise KeyError(f"wavenumber {k!r} not tabulated")
        z_arr = np.asarray(z, dtype=float)
        span = max(self.z_hi - self.z_lo, self.z_hi * 1e-12)
        if np.any(z_arr < self.z_lo - 1e-9 * span) or np.any(z_arr > self.z_hi + 1e-9 * span):
            raise KeyError(f"height outside cached range [{self.z_lo:g}, {self.z_hi:g}]")

        log_form, table = entry
        if self.degenerate:
            out = np.full(z_arr.shape, table)
        elif log_form:
            out = -np.exp(table(z_arr))
        else:
            out = table(z_arr)
        if np.ndim(out) == 0:
            return float(out)
        return out

    def validate(self, samples: int = 10, seed: int = 0, rng: Optional[np.random.Generator] = None) -> float:
        """
        Compare the interpolant against direct evaluation at random heights.

        Returns:
            Worst relative error over all wavenumbers

        Raises:
            AccuracyError: if the worst error exceeds 10 x rel_tol
        """
        if self.degenerate or not self._tables:
            return 0.0
        rng = rng or np.random.default_rng(seed)
        z_test = np.sort(rng.uniform(self.z_lo, self.z_hi, size=samples))
        worst = 0.0
        for k in self._tables:
            direct = np.asarray(self._evaluate(k, z_test), dtype=float)
            cached = np.asarray(self.g(k, z_test), dtype=float)
            scale = np.maximum(np.abs(direct), np.finfo(float).tiny)
            worst = max(worst, float(np.max(np.abs(cached - direct) / scale)))

        limit = 10.0 * self.rel_tol
        if worst > limit:
            raise AccuracyError(
                f"z-grid interpolation error {worst:.2e} exceeds {limit:.2e}",
                estimate=worst,
                error_bound=limit,
            )
        logger.info(f"ZGridCache validated on {samples} held-out heights (worst rel error {worst:.2e})")
        return worst

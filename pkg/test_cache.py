#!/usr/bin/env python3
"""Test the in-process caches and the persistent response store."""

import sys
import threading
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pytest

from core import database
from core.cache import LRUCache, ZGridCache
from core.errors import AccuracyError, ConfigError
from core.polarizability import StaticPolarizability, alpha_from_volume
from physics.response import ResponseEngine, ResponseMethod


def attractive(k, z):
    z = np.asarray(z, dtype=float)
    return -(1.0 + k * z) * np.exp(-k * z) / z ** 5


@pytest.fixture
def store(tmp_path):
    database.set_db_path(str(tmp_path / "responses.db"))
    yield
    database.set_db_path(None)


class TestLRUCache:
    def test_get_and_set(self):
        cache = LRUCache(max_size=3)
        assert cache.get("a") is None
        cache.set("a", 1)
        assert cache.get("a") == 1
        assert "a" in cache
        assert len(cache) == 1
        assert (cache.hits, cache.misses) == (1, 1)

    def test_evicts_least_recently_used(self):
        cache = LRUCache(max_size=2)
        cache.set("a", 1)
        cache.set("b", 2)
        cache.get("a")
        cache.set("c", 3)
        assert "b" not in cache
        assert cache.get("a") == 1
        assert cache.get("c") == 3

    def test_zero_size_stores_nothing(self):
        cache = LRUCache(max_size=0)
        cache.set("a", 1)
        assert len(cache) == 0

    def test_concurrent_writers(self):
        cache = LRUCache(max_size=50)

        def fill(offset):
            for i in range(200):
                cache.set(offset + i, i)

        threads = [threading.Thread(target=fill, args=(1000 * t,)) for t in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(cache) == 50


class TestZGridCache:
    K = 1e6

    def test_exact_at_nodes(self):
        cache = ZGridCache(attractive, [self.K], 1e-6, 3e-6, points=201)
        assert np.allclose(cache.g(self.K, cache.grid), attractive(self.K, cache.grid), rtol=1e-12, atol=0)

    def test_interpolates_between_nodes(self):
        cache = ZGridCache(attractive, [self.K, 2 * self.K], 1e-6, 3e-6, points=201)
        z = np.linspace(1.005e-6, 2.995e-6, 37)
        for k in (self.K, 2 * self.K):
            assert np.allclose(cache.g(k, z), attractive(k, z), rtol=1e-5, atol=0)
        assert isinstance(cache.g(self.K, 2e-6), float)
        assert cache.wavenumbers == (self.K, 2 * self.K)

    def test_validate_passes_on_smooth_data(self):
        cache = ZGridCache(attractive, [self.K], 1e-6, 3e-6, points=201, rel_tol=1e-6)
        assert cache.validate() <= 1e-5

    def test_validate_rejects_coarse_grid(self):
        cache = ZGridCache(attractive, [self.K], 0.2e-6, 10e-6, points=5, rel_tol=1e-9)
        with pytest.raises(AccuracyError):
            cache.validate()

    def test_positive_values_interpolated_directly(self):
        cache = ZGridCache(lambda k, z: np.asarray(z) ** 2 * 1e12, [0.0], 1e-6, 2e-6, points=11)
        assert cache.g(0.0, 1.5e-6) == pytest.approx(2.25, rel=1e-3)

    def test_unknown_wavenumber_or_height(self):
        cache = ZGridCache(attractive, [self.K], 1e-6, 3e-6, points=11)
        assert self.K in cache
        with pytest.raises(KeyError):
            cache.g(3 * self.K, 2e-6)
        with pytest.raises(KeyError):
            cache.g(self.K, 4e-6)

    def test_degenerate_range(self):
        cache = ZGridCache(attractive, [self.K], 2e-6, 2e-6)
        expected = float(attractive(self.K, np.array([2e-6]))[0])
        assert cache.g(self.K, 2e-6) == expected
        assert cache.validate() == 0.0

    def test_rejects_bad_range(self):
        with pytest.raises(ConfigError):
            ZGridCache(attractive, [self.K], 2e-6, 1e-6)
        with pytest.raises(ConfigError):
            ZGridCache(attractive, [self.K], 1e-6, 2e-6, points=3)

    def test_engine_table(self):
        engine = ResponseEngine(ResponseMethod.ANALYTIC_CP, StaticPolarizability(alpha_from_volume(47.3e-30)))
        cache = engine.z_grid_cache([1e6, 3e6], 1e-6, 3e-6)
        assert cache.g(3e6, 1.7e-6) == pytest.approx(engine.g(3e6, 1.7e-6), rel=1e-5)


class TestResponseStore:
    def test_save_and_load(self, store):
        key = database.ResponseKey(k=1e6, z=1e-6, model="static:1", rel_tol=1e-6)
        assert database.load_response(key) is None
        database.save_response(key, -1.5e-27, 2e-33)
        assert database.load_response(key) == (-1.5e-27, 2e-33)

    def test_keys_distinguish_tolerance(self, store):
        key = database.ResponseKey(k=1e6, z=1e-6, model="static:1", rel_tol=1e-6)
        database.save_response(key, -1.0, 0.0)
        other = database.ResponseKey(k=1e6, z=1e-6, model="static:1", rel_tol=1e-8)
        assert database.load_response(other) is None

    def test_replace_and_clear(self, store):
        key = database.ResponseKey(k=0.0, z=2e-6, model="m", rel_tol=1e-6)
        database.save_response(key, -1.0, 0.1)
        database.save_response(key, -2.0, 0.2)
        assert database.load_response(key) == (-2.0, 0.2)
        assert database.clear_responses() == 1
        assert database.load_response(key) is None

    def test_disabled_store_is_a_no_op(self):
        database.set_db_path(None)
        key = database.ResponseKey(k=1.0, z=1.0, model="m", rel_tol=1e-6)
        database.save_response(key, -1.0, 0.0)
        assert database.load_response(key) is None
        assert database.clear_responses() == 0

"""Partition cache: memory and file levels."""

import json

import pytest

from cache_manager import KEY_PREFIX, CacheManager
from curve import named_continuum
from geom import Window
from kp import KPPartition, maximal_balls


@pytest.fixture
def cache(tmp_path):
    return CacheManager(tmp_path / "cache")


@pytest.mark.asyncio
async def test_set_then_get(cache):
    key = cache._generate_cache_key("kp", geometry="POINT (0 0)")
    assert key.startswith(f"{KEY_PREFIX}_kp_")
    assert await cache.get(key) is None
    assert await cache.set(key, {"h": 0.5})
    assert await cache.get(key) == {"h": 0.5}
    assert (cache.cache_dir / f"{key}.json").exists()


@pytest.mark.asyncio
async def test_file_level_survives_a_new_manager(cache):
    key = cache._generate_cache_key("kp", geometry="POINT (1 1)")
    await cache.set(key, [1, 2, 3])
    again = CacheManager(cache.cache_dir)
    assert await again.get(key) == [1, 2, 3]
    stats = await again.get_cache_stats()
    assert stats["memory_cache_size"] == 1
    assert stats["file_cache_size"] == 1


@pytest.mark.asyncio
async def test_expired_entries_are_dropped(cache):
    key = cache._generate_cache_key("kp", geometry="POINT (2 2)")
    await cache.set(key, "stale", ttl_hours=-1)
    assert await cache.get(key) is None
    assert not (cache.cache_dir / f"{key}.json").exists()


@pytest.mark.asyncio
async def test_corrupt_file_is_a_miss(cache):
    key = cache._generate_cache_key("kp", geometry="POINT (3 3)")
    cache.cache_dir.mkdir(parents=True)
    (cache.cache_dir / f"{key}.json").write_text("{not json")
    assert await cache.get(key) is None


@pytest.mark.asyncio
async def test_delete_and_clear(cache):
    keys = [cache._generate_cache_key("kp", n=n) for n in range(3)]
    for key in keys:
        await cache.set(key, {"n": 1})
    assert await cache.delete(keys[0])
    assert await cache.get(keys[0]) is None
    assert await cache.clear()
    assert (await cache.get_cache_stats())["file_cache_size"] == 0


@pytest.mark.asyncio
async def test_partition_round_trip_through_the_cache(cache):
    K = named_continuum("unit-square")
    window = Window(-2.0, -2.0, 2.0, 2.0)
    P = maximal_balls(K, window, h=0.02)
    assert await cache.get_partition(K, window, 0.02) is None
    await cache.set_partition(K, window, 0.02, P.to_json())
    data = await CacheManager(cache.cache_dir).get_partition(K, window, 0.02)
    json.dumps(data)
    assert KPPartition.from_json(data, K).summary() == P.summary()
    assert cache.partition_key(K, window, 0.02) != cache.partition_key(K, window, 0.01)


def test_default_directory_follows_settings(tmp_path):
    assert CacheManager().cache_dir == (tmp_path / "cache")

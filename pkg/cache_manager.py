"""Cache of computed KP partitions, in memory and as JSON files."""

import hashlib
import json
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict, Optional

import structlog
from shapely.geometry.base import BaseGeometry

from config.settings import settings
from geom import Window
from models import CacheEntry

logger = structlog.get_logger()

KEY_PREFIX = "plane_topo"


class CacheManager:
    """Two-level cache: a dict of entries backed by one JSON file per key."""

    def __init__(self, cache_dir: Optional[Path] = None):
        self._cache_dir = Path(cache_dir) if cache_dir else None
        self._memory_cache: Dict[str, CacheEntry] = {}

    @property
    def cache_dir(self) -> Path:
        return self._cache_dir or settings.cache_path()

    def _file(self, key: str) -> Path:
        return self.cache_dir / f"{key}.json"

    async def get(self, key: str) -> Optional[Any]:
        """Get data from cache."""
        try:
            if key in self._memory_cache:
                entry = self._memory_cache[key]
                if entry.expires_at > datetime.now():
                    logger.debug("Cache hit (memory)", key=key)
                    return entry.data
                del self._memory_cache[key]

            cache_file = self._file(key)
            if cache_file.exists():
                try:
                    cache_data = json.loads(cache_file.read_text())
                    expires_at = datetime.fromisoformat(cache_data["expires_at"])
                    if expires_at > datetime.now():
                        data = cache_data["data"]
                        self._memory_cache[key] = CacheEntry(key=key, data=data, expires_at=expires_at)
                        logger.debug("Cache hit (file)", key=key)
                        return data
                    cache_file.unlink()
                except (OSError, ValueError, KeyError) as e:
                    logger.warning("File cache read failed", key=key, error=str(e))

            logger.debug("Cache miss", key=key)
            return None
        except Exception as e:
            logger.error("Cache get failed", key=key, error=str(e))
            return None

    async def set(self, key: str, data: Any, ttl_hours: Optional[int] = None) -> bool:
        """Set data in cache."""
        try:
            if ttl_hours is None:
                ttl_hours = settings.cache_ttl_hours
            expires_at = datetime.now() + timedelta(hours=ttl_hours)
            self._memory_cache[key] = CacheEntry(key=key, data=data, expires_at=expires_at)
            try:
                self.cache_dir.mkdir(parents=True, exist_ok=True)
                payload = {"key": key, "data": data, "expires_at": expires_at.isoformat(),
                           "created_at": datetime.now().isoformat()}
                self._file(key).write_text(json.dumps(payload, sort_keys=True))
                logger.debug("Cached in file", key=key, ttl_hours=ttl_hours)
            except (OSError, TypeError) as e:
                logger.warning("File cache write failed", key=key, error=str(e))
            return True
        except Exception as e:
            logger.error("Cache set failed", key=key, error=str(e))
            return False

    async def delete(self, key: str) -> bool:
        """Delete data from cache."""
        try:
            self._memory_cache.pop(key, None)
            cache_file = self._file(key)
            if cache_file.exists():
                cache_file.unlink()
            logger.debug("Cache deleted", key=key)
            return True
        except OSError as e:
            logger.error("Cache delete failed", key=key, error=str(e))
            return False

    async def clear(self) -> bool:
        """Clear all cache data."""
        try:
            self._memory_cache.clear()
            if self.cache_dir.exists():
                for cache_file in self.cache_dir.glob(f"{KEY_PREFIX}_*.json"):
                    cache_file.unlink()
            logger.info("Cache cleared")
            return True
        except OSError as e:
            logger.error("Cache clear failed", error=str(e))
            return False

    async def get_cache_stats(self) -> Dict[str, Any]:
        """Get cache statistics."""
        files = list(self.cache_dir.glob(f"{KEY_PREFIX}_*.json")) if self.cache_dir.exists() else []
        return {"memory_cache_size": len(self._memory_cache), "file_cache_size": len(files),
                "cache_dir": str(self.cache_dir)}

    def _generate_cache_key(self, prefix: str, **kwargs) -> str:
        """Cache key from a prefix and a digest of the parameters."""
        parts = [prefix] + [f"{k}={v}" for k, v in sorted(kwargs.items())]
        digest = hashlib.sha256("|".join(parts).encode()).hexdigest()[:32]
        return f"{KEY_PREFIX}_{prefix}_{digest}"

    def partition_key(self, geometry: BaseGeometry, window: Window, h: float) -> str:
        return self._generate_cache_key("kp", geometry=geometry.wkt, window=window.to_json(), h=repr(h))

    async def get_partition(self, geometry: BaseGeometry, window: Window, h: float) -> Optional[Dict[str, Any]]:
        return await self.get(self.partition_key(geometry, window, h))

    async def set_partition(self, geometry: BaseGeometry, window: Window, h: float,
                            data: Dict[str, Any]) -> bool:
        return await self.set(self.partition_key(geometry, window, h), data)


# Global cache manager instance
cache_manager = CacheManager()

"""Configuration settings for the plane topology toolkit."""

import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel

load_dotenv()


class Settings(BaseModel):
    """Toolkit settings."""

    # Tool identity
    tool_name: str = "plane-topo"
    tool_version: str = "1.0.0"

    # Geometric tolerances (window units)
    tolerance: float = 1e-9
    orientation_epsilon: float = 1e-12
    unit_normal_tolerance: float = 1e-12

    # Argument lifting
    fixed_point_threshold: float = 1e-7
    refine_xatol: float = 1e-10
    max_bisection_depth: int = 24
    initial_samples: int = 64

    # Rasterization
    resolution: float = 512  # cells per unit, hull grids
    junction_grid: int = 400  # cells per window side, escape-path search
    kp_boundary_divisions: int = 512  # boundary spacing h = window width / this

    # Variation
    tangency_angle: float = 1e-4
    max_junction_retries: int = 8
    max_partition_arcs: int = 10_000
    partition_samples: int = 2048

    # Fixed point search
    max_subdivision_depth: int = 40
    max_cut_retries: int = 8

    # Runs
    seed: int = 0
    max_workers: int = 4
    output_dir: str = "out"

    # Partition cache
    use_cache: bool = True
    cache_dir: Optional[str] = None
    cache_ttl_hours: int = 24

    # Logging configuration
    log_level: str = "INFO"

    def cache_path(self) -> Path:
        """Directory holding cached partition files."""
        if self.cache_dir:
            return Path(self.cache_dir)
        return Path.home() / ".plane_topo_cache"


# Global settings instance with environment variable overrides
settings = Settings(
    output_dir=os.getenv("PLANE_TOPO_OUTPUT_DIR", "out"),
    cache_dir=os.getenv("PLANE_TOPO_CACHE_DIR"),
    log_level=os.getenv("PLANE_TOPO_LOG_LEVEL", "INFO"),
)

"""Generation config: every randomization axis with documented defaults.

All fields are optional in the JSON config file; CLI flags override file
values.  Ranges are inclusive [min, max] pairs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Union

from .errors import ConfigError

IntRange = tuple[int, int]
FloatRange = tuple[float, float]

DIFFICULTY_CHOICES = ("easy", "medium", "hard", "mixed")


@dataclass(frozen=True, slots=True)
class GenConfig:
    # scene content
    food_count_range: IntRange = (3, 8)
    primitives_per_cluster_range: IntRange = (3, 12)
    distractor_count_range: IntRange = (0, 5)
    primitive_size_range: FloatRange = (0.008, 0.022)  # half-extent, meters
    cluster_radius: float = 0.04  # max primitive offset inside a cluster, meters
    allow_shared_wells: bool = False  # True lets several foods share a well

    # lighting
    light_count_range: IntRange = (1, 4)
    light_intensity_range: FloatRange = (0.4, 1.6)
    light_distance_range: FloatRange = (0.5, 1.5)  # meters from tray center

    # camera
    camera_elevation_range: FloatRange = (0.35, 1.45)  # radians above horizon
    camera_azimuth_range: FloatRange = (0.0, 2.0 * math.pi)
    camera_distance_range: FloatRange = (0.5, 1.1)  # meters
    camera_fov_range: FloatRange = (0.7, 1.2)  # vertical fov, radians
    look_jitter: float = 0.05  # max offset of look_at from tray center, meters

    # output
    difficulty: str = "mixed"
    image_size: tuple[int, int] = (512, 512)

    # rendering / annotation knobs
    mesh_subdivisions: int = 24
    min_mask_pixels: int = 64

    def validate(self) -> None:
        for name in (
            "food_count_range",
            "primitives_per_cluster_range",
            "distractor_count_range",
            "light_count_range",
        ):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigError(f"{name}: min {lo} > max {hi}")
        for name in (
            "primitive_size_range",
            "light_intensity_range",
            "light_distance_range",
            "camera_elevation_range",
            "camera_azimuth_range",
            "camera_distance_range",
            "camera_fov_range",
        ):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigError(f"{name}: min {lo} > max {hi}")
        if self.food_count_range[0] < 1:
            raise ConfigError("food_count_range: min food count must be >= 1")
        if self.light_count_range[0] < 1:
            raise ConfigError("light_count_range: min light count must be >= 1")
        lo, hi = self.camera_elevation_range
        if not (0.0 < lo and hi <= math.pi / 2):
            raise ConfigError(f"camera_elevation_range must lie within (0, pi/2], got ({lo}, {hi})")
        if self.primitive_size_range[0] <= 0.0:
            raise ConfigError("primitive_size_range: sizes must be positive")
        if min(self.light_intensity_range) <= 0.0:
            raise ConfigError("light_intensity_range: intensities must be positive")
        if min(self.light_distance_range) <= 0.0 or min(self.camera_distance_range) <= 0.0:
            raise ConfigError("distance ranges must be positive")
        if self.difficulty not in DIFFICULTY_CHOICES:
            raise ConfigError(f"difficulty must be one of {DIFFICULTY_CHOICES}, got {self.difficulty!r}")
        if self.image_size[0] < 64 or self.image_size[1] < 64:
            raise ConfigError(f"image_size must be at least 64x64, got {self.image_size}")
        if self.mesh_subdivisions < 1:
            raise ConfigError("mesh_subdivisions must be >= 1")
        if self.min_mask_pixels < 1:
            raise ConfigError("min_mask_pixels must be >= 1")
        if self.cluster_radius <= 0.0 or self.look_jitter < 0.0:
            raise ConfigError("cluster_radius must be > 0 and look_jitter >= 0")

    @staticmethod
    def from_dict(data: dict) -> "GenConfig":
        known = {f.name: f for f in fields(GenConfig)}
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                raise ConfigError(f"unknown config field {key!r}")
            if isinstance(value, list):
                value = tuple(value)
            kwargs[key] = value
        cfg = GenConfig(**kwargs)
        cfg.validate()
        return cfg

    @staticmethod
    def from_file(path: Union[str, Path]) -> "GenConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must contain a JSON object")
        return GenConfig.from_dict(data)

    def with_overrides(self, **overrides) -> "GenConfig":
        """Replace fields (None values are ignored) and re-validate."""
        clean = {k: v for k, v in overrides.items() if v is not None}
        cfg = replace(self, **clean)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

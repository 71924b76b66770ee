"""Domain randomization: deterministic sampling of complete scenes.

`sample_scene` forks one master stream into per-subsystem streams in a fixed
order (difficulty, tray, foods, distractors, lights, camera, background), so
extending one sampler never perturbs the draws of another.
"""

from __future__ import annotations

import math

import numpy as np

from .config import GenConfig
from .meshing import primitive_support_z
from .rng import Rng
from .scene import (
    Camera,
    Difficulty,
    Distractor,
    FoodObject,
    Light,
    Material,
    MealTray,
    Primitive,
    PrimitiveKind,
    Scene,
    TextureKind,
)
from .transforms import RigidTransform

_PRIMITIVE_KINDS = (
    PrimitiveKind.SPHERE,
    PrimitiveKind.BOX,
    PrimitiveKind.CYLINDER,
    PrimitiveKind.ELLIPSOID,
)
_TEXTURE_KINDS = (
    TextureKind.SOLID,
    TextureKind.CHECKER,
    TextureKind.STRIPES,
    TextureKind.VALUE_NOISE,
    TextureKind.BLENDED,
)

# texture feature size by role, meters
_TEXTURE_SCALE_RANGES = {
    "food": (0.004, 0.02),
    "tray": (0.01, 0.08),
    "distractor": (0.005, 0.04),
    "background": (0.02, 0.15),
}


def _sample_color(rng: Rng) -> tuple[float, float, float]:
    return (rng.random(), rng.random(), rng.random())


def _sample_dark_color(rng: Rng) -> tuple[float, float, float]:
    return (rng.uniform(0.0, 0.1), rng.uniform(0.0, 0.1), rng.uniform(0.0, 0.1))


def sample_material(rng: Rng, difficulty: Difficulty, role: str) -> Material:
    """Random material for one scene role.

    Backgrounds follow the difficulty tiers (dark solid, dark glossy, then
    anything goes); tray, food and distractor materials are unrestricted.
    """
    if role == "background":
        if difficulty is Difficulty.EASY:
            return Material(base_color=_sample_dark_color(rng), texture=TextureKind.SOLID,
                            specular_strength=0.0)
        if difficulty is Difficulty.MEDIUM:
            return Material(base_color=_sample_dark_color(rng), texture=TextureKind.SOLID,
                            specular_strength=rng.uniform(0.3, 0.8))

    texture = rng.choice(_TEXTURE_KINDS)
    lo, hi = _TEXTURE_SCALE_RANGES[role]
    return Material(
        base_color=_sample_color(rng),
        texture=texture,
        texture_scale=rng.uniform(lo, hi),
        secondary_color=_sample_color(rng),
        noise_octaves=rng.randint(1, 6),
        noise_seed=rng.next_u64(),
        specular_strength=rng.uniform(0.0, 0.7),
    )


def _sample_primitive(rng: Rng, config: GenConfig, center_first: bool) -> Primitive:
    kind = rng.choice(_PRIMITIVE_KINDS)
    lo, hi = config.primitive_size_range
    if kind is PrimitiveKind.SPHERE:
        r = rng.uniform(lo, hi)
        extents = (r, r, r)
    elif kind is PrimitiveKind.CYLINDER:
        r = rng.uniform(lo, hi)
        extents = (r, r, rng.uniform(lo, hi))
    else:
        extents = (rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi))

    axis = rng.unit_vector()
    angle = rng.uniform(0.0, 2.0 * math.pi)
    if center_first:
        offset = (0.0, 0.0, 0.0)
    else:
        direction = rng.unit_vector()
        radius = config.cluster_radius * rng.random() ** (1.0 / 3.0)
        offset = (direction[0] * radius, direction[1] * radius, direction[2] * radius)
    return Primitive(kind, extents, RigidTransform.from_axis_angle(axis, angle, offset))


def _cluster_drop_z(primitives: tuple[Primitive, ...], cluster_rotation: RigidTransform) -> float:
    """Lowest world-z of the cluster relative to its own origin."""
    low = math.inf
    for prim in primitives:
        world = cluster_rotation.compose(prim.local_transform)
        center_z = world.translation[2]
        low = min(low, center_z - primitive_support_z(prim, np.asarray(world.rotation)))
    return low


def _sample_cluster_parts(rng: Rng, config: GenConfig):
    count = rng.randint(*config.primitives_per_cluster_range)
    primitives = tuple(_sample_primitive(rng, config, i == 0) for i in range(count))
    spin = RigidTransform.from_axis_angle((0.0, 0.0, 1.0), rng.uniform(0.0, 2.0 * math.pi))
    return primitives, spin


def sample_food_cluster(
    rng: Rng,
    config: GenConfig,
    well_center,
    instance_id: int = 1,
    well_index: int | None = None,
) -> FoodObject:
    """Grouped primitives resting on a well floor at `well_center` (x, y, floor z).

    Primitive offsets stay inside `config.cluster_radius`, so the cluster
    reads as one connected food item centered on its well.
    """
    primitives, spin = _sample_cluster_parts(rng, config)
    material = sample_material(rng, Difficulty.HARD, "food")
    drop = _cluster_drop_z(primitives, spin)
    translation = (float(well_center[0]), float(well_center[1]), float(well_center[2]) - drop)
    transform = RigidTransform(spin.rotation, translation)
    return FoodObject(
        instance_id=instance_id,
        primitives=primitives,
        cluster_transform=transform,
        material=material,
        well_index=well_index,
    )


def sample_distractor(rng: Rng, config: GenConfig, tray: MealTray) -> Distractor:
    """Cluster placed on the ground in an annulus around the tray."""
    primitives, spin = _sample_cluster_parts(rng, config)
    material = sample_material(rng, Difficulty.HARD, "distractor")
    diag = math.hypot(*tray.outer_size)
    radius = rng.uniform(0.55 * diag + config.cluster_radius, 1.5 * diag)
    angle = rng.uniform(0.0, 2.0 * math.pi)
    drop = _cluster_drop_z(primitives, spin)
    translation = (radius * math.cos(angle), radius * math.sin(angle), -drop)
    return Distractor(primitives=primitives, cluster_transform=RigidTransform(spin.rotation, translation),
                      material=material)


def sample_lights(rng: Rng, config: GenConfig) -> tuple[Light, ...]:
    """Point lights on the upper hemisphere around the tray."""
    count = rng.randint(*config.light_count_range)
    lights = []
    for _ in range(count):
        z = rng.uniform(0.15, 1.0)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        r = math.sqrt(max(0.0, 1.0 - z * z))
        distance = rng.uniform(*config.light_distance_range)
        position = (distance * r * math.cos(phi), distance * r * math.sin(phi), distance * z)
        color = (rng.uniform(0.7, 1.0), rng.uniform(0.7, 1.0), rng.uniform(0.7, 1.0))
        lights.append(Light(position=position, intensity=rng.uniform(*config.light_intensity_range),
                            color=color))
    return tuple(lights)


def sample_camera(rng: Rng, config: GenConfig, tray_center=(0.0, 0.0, 0.0)) -> Camera:
    """Camera on a spherical shell around the tray center, looking near it."""
    elevation = rng.uniform(*config.camera_elevation_range)
    azimuth = rng.uniform(*config.camera_azimuth_range)
    distance = rng.uniform(*config.camera_distance_range)
    fov = rng.uniform(*config.camera_fov_range)

    ce = math.cos(elevation)
    offset = (distance * ce * math.cos(azimuth), distance * ce * math.sin(azimuth),
              distance * math.sin(elevation))
    position = tuple(float(c + o) for c, o in zip(tray_center, offset))

    jd = rng.unit_vector()
    jr = config.look_jitter * rng.random()
    look_at = tuple(float(c + jd[k] * jr) for k, c in enumerate(tray_center))

    forward = np.asarray(look_at) - np.asarray(position)
    forward = forward / np.linalg.norm(forward)
    up = np.array([0.0, 0.0, 1.0]) - forward * forward[2]
    if np.linalg.norm(up) < 1e-9:
        up = np.array([1.0, 0.0, 0.0]) - forward * forward[0]
    up = up / np.linalg.norm(up)

    return Camera(
        position=position,
        look_at=look_at,
        up=(float(up[0]), float(up[1]), float(up[2])),
        vertical_fov=fov,
        image_size=config.image_size,
    )


def sample_scene(config: GenConfig, seed: int) -> Scene:
    """Deterministically expand (config, seed) into a complete scene."""
    config.validate()
    master = Rng(seed)

    if config.difficulty == "mixed":
        difficulty = master.choice((Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD))
    else:
        difficulty = Difficulty(config.difficulty)

    rng_tray = master.fork()
    rng_foods = master.fork()
    rng_distractors = master.fork()
    rng_lights = master.fork()
    rng_camera = master.fork()
    rng_background = master.fork()

    tray = MealTray(material=sample_material(rng_tray, difficulty, "tray"))

    n_wells = tray.wells.n_wells
    lo, hi = config.food_count_range
    if not config.allow_shared_wells:
        # at most one food per well: the effective maximum is the well count
        hi = min(hi, n_wells)
        lo = min(lo, hi)
    count = rng_foods.randint(lo, hi)
    if config.allow_shared_wells:
        wells = [rng_foods.randint(0, n_wells - 1) for _ in range(count)]
    else:
        wells = rng_foods.shuffled(range(n_wells))[:count]
    floor_z = tray.well_floor_z()
    foods = []
    for i, well in enumerate(wells):
        cx, cy = tray.wells.well_center(well, tray.outer_size)
        foods.append(
            sample_food_cluster(rng_foods, config, (cx, cy, floor_z), instance_id=i + 1, well_index=well)
        )

    n_distractors = rng_distractors.randint(*config.distractor_count_range)
    distractors = tuple(sample_distractor(rng_distractors, config, tray) for _ in range(n_distractors))

    lights = sample_lights(rng_lights, config)
    camera = sample_camera(rng_camera, config, (0.0, 0.0, tray.height / 2.0))
    background = sample_material(rng_background, difficulty, "background")

    return Scene(
        seed=seed,
        tray=tray,
        food_objects=tuple(foods),
        distractors=distractors,
        lights=lights,
        camera=camera,
        background_material=background,
        difficulty=difficulty,
    )

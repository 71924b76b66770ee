"""Parametric scene model: the full description of one randomized meal-tray world.

Every object is an immutable dataclass built from plain tuples, so a scene
compares field-by-field, hashes, and serializes deterministically.  The
randomizer populates these types; the renderer consumes them.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, fields, is_dataclass
from typing import Optional, Union

from .transforms import Mat3, RigidTransform, Vec3

Vec2 = tuple[float, float]


class PrimitiveKind(str, enum.Enum):
    SPHERE = "sphere"
    BOX = "box"
    CYLINDER = "cylinder"
    ELLIPSOID = "ellipsoid"


class TextureKind(str, enum.Enum):
    SOLID = "solid"
    CHECKER = "checker"
    STRIPES = "stripes"
    VALUE_NOISE = "value_noise"
    BLENDED = "blended"


class Difficulty(str, enum.Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"


@dataclass(frozen=True, slots=True)
class Primitive:
    """One convex solid; `half_extents` are per-axis half sizes in meters.

    sphere uses half_extents[0] as its radius; cylinder uses [0] as radius
    and [2] as half height; box and ellipsoid use all three.
    """

    kind: PrimitiveKind
    half_extents: Vec3
    local_transform: RigidTransform = RigidTransform.identity()


@dataclass(frozen=True, slots=True)
class Material:
    base_color: Vec3
    texture: TextureKind = TextureKind.SOLID
    texture_scale: float = 0.05
    secondary_color: Vec3 = (0.0, 0.0, 0.0)
    noise_octaves: int = 3
    noise_seed: int = 0
    specular_strength: float = 0.0


@dataclass(frozen=True, slots=True)
class FoodObject:
    """A cluster of primitives standing in for one food item.

    instance_id is the value written into the rendered id buffer and must be
    unique within a scene.
    """

    instance_id: int
    primitives: tuple[Primitive, ...]
    cluster_transform: RigidTransform
    material: Material
    well_index: Optional[int] = None


@dataclass(frozen=True, slots=True)
class Distractor:
    """Clutter placed outside the tray; rendered but never annotated."""

    primitives: tuple[Primitive, ...]
    cluster_transform: RigidTransform
    material: Material


@dataclass(frozen=True, slots=True)
class WellGrid:
    """Rectangular grid of food compartments in the tray top.

    Cells are enumerated row-major; the first `n_wells` cells are real wells,
    the rest stay solid tray.  `margin` is both the outer rim width and the
    gap between neighbouring cells.
    """

    rows: int = 2
    cols: int = 3
    n_wells: int = 5
    well_depth: float = 0.02
    margin: float = 0.02

    def cell_size(self, outer_size: Vec2) -> Vec2:
        w = (outer_size[0] - self.margin * (self.cols + 1)) / self.cols
        h = (outer_size[1] - self.margin * (self.rows + 1)) / self.rows
        return (w, h)

    def well_rect(self, index: int, outer_size: Vec2) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) of well `index`, tray centered at origin."""
        cw, ch = self.cell_size(outer_size)
        r, c = divmod(index, self.cols)
        x0 = -outer_size[0] / 2 + self.margin + c * (cw + self.margin)
        y0 = -outer_size[1] / 2 + self.margin + r * (ch + self.margin)
        return (x0, y0, x0 + cw, y0 + ch)

    def well_center(self, index: int, outer_size: Vec2) -> Vec2:
        x0, y0, x1, y1 = self.well_rect(index, outer_size)
        return ((x0 + x1) / 2, (y0 + y1) / 2)


@dataclass(frozen=True, slots=True)
class MealTray:
    outer_size: Vec2 = (0.40, 0.30)
    height: float = 0.035
    wells: WellGrid = WellGrid()
    material: Material = Material(base_color=(0.8, 0.8, 0.8))

    def footprint(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) of the tray outline, centered at origin."""
        hx, hy = self.outer_size[0] / 2, self.outer_size[1] / 2
        return (-hx, -hy, hx, hy)

    def well_floor_z(self) -> float:
        return self.height - self.wells.well_depth


@dataclass(frozen=True, slots=True)
class Light:
    position: Vec3
    intensity: float
    color: Vec3 = (1.0, 1.0, 1.0)


@dataclass(frozen=True, slots=True)
class Camera:
    position: Vec3
    look_at: Vec3
    up: Vec3
    vertical_fov: float
    image_size: tuple[int, int]  # (width, height)


@dataclass(frozen=True, slots=True)
class Scene:
    seed: int
    tray: MealTray
    food_objects: tuple[FoodObject, ...]
    distractors: tuple[Distractor, ...]
    lights: tuple[Light, ...]
    camera: Camera
    background_material: Material
    difficulty: Difficulty


def world_transform(obj: Union[FoodObject, Distractor], primitive_index: int) -> RigidTransform:
    """World-frame transform of one primitive: cluster_transform o local_transform."""
    n = len(obj.primitives)
    if not 0 <= primitive_index < n:
        raise IndexError(f"primitive_index {primitive_index} out of range for {n} primitives")
    return obj.cluster_transform.compose(obj.primitives[primitive_index].local_transform)


# --- validation ---------------------------------------------------------

_ROT_TOL = 1e-6


def _check_color(violations: list[str], where: str, name: str, color: Vec3) -> None:
    if not all(0.0 <= c <= 1.0 for c in color):
        violations.append(f"{where}: {name} channels must lie in [0, 1], got {color}")


def _check_material(violations: list[str], where: str, m: Material) -> None:
    _check_color(violations, where, "material.base_color", m.base_color)
    _check_color(violations, where, "material.secondary_color", m.secondary_color)
    if not m.texture_scale > 0.0:
        violations.append(f"{where}: material.texture_scale must be > 0, got {m.texture_scale}")
    if not 1 <= m.noise_octaves <= 6:
        violations.append(f"{where}: material.noise_octaves must be in [1, 6], got {m.noise_octaves}")
    if not 0.0 <= m.specular_strength <= 1.0:
        violations.append(f"{where}: material.specular_strength must be in [0, 1], got {m.specular_strength}")


def _check_primitive(violations: list[str], where: str, p: Primitive) -> None:
    if not all(h > 0.0 for h in p.half_extents):
        violations.append(f"{where}: half_extents must be strictly positive, got {p.half_extents}")
    err = p.local_transform.rotation_error()
    if err > _ROT_TOL:
        violations.append(f"{where}: local_transform.rotation is not orthonormal with det +1 (error {err:.2e})")


def _check_cluster(violations: list[str], where: str, obj: Union[FoodObject, Distractor]) -> None:
    if not 1 <= len(obj.primitives) <= 16:
        violations.append(f"{where}: primitives list length must be in [1, 16], got {len(obj.primitives)}")
    for i, prim in enumerate(obj.primitives):
        _check_primitive(violations, f"{where}.primitives[{i}]", prim)
    err = obj.cluster_transform.rotation_error()
    if err > _ROT_TOL:
        violations.append(f"{where}: cluster_transform.rotation is not orthonormal with det +1 (error {err:.2e})")
    _check_material(violations, where, obj.material)


def _check_tray(violations: list[str], tray: MealTray) -> None:
    g = tray.wells
    if g.rows * g.cols < g.n_wells:
        violations.append(f"tray.wells: rows*cols = {g.rows * g.cols} < n_wells = {g.n_wells}")
        return
    if not tray.height > 0 or not 0 < g.well_depth <= tray.height:
        violations.append("tray: height and wells.well_depth must satisfy 0 < well_depth <= height")
    fx0, fy0, fx1, fy1 = tray.footprint()
    rects = [g.well_rect(i, tray.outer_size) for i in range(g.n_wells)]
    for i, (x0, y0, x1, y1) in enumerate(rects):
        if x1 <= x0 or y1 <= y0:
            violations.append(f"tray.wells[{i}]: footprint is empty (margins exceed outer_size)")
        if x0 < fx0 - 1e-12 or y0 < fy0 - 1e-12 or x1 > fx1 + 1e-12 or y1 > fy1 + 1e-12:
            violations.append(f"tray.wells[{i}]: footprint extends outside tray outer_size")
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            a, b = rects[i], rects[j]
            if a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]:
                violations.append(f"tray.wells: footprints of wells {i} and {j} overlap")
    _check_material(violations, "tray", tray.material)


def validate_scene(scene: Scene) -> list[str]:
    """Check every scene invariant; returns one description per violation.

    Violations are data, not failures: an empty list means the scene is
    well-formed.
    """
    v: list[str] = []

    if not scene.food_objects:
        v.append("scene.food_objects: must be nonempty")
    if not scene.lights:
        v.append("scene.lights: must be nonempty")

    _check_tray(v, scene.tray)

    seen_ids: dict[int, int] = {}
    for i, food in enumerate(scene.food_objects):
        where = f"food_objects[{i}]"
        if food.instance_id < 1:
            v.append(f"{where}: instance_id must be >= 1, got {food.instance_id}")
        if food.instance_id in seen_ids:
            v.append(
                f"{where}: instance_id {food.instance_id} duplicates food_objects[{seen_ids[food.instance_id]}]"
            )
        seen_ids.setdefault(food.instance_id, i)
        _check_cluster(v, where, food)

    fx0, fy0, fx1, fy1 = scene.tray.footprint()
    for i, d in enumerate(scene.distractors):
        where = f"distractors[{i}]"
        x, y, _ = d.cluster_transform.translation
        if fx0 <= x <= fx1 and fy0 <= y <= fy1:
            v.append(f"{where}: position ({x:.3f}, {y:.3f}) lies inside the tray footprint")
        _check_cluster(v, where, d)

    for i, light in enumerate(scene.lights):
        if not light.intensity > 0:
            v.append(f"lights[{i}]: intensity must be > 0, got {light.intensity}")
        if not light.position[2] > 0:
            v.append(f"lights[{i}]: position must be above the tray plane (z > 0), got z = {light.position[2]}")
        _check_color(v, f"lights[{i}]", "color", light.color)

    cam = scene.camera
    if not 0.0 < cam.vertical_fov < math.pi:
        v.append(f"camera: vertical_fov must be in (0, pi), got {cam.vertical_fov}")
    if cam.image_size[0] < 64 or cam.image_size[1] < 64:
        v.append(f"camera: image_size must be at least 64x64, got {cam.image_size}")
    if math.dist(cam.position, cam.look_at) == 0.0:
        v.append("camera: position must differ from look_at")

    _check_material(v, "background", scene.background_material)
    return v


# --- deterministic JSON serialization -----------------------------------


def _round9(x: float) -> float:
    """Round to 9 significant digits (fixed formatting for golden tests)."""
    if x == 0.0 or not math.isfinite(x):
        return x + 0.0  # normalizes -0.0
    return float(f"{x:.9g}")


def _to_jsonable(value):
    if is_dataclass(value) and not isinstance(value, type):
        return {f.name: _to_jsonable(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float):
        return _round9(value)
    if isinstance(value, (tuple, list)):
        return [_to_jsonable(x) for x in value]
    return value


def scene_to_json(scene: Scene) -> str:
    """Serialize a scene to deterministic JSON (sorted keys, 9 significant digits)."""
    return json.dumps(_to_jsonable(scene), sort_keys=True, separators=(",", ":"))

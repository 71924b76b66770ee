"""Software rasterizer: scene -> RGB image + per-pixel instance ids.

Pipeline: triangulate every object into world-space triangles, project
through a pinhole camera, rasterize with a z-buffer into a geometry buffer
(depth, object, surface point, normal), then shade all covered pixels in one
deferred pass (ambient + per-light Lambertian diffuse with inverse-square
falloff + Blinn-Phong specular).

Distractors are shaded into the RGB image like any other object but are
recorded in a separate internal channel; the exported id buffer contains
food instance ids only, so distractor pixels read as background downstream.

Everything is plain numpy arithmetic in a fixed order: the same scene always
produces byte-identical buffers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RenderError
from .meshing import triangulate
from .scene import Camera, Material, PrimitiveKind, Primitive, Scene
from .textures import material_colors
from .transforms import RigidTransform

_NEAR = 0.01  # meters; triangles are clipped against this plane
_AMBIENT = 0.25
_SHININESS = 32.0
_BACKGROUND_HALF_SIZE = 2.5  # meters
_DEFAULT_SUBDIVISIONS = 24
_MAX_CHUNK_FRAGMENTS = 2_000_000


@dataclass(frozen=True)
class RenderOutput:
    """Buffers produced by one render; all share the same (H, W) grid."""

    rgb: np.ndarray  # (H, W, 3) uint8
    id_buffer: np.ndarray  # (H, W) uint16; 0 = background/distractor
    depth: np.ndarray  # (H, W) float64; +inf where no surface
    rgb_float: np.ndarray  # (H, W, 3) float64 pre-quantization shading
    distractor_mask: np.ndarray  # (H, W) bool; internal distractor channel


@dataclass(frozen=True)
class InstanceMask:
    instance_id: int
    mask: np.ndarray  # (H, W) bool
    area: int
    bbox: tuple[int, int, int, int]  # x, y, w, h in pixels


@dataclass(frozen=True)
class _RenderObject:
    kind: str  # "food" | "distractor" | "tray" | "background"
    instance_id: int  # 0 for everything but food
    material: Material
    world_to_local: RigidTransform  # texture space


def _camera_frame(camera: Camera):
    eye = np.asarray(camera.position, dtype=np.float64)
    target = np.asarray(camera.look_at, dtype=np.float64)
    forward = target - eye
    dist = np.linalg.norm(forward)
    if dist == 0.0:
        raise RenderError("degenerate camera: position equals look_at")
    forward /= dist
    side = np.cross(forward, np.asarray(camera.up, dtype=np.float64))
    side_norm = np.linalg.norm(side)
    if side_norm < 1e-9:
        raise RenderError("degenerate camera: up vector parallel to view direction")
    side /= side_norm
    up = np.cross(side, forward)
    rot = np.stack([side, up, forward])  # world -> view rows
    return eye, rot


def _tray_boxes(tray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Axis-aligned (center, half_extents) boxes forming the welled tray."""
    hx, hy = tray.outer_size[0] / 2.0, tray.outer_size[1] / 2.0
    grid = tray.wells
    floor_z = tray.well_floor_z()
    boxes = [(np.array([0.0, 0.0, floor_z / 2.0]), np.array([hx, hy, floor_z / 2.0]))]

    top_c = (floor_z + tray.height) / 2.0
    top_h = (tray.height - floor_z) / 2.0
    cw, ch = grid.cell_size(tray.outer_size)
    m = grid.margin

    for c in range(grid.cols + 1):  # vertical rim/divider strips, full depth
        x0 = -hx + c * (cw + m)
        boxes.append((np.array([x0 + m / 2.0, 0.0, top_c]), np.array([m / 2.0, hy, top_h])))
    for c in range(grid.cols):  # horizontal strips within each column
        cx = -hx + m + c * (cw + m) + cw / 2.0
        for r in range(grid.rows + 1):
            y0 = -hy + r * (ch + m)
            boxes.append((np.array([cx, y0 + m / 2.0, top_c]), np.array([cw / 2.0, m / 2.0, top_h])))
    for cell in range(grid.n_wells, grid.rows * grid.cols):  # unused cells stay solid
        ccx, ccy = grid.well_center(cell, tray.outer_size)
        boxes.append((np.array([ccx, ccy, top_c]), np.array([cw / 2.0, ch / 2.0, top_h])))
    return boxes


def _background_quad():
    b = _BACKGROUND_HALF_SIZE
    verts = np.array([[-b, -b, 0.0], [b, -b, 0.0], [b, b, 0.0], [-b, b, 0.0]])
    faces = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32)
    normals = np.tile(np.array([0.0, 0.0, 1.0]), (4, 1))
    return verts, faces, normals


class _GeometryBatch:
    """Accumulates world-space triangles tagged with their render object."""

    def __init__(self):
        self.verts: list[np.ndarray] = []
        self.normals: list[np.ndarray] = []
        self.faces: list[np.ndarray] = []
        self.face_obj: list[np.ndarray] = []
        self.face_flat: list[np.ndarray] = []
        self.objects: list[_RenderObject] = []
        self._offset = 0

    def add_object(self, obj: _RenderObject) -> int:
        self.objects.append(obj)
        return len(self.objects) - 1

    def add_mesh(self, obj_index: int, verts, normals, faces, flat):
        self.verts.append(verts)
        self.normals.append(normals)
        self.faces.append(faces + self._offset)
        self.face_obj.append(np.full(len(faces), obj_index, dtype=np.int32))
        self.face_flat.append(flat)
        self._offset += len(verts)

    def add_primitives(self, obj_index: int, primitives, cluster: RigidTransform, subdivisions: int):
        for prim in primitives:
            mesh = triangulate(prim, subdivisions)
            world = cluster.compose(prim.local_transform)
            self.add_mesh(
                obj_index,
                world.apply(mesh.vertices),
                world.apply_vectors(mesh.vertex_normals),
                mesh.faces,
                mesh.flat_faces,
            )


def _assemble(scene: Scene, subdivisions: int) -> _GeometryBatch:
    batch = _GeometryBatch()
    identity = RigidTransform.identity()

    bg = batch.add_object(_RenderObject("background", 0, scene.background_material, identity))
    verts, faces, normals = _background_quad()
    batch.add_mesh(bg, verts, normals, faces, np.ones(len(faces), dtype=bool))

    tray_obj = batch.add_object(_RenderObject("tray", 0, scene.tray.material, identity))
    box = Primitive(PrimitiveKind.BOX, (1.0, 1.0, 1.0))
    unit_box = triangulate(box, 1)
    for center, half in _tray_boxes(scene.tray):
        batch.add_mesh(
            tray_obj,
            unit_box.vertices * half + center,
            unit_box.vertex_normals,
            unit_box.faces,
            unit_box.flat_faces,
        )

    for food in scene.food_objects:
        idx = batch.add_object(
            _RenderObject("food", food.instance_id, food.material, food.cluster_transform.inverse())
        )
        batch.add_primitives(idx, food.primitives, food.cluster_transform, subdivisions)

    for distractor in scene.distractors:
        idx = batch.add_object(
            _RenderObject("distractor", 0, distractor.material, distractor.cluster_transform.inverse())
        )
        batch.add_primitives(idx, distractor.primitives, distractor.cluster_transform, subdivisions)
    return batch


def _clip_near(tri_q, tri_world, tri_normal, face_obj, face_flat):
    """Clip triangles against the near plane (view z = _NEAR).

    Fully-visible triangles pass through untouched; the few that straddle
    the plane are re-triangulated in a scalar loop.
    """
    w = tri_q[:, :, 2]
    inside = w >= _NEAR
    n_in = inside.sum(axis=1)
    full = n_in == 3
    crossing = np.flatnonzero((n_in > 0) & (n_in < 3))

    out_q = [tri_q[full]]
    out_world = [tri_world[full]]
    out_normal = [tri_normal[full]]
    out_obj = [face_obj[full]]
    out_flat = [face_flat[full]]

    for fi in crossing:
        poly = []  # (q, world, normal) per polygon vertex
        for k in range(3):
            k2 = (k + 1) % 3
            pa = (tri_q[fi, k], tri_world[fi, k], tri_normal[fi, k])
            pb = (tri_q[fi, k2], tri_world[fi, k2], tri_normal[fi, k2])
            wa, wb = pa[0][2], pb[0][2]
            if wa >= _NEAR:
                poly.append(pa)
            if (wa >= _NEAR) != (wb >= _NEAR):
                t = (_NEAR - wa) / (wb - wa)
                poly.append(tuple(a + t * (b - a) for a, b in zip(pa, pb)))
        for k in range(1, len(poly) - 1):
            tri = (poly[0], poly[k], poly[k + 1])
            out_q.append(np.stack([p[0] for p in tri])[None])
            out_world.append(np.stack([p[1] for p in tri])[None])
            out_normal.append(np.stack([p[2] for p in tri])[None])
            out_obj.append(face_obj[fi : fi + 1])
            out_flat.append(face_flat[fi : fi + 1])

    return (
        np.concatenate(out_q),
        np.concatenate(out_world),
        np.concatenate(out_normal),
        np.concatenate(out_obj),
        np.concatenate(out_flat),
    )


def _quantize(rgb_float: np.ndarray) -> np.ndarray:
    # round half away from zero; values are non-negative after clamping
    return np.floor(rgb_float * 255.0 + 0.5).astype(np.uint8)


def render(scene: Scene, subdivisions: int | None = None) -> RenderOutput:
    """Rasterize a scene deterministically.

    Raises RenderError for a degenerate camera.  `subdivisions` controls the
    triangulation density of curved primitives (default 24).
    """
    subdivisions = _DEFAULT_SUBDIVISIONS if subdivisions is None else subdivisions
    width, height = scene.camera.image_size
    eye, view_rot = _camera_frame(scene.camera)
    f_focal = (height / 2.0) / math.tan(scene.camera.vertical_fov / 2.0)

    batch = _assemble(scene, subdivisions)
    verts = np.concatenate(batch.verts)
    normals = np.concatenate(batch.normals)
    faces = np.concatenate(batch.faces)
    face_obj = np.concatenate(batch.face_obj)
    face_flat = np.concatenate(batch.face_flat)

    q = (verts - eye) @ view_rot.T  # view coords; q[:, 2] = forward distance
    tri_q = q[faces]
    tri_world = verts[faces]
    tri_normal = normals[faces]

    # drop triangles entirely behind the near plane, clip the stragglers
    any_in = (tri_q[:, :, 2] >= _NEAR).any(axis=1)
    tri_q, tri_world, tri_normal, face_obj, face_flat = _clip_near(
        tri_q[any_in], tri_world[any_in], tri_normal[any_in], face_obj[any_in], face_flat[any_in]
    )

    w = tri_q[:, :, 2]
    sx = width / 2.0 + f_focal * tri_q[:, :, 0] / w
    sy = height / 2.0 - f_focal * tri_q[:, :, 1] / w

    # backface/degenerate cull: outward-CCW faces project to negative area
    # in our y-down screen coordinates
    area2 = (sx[:, 1] - sx[:, 0]) * (sy[:, 2] - sy[:, 0]) - (sy[:, 1] - sy[:, 0]) * (sx[:, 2] - sx[:, 0])
    front = area2 < 0.0

    # pixel-center bounding boxes, clamped to the viewport
    px0 = np.maximum(np.ceil(sx.min(axis=1) - 0.5), 0.0)
    px1 = np.minimum(np.floor(sx.max(axis=1) - 0.5), width - 1.0)
    py0 = np.maximum(np.ceil(sy.min(axis=1) - 0.5), 0.0)
    py1 = np.minimum(np.floor(sy.max(axis=1) - 0.5), height - 1.0)
    keep = front & (px1 >= px0) & (py1 >= py0)

    sx, sy, w = sx[keep], sy[keep], w[keep]
    tri_world, tri_normal = tri_world[keep], tri_normal[keep]
    face_obj, face_flat, area2 = face_obj[keep], face_flat[keep], area2[keep]
    px0, py0 = px0[keep].astype(np.int64), py0[keep].astype(np.int64)
    bw = (px1[keep] - px0 + 1.0).astype(np.int64)
    bh = (py1[keep] - py0 + 1.0).astype(np.int64)

    face_normal = np.cross(tri_world[:, 1] - tri_world[:, 0], tri_world[:, 2] - tri_world[:, 0])
    fn_len = np.linalg.norm(face_normal, axis=1, keepdims=True)
    face_normal = face_normal / np.where(fn_len == 0.0, 1.0, fn_len)
    inv_w = 1.0 / w  # per-vertex 1/depth for perspective-correct interpolation

    # geometry buffer
    n_px = width * height
    g_depth = np.full(n_px, np.inf)
    g_obj = np.full(n_px, -1, dtype=np.int32)
    g_world = np.zeros((n_px, 3))
    g_normal = np.zeros((n_px, 3))

    counts = bw * bh
    order_breaks = [0]
    total = 0
    for i, c in enumerate(counts):  # chunk boundaries by fragment budget
        total += int(c)
        if total >= _MAX_CHUNK_FRAGMENTS:
            order_breaks.append(i + 1)
            total = 0
    if order_breaks[-1] != len(counts):
        order_breaks.append(len(counts))

    for c0, c1 in zip(order_breaks[:-1], order_breaks[1:]):
        n_faces = c1 - c0
        if n_faces == 0:
            continue
        cnt = counts[c0:c1]
        k_total = int(cnt.sum())
        if k_total == 0:
            continue
        frag_face = np.repeat(np.arange(n_faces, dtype=np.int64), cnt)
        starts = np.concatenate([[0], np.cumsum(cnt)[:-1]])
        within = np.arange(k_total, dtype=np.int64) - np.repeat(starts, cnt)
        fbw = bw[c0:c1][frag_face]
        px = px0[c0:c1][frag_face] + within % fbw
        py = py0[c0:c1][frag_face] + within // fbw
        cx = px + 0.5
        cy = py + 0.5

        fsx = sx[c0:c1][frag_face]
        fsy = sy[c0:c1][frag_face]
        denom = area2[c0:c1][frag_face]
        b0 = ((fsx[:, 2] - fsx[:, 1]) * (cy - fsy[:, 1]) - (fsy[:, 2] - fsy[:, 1]) * (cx - fsx[:, 1])) / denom
        b1 = ((fsx[:, 0] - fsx[:, 2]) * (cy - fsy[:, 2]) - (fsy[:, 0] - fsy[:, 2]) * (cx - fsx[:, 2])) / denom
        b2 = 1.0 - b0 - b1
        inside = (b0 >= 0.0) & (b1 >= 0.0) & (b2 >= 0.0)
        if not inside.any():
            continue

        frag_face = frag_face[inside]
        px, py = px[inside], py[inside]
        b = np.stack([b0[inside], b1[inside], b2[inside]], axis=1)

        f_invw = inv_w[c0:c1][frag_face]
        bw_persp = b * f_invw  # weights for perspective-correct attributes
        inv_depth = bw_persp.sum(axis=1)
        depth = 1.0 / inv_depth
        world = (tri_world[c0:c1][frag_face] * bw_persp[:, :, None]).sum(axis=1) * depth[:, None]
        smooth_n = (tri_normal[c0:c1][frag_face] * bw_persp[:, :, None]).sum(axis=1)
        flat = face_flat[c0:c1][frag_face]
        normal = np.where(flat[:, None], face_normal[c0:c1][frag_face], smooth_n)

        pix = py * width + px
        # per-pixel winner: nearest depth, ties to the earliest fragment
        order = np.lexsort((np.arange(len(pix)), depth, pix))
        pix_sorted = pix[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = pix_sorted[1:] != pix_sorted[:-1]
        win = order[first]
        wpix = pix[win]
        better = depth[win] < g_depth[wpix]
        win, wpix = win[better], wpix[better]

        g_depth[wpix] = depth[win]
        g_obj[wpix] = face_obj[c0:c1][frag_face[win]]
        g_world[wpix] = world[win]
        g_normal[wpix] = normal[win]

    # --- deferred shading ---------------------------------------------
    covered = np.flatnonzero(g_obj >= 0)
    rgb_flat = np.zeros((n_px, 3))
    id_flat = np.zeros(n_px, dtype=np.uint16)
    distractor_flat = np.zeros(n_px, dtype=bool)

    if len(covered):
        obj_ids = g_obj[covered]
        pts = g_world[covered]
        nrm = g_normal[covered]
        n_len = np.linalg.norm(nrm, axis=1, keepdims=True)
        nrm = nrm / np.where(n_len == 0.0, 1.0, n_len)

        base = np.zeros((len(covered), 3))
        spec_strength = np.zeros(len(covered))
        for idx in np.unique(obj_ids):
            sel = obj_ids == idx
            obj = batch.objects[idx]
            local = obj.world_to_local.apply(pts[sel])
            base[sel] = material_colors(obj.material, local)
            spec_strength[sel] = obj.material.specular_strength
            if obj.kind == "food":
                id_flat[covered[sel]] = obj.instance_id
            elif obj.kind == "distractor":
                distractor_flat[covered[sel]] = True

        color = _AMBIENT * base
        view_dir = eye - pts
        view_dir = view_dir / np.linalg.norm(view_dir, axis=1, keepdims=True)
        for light in scene.lights:
            lv = np.asarray(light.position) - pts
            d2 = np.maximum((lv * lv).sum(axis=1), 1e-6)
            lhat = lv / np.sqrt(d2)[:, None]
            ndotl = np.maximum((nrm * lhat).sum(axis=1), 0.0)
            half = lhat + view_dir
            half = half / np.maximum(np.linalg.norm(half, axis=1, keepdims=True), 1e-12)
            ndoth = np.maximum((nrm * half).sum(axis=1), 0.0)
            glint = spec_strength * ndoth**_SHININESS
            falloff = (light.intensity / d2)[:, None] * np.asarray(light.color)
            color += falloff * (ndotl[:, None] * base + glint[:, None])

        rgb_flat[covered] = np.clip(color, 0.0, 1.0)

    shape = (height, width)
    return RenderOutput(
        rgb=_quantize(rgb_flat.reshape(height, width, 3)),
        id_buffer=id_flat.reshape(shape),
        depth=g_depth.reshape(shape),
        rgb_float=rgb_flat.reshape(height, width, 3),
        distractor_mask=distractor_flat.reshape(shape),
    )


def extract_masks(out: RenderOutput, min_pixels: int) -> list[InstanceMask]:
    """Per-instance binary masks with at least `min_pixels` visible pixels.

    Masks are pairwise disjoint by construction (each pixel holds one id)
    and distractors never appear: their ids are never written to id_buffer.
    """
    if min_pixels < 1:
        raise ValueError("min_pixels must be >= 1")
    masks = []
    ids = np.unique(out.id_buffer)
    for instance_id in ids[ids > 0]:
        mask = out.id_buffer == instance_id
        area = int(np.count_nonzero(mask))
        if area < min_pixels:
            continue
        rows = np.flatnonzero(mask.any(axis=1))
        cols = np.flatnonzero(mask.any(axis=0))
        bbox = (int(cols[0]), int(rows[0]), int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1))
        masks.append(InstanceMask(int(instance_id), mask, area, bbox))
    return masks

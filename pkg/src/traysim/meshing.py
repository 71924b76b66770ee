"""Triangulation of primitives into closed, outward-oriented meshes.

Unit meshes are cached per (kind, subdivisions) and scaled by the
primitive's half extents; normals rescale as n / s (renormalized), which is
exact for axis-aligned scaling.  Faces are wound counter-clockwise when seen
from outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .scene import Primitive, PrimitiveKind


@dataclass(frozen=True)
class Mesh:
    """Triangle mesh with per-vertex normals.

    Faces flagged in `flat_faces` are shaded with their face normal (boxes,
    cylinder caps); the rest interpolate vertex normals (curved surfaces).
    """

    vertices: np.ndarray  # (V, 3) float64
    faces: np.ndarray  # (F, 3) int32
    vertex_normals: np.ndarray  # (V, 3) float64
    flat_faces: np.ndarray  # (F,) bool


def _unit_box() -> Mesh:
    v = np.array(
        [[x, y, z] for x in (-1.0, 1.0) for y in (-1.0, 1.0) for z in (-1.0, 1.0)]
    )
    # index bits: x*4 + y*2 + z
    faces = np.array(
        [
            [0, 1, 3], [0, 3, 2],  # x = -1
            [4, 6, 7], [4, 7, 5],  # x = +1
            [0, 4, 5], [0, 5, 1],  # y = -1
            [2, 3, 7], [2, 7, 6],  # y = +1
            [0, 2, 6], [0, 6, 4],  # z = -1
            [1, 5, 7], [1, 7, 3],  # z = +1
        ],
        dtype=np.int32,
    )
    normals = v / math.sqrt(3.0)  # unused for shading: every box face is flat
    return Mesh(v, faces, normals, np.ones(len(faces), dtype=bool))


def _unit_sphere(subdivisions: int) -> Mesh:
    stacks = max(2, subdivisions)
    slices = 2 * stacks
    verts = [(0.0, 0.0, 1.0)]
    for i in range(1, stacks):
        theta = math.pi * i / stacks
        st, ct = math.sin(theta), math.cos(theta)
        for j in range(slices):
            phi = 2.0 * math.pi * j / slices
            verts.append((st * math.cos(phi), st * math.sin(phi), ct))
    verts.append((0.0, 0.0, -1.0))
    v = np.array(verts)
    south = len(verts) - 1

    def ring(i: int, j: int) -> int:
        return 1 + (i - 1) * slices + (j % slices)

    faces = []
    for j in range(slices):
        faces.append([0, ring(1, j), ring(1, j + 1)])
    for i in range(1, stacks - 1):
        for j in range(slices):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            faces.append([a, c, d])
            faces.append([a, d, b])
    for j in range(slices):
        faces.append([south, ring(stacks - 1, j + 1), ring(stacks - 1, j)])
    f = np.array(faces, dtype=np.int32)
    return Mesh(v, f, v.copy(), np.zeros(len(f), dtype=bool))


def _unit_cylinder(subdivisions: int) -> Mesh:
    """Radius 1, half height 1, axis along z; caps flat, side smooth."""
    slices = max(3, 2 * subdivisions)
    ring_pts = [
        (math.cos(2.0 * math.pi * j / slices), math.sin(2.0 * math.pi * j / slices))
        for j in range(slices)
    ]
    verts = [(x, y, 1.0) for x, y in ring_pts] + [(x, y, -1.0) for x, y in ring_pts]
    verts += [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
    v = np.array(verts)
    normals = np.zeros_like(v)
    normals[: 2 * slices, :2] = np.array(ring_pts + ring_pts)
    normals[2 * slices] = (0.0, 0.0, 1.0)
    normals[2 * slices + 1] = (0.0, 0.0, -1.0)
    top_c, bot_c = 2 * slices, 2 * slices + 1

    faces = []
    flat = []
    for j in range(slices):
        jn = (j + 1) % slices
        t0, t1 = j, jn
        b0, b1 = slices + j, slices + jn
        faces.append([t0, b0, b1]); flat.append(False)
        faces.append([t0, b1, t1]); flat.append(False)
        faces.append([top_c, t0, t1]); flat.append(True)
        faces.append([bot_c, b1, b0]); flat.append(True)
    return Mesh(v, np.array(faces, dtype=np.int32), normals, np.array(flat))


@lru_cache(maxsize=64)
def _unit_mesh(kind: PrimitiveKind, subdivisions: int) -> Mesh:
    if kind is PrimitiveKind.BOX:
        return _unit_box()
    if kind in (PrimitiveKind.SPHERE, PrimitiveKind.ELLIPSOID):
        return _unit_sphere(subdivisions)
    if kind is PrimitiveKind.CYLINDER:
        return _unit_cylinder(subdivisions)
    raise ValueError(f"unknown primitive kind: {kind}")


def triangulate(primitive: Primitive, subdivisions: int) -> Mesh:
    """Mesh a primitive in its own frame (before local/cluster transforms).

    The result is closed (every edge shared by exactly two faces) and
    outward-oriented; curved-surface vertices lie exactly on the surface.
    """
    if subdivisions < 1:
        raise ValueError("subdivisions must be >= 1")
    unit = _unit_mesh(primitive.kind, subdivisions)
    s = np.asarray(primitive.half_extents, dtype=np.float64)
    if primitive.kind is PrimitiveKind.SPHERE:
        s = np.full(3, s[0])
    elif primitive.kind is PrimitiveKind.CYLINDER:
        s = np.array([s[0], s[0], s[2]])
    verts = unit.vertices * s
    normals = unit.vertex_normals / s
    norm = np.linalg.norm(normals, axis=1, keepdims=True)
    normals = normals / np.where(norm == 0.0, 1.0, norm)
    return Mesh(verts, unit.faces, normals, unit.flat_faces)


def primitive_support_z(primitive: Primitive, rotation: np.ndarray) -> float:
    """Extent of the rotated primitive below its center along world -z.

    `rotation` maps primitive frame to world frame.  Used to rest clusters
    exactly on well floors and the ground plane.
    """
    h = np.asarray(primitive.half_extents, dtype=np.float64)
    row = np.asarray(rotation, dtype=np.float64)[2]  # world z in primitive frame
    kind = primitive.kind
    if kind is PrimitiveKind.SPHERE:
        return float(h[0])
    if kind is PrimitiveKind.BOX:
        return float(np.abs(row) @ h)
    if kind is PrimitiveKind.ELLIPSOID:
        return float(np.sqrt(((row * h) ** 2).sum()))
    if kind is PrimitiveKind.CYLINDER:
        axis_z = abs(float(row[2]))
        radial = math.sqrt(max(0.0, 1.0 - axis_z * axis_z))
        return float(h[2] * axis_z + h[0] * radial)
    raise ValueError(f"unknown primitive kind: {kind}")

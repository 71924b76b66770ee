"""Rigid transforms (rotation + translation) used throughout the scene model.

Stored as plain tuples so scene objects stay hashable, comparable and
immutable; numpy is used only transiently for composition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Vec3 = tuple[float, float, float]
Mat3 = tuple[Vec3, Vec3, Vec3]

_IDENTITY_ROT: Mat3 = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


def _to_mat(rows: Mat3) -> np.ndarray:
    return np.asarray(rows, dtype=np.float64)


def _to_rows(m: np.ndarray) -> Mat3:
    return tuple(tuple(float(x) for x in row) for row in m)  # type: ignore[return-value]


@dataclass(frozen=True, slots=True)
class RigidTransform:
    """Rotation followed by translation: p -> R @ p + t."""

    rotation: Mat3 = _IDENTITY_ROT
    translation: Vec3 = (0.0, 0.0, 0.0)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform()

    @staticmethod
    def from_translation(t) -> "RigidTransform":
        return RigidTransform(translation=(float(t[0]), float(t[1]), float(t[2])))

    @staticmethod
    def from_axis_angle(axis, angle: float, translation=(0.0, 0.0, 0.0)) -> "RigidTransform":
        """Rodrigues rotation about `axis` (need not be normalized)."""
        ax = np.asarray(axis, dtype=np.float64)
        n = np.linalg.norm(ax)
        if n == 0.0:
            raise ValueError("rotation axis must be nonzero")
        x, y, z = ax / n
        c, s = math.cos(angle), math.sin(angle)
        cc = 1.0 - c
        rot = np.array(
            [
                [c + x * x * cc, x * y * cc - z * s, x * z * cc + y * s],
                [y * x * cc + z * s, c + y * y * cc, y * z * cc - x * s],
                [z * x * cc - y * s, z * y * cc + x * s, c + z * z * cc],
            ]
        )
        return RigidTransform(_to_rows(rot), (float(translation[0]), float(translation[1]), float(translation[2])))

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix."""
        m = np.eye(4)
        m[:3, :3] = _to_mat(self.rotation)
        m[:3, 3] = self.translation
        return m

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self o other: apply `other` first, then self."""
        ra = _to_mat(self.rotation)
        rb = _to_mat(other.rotation)
        rot = ra @ rb
        t = ra @ np.asarray(other.translation) + np.asarray(self.translation)
        return RigidTransform(_to_rows(rot), (float(t[0]), float(t[1]), float(t[2])))

    def apply(self, points) -> np.ndarray:
        """Transform an (N, 3) array (or a single 3-vector) of points."""
        p = np.asarray(points, dtype=np.float64)
        single = p.ndim == 1
        p = np.atleast_2d(p)
        out = p @ _to_mat(self.rotation).T + np.asarray(self.translation)
        return out[0] if single else out

    def apply_vectors(self, vectors) -> np.ndarray:
        """Rotate directions (no translation)."""
        v = np.asarray(vectors, dtype=np.float64)
        single = v.ndim == 1
        v = np.atleast_2d(v)
        out = v @ _to_mat(self.rotation).T
        return out[0] if single else out

    def inverse(self) -> "RigidTransform":
        rt = _to_mat(self.rotation).T
        t = -(rt @ np.asarray(self.translation))
        return RigidTransform(_to_rows(rt), (float(t[0]), float(t[1]), float(t[2])))

    def rotation_error(self) -> float:
        """Max-abs deviation of R^T R from identity plus |det - 1|."""
        r = _to_mat(self.rotation)
        ortho = float(np.abs(r.T @ r - np.eye(3)).max())
        det = abs(float(np.linalg.det(r)) - 1.0)
        return max(ortho, det)

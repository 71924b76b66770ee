"""Procedural 3D textures evaluated at surface points.

All patterns are functions of a point in the object's local frame, a scale,
and a material seed, so every texture is deterministic and needs no image
assets.  Lattice noise hashes integer cells with a splitmix64-style mix on
uint64 arrays.
"""

from __future__ import annotations

import numpy as np

from .scene import Material, TextureKind

_U64 = np.uint64
_PRIME_X = _U64(0x9E3779B97F4A7C15)
_PRIME_Y = _U64(0xC2B2AE3D27D4EB4F)
_PRIME_Z = _U64(0x165667B19E3779F9)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)


def _lattice_values(ix: np.ndarray, iy: np.ndarray, iz: np.ndarray, seed: int) -> np.ndarray:
    """Uniform [0, 1) value per integer lattice cell, stable across platforms."""
    with np.errstate(over="ignore"):
        h = (
            ix.astype(np.int64).astype(_U64) * _PRIME_X
            ^ iy.astype(np.int64).astype(_U64) * _PRIME_Y
            ^ iz.astype(np.int64).astype(_U64) * _PRIME_Z
            ^ _U64(seed & 0xFFFFFFFFFFFFFFFF)
        )
        h = (h ^ (h >> _U64(30))) * _MIX1
        h = (h ^ (h >> _U64(27))) * _MIX2
        h = h ^ (h >> _U64(31))
    return (h >> _U64(11)).astype(np.float64) * 2.0**-53


def _fade(t: np.ndarray) -> np.ndarray:
    # smootherstep: 6t^5 - 15t^4 + 10t^3
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def value_noise(points: np.ndarray, scale: float, seed: int) -> np.ndarray:
    """Single-octave trilinear value noise in [0, 1) at (N, 3) points."""
    p = np.asarray(points, dtype=np.float64) / scale
    i0 = np.floor(p)
    f = _fade(p - i0)
    ix, iy, iz = (i0[:, k].astype(np.int64) for k in range(3))
    fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]

    def corner(dx, dy, dz):
        return _lattice_values(ix + dx, iy + dy, iz + dz, seed)

    c000, c100 = corner(0, 0, 0), corner(1, 0, 0)
    c010, c110 = corner(0, 1, 0), corner(1, 1, 0)
    c001, c101 = corner(0, 0, 1), corner(1, 0, 1)
    c011, c111 = corner(0, 1, 1), corner(1, 1, 1)

    x00 = c000 + fx * (c100 - c000)
    x10 = c010 + fx * (c110 - c010)
    x01 = c001 + fx * (c101 - c001)
    x11 = c011 + fx * (c111 - c011)
    y0 = x00 + fy * (x10 - x00)
    y1 = x01 + fy * (x11 - x01)
    return y0 + fz * (y1 - y0)


def fractal_noise(points: np.ndarray, scale: float, octaves: int, seed: int) -> np.ndarray:
    """Octave-summed value noise normalized back to [0, 1)."""
    total = np.zeros(len(points), dtype=np.float64)
    amplitude = 1.0
    norm = 0.0
    for k in range(octaves):
        total += amplitude * value_noise(points, scale / (1 << k), seed + k)
        norm += amplitude
        amplitude *= 0.5
    return total / norm


def _cell_parity(points: np.ndarray, scale: float, axes: tuple[int, ...]) -> np.ndarray:
    cells = np.floor(np.asarray(points, dtype=np.float64)[:, axes] / scale).astype(np.int64)
    return (cells.sum(axis=1) & 1).astype(bool)


def material_colors(material: Material, points: np.ndarray) -> np.ndarray:
    """Evaluate a material's texture at (N, 3) local-frame points -> (N, 3) RGB."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    base = np.asarray(material.base_color, dtype=np.float64)
    second = np.asarray(material.secondary_color, dtype=np.float64)
    kind = material.texture
    scale = material.texture_scale

    if kind is TextureKind.SOLID:
        return np.broadcast_to(base, (len(pts), 3)).copy()

    if kind is TextureKind.CHECKER:
        odd = _cell_parity(pts, scale, (0, 1, 2))
        return np.where(odd[:, None], second, base)

    if kind is TextureKind.STRIPES:
        odd = _cell_parity(pts, scale, (0,))
        return np.where(odd[:, None], second, base)

    if kind is TextureKind.VALUE_NOISE:
        t = fractal_noise(pts, scale, material.noise_octaves, material.noise_seed)
        return base + t[:, None] * (second - base)

    if kind is TextureKind.BLENDED:
        # noise-weighted mix of checker and stripe layers: "complex" patterns
        checker = np.where(_cell_parity(pts, scale, (0, 1, 2))[:, None], second, base)
        stripes = np.where(_cell_parity(pts, scale * 0.5, (0,))[:, None], base, second)
        w = fractal_noise(pts, scale * 3.0, material.noise_octaves, material.noise_seed + 101)
        return checker + w[:, None] * (stripes - checker)

    raise ValueError(f"unknown texture kind: {kind}")

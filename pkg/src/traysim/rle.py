"""Uncompressed COCO-style run-length masks.

Runs are counted in column-major order (down column 0, then column 1, ...)
and always start with the background run, which has length 0 when the mask's
first element is set.  decode(encode(m)) == m for every mask.
"""

from __future__ import annotations

import numpy as np

from .errors import DataFormatError


def encode_rle(mask: np.ndarray) -> dict:
    """Binary (H, W) mask -> {"size": [H, W], "counts": [...]}."""
    m = np.asarray(mask)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"mask must be a nonempty 2D array, got shape {m.shape}")
    flat = (m != 0).ravel(order="F")
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate([[0], changes, [flat.size]])
    counts = np.diff(bounds).tolist()
    if flat[0]:
        counts.insert(0, 0)
    return {"size": [int(m.shape[0]), int(m.shape[1])], "counts": [int(c) for c in counts]}


def decode_rle(rle: dict) -> np.ndarray:
    """Inverse of encode_rle; raises DataFormatError when counts don't sum to H*W."""
    h, w = (int(v) for v in rle["size"])
    counts = rle["counts"]
    total = int(sum(counts))
    if total != h * w:
        raise DataFormatError(f"RLE counts sum to {total}, expected {h}*{w} = {h * w}")
    if any(c < 0 for c in counts):
        raise DataFormatError("RLE counts must be non-negative")
    values = np.arange(len(counts), dtype=np.int64) & 1  # 0, 1, 0, 1, ...
    flat = np.repeat(values.astype(bool), counts)
    return flat.reshape((h, w), order="F")


def mask_area(mask: np.ndarray) -> int:
    return int(np.count_nonzero(mask))


def mask_bbox(mask: np.ndarray) -> tuple[int, int, int, int]:
    """Tight [x, y, w, h] box of the set pixels; (0, 0, 0, 0) for empty masks."""
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if len(rows) == 0:
        return (0, 0, 0, 0)
    return (int(cols[0]), int(rows[0]), int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1))

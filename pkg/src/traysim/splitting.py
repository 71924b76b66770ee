"""Train/test splitting and dataset statistics.

Splits assign whole images (one image's instances never straddle splits).
per_instance mode targets a fraction of all instances rather than of images:
images are drawn in a weighted random order (weight = instance count, via
exponential-sort keys) and assigned to train until the instance target is
reached.  Weighting by instance count concentrates instance-rich images in
the train split, mirroring splits built per food instance, where the train
side ends up with fewer, denser images.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coco import CocoDataset
from .errors import ConfigError, DataFormatError
from .rng import Rng


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    unit: str = "per_instance"  # "per_instance" | "per_image"
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if self.unit not in ("per_instance", "per_image"):
            raise ConfigError(f"unit must be 'per_instance' or 'per_image', got {self.unit!r}")


def _subset(ds: CocoDataset, image_indices: set[int]) -> CocoDataset:
    images = [img for i, img in enumerate(ds.images) if i in image_indices]
    ids = {img.id for img in images}
    annotations = [a for a in ds.annotations if a.image_id in ids]
    return CocoDataset(images=images, annotations=annotations, categories=ds.categories)


def split_dataset(ds: CocoDataset, spec: SplitSpec) -> tuple[CocoDataset, CocoDataset]:
    """Partition a dataset into (train, test); deterministic given spec.seed."""
    spec.validate()
    if not ds.images:
        raise DataFormatError("cannot split a dataset with no images")

    counts = {img.id: 0 for img in ds.images}
    for ann in ds.annotations:
        counts[ann.image_id] += 1
    rng = Rng(spec.seed)

    if spec.unit == "per_image":
        order = rng.shuffled(range(len(ds.images)))
        n_train = round(spec.train_fraction * len(ds.images))
        train_idx = set(order[:n_train])
    else:
        keys = []
        for i, img in enumerate(ds.images):
            u = rng.random()
            k = counts[img.id]
            if k > 0 and u > 0.0:
                keys.append(math.log(u) / k)  # exponential-sort key: weight = k
            else:
                keys.append(-math.inf)
        order = sorted(range(len(ds.images)), key=lambda i: (-keys[i], i))
        target = spec.train_fraction * len(ds.annotations)
        train_idx = set()
        gathered = 0
        for i in order:
            if gathered < target:
                train_idx.add(i)
                gathered += counts[ds.images[i].id]

    test_idx = set(range(len(ds.images))) - train_idx
    return _subset(ds, train_idx), _subset(ds, test_idx)


def dataset_stats(ds: CocoDataset) -> dict:
    """Summary record: counts, per-image histogram, difficulty tiers, area quantiles."""
    counts = {img.id: 0 for img in ds.images}
    for ann in ds.annotations:
        if ann.image_id in counts:
            counts[ann.image_id] += 1

    histogram: dict[int, int] = {}
    for c in counts.values():
        histogram[c] = histogram.get(c, 0) + 1

    difficulty: dict[str, int] = {}
    for img in ds.images:
        difficulty[img.difficulty] = difficulty.get(img.difficulty, 0) + 1

    areas = np.array([a.area for a in ds.annotations], dtype=np.float64)
    if len(areas):
        quantiles = [float(np.percentile(areas, q)) for q in (0, 25, 50, 75, 100)]
    else:
        quantiles = []

    return {
        "images": len(ds.images),
        "instances": len(ds.annotations),
        "instances_per_image": [[k, histogram[k]] for k in sorted(histogram)],
        "per_difficulty": {k: difficulty[k] for k in sorted(difficulty)},
        "mask_area_quantiles": quantiles,
    }

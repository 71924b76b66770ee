"""End-to-end dataset generation: seeds -> scenes -> renders -> COCO files.

Scene i of a run derives its own seed from (run seed, i), so rendering order
and worker count never change the output; generation across scenes is
embarrassingly parallel.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Callable, Iterator, Optional, Union

from .coco import SceneRecord, write_dataset
from .config import GenConfig
from .randomizer import sample_scene
from .render import extract_masks, render
from .rng import derive_seed


def build_record(config: GenConfig, seed: int, index: int) -> SceneRecord:
    """Sample, render and annotate scene `index` of a run."""
    scene = sample_scene(config, derive_seed(seed, index))
    out = render(scene, config.mesh_subdivisions)
    masks = extract_masks(out, config.min_mask_pixels)
    return SceneRecord(rgb=out.rgb, id_buffer=out.id_buffer,
                       difficulty=scene.difficulty.value, masks=masks)


def _job(config: GenConfig, seed: int, index: int) -> SceneRecord:
    return build_record(config, seed, index)


def generate_records(
    config: GenConfig,
    count: int,
    seed: int,
    workers: int = 1,
) -> Iterator[SceneRecord]:
    """Yield records in index order; `workers` only affects wall time."""
    config.validate()
    if count < 0:
        raise ValueError("count must be >= 0")
    if workers <= 1 or count <= 1:
        for index in range(count):
            yield build_record(config, seed, index)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(partial(_job, config, seed), range(count), chunksize=1)


def generate_dataset(
    config: GenConfig,
    count: int,
    seed: int,
    output_dir: Union[str, Path],
    workers: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
) -> dict:
    """Write a complete dataset and return its summary.

    Summary fields: images, instances, per_difficulty, annotations (manifest
    path).  Deterministic for a given (config, count, seed).
    """
    summary = {"images": 0, "instances": 0, "per_difficulty": {}}

    def tracked() -> Iterator[SceneRecord]:
        for i, record in enumerate(generate_records(config, count, seed, workers)):
            summary["images"] += 1
            summary["instances"] += len(record.masks)
            tier = summary["per_difficulty"]
            tier[record.difficulty] = tier.get(record.difficulty, 0) + 1
            if progress is not None:
                progress(i + 1, count)
            yield record

    manifest = write_dataset(tracked(), output_dir)
    summary["annotations"] = str(manifest)
    return summary

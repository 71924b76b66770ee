"""COCO-format dataset IO: the on-disk contract between generator,
trainer, and evaluator.

Layout of a dataset directory:

    annotations.json   ground truth (single "food" category, RLE masks)
    images/NNNNNN.png  8-bit RGB renders
    masks/NNNNNN.png   16-bit grayscale instance-id maps
    results.json       detections (written by a predictor, read here)

JSON is emitted with sorted keys and repr-stable floats, so writing the same
records twice produces byte-identical files.  Readers validate invariants
and report the offending record index; unknown fields are ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np
from PIL import Image

from .errors import DataFormatError
from .render import InstanceMask
from .rle import decode_rle, encode_rle, mask_area, mask_bbox

FOOD_CATEGORY_ID = 1
CATEGORIES = ({"id": FOOD_CATEGORY_ID, "name": "food"},)

ANNOTATIONS_NAME = "annotations.json"
IMAGES_DIR = "images"
MASKS_DIR = "masks"


@dataclass(frozen=True)
class CocoImage:
    id: int
    file_name: str
    width: int
    height: int
    difficulty: str = "hard"  # nonstandard field; external readers may ignore it


@dataclass(frozen=True)
class CocoAnnotation:
    id: int
    image_id: int
    segmentation: dict  # uncompressed RLE {"size": [h, w], "counts": [...]}
    bbox: tuple[float, float, float, float]
    area: int
    category_id: int = FOOD_CATEGORY_ID
    iscrowd: int = 0


@dataclass(frozen=True)
class Detection:
    image_id: int
    score: float
    segmentation: dict
    bbox: tuple[float, float, float, float]
    category_id: int = FOOD_CATEGORY_ID


@dataclass
class CocoDataset:
    images: list[CocoImage] = field(default_factory=list)
    annotations: list[CocoAnnotation] = field(default_factory=list)
    categories: tuple[dict, ...] = CATEGORIES

    def annotations_for(self, image_id: int) -> list[CocoAnnotation]:
        return [a for a in self.annotations if a.image_id == image_id]

    def image_by_id(self) -> dict[int, CocoImage]:
        return {img.id: img for img in self.images}


@dataclass(frozen=True)
class SceneRecord:
    """One rendered scene queued for writing."""

    rgb: np.ndarray  # (H, W, 3) uint8
    id_buffer: np.ndarray  # (H, W) uint16
    difficulty: str
    masks: list[InstanceMask]


def annotation_from_mask(mask: InstanceMask, annotation_id: int, image_id: int) -> CocoAnnotation:
    return CocoAnnotation(
        id=annotation_id,
        image_id=image_id,
        segmentation=encode_rle(mask.mask),
        bbox=tuple(float(v) for v in mask.bbox),
        area=int(mask.area),
    )


def dumps_canonical(payload) -> str:
    """Deterministic JSON: sorted keys, no whitespace, repr floats."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _image_to_dict(img: CocoImage) -> dict:
    return {
        "id": img.id,
        "file_name": img.file_name,
        "width": img.width,
        "height": img.height,
        "difficulty": img.difficulty,
    }


def _annotation_to_dict(ann: CocoAnnotation) -> dict:
    return {
        "id": ann.id,
        "image_id": ann.image_id,
        "category_id": ann.category_id,
        "segmentation": {"size": list(ann.segmentation["size"]),
                         "counts": [int(c) for c in ann.segmentation["counts"]]},
        "bbox": [float(v) for v in ann.bbox],
        "area": int(ann.area),
        "iscrowd": ann.iscrowd,
    }


def dataset_to_dict(ds: CocoDataset) -> dict:
    return {
        "images": [_image_to_dict(i) for i in ds.images],
        "annotations": [_annotation_to_dict(a) for a in ds.annotations],
        "categories": [dict(c) for c in ds.categories],
    }


def save_rgb_png(rgb: np.ndarray, path: Path) -> None:
    Image.fromarray(np.ascontiguousarray(rgb), mode="RGB").save(path, format="PNG")


def save_id_png(id_buffer: np.ndarray, path: Path) -> None:
    Image.fromarray(np.ascontiguousarray(id_buffer.astype(np.uint16)), mode="I;16").save(path, format="PNG")


def load_rgb_png(path: Path) -> np.ndarray:
    return np.asarray(Image.open(path).convert("RGB"), dtype=np.uint8)


def load_id_png(path: Path) -> np.ndarray:
    return np.asarray(Image.open(path), dtype=np.uint16)


def write_annotations(ds: CocoDataset, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(dumps_canonical(dataset_to_dict(ds)))
    return path


def write_dataset(records: Iterable[SceneRecord], output_dir: Union[str, Path]) -> Path:
    """Write renders + ground truth; returns the annotations.json path.

    File names are index-based (000001.png, ...), so identical records always
    produce byte-identical trees.  The caller owns the directory: no other
    writer may touch it concurrently.
    """
    out = Path(output_dir)
    (out / IMAGES_DIR).mkdir(parents=True, exist_ok=True)
    (out / MASKS_DIR).mkdir(parents=True, exist_ok=True)

    ds = CocoDataset()
    next_ann_id = 1
    for index, record in enumerate(records):
        image_id = index + 1
        name = f"{image_id:06d}.png"
        save_rgb_png(record.rgb, out / IMAGES_DIR / name)
        save_id_png(record.id_buffer, out / MASKS_DIR / name)
        h, w = record.id_buffer.shape
        ds.images.append(CocoImage(id=image_id, file_name=name, width=int(w), height=int(h),
                                   difficulty=record.difficulty))
        for mask in record.masks:
            ds.annotations.append(annotation_from_mask(mask, next_ann_id, image_id))
            next_ann_id += 1
    return write_annotations(ds, out / ANNOTATIONS_NAME)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise DataFormatError(message)


def _load_json(path: Path):
    if not path.exists():
        raise DataFormatError(f"file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path} is not valid JSON: {exc}") from None


def read_dataset(path: Union[str, Path], check_masks: bool = True) -> CocoDataset:
    """Read and validate annotations.json (accepts the file or its directory).

    With check_masks, every RLE is decoded and its stored area/bbox compared
    against the decoded mask; violations name the annotation index.
    """
    path = Path(path)
    if path.is_dir():
        path = path / ANNOTATIONS_NAME
    raw = _load_json(path)
    _require(isinstance(raw, dict), f"{path}: top level must be a JSON object")

    images = []
    seen_image_ids = set()
    for i, entry in enumerate(raw.get("images", [])):
        try:
            img = CocoImage(
                id=int(entry["id"]),
                file_name=str(entry["file_name"]),
                width=int(entry["width"]),
                height=int(entry["height"]),
                difficulty=str(entry.get("difficulty", "hard")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"images[{i}]: malformed entry ({exc})") from None
        _require(img.id not in seen_image_ids, f"images[{i}]: duplicate image id {img.id}")
        seen_image_ids.add(img.id)
        images.append(img)

    dims = {img.id: (img.height, img.width) for img in images}
    annotations = []
    seen_ann_ids = set()
    for i, entry in enumerate(raw.get("annotations", [])):
        try:
            ann = CocoAnnotation(
                id=int(entry["id"]),
                image_id=int(entry["image_id"]),
                segmentation={"size": [int(v) for v in entry["segmentation"]["size"]],
                              "counts": [int(c) for c in entry["segmentation"]["counts"]]},
                bbox=tuple(float(v) for v in entry["bbox"]),
                area=int(entry["area"]),
                category_id=int(entry.get("category_id", FOOD_CATEGORY_ID)),
                iscrowd=int(entry.get("iscrowd", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"annotations[{i}]: malformed entry ({exc})") from None
        _require(
            ann.image_id in dims,
            f"annotations[{i}] (id {ann.id}): references unknown image_id {ann.image_id}",
        )
        _require(ann.id not in seen_ann_ids, f"annotations[{i}]: duplicate annotation id {ann.id}")
        seen_ann_ids.add(ann.id)
        _require(
            tuple(ann.segmentation["size"]) == dims[ann.image_id],
            f"annotations[{i}] (id {ann.id}): RLE size {ann.segmentation['size']} "
            f"does not match image size {list(dims[ann.image_id])}",
        )
        if check_masks:
            try:
                mask = decode_rle(ann.segmentation)
            except DataFormatError as exc:
                raise DataFormatError(f"annotations[{i}] (id {ann.id}): {exc}") from None
            _require(
                mask_area(mask) == ann.area,
                f"annotations[{i}] (id {ann.id}): stored area {ann.area} != decoded area {mask_area(mask)}",
            )
            tight = mask_bbox(mask)
            _require(
                all(abs(a - b) <= 1e-6 for a, b in zip(ann.bbox, tight)),
                f"annotations[{i}] (id {ann.id}): stored bbox {list(ann.bbox)} is not the tight box {list(tight)}",
            )
        annotations.append(ann)

    categories = tuple(raw.get("categories", [dict(c) for c in CATEGORIES]))
    return CocoDataset(images=images, annotations=annotations, categories=categories)


def write_results(detections: Iterable[Detection], path: Union[str, Path]) -> Path:
    path = Path(path)
    payload = [
        {
            "image_id": d.image_id,
            "category_id": d.category_id,
            "score": float(d.score),
            "segmentation": {"size": list(d.segmentation["size"]),
                             "counts": [int(c) for c in d.segmentation["counts"]]},
            "bbox": [float(v) for v in d.bbox],
        }
        for d in detections
    ]
    path.write_text(dumps_canonical(payload))
    return path


def read_results(path: Union[str, Path]) -> list[Detection]:
    """Read and validate a results.json list of detections."""
    path = Path(path)
    raw = _load_json(path)
    _require(isinstance(raw, list), f"{path}: results file must contain a JSON list")
    detections = []
    for i, entry in enumerate(raw):
        try:
            det = Detection(
                image_id=int(entry["image_id"]),
                score=float(entry["score"]),
                segmentation={"size": [int(v) for v in entry["segmentation"]["size"]],
                              "counts": [int(c) for c in entry["segmentation"]["counts"]]},
                bbox=tuple(float(v) for v in entry["bbox"]),
                category_id=int(entry.get("category_id", FOOD_CATEGORY_ID)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"results[{i}]: malformed entry ({exc})") from None
        _require(0.0 <= det.score <= 1.0, f"results[{i}]: score {det.score} outside [0, 1]")
        _require(len(det.bbox) == 4, f"results[{i}]: bbox must have 4 values")
        detections.append(det)
    return detections

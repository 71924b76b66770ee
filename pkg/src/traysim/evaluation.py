"""COCO-style evaluation: IoU, NMS, greedy matching, AP and mAP@[.50:.95].

Conventions (fixed so results are deterministic and exactly reproducible):
  - detections sort by descending score, ties broken by input order;
  - a detection matches the unmatched ground truth of highest IoU in its
    image (ties to the lowest GT index) and is a TP iff that IoU clears the
    threshold;
  - AP is 101-point interpolated over dataset-wide ranks, averaged with
    math.fsum; mAP is the fsum-mean of the per-threshold APs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .coco import CocoDataset, Detection
from .errors import ConfigError, EvaluationError
from .rle import decode_rle

DEFAULT_IOU_THRESHOLDS = (0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95)
_RECALL_GRID = np.arange(101, dtype=np.float64) / 100.0


@dataclass(frozen=True)
class EvalConfig:
    iou_type: str = "mask"  # "mask" | "bbox"
    iou_thresholds: tuple[float, ...] = DEFAULT_IOU_THRESHOLDS
    nms_threshold: float = 0.5
    nms_iou_type: str = "bbox"  # box overlap is the cheap default for NMS
    max_detections_per_image: int = 100

    def validate(self) -> None:
        if self.iou_type not in ("mask", "bbox"):
            raise ConfigError(f"iou_type must be 'mask' or 'bbox', got {self.iou_type!r}")
        if self.nms_iou_type not in ("mask", "bbox"):
            raise ConfigError(f"nms_iou_type must be 'mask' or 'bbox', got {self.nms_iou_type!r}")
        if not self.iou_thresholds:
            raise ConfigError("iou_thresholds must be nonempty")
        for t in self.iou_thresholds:
            if not 0.0 < t <= 1.0:
                raise ConfigError(f"iou threshold {t} outside (0, 1]")
        if any(b <= a for a, b in zip(self.iou_thresholds, self.iou_thresholds[1:])):
            raise ConfigError("iou_thresholds must be strictly increasing")
        if not 0.0 < self.nms_threshold <= 1.0:
            raise ConfigError(f"nms_threshold {self.nms_threshold} outside (0, 1]")
        if self.max_detections_per_image < 1:
            raise ConfigError("max_detections_per_image must be >= 1")


@dataclass(frozen=True)
class MatchResult:
    """Greedy matching outcome at one IoU threshold."""

    order: tuple[int, ...]  # detection indices in descending-score rank order
    tp: tuple[bool, ...]  # TP flag per rank (FP where False)
    matched_gt: tuple[Optional[int], ...]  # matched GT annotation id per rank
    ious: tuple[float, ...]  # IoU with the matched GT, 0.0 for FPs
    per_image: dict[int, list[tuple[int, Optional[int], float]]]
    fn_count: int

    @property
    def tp_count(self) -> int:
        return sum(self.tp)

    @property
    def fp_count(self) -> int:
        return len(self.tp) - self.tp_count


@dataclass(frozen=True)
class EvalReport:
    iou_type: str
    ap_per_threshold: dict[float, float]  # skipped (vacuous) thresholds absent
    map_all: float
    precision: dict[float, tuple[float, ...]]  # cumulative precision by rank
    recall: dict[float, tuple[float, ...]]
    counts: dict[str, int]


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise EvaluationError(f"mask dimensions differ: {a.shape} vs {b.shape}")
    inter = int(np.count_nonzero(a & b))
    union = int(np.count_nonzero(a | b))
    return inter / union if union > 0 else 0.0


def box_iou(a: Sequence[float], b: Sequence[float]) -> float:
    ax, ay, aw, ah = (float(v) for v in a)
    bx, by, bw, bh = (float(v) for v in b)
    iw = min(ax + aw, bx + bw) - max(ax, bx)
    ih = min(ay + ah, by + bh) - max(ay, by)
    inter = iw * ih if iw > 0.0 and ih > 0.0 else 0.0
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0.0 else 0.0


def iou(a, b, iou_type: str = "mask") -> float:
    """Intersection over union of two masks or two [x, y, w, h] boxes."""
    if iou_type == "mask":
        return mask_iou(np.asarray(a), np.asarray(b))
    if iou_type == "bbox":
        return box_iou(a, b)
    raise ConfigError(f"unknown iou_type {iou_type!r}")


def _payload(detection: Detection, iou_type: str):
    if iou_type == "mask":
        return decode_rle(detection.segmentation)
    return detection.bbox


def _score_order(scores: Sequence[float]) -> list[int]:
    """Indices by descending score; equal scores keep input order."""
    return sorted(range(len(scores)), key=lambda i: (-scores[i], i))


def _nms_keep(payloads: list, scores: list[float], threshold: float, iou_type: str) -> list[int]:
    kept: list[int] = []
    for i in _score_order(scores):
        if all(iou(payloads[i], payloads[j], iou_type) <= threshold for j in kept):
            kept.append(i)
    return kept


def nms(detections: list[Detection], threshold: float, iou_type: str = "bbox") -> list[Detection]:
    """Greedy non-maximum suppression over one image's detections.

    Keeps a detection iff its IoU with every higher-scored kept detection is
    <= threshold; the result preserves keep order (descending score).
    """
    payloads = [_payload(d, iou_type) for d in detections]
    scores = [d.score for d in detections]
    return [detections[i] for i in _nms_keep(payloads, scores, threshold, iou_type)]


def match_detections(
    gts: dict[int, list[tuple[int, object]]],
    detections: list[tuple[int, int, float, object]],
    iou_threshold: float,
    iou_type: str,
    iou_cache: Optional[dict] = None,
) -> MatchResult:
    """Greedily match detections to ground truth at one IoU threshold.

    `gts` maps image_id -> [(gt_annotation_id, payload)];
    `detections` holds (det_index, image_id, score, payload), already
    NMS-filtered and truncated.  Detections are processed in descending
    score; each takes the unmatched GT of highest IoU in its image if that
    IoU >= iou_threshold.
    """
    ranks = _score_order([d[2] for d in detections])
    matched: dict[int, set[int]] = {img: set() for img in gts}
    tp: list[bool] = []
    matched_gt: list[Optional[int]] = []
    ious: list[float] = []
    order: list[int] = []
    per_image: dict[int, list[tuple[int, Optional[int], float]]] = {img: [] for img in gts}

    for r in ranks:
        det_idx, image_id, _, payload = detections[r]
        candidates = gts.get(image_id, [])
        best_iou = 0.0
        best_slot = -1
        for slot, (gt_id, gt_payload) in enumerate(candidates):
            if slot in matched[image_id]:
                continue
            if iou_cache is not None:
                key = (det_idx, image_id, slot)
                value = iou_cache.get(key)
                if value is None:
                    value = iou(payload, gt_payload, iou_type)
                    iou_cache[key] = value
            else:
                value = iou(payload, gt_payload, iou_type)
            if value > best_iou:
                best_iou = value
                best_slot = slot
        order.append(det_idx)
        if best_slot >= 0 and best_iou >= iou_threshold:
            matched[image_id].add(best_slot)
            gt_id = candidates[best_slot][0]
            tp.append(True)
            matched_gt.append(gt_id)
            ious.append(best_iou)
            per_image[image_id].append((det_idx, gt_id, best_iou))
        else:
            tp.append(False)
            matched_gt.append(None)
            ious.append(0.0)
            per_image.setdefault(image_id, []).append((det_idx, None, 0.0))

    gt_total = sum(len(v) for v in gts.values())
    fn = gt_total - sum(len(m) for m in matched.values())
    return MatchResult(tuple(order), tuple(tp), tuple(matched_gt), tuple(ious), per_image, fn)


def average_precision(match: MatchResult, gt_count: int) -> Optional[float]:
    """101-point interpolated AP; None marks a vacuous threshold.

    With no ground truth, any detection is a false positive (AP 0); with no
    ground truth and no detections the threshold carries no information and
    is excluded from the mAP mean.
    """
    if gt_count < 0:
        raise ValueError("gt_count must be >= 0")
    n = len(match.tp)
    if gt_count == 0:
        return 0.0 if n else None
    if n == 0:
        return 0.0
    tp_cum = np.cumsum(np.asarray(match.tp, dtype=np.int64))
    precision = tp_cum / np.arange(1, n + 1, dtype=np.float64)
    recall = tp_cum / float(gt_count)
    best_from = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, _RECALL_GRID, side="left")
    interp = np.where(idx < n, best_from[np.minimum(idx, n - 1)], 0.0)
    return math.fsum(interp.tolist()) / 101.0


def precision_recall_curves(match: MatchResult, gt_count: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    n = len(match.tp)
    if n == 0 or gt_count == 0:
        return (), ()
    tp_cum = np.cumsum(np.asarray(match.tp, dtype=np.int64))
    precision = tp_cum / np.arange(1, n + 1, dtype=np.float64)
    recall = tp_cum / float(gt_count)
    return tuple(precision.tolist()), tuple(recall.tolist())


def evaluate(gt: CocoDataset, detections: list[Detection], config: EvalConfig) -> EvalReport:
    """Score detections against ground truth per the full protocol:
    per-image NMS at config.nms_threshold, top-k truncation, then AP at each
    IoU threshold and their mean."""
    config.validate()
    images = gt.image_by_id()
    for i, det in enumerate(detections):
        if det.image_id not in images:
            raise EvaluationError(f"detections[{i}]: unknown image_id {det.image_id}")
        if config.iou_type == "mask" or config.nms_iou_type == "mask":
            img = images[det.image_id]
            size = tuple(det.segmentation["size"])
            if size != (img.height, img.width):
                raise EvaluationError(
                    f"detections[{i}]: RLE size {list(size)} does not match "
                    f"image {det.image_id} size [{img.height}, {img.width}]"
                )

    # ground-truth payloads per image, in annotation order
    gt_payloads: dict[int, list[tuple[int, object]]] = {img_id: [] for img_id in images}
    for ann in gt.annotations:
        payload = decode_rle(ann.segmentation) if config.iou_type == "mask" else ann.bbox
        gt_payloads[ann.image_id].append((ann.id, payload))

    # NMS + truncation per image, preserving original detection indices
    by_image: dict[int, list[int]] = {}
    for i, det in enumerate(detections):
        by_image.setdefault(det.image_id, []).append(i)

    kept: list[tuple[int, int, float, object]] = []
    for image_id in sorted(by_image):
        idxs = by_image[image_id]
        nms_payloads = [_payload(detections[i], config.nms_iou_type) for i in idxs]
        scores = [detections[i].score for i in idxs]
        survivors = _nms_keep(nms_payloads, scores, config.nms_threshold, config.nms_iou_type)
        survivors = survivors[: config.max_detections_per_image]  # already score-ordered
        for local in survivors:
            i = idxs[local]
            kept.append((i, image_id, detections[i].score, _payload(detections[i], config.iou_type)))

    gt_count = len(gt.annotations)
    iou_cache: dict = {}
    ap_per_threshold: dict[float, float] = {}
    precision: dict[float, tuple[float, ...]] = {}
    recall: dict[float, tuple[float, ...]] = {}
    for threshold in config.iou_thresholds:
        match = match_detections(gt_payloads, kept, threshold, config.iou_type, iou_cache)
        ap = average_precision(match, gt_count)
        if ap is None:
            continue
        ap_per_threshold[threshold] = ap
        precision[threshold], recall[threshold] = precision_recall_curves(match, gt_count)

    if ap_per_threshold:
        map_all = math.fsum(ap_per_threshold.values()) / len(ap_per_threshold)
    else:
        map_all = 1.0  # no ground truth, nothing predicted: vacuously perfect

    return EvalReport(
        iou_type=config.iou_type,
        ap_per_threshold=ap_per_threshold,
        map_all=map_all,
        precision=precision,
        recall=recall,
        counts={
            "images": len(gt.images),
            "ground_truths": gt_count,
            "detections": len(detections),
            "detections_evaluated": len(kept),
        },
    )


def report_to_dict(report: EvalReport) -> dict:
    return {
        "iou_type": report.iou_type,
        "ap_per_threshold": {f"{t:.2f}": ap for t, ap in report.ap_per_threshold.items()},
        "map_all": report.map_all,
        "counts": dict(report.counts),
    }


def format_report_table(reports: list[EvalReport]) -> str:
    lines = []
    for report in reports:
        lines.append(f"IoU type: {report.iou_type}")
        lines.append(f"{'threshold':>10}  {'AP':>8}")
        for t, ap in sorted(report.ap_per_threshold.items()):
            lines.append(f"{t:>10.2f}  {ap:>8.4f}")
        lines.append(f"{'mAP':>10}  {report.map_all:>8.3f}")
        c = report.counts
        lines.append(
            f"images {c['images']}, ground truths {c['ground_truths']}, "
            f"detections {c['detections']} ({c['detections_evaluated']} evaluated)"
        )
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"

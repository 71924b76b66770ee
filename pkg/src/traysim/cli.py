"""Command-line front end: generate / split / stats / evaluate.

Exit codes: 0 success, 2 usage error (argparse), 3 data error.  Progress
goes to stderr; data (summaries, stats JSON, evaluation reports) goes to
standard output or files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .coco import read_dataset, read_results, write_annotations
from .config import GenConfig
from .errors import TraysimError
from .evaluation import EvalConfig, evaluate, format_report_table, report_to_dict
from .pipeline import generate_dataset
from .splitting import SplitSpec, dataset_stats, split_dataset

USAGE_EXIT = 2
DATA_EXIT = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="traysim",
                                     description="Synthetic meal-tray dataset generator and evaluator")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="render a dataset of randomized scenes")
    gen.add_argument("--config", type=Path, help="JSON generation config (all fields optional)")
    gen.add_argument("--count", type=int, required=True, help="number of images")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, required=True, help="output dataset directory")
    gen.add_argument("--difficulty", choices=["easy", "medium", "hard", "mixed"])
    gen.add_argument("--width", type=int)
    gen.add_argument("--height", type=int)
    gen.add_argument("--workers", type=int, default=1, help="parallel render workers")

    spl = sub.add_parser("split", help="partition a dataset into train/test")
    spl.add_argument("--input", type=Path, required=True, help="annotations.json or dataset dir")
    spl.add_argument("--train-frac", type=float, default=0.7)
    spl.add_argument("--unit", choices=["per-instance", "per-image"], default="per-instance")
    spl.add_argument("--seed", type=int, default=0)
    spl.add_argument("--out-train", type=Path, help="default: <input stem>_train.json")
    spl.add_argument("--out-test", type=Path, help="default: <input stem>_test.json")

    st = sub.add_parser("stats", help="summarize a dataset")
    st.add_argument("--input", type=Path, required=True)

    ev = sub.add_parser("evaluate", help="score results.json against ground truth")
    ev.add_argument("--gt", type=Path, required=True)
    ev.add_argument("--pred", type=Path, required=True)
    ev.add_argument("--iou-type", choices=["mask", "bbox", "both"], default="mask")
    return parser


def _cmd_generate(args) -> int:
    config = GenConfig.from_file(args.config) if args.config else GenConfig()
    image_size = None
    if args.width is not None or args.height is not None:
        width = args.width if args.width is not None else config.image_size[0]
        height = args.height if args.height is not None else config.image_size[1]
        image_size = (width, height)
    config = config.with_overrides(difficulty=args.difficulty, image_size=image_size)
    if args.count < 0:
        raise TraysimError("--count must be >= 0")

    def progress(done: int, total: int) -> None:
        if done == total or done % 25 == 0:
            print(f"rendered {done}/{total}", file=sys.stderr)

    summary = generate_dataset(config, args.count, args.seed, args.out,
                               workers=max(1, args.workers), progress=progress)
    tiers = " ".join(f"{k}={v}" for k, v in sorted(summary["per_difficulty"].items()))
    print(f"images: {summary['images']}")
    print(f"instances: {summary['instances']}")
    print(f"difficulty: {tiers if tiers else '-'}")
    print(f"annotations: {summary['annotations']}")
    return 0


def _cmd_split(args) -> int:
    ds = read_dataset(args.input, check_masks=False)
    spec = SplitSpec(train_fraction=args.train_frac, unit=args.unit.replace("-", "_"), seed=args.seed)
    train, test = split_dataset(ds, spec)

    base = args.input if args.input.is_file() else args.input / "annotations.json"
    out_train = args.out_train or base.with_name(base.stem + "_train.json")
    out_test = args.out_test or base.with_name(base.stem + "_test.json")
    write_annotations(train, out_train)
    write_annotations(test, out_test)
    print(f"train: {out_train} ({len(train.images)} images, {len(train.annotations)} instances)")
    print(f"test: {out_test} ({len(test.images)} images, {len(test.annotations)} instances)")
    return 0


def _cmd_stats(args) -> int:
    ds = read_dataset(args.input, check_masks=False)
    print(json.dumps(dataset_stats(ds), indent=2, sort_keys=True))
    return 0


def _cmd_evaluate(args) -> int:
    gt = read_dataset(args.gt, check_masks=False)
    detections = read_results(args.pred)
    iou_types = ["mask", "bbox"] if args.iou_type == "both" else [args.iou_type]
    reports = [evaluate(gt, detections, EvalConfig(iou_type=t)) for t in iou_types]
    sys.stdout.write(format_report_table(reports))
    if len(reports) == 1:
        payload = report_to_dict(reports[0])
    else:
        payload = {r.iou_type: report_to_dict(r) for r in reports}
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "split": _cmd_split,
    "stats": _cmd_stats,
    "evaluate": _cmd_evaluate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except TraysimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())

"""traysim: deterministic synthetic meal-tray scenes + COCO-style evaluation.

The package covers the full desk-scale pipeline: domain-randomized scene
sampling, software rasterization to RGB + instance-id buffers, COCO dataset
IO with uncompressed RLE masks, train/test splitting, and mask/box mAP
evaluation.
"""

from .config import GenConfig
from .coco import (
    CocoAnnotation,
    CocoDataset,
    CocoImage,
    Detection,
    SceneRecord,
    read_dataset,
    read_results,
    write_dataset,
    write_results,
)
from .errors import ConfigError, DataFormatError, EvaluationError, RenderError, TraysimError
from .evaluation import (
    EvalConfig,
    EvalReport,
    MatchResult,
    average_precision,
    evaluate,
    iou,
    match_detections,
    nms,
)
from .pipeline import build_record, generate_dataset, generate_records
from .randomizer import (
    sample_camera,
    sample_food_cluster,
    sample_lights,
    sample_material,
    sample_scene,
)
from .render import InstanceMask, RenderOutput, extract_masks, render
from .rle import decode_rle, encode_rle
from .rng import Rng, derive_seed
from .scene import (
    Camera,
    Difficulty,
    Distractor,
    FoodObject,
    Light,
    Material,
    MealTray,
    Primitive,
    PrimitiveKind,
    Scene,
    TextureKind,
    WellGrid,
    scene_to_json,
    validate_scene,
    world_transform,
)
from .splitting import SplitSpec, dataset_stats, split_dataset
from .transforms import RigidTransform
from .meshing import Mesh, triangulate

__version__ = "0.1.0"

__all__ = [
    "Camera",
    "CocoAnnotation",
    "CocoDataset",
    "CocoImage",
    "ConfigError",
    "DataFormatError",
    "Detection",
    "Difficulty",
    "Distractor",
    "EvalConfig",
    "EvalReport",
    "EvaluationError",
    "FoodObject",
    "GenConfig",
    "InstanceMask",
    "Light",
    "MatchResult",
    "Material",
    "MealTray",
    "Mesh",
    "Primitive",
    "PrimitiveKind",
    "RenderError",
    "RenderOutput",
    "RigidTransform",
    "Rng",
    "Scene",
    "SceneRecord",
    "SplitSpec",
    "TextureKind",
    "TraysimError",
    "WellGrid",
    "average_precision",
    "build_record",
    "dataset_stats",
    "decode_rle",
    "derive_seed",
    "encode_rle",
    "evaluate",
    "extract_masks",
    "generate_dataset",
    "generate_records",
    "iou",
    "match_detections",
    "nms",
    "read_dataset",
    "read_results",
    "render",
    "sample_camera",
    "sample_food_cluster",
    "sample_lights",
    "sample_material",
    "sample_scene",
    "scene_to_json",
    "split_dataset",
    "triangulate",
    "validate_scene",
    "world_transform",
    "write_dataset",
    "write_results",
]

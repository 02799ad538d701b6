"""iceseg: unsupervised video foreground segmentation.

Motion and appearance cues are encoded under constraints derived from each
other, fused into a per-pixel likelihood map, binarized with an adaptive
threshold (with occlusion-aware identity tracking), and refined by exact
min-cut over a spatiotemporal superpixel graph.
"""

from .config import RunConfig, load_config, save_config
from .estimator import VideoForegroundSegmenter
from .media_io import FrameSequence, load_frame_sequence, read_flo, read_mask, write_flo, write_mask
from .metrics import EvalReport, evaluate, pixel_error, precision, run_se_ablation
from .pipeline import SegmentationResult, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "EvalReport",
    "FrameSequence",
    "RunConfig",
    "SegmentationResult",
    "VideoForegroundSegmenter",
    "evaluate",
    "load_config",
    "load_frame_sequence",
    "pixel_error",
    "precision",
    "read_flo",
    "read_mask",
    "run_pipeline",
    "run_se_ablation",
    "save_config",
    "write_flo",
    "write_mask",
    "__version__",
]

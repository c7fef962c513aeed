"""Classical ring-candidate preprocessing and ring localization."""

from ringbot.vision.pipeline import (
    Candidate,
    DetectorInterface,
    HeuristicDetector,
    HsvRange,
    PipelineConfig,
    PipelineResult,
    Verdict,
    box_blur,
    detect_rings,
    find_candidates,
    hsv_threshold,
    mask_image,
    rgb_to_hsv,
    rgb_to_hsv_pixel,
    run_pipeline,
    sample_depth,
)
from ringbot.vision.localize import localize_detections

__all__ = [
    "Candidate", "DetectorInterface", "HeuristicDetector", "HsvRange", "PipelineConfig",
    "PipelineResult", "Verdict", "box_blur", "detect_rings", "find_candidates",
    "hsv_threshold", "mask_image", "rgb_to_hsv", "rgb_to_hsv_pixel", "run_pipeline",
    "sample_depth", "localize_detections",
]

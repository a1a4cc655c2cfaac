"""MS lesion segmentation on 2-D MR slices with Canny edges and Fuzzy C-Means."""

from .edge import EdgeParams, canny, gaussian_kernel, log_kernel, marr_hildreth, prewitt, sobel
from .fcm import (
    FcmParams,
    FcmState,
    centroid_update,
    defuzzify,
    fcm_modified,
    fcm_standard,
    membership_update,
    objective_modified,
    objective_standard,
)
from .image import convolve2d, load_image, normalize_intensities, save_image
from .metrics import dice, edge_f1, jaccard, sensitivity, specificity
from .phantom import Lesion, PhantomSpec, make_phantom
from .pipeline import PipelineConfig, SegmentationResult, overlay, segment_lesions
from .preprocess import BrainMaskParams, apply_mask, binarize, extract_brain_mask, load_mask

__version__ = "0.1.0"

__all__ = [
    "BrainMaskParams", "EdgeParams", "FcmParams", "FcmState", "Lesion", "PhantomSpec",
    "PipelineConfig", "SegmentationResult", "apply_mask", "binarize", "canny",
    "centroid_update", "convolve2d", "defuzzify", "dice", "edge_f1", "extract_brain_mask",
    "fcm_modified", "fcm_standard", "gaussian_kernel", "jaccard", "load_image", "load_mask",
    "log_kernel", "make_phantom", "marr_hildreth", "membership_update",
    "normalize_intensities", "objective_modified", "objective_standard", "overlay",
    "prewitt", "save_image", "segment_lesions", "sensitivity", "sobel", "specificity",
]

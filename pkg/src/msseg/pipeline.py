"""End-to-end lesion segmentation: brain mask, Canny edges, modified FCM, gating."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import ndimage

from .edge import EdgeParams, canny
from .errors import EmptyMaskError
from .fcm import FcmParams, defuzzify, fcm_modified, unflatten
from .image import as_image, as_mask, check_same_shape, normalize_intensities
from .metrics import mask_boundary
from .preprocess import BrainMaskParams, apply_mask, extract_brain_mask, load_mask

EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class PipelineConfig:
    brain: BrainMaskParams = field(default_factory=BrainMaskParams)
    brain_mask_path: str | None = None
    edge: EdgeParams = field(default_factory=EdgeParams)
    fcm: FcmParams = field(default_factory=FcmParams)
    lesion_rule: Literal["brightest-centroid"] = "brightest-centroid"
    edge_gate: Literal["off", "boundary-overlap"] = "boundary-overlap"
    overlap_ratio: float = 0.5
    min_lesion_px: int = 20

    def __post_init__(self):
        if not 0.0 <= self.overlap_ratio <= 1.0:
            raise ValueError("overlap_ratio must lie in [0, 1]")
        if self.min_lesion_px < 0:
            raise ValueError("min_lesion_px must be non-negative")
        if self.lesion_rule != "brightest-centroid":
            raise ValueError(f"unknown lesion_rule {self.lesion_rule!r}")
        if self.edge_gate not in ("off", "boundary-overlap"):
            raise ValueError(f"unknown edge_gate {self.edge_gate!r}")


@dataclass
class SegmentationResult:
    lesion_mask: np.ndarray
    label_map: np.ndarray  # cluster index per pixel, -1 outside the brain
    centroids: np.ndarray
    membership_maps: list[np.ndarray]
    bias_field: np.ndarray
    edge_map: np.ndarray
    brain_mask: np.ndarray
    config_echo: PipelineConfig
    iterations: int
    final_objective: float


def edge_gate(lesion_mask, edge_map, overlap_ratio: float) -> np.ndarray:
    """Keep 8-connected lesion components whose boundary meets the edge map.

    A component survives when at least ``overlap_ratio`` of its boundary
    pixels fall on the edge map dilated by one pixel.
    """
    lesion_mask, edge_map = as_mask(lesion_mask), as_mask(edge_map)
    near_edge = ndimage.binary_dilation(edge_map, EIGHT)
    labels, n = ndimage.label(lesion_mask, structure=EIGHT)
    keep = np.zeros(lesion_mask.shape, dtype=bool)
    for k, sl in enumerate(ndimage.find_objects(labels), start=1):
        # pad the bounding box so components touching it keep their outline
        y0, y1 = max(sl[0].start - 1, 0), sl[0].stop + 1
        x0, x1 = max(sl[1].start - 1, 0), sl[1].stop + 1
        comp = labels[y0:y1, x0:x1] == k
        rim = mask_boundary(comp)
        hits = np.count_nonzero(rim & near_edge[y0:y1, x0:x1])
        if hits >= overlap_ratio * np.count_nonzero(rim):
            keep[y0:y1, x0:x1] |= comp
    return keep


def remove_small(mask, min_px: int) -> np.ndarray:
    """Drop 8-connected components with fewer than ``min_px`` pixels."""
    mask = as_mask(mask)
    if min_px <= 1:
        return mask.copy()
    labels, n = ndimage.label(mask, structure=EIGHT)
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    big = sizes >= min_px
    big[0] = False
    return big[labels]


def segment_lesions(image, config: PipelineConfig = PipelineConfig(),
                    brain_mask=None) -> SegmentationResult:
    """Segment hyperintense lesions in a single 2-D slice.

    The brain mask comes from ``brain_mask`` if given, else from the file at
    ``config.brain_mask_path``, else from :func:`extract_brain_mask`.

    Raises
    ------
    EmptyMaskError
        The brain mask has no pixels.
    DegenerateClusterError
        Propagated from the clustering.
    """
    img = normalize_intensities(as_image(image))
    if brain_mask is not None:
        brain = as_mask(brain_mask)
    elif config.brain_mask_path is not None:
        brain = load_mask(config.brain_mask_path)
    else:
        brain = extract_brain_mask(img, config.brain)
    check_same_shape(img, brain)
    if not brain.any():
        raise EmptyMaskError("brain mask is empty")

    edges = canny(apply_mask(img, brain), config.edge)
    state = fcm_modified(img, brain, config.fcm)
    c = config.fcm.c
    labels = unflatten(defuzzify(state.U), brain, fill=-1).astype(np.int64)
    lesion = labels == c - 1  # centroids are sorted, the last is the brightest
    if config.edge_gate == "boundary-overlap":
        lesion = edge_gate(lesion, edges, config.overlap_ratio)
    lesion = remove_small(lesion, config.min_lesion_px)

    return SegmentationResult(
        lesion_mask=lesion,
        label_map=labels,
        centroids=state.V.copy(),
        membership_maps=[unflatten(row, brain) for row in state.U],
        bias_field=unflatten(state.gamma, brain),
        edge_map=edges,
        brain_mask=brain,
        config_echo=config,
        iterations=state.iterations_run,
        final_objective=state.J_history[-1],
    )


def overlay(image, mask) -> np.ndarray:
    """Paint masked pixels at full intensity for visual inspection."""
    img = as_image(image)
    mask = as_mask(mask)
    check_same_shape(img, mask)
    return np.where(mask, 1.0, img)

"""Binarization and a threshold/morphology brain-mask stage."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import EmptyMaskError
from .image import as_image, as_mask, check_same_shape, load_image

EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class BrainMaskParams:
    threshold: float = 0.15
    closing_radius: int = 2
    fill_holes: bool = True

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.closing_radius < 0:
            raise ValueError("closing_radius must be non-negative")


def binarize(image, th: float) -> np.ndarray:
    """Pixels strictly brighter than ``th`` become 1, all others 0."""
    if not np.isfinite(th):
        raise ValueError("threshold must be finite")
    return as_image(image) > th


def disk(radius: int) -> np.ndarray:
    """Euclidean disk structuring element, ``dx² + dy² <= radius²``."""
    yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    return xx * xx + yy * yy <= radius * radius


def largest_component(mask) -> np.ndarray:
    """Keep the largest 8-connected component; ties go to the first in raster order."""
    mask = as_mask(mask)
    labels, n = ndimage.label(mask, structure=EIGHT)
    if n == 0:
        return mask.copy()
    sizes = np.bincount(labels.ravel())[1:]
    return labels == int(np.argmax(sizes)) + 1


def binary_closing(mask, radius: int) -> np.ndarray:
    """Closing with a disk; the grid is zero-padded so the border is not eroded."""
    mask = as_mask(mask)
    if radius == 0:
        return mask.copy()
    se = disk(radius)
    pad = radius + 1
    padded = np.pad(mask, pad)
    closed = ndimage.binary_erosion(ndimage.binary_dilation(padded, se), se)
    return closed[pad:-pad, pad:-pad]


def extract_brain_mask(image, params: BrainMaskParams = BrainMaskParams()) -> np.ndarray:
    """Stand-in for skull stripping.

    Thresholds the image, keeps the largest 8-connected component, smooths it
    with a disk closing and optionally fills interior holes.

    Raises
    ------
    EmptyMaskError
        Nothing survives the threshold.
    """
    fg = binarize(image, params.threshold)
    if not fg.any():
        raise EmptyMaskError(
            f"no pixel exceeds threshold {params.threshold}; threshold too high"
        )
    mask = largest_component(fg)
    mask = binary_closing(mask, params.closing_radius)
    if params.fill_holes:
        mask = ndimage.binary_fill_holes(mask)
        # closing can in principle leave a detached sliver; keep the mask one piece
        mask = largest_component(mask)
    return mask


def apply_mask(image, mask) -> np.ndarray:
    img = as_image(image)
    mask = as_mask(mask)
    check_same_shape(img, mask)
    return np.where(mask, img, 0.0)


def load_mask(path) -> np.ndarray:
    """Load a grayscale file as a mask: a pixel is set iff its intensity exceeds 0.5."""
    return load_image(path) > 0.5

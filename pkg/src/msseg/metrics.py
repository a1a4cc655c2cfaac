"""Overlap and edge-localization metrics for binary masks.

Empty denominators score 1.0: two empty masks agree perfectly.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .image import as_mask, check_same_shape


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = as_mask(a), as_mask(b)
    check_same_shape(a, b)
    return a, b


def _ratio(num: int, den: int) -> float:
    return 1.0 if den == 0 else num / den


def dice(a, b) -> float:
    a, b = _pair(a, b)
    return _ratio(2 * int(np.sum(a & b)), int(a.sum() + b.sum()))


def jaccard(a, b) -> float:
    a, b = _pair(a, b)
    return _ratio(int(np.sum(a & b)), int(np.sum(a | b)))


def sensitivity(pred, truth) -> float:
    """True-positive rate; 1.0 when the truth is empty."""
    pred, truth = _pair(pred, truth)
    return _ratio(int(np.sum(pred & truth)), int(truth.sum()))


def specificity(pred, truth) -> float:
    """True-negative rate; 1.0 when the truth covers every pixel."""
    pred, truth = _pair(pred, truth)
    return _ratio(int(np.sum(~pred & ~truth)), int(np.sum(~truth)))


def mask_boundary(mask) -> np.ndarray:
    """Inner boundary: foreground pixels with a 4-neighbour in the background.

    Pixels on the image border do not count as boundary on account of the
    border alone.
    """
    mask = as_mask(mask)
    eroded = ndimage.binary_erosion(mask, border_value=1)
    return mask & ~eroded


def edge_f1(pred_edges, truth_edges, tol_px: int = 1) -> float:
    """F1 of edge maps where a match lies within Chebyshev distance ``tol_px``."""
    pred, truth = _pair(pred_edges, truth_edges)
    if not pred.any() and not truth.any():
        return 1.0
    if not pred.any() or not truth.any():
        return 0.0
    se = np.ones((2 * tol_px + 1, 2 * tol_px + 1), dtype=bool)
    near_truth = ndimage.binary_dilation(truth, se) if tol_px else truth
    near_pred = ndimage.binary_dilation(pred, se) if tol_px else pred
    precision = np.sum(pred & near_truth) / pred.sum()
    recall = np.sum(truth & near_pred) / truth.sum()
    if precision + recall == 0:
        return 0.0
    return float(2 * precision * recall / (precision + recall))


def all_metrics(pred, truth) -> dict[str, float]:
    return {
        "dice": dice(pred, truth),
        "jaccard": jaccard(pred, truth),
        "sensitivity": sensitivity(pred, truth),
        "specificity": specificity(pred, truth),
    }

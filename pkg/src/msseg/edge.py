"""Gaussian / LoG kernels and the Sobel, Prewitt, Marr-Hildreth and Canny detectors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image import as_image, convolve2d

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
PREWITT_X = np.array([[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]])

# (dy, dx) of the forward neighbour for each quantized gradient direction,
# with y growing downward: 0°, 45°, 90°, 135°
_NMS_STEPS = ((0, 1), (1, 1), (1, 0), (1, -1))


@dataclass(frozen=True)
class EdgeParams:
    sigma: float = 1.0
    kernel_radius: int | None = None
    low: float = 0.1
    high: float = 0.3
    zc_threshold: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.kernel_radius is not None and self.kernel_radius < 1:
            raise ValueError("kernel_radius must be a positive integer")
        if not 0.0 <= self.low <= self.high <= 1.0:
            raise ValueError("need 0 <= low <= high <= 1")
        if self.zc_threshold < 0:
            raise ValueError("zc_threshold must be non-negative")

    @property
    def radius(self) -> int:
        """Kernel radius; defaults to ceil(3σ)."""
        if self.kernel_radius is not None:
            return self.kernel_radius
        return max(1, math.ceil(3 * self.sigma))


@dataclass(frozen=True)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    direction: np.ndarray  # radians in (-pi, pi]


def _offsets(radius: int) -> np.ndarray:
    yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    return (xx * xx + yy * yy).astype(np.float64)


def gaussian_kernel(sigma: float, radius: int) -> np.ndarray:
    """Isotropic sampled Gaussian of side ``2*radius + 1``, weights summing to 1."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    k = np.exp(-_offsets(radius) / (2.0 * sigma * sigma))
    return k / k.sum()


def log_kernel_raw(sigma: float, radius: int) -> np.ndarray:
    """Laplacian of Gaussian sampled at integer offsets, before the zero-sum shift.

    Uses the prefactor ``-1 / (4 pi sigma^2)``; the conventional sigma^4 form only
    differs by a positive scale, which zero-crossing detection ignores.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    s2 = sigma * sigma
    r2 = _offsets(radius)
    return (-1.0 / (4.0 * math.pi * s2)) * (1.0 - r2 / (2.0 * s2)) * np.exp(-r2 / (2.0 * s2))


def log_kernel(sigma: float, radius: int) -> np.ndarray:
    """LoG kernel shifted by a constant so its weights sum to zero."""
    k = log_kernel_raw(sigma, radius)
    k = k - k.mean()
    # one correction pass absorbs the rounding left by the first shift
    return k - k.sum() / k.size


def _gradient(image, smooth: tuple[float, float, float]) -> GradientField:
    """Separable 3x3 gradient: central difference along one axis, ``smooth`` across it.

    Equivalent to correlating with ``outer(smooth, [-1, 0, 1])`` under edge
    replication. Differencing first makes the response of any constant region
    exactly zero. A ramp increasing in x yields gx > 0.
    """
    img = as_image(image)
    p = np.pad(img, 1, mode="edge")
    a, b, c = smooth
    dx = p[:, 2:] - p[:, :-2]
    dy = p[2:, :] - p[:-2, :]
    gx = a * dx[:-2] + b * dx[1:-1] + c * dx[2:] + 0.0
    gy = a * dy[:, :-2] + b * dy[:, 1:-1] + c * dy[:, 2:] + 0.0
    mag = np.hypot(gx, gy)
    direction = np.arctan2(gy, gx)
    direction[direction == -np.pi] = np.pi
    return GradientField(gx, gy, mag, direction)


def sobel(image) -> GradientField:
    """Sobel gradient, the correlation of the image with ``SOBEL_X`` and its transpose."""
    return _gradient(image, (1.0, 2.0, 1.0))


def prewitt(image) -> GradientField:
    """Prewitt gradient, the correlation of the image with ``PREWITT_X`` and its transpose."""
    return _gradient(image, (1.0, 1.0, 1.0))


def gradient_threshold(field: GradientField, fraction: float) -> np.ndarray:
    """Edge mask from a gradient field: magnitude >= fraction * max, magnitude > 0."""
    mag = field.magnitude
    peak = mag.max()
    return (mag > 0) & (mag >= fraction * peak)


def marr_hildreth(image, params: EdgeParams = EdgeParams()) -> np.ndarray:
    """Zero crossings of the LoG response.

    A pixel is an edge when, for at least one of the four opposite-neighbour
    pairs (horizontal, vertical, two diagonals), the response is strictly
    positive on one side and strictly negative on the other and the swing
    ``|g_a - g_b|`` exceeds ``params.zc_threshold``.
    """
    img = as_image(image)
    k = log_kernel(params.sigma, params.radius)
    g = convolve2d(img, k)
    # residue of a zero-sum kernel over flat regions is rounding noise, not signal
    floor = 1e-12 * np.abs(k).sum() * max(1.0, np.abs(img).max())
    g[np.abs(g) <= floor] = 0.0

    h, w = g.shape
    p = np.pad(g, 1, mode="edge")
    edges = np.zeros((h, w), dtype=bool)
    for dy, dx in _NMS_STEPS:
        a = p[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w]
        b = p[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        crossing = ((a > 0) & (b < 0)) | ((a < 0) & (b > 0))
        edges |= crossing & (np.abs(a - b) > params.zc_threshold)
    return edges


def quantize_direction(direction: np.ndarray) -> np.ndarray:
    """Map angles to bins 0..3 for 0°, 45°, 90°, 135° (mod 180°)."""
    deg = np.rad2deg(direction) % 180.0
    return (np.floor((deg + 22.5) / 45.0).astype(np.int64)) % 4


def non_maximum_suppression(field: GradientField) -> np.ndarray:
    """Boolean mask of pixels that are ridge maxima along the quantized gradient.

    A pixel survives when its magnitude is ``>=`` the forward neighbour and
    ``>`` the backward neighbour, so a flat two-pixel ridge keeps exactly one
    pixel instead of both or neither. Out-of-image neighbours count as 0.
    """
    mag = field.magnitude
    h, w = mag.shape
    bins = quantize_direction(field.direction)
    p = np.pad(mag, 1)
    keep = np.zeros((h, w), dtype=bool)
    for b, (dy, dx) in enumerate(_NMS_STEPS):
        fwd = p[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        back = p[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w]
        keep |= (bins == b) & (mag >= fwd) & (mag > back)
    return keep & (mag > 0)


def nms_neighbors(field: GradientField) -> tuple[np.ndarray, np.ndarray]:
    """Magnitudes of the two quantized-direction neighbours of every pixel."""
    mag = field.magnitude
    h, w = mag.shape
    bins = quantize_direction(field.direction)
    p = np.pad(mag, 1)
    fwd = np.zeros_like(mag)
    back = np.zeros_like(mag)
    for b, (dy, dx) in enumerate(_NMS_STEPS):
        sel = bins == b
        fwd[sel] = p[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w][sel]
        back[sel] = p[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w][sel]
    return fwd, back


def hysteresis(strong: np.ndarray, weak: np.ndarray) -> np.ndarray:
    """Keep weak pixels 8-connected (through weak/strong pixels) to a strong one."""
    candidates = strong | weak
    labels, n = ndimage.label(candidates, structure=np.ones((3, 3), dtype=bool))
    if n == 0:
        return candidates
    seeded = np.zeros(n + 1, dtype=bool)
    seeded[np.unique(labels[strong])] = True
    seeded[0] = False
    return seeded[labels]


@dataclass(frozen=True)
class CannyStages:
    """Intermediate Canny products, exposed for inspection and testing."""

    smoothed: np.ndarray
    field: GradientField
    nms: np.ndarray
    strong: np.ndarray
    weak: np.ndarray
    edges: np.ndarray


def canny_stages(image, params: EdgeParams = EdgeParams()) -> CannyStages:
    img = as_image(image)
    smoothed = convolve2d(img, gaussian_kernel(params.sigma, params.radius))
    field = sobel(smoothed)
    thin = non_maximum_suppression(field)
    peak = field.magnitude.max()
    strong = thin & (field.magnitude >= params.high * peak)
    weak = thin & (field.magnitude >= params.low * peak) & ~strong
    edges = hysteresis(strong, weak)
    return CannyStages(smoothed, field, thin, strong, weak, edges)


def canny(image, params: EdgeParams = EdgeParams()) -> np.ndarray:
    """Canny edge map: Gaussian smoothing, Sobel gradient, 4-bin NMS, hysteresis.

    ``params.low`` and ``params.high`` are fractions of the maximum gradient
    magnitude.
    """
    return canny_stages(image, params).edges

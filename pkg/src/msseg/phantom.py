"""Synthetic T2-like slices with hyperintense elliptical lesions and known truth."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Lesion:
    cx: float
    cy: float
    a: float
    b: float
    angle: float = 0.0  # radians, rotation of the a-axis from +x
    intensity: float = 0.9


@dataclass(frozen=True)
class PhantomSpec:
    """Geometry and corruption model of a phantom.

    Tissue ``k`` fills a centred ellipse holding a fraction ``1 - k/n`` of the
    outermost ellipse's area, so the ``n`` tissues cover equal areas. Tissue 0
    fills the whole frame unless ``background`` is given, in which case the
    frame outside the outermost ellipse takes that value.
    ``bias_terms`` are ``(px, py, coef)`` monomials in coordinates scaled to
    [-1, 1]; the resulting field is rescaled so its peak magnitude equals
    ``bias_amp``.
    """

    width: int = 64
    height: int = 64
    tissue_levels: tuple[float, ...] = (0.5,)
    lesions: tuple[Lesion, ...] = ()
    bias_terms: tuple[tuple[int, int, float], ...] = ()
    bias_amp: float = 0.0
    noise_sigma: float = 0.0
    seed: int = 0
    background: float | None = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("phantom dimensions must be positive")
        if not self.tissue_levels:
            raise ValueError("at least one tissue level is required")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.bias_amp < 0:
            raise ValueError("bias_amp must be non-negative")
        top = max(self.tissue_levels)
        for les in self.lesions:
            if not les.intensity > top:
                raise ValueError(
                    f"lesion intensity {les.intensity} must exceed the brightest tissue {top}"
                )
            if les.a <= 0 or les.b <= 0:
                raise ValueError("lesion radii must be positive")


def ellipse_mask(width: int, height: int, cx: float, cy: float,
                 a: float, b: float, angle: float = 0.0) -> np.ndarray:
    """Pixels whose centres satisfy the rotated ellipse inequality."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    dx, dy = xx - cx, yy - cy
    ca, sa = math.cos(angle), math.sin(angle)
    u = dx * ca + dy * sa
    v = -dx * sa + dy * ca
    return (u / a) ** 2 + (v / b) ** 2 <= 1.0


def _check_inside(spec: PhantomSpec, les: Lesion) -> None:
    ca, sa = math.cos(les.angle), math.sin(les.angle)
    ex = math.hypot(les.a * ca, les.b * sa)
    ey = math.hypot(les.a * sa, les.b * ca)
    if (les.cx - ex < 0 or les.cx + ex > spec.width - 1
            or les.cy - ey < 0 or les.cy + ey > spec.height - 1):
        raise ValueError(f"lesion at ({les.cx}, {les.cy}) extends outside the image")


def bias_field(spec: PhantomSpec) -> np.ndarray:
    w, h = spec.width, spec.height
    out = np.zeros((h, w))
    if spec.bias_amp == 0 or not spec.bias_terms:
        return out
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    u = 2.0 * xx / max(w - 1, 1) - 1.0
    v = 2.0 * yy / max(h - 1, 1) - 1.0
    for px, py, coef in spec.bias_terms:
        out += coef * u**px * v**py
    peak = np.abs(out).max()
    if peak == 0:
        return out
    return out * (spec.bias_amp / peak)


def make_phantom(spec: PhantomSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Render ``(image, lesion_truth, bias_truth)``.

    The image is tissue + lesions + bias + Gaussian noise, clamped to [0, 1].
    The lesion truth depends only on the geometry.
    """
    w, h = spec.width, spec.height
    for les in spec.lesions:
        _check_inside(spec, les)

    n = len(spec.tissue_levels)
    if spec.background is None:
        img = np.full((h, w), float(spec.tissue_levels[0]))
        ax, ay = 0.5 * w, 0.5 * h
    else:
        img = np.full((h, w), float(spec.background))
        ax, ay = 0.42 * w, 0.46 * h
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    start = 0 if spec.background is not None else 1
    for k in range(start, n):
        scale = math.sqrt(1.0 - k / n)
        img[ellipse_mask(w, h, cx, cy, ax * scale, ay * scale)] = spec.tissue_levels[k]

    truth = np.zeros((h, w), dtype=bool)
    for les in spec.lesions:
        inside = ellipse_mask(w, h, les.cx, les.cy, les.a, les.b, les.angle)
        img[inside] = les.intensity
        truth |= inside

    bias = bias_field(spec)
    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(0.0, spec.noise_sigma, size=(h, w)) if spec.noise_sigma else 0.0
    img = np.clip(img + bias + noise, 0.0, 1.0)
    return img, truth, bias


def standard_phantom_spec(seed: int = 0, **overrides) -> PhantomSpec:
    """256x256 slice: dark background, two tissues, three lesions, bias 0.1, noise 0.03.

    Lesions cover about a sixth of the head so that quantile initialization
    seeds one centroid per class.
    """
    fields = dict(
        width=256,
        height=256,
        background=0.0,
        tissue_levels=(0.3, 0.55),
        lesions=(
            Lesion(cx=92, cy=100, a=32, b=24, angle=0.4, intensity=0.75),
            Lesion(cx=170, cy=118, a=26, b=26, angle=0.0, intensity=0.75),
            Lesion(cx=126, cy=178, a=36, b=20, angle=-0.5, intensity=0.75),
        ),
        bias_terms=((1, 0, 1.0),),
        bias_amp=0.1,
        noise_sigma=0.03,
        seed=seed,
    )
    fields.update(overrides)
    return PhantomSpec(**fields)


def step_phantom(size: int = 32, noise_sigma: float = 0.0, seed: int = 0,
                 low: float = 0.0, high: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Vertical step (left ``low``, right ``high``) and its bright-region mask."""
    img = np.full((size, size), low)
    img[:, size // 2 :] = high
    region = img > (low + high) / 2
    if noise_sigma:
        img = img + np.random.default_rng(seed).normal(0.0, noise_sigma, img.shape)
    return img, region

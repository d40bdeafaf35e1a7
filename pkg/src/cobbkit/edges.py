"""Automatic threshold selection and Canny edge detection.

The high hysteresis threshold comes from maximizing between-class variance
on the gradient-magnitude histogram, so the detector needs no per-image
manual tuning; low = low_ratio * high.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from .enhance import LEVELS
from .imagecore import GrayImage
from .kernels import get_backend

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T


@dataclass(frozen=True)
class EdgeMap:
    """Binary edge raster."""

    edges: np.ndarray

    def __post_init__(self):
        e = np.array(self.edges, dtype=bool, copy=True)
        if e.ndim != 2:
            raise ValueError(f"edges must be 2-D, got shape {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @property
    def width(self) -> int:
        return self.edges.shape[1]

    @property
    def height(self) -> int:
        return self.edges.shape[0]

    @property
    def count(self) -> int:
        return int(self.edges.sum())

    def to_image(self) -> GrayImage:
        return GrayImage(self.edges.astype(np.float64))


@dataclass(frozen=True)
class CannyConfig:
    blur_sigma: float = 1.4
    low_ratio: float = 0.5
    high_override: float | None = None

    def __post_init__(self):
        if self.blur_sigma < 0:
            raise ValueError(f"blur_sigma must be >= 0, got {self.blur_sigma}")
        if not 0.0 < self.low_ratio <= 1.0:
            raise ValueError(f"low_ratio must be in (0, 1], got {self.low_ratio}")


def otsu_bin(counts: np.ndarray) -> int:
    """Split bin maximizing between-class variance w0*w1*(mu0-mu1)^2.

    Candidates are the splits with both classes nonempty; ties resolve to
    the smallest bin. A single occupied level (no valid split) returns
    that level's bin.
    """
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.shape[0]
    idx = np.arange(n, dtype=np.float64)
    w0 = np.cumsum(counts)
    total = w0[-1]
    if total <= 0:
        raise ValueError("empty histogram")
    m0 = np.cumsum(counts * idx)
    w1 = total - w0
    valid = (w0 > 0) & (w1 > 0)
    if not valid.any():
        return int(np.nonzero(counts)[0][0])
    mu0 = np.divide(m0, w0, out=np.zeros(n), where=w0 > 0)
    mu1 = np.divide(m0[-1] - m0, w1, out=np.zeros(n), where=w1 > 0)
    var = np.where(valid, w0 * w1 * (mu0 - mu1) ** 2, -1.0)
    return int(np.argmax(var))


def otsu_threshold(img: GrayImage) -> float:
    """Intensity threshold (b* + 0.5)/255 from the 256-bin histogram."""
    from .enhance import histogram

    return (otsu_bin(histogram(img, LEVELS)) + 0.5) / (LEVELS - 1)


def _gradients(img: GrayImage, blur_sigma: float):
    smoothed = ndi.gaussian_filter(img.pixels, sigma=blur_sigma, mode="nearest")
    gx = ndi.convolve(smoothed, SOBEL_X, mode="nearest")
    gy = ndi.convolve(smoothed, SOBEL_Y, mode="nearest")
    return gx, gy, np.sqrt(gx * gx + gy * gy)


def _hysteresis(thin: np.ndarray, mag: np.ndarray, high: float, low: float) -> np.ndarray:
    strong = thin & (mag >= high)
    weak = thin & (mag >= low)
    if not strong.any():
        return np.zeros_like(thin)
    labels, n = ndi.label(weak, structure=np.ones((3, 3), dtype=int))
    keep = np.zeros(n + 1, dtype=bool)
    keep[np.unique(labels[strong])] = True
    keep[0] = False
    return keep[labels]


def canny(
    img: GrayImage, cfg: CannyConfig, high: float, backend: str | None = None
) -> EdgeMap:
    """Blur, Sobel gradients, non-maximum suppression, then hysteresis linking.

    high is the threshold on gradient magnitude; low = cfg.low_ratio * high.
    Weak pixels survive when 8-connected to a strong pixel. Border pixels
    are never edges.
    """
    if not high > 0:
        raise ValueError(f"high threshold must be > 0, got {high}")
    gx, gy, mag = _gradients(img, cfg.blur_sigma)
    thin = get_backend(backend).nonmax_suppress(mag, gx, gy)
    return EdgeMap(_hysteresis(thin, mag, high, cfg.low_ratio * high))


def canny_otsu(img: GrayImage, cfg: CannyConfig, backend: str | None = None) -> EdgeMap:
    """Canny with the high threshold picked automatically.

    The gradient magnitudes rescale by their max into [0, 1]; the split
    maximizing between-class variance on that histogram sets
    high = t * max_magnitude. Equals canny(img, cfg, high) exactly.
    """
    if cfg.high_override is not None:
        return canny(img, cfg, cfg.high_override, backend=backend)
    _, _, mag = _gradients(img, cfg.blur_sigma)
    mmax = float(mag.max())
    if mmax == 0.0:
        return EdgeMap(np.zeros(img.pixels.shape, dtype=bool))
    t = otsu_threshold(GrayImage(mag / mmax))
    return canny(img, cfg, t * mmax, backend=backend)

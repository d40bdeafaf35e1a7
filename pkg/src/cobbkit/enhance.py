"""Global histogram equalization for contrast enhancement."""

from __future__ import annotations

import numpy as np

from .imagecore import GrayImage

LEVELS = 256


def histogram(img: GrayImage, bins: int = LEVELS) -> np.ndarray:
    """Per-bin pixel counts; bin of v is floor(v*(bins-1) + 0.5)."""
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    idx = np.floor(img.pixels * (bins - 1) + 0.5).astype(np.int64)
    return np.bincount(idx.ravel(), minlength=bins)


def histogram_equalize(img: GrayImage) -> GrayImage:
    """Remap 256 levels through the CDF so occupied levels spread over [0, 1].

    out = (cdf(level) - cdf_min) / (M - cdf_min) with cdf_min the smallest
    nonzero CDF value; a single-level image maps to 0.0. Monotone in v.
    """
    counts = histogram(img, LEVELS)
    cdf = np.cumsum(counts)
    total = cdf[-1]
    cdf_min = cdf[counts > 0][0]
    if cdf_min == total:
        lut = np.zeros(LEVELS)
    else:
        lut = (cdf - cdf_min) / (total - cdf_min)
        lut = np.clip(lut, 0.0, 1.0)
    idx = np.floor(img.pixels * (LEVELS - 1) + 0.5).astype(np.int64)
    return GrayImage(lut[idx])

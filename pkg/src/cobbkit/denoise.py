"""Non-local denoising filters.

Three variants share the same windowed patch-similarity weighting and
differ only in how the candidate values are aggregated:

  nlm    weighted mean of candidate center values
  nlem   center value of the weighted geometric median patch
  nletm  weighted mean after trimming the extreme candidate values

Weights are exp(-d/h^2) where d is the summed squared difference between
the (2r+1)x(2r+1) patches around the target and candidate pixels; the
search is restricted to the (2s+1)x(2s+1) window around the target.
Patches edge-replicate at borders; the search window clips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imagecore import GrayImage
from .kernels import get_backend


def h_for_sigma(sigma: float) -> float:
    """Decay parameter matched to a noise level in 8-bit units (h = 10*sigma/255)."""
    return 10.0 * sigma / 255.0


@dataclass(frozen=True)
class NlConfig:
    """Parameters of the non-local filters."""

    patch_radius: int = 1
    search_radius: int = 10
    h: float = h_for_sigma(10.0)
    trim_fraction: float = 0.30
    median_tol: float = 1e-6
    median_max_iter: int = 50

    def __post_init__(self):
        if self.patch_radius < 0:
            raise ValueError(f"patch_radius must be >= 0, got {self.patch_radius}")
        if self.search_radius < 1:
            raise ValueError(f"search_radius must be >= 1, got {self.search_radius}")
        if self.patch_radius > self.search_radius:
            raise ValueError(
                f"patch must fit in the search window: "
                f"patch_radius {self.patch_radius} > search_radius {self.search_radius}"
            )
        if not self.h > 0:
            raise ValueError(f"h must be > 0, got {self.h}")
        if not 0.0 <= self.trim_fraction < 1.0:
            raise ValueError(f"trim_fraction must be in [0, 1), got {self.trim_fraction}")
        if self.median_tol <= 0 or self.median_max_iter < 1:
            raise ValueError("median_tol must be > 0 and median_max_iter >= 1")


@dataclass(frozen=True)
class Patch:
    """An edge-replicated intensity block centered on a pixel."""

    center: tuple[int, int]
    values: np.ndarray


def patch_at(img: GrayImage, center: tuple[int, int], r: int) -> Patch:
    """Extract the (2r+1)x(2r+1) patch at center=(x, y), replicating past borders."""
    x, y = center
    if not (0 <= x < img.width and 0 <= y < img.height):
        raise ValueError(f"patch center {center} outside {img.width}x{img.height}")
    ys = np.clip(np.arange(y - r, y + r + 1), 0, img.height - 1)
    xs = np.clip(np.arange(x - r, x + r + 1), 0, img.width - 1)
    return Patch(center=(x, y), values=img.pixels[np.ix_(ys, xs)])


def patch_distance(
    img: GrayImage, p: tuple[int, int], q: tuple[int, int], r: int
) -> float:
    """Summed squared difference between the patches around p=(x,y) and q.

    The sum is not normalized by patch size, so the decay parameter h
    trades off against patch radius exactly as in the classical filter.
    """
    pv = patch_at(img, p, r).values
    qv = patch_at(img, q, r).values
    return float(((pv - qv) ** 2).sum())


def weight(d: float, h: float) -> float:
    """Unnormalized similarity weight exp(-d/h^2); callers normalize per pixel."""
    if not h > 0:
        raise ValueError(f"h must be > 0, got {h}")
    return math.exp(-d / (h * h))


def _padded(img: GrayImage, r: int) -> np.ndarray:
    if r == 0:
        return img.pixels.astype(np.float64, copy=True)
    return np.pad(img.pixels, r, mode="edge")


def _run_trimmed(img: GrayImage, cfg: NlConfig, alpha: float, backend) -> GrayImage:
    kern = get_backend(backend)
    out = kern.nl_trimmed(
        _padded(img, cfg.patch_radius),
        img.height,
        img.width,
        cfg.patch_radius,
        cfg.search_radius,
        cfg.h,
        alpha,
    )
    return GrayImage(out)


def nlm(img: GrayImage, cfg: NlConfig, backend: str | None = None) -> GrayImage:
    """Classical non-local means: weighted average over the search window."""
    return _run_trimmed(img, cfg, 0.0, backend)


def nletm(img: GrayImage, cfg: NlConfig, backend: str | None = None) -> GrayImage:
    """Trimmed non-local means: drop floor(alpha*n/2) extreme values per tail.

    With trim_fraction = 0 this is exactly nlm (identical code path).
    """
    return _run_trimmed(img, cfg, cfg.trim_fraction, backend)


def nlem(img: GrayImage, cfg: NlConfig, backend: str | None = None) -> GrayImage:
    """Non-local Euclidean medians: aggregate by weighted geometric patch median."""
    kern = get_backend(backend)
    out = kern.nl_euclid_median(
        _padded(img, cfg.patch_radius),
        img.height,
        img.width,
        cfg.patch_radius,
        cfg.search_radius,
        cfg.h,
        cfg.median_tol,
        cfg.median_max_iter,
    )
    return GrayImage(out)


FILTERS = {"nlm": nlm, "nlem": nlem, "nletm": nletm}


def trimmed_mean(values, weights=None, alpha: float = 0.0) -> float:
    """Weighted mean after discarding alpha/2 of the weight mass from each tail.

    Pairs sort by value (stable); the lowest and highest alpha/2 fractions
    of total weight are dropped (boundary pairs keep their partial weight)
    and the surviving weights renormalize. With uniform weights and
    alpha*n/2 integral this is the usual trimmed mean of the order
    statistics: mean of x_(k+1) .. x_(n-k) with k values dropped per tail.
    """
    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim != 1 or vals.size == 0:
        raise ValueError("values must be a nonempty 1-D sequence")
    if weights is None:
        wts = np.ones_like(vals)
    else:
        wts = np.asarray(weights, dtype=np.float64)
        if wts.shape != vals.shape:
            raise ValueError("weights must match values in length")
        if (wts < 0).any():
            raise ValueError("weights must be nonnegative")
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    total = wts.sum()
    if total <= 0:
        raise ValueError("weights sum to zero")
    if alpha == 0.0:
        return float((vals * wts).sum() / total)
    order = np.argsort(vals, kind="mergesort")
    cum = np.cumsum(wts[order])
    lo, hi = alpha * total / 2.0, total - alpha * total / 2.0
    kept = np.clip(np.minimum(cum, hi) - np.maximum(cum - wts[order], lo), 0.0, None)
    den = kept.sum()
    if den <= 0:
        raise ValueError("surviving weights sum to zero")
    return float((vals[order] * kept).sum() / den)

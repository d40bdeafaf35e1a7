"""Procedural radiograph-like phantoms for tests and benchmarks.

Real clinical series are not redistributable, so evaluation runs on
synthetic images: bright vertebra-like bars with known endplate slopes
over a smooth vertical background gradient. The gradient is vertical
only; lateral background variation would bend the detected bar edges
(the denoiser pulls edge pixels toward the local background level) and
bias slope recovery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imagecore import GrayImage, Rect

BACKGROUND_BASE = 0.10
BACKGROUND_GRADIENT = 0.30
BAR_INTENSITY = 0.92
EDGE_SOFTNESS = 0.8


@dataclass(frozen=True)
class SpinePhantom:
    image: GrayImage
    roi_superior: Rect
    roi_inferior: Rect
    angle_superior: float
    angle_inferior: float

    @property
    def cobb_deg(self) -> float:
        return abs(self.angle_superior - self.angle_inferior)


def _paint_bar(px, cx, cy, angle_deg, length, thickness):
    """Blend an antialiased tilted bar into px; positive angles descend rightward."""
    height, width = px.shape
    phi = math.radians(angle_deg)
    xs = np.arange(width) - cx
    ys = np.arange(height)[:, None] - cy
    along = xs * math.cos(phi) + ys * math.sin(phi)
    across = -xs * math.sin(phi) + ys * math.cos(phi)
    cov = np.clip((length / 2 - np.abs(along)) / EDGE_SOFTNESS + 0.5, 0.0, 1.0) * np.clip(
        (thickness / 2 - np.abs(across)) / EDGE_SOFTNESS + 0.5, 0.0, 1.0
    )
    bar = BAR_INTENSITY - 0.04 * (across / thickness)
    return px * (1.0 - cov) + bar * cov


def _bar_roi(width, height, cx, cy, angle_deg, length, thickness, margin) -> Rect:
    phi = math.radians(angle_deg)
    half_w = (length * abs(math.cos(phi)) + thickness * abs(math.sin(phi))) / 2.0 + margin
    half_h = (length * abs(math.sin(phi)) + thickness * abs(math.cos(phi))) / 2.0 + margin
    x0, y0 = max(0, int(cx - half_w)), max(0, int(cy - half_h))
    x1 = min(width, int(math.ceil(cx + half_w)))
    y1 = min(height, int(math.ceil(cy + half_h)))
    return Rect(x=x0, y=y0, w=x1 - x0, h=y1 - y0)


def make_spine_phantom(
    width: int = 340,
    height: int = 230,
    angle_superior: float = 10.0,
    angle_inferior: float = -15.0,
    bar_length: int = 104,
    bar_thickness: int = 26,
    roi_margin: int = 9,
) -> SpinePhantom:
    """Two bright bars at known inclinations with ROIs enclosing them."""
    yy = np.arange(height)[:, None] / (height - 1)
    px = (BACKGROUND_BASE + BACKGROUND_GRADIENT * yy) * np.ones((height, width))
    sup = (width * 0.5, height * 0.27)
    inf = (width * 0.5, height * 0.73)
    for (cx, cy), ang in ((sup, angle_superior), (inf, angle_inferior)):
        px = _paint_bar(px, cx, cy, ang, bar_length, bar_thickness)
    return SpinePhantom(
        image=GrayImage(np.clip(px, 0.0, 1.0)),
        roi_superior=_bar_roi(width, height, *sup, angle_superior, bar_length,
                              bar_thickness, roi_margin),
        roi_inferior=_bar_roi(width, height, *inf, angle_inferior, bar_length,
                              bar_thickness, roi_margin),
        angle_superior=angle_superior,
        angle_inferior=angle_inferior,
    )


def severity_group_cases() -> list[tuple[float, float]]:
    """Twenty (superior, inferior) slope pairs spanning the four Cobb groups.

    Cobb targets: five each in <10, 10-25, 25-40, >40 degrees, split into
    clinically plausible per-bar slopes (at most 30 degrees each).
    """
    return [
        # G1 (< 10)
        (1.0, -3.0), (3.0, -3.0), (5.0, -2.0), (3.0, -5.0), (5.0, -4.0),
        # G2 (10 - 25)
        (5.0, -6.0), (7.0, -7.0), (10.0, -7.0), (9.0, -11.0), (12.0, -11.0),
        # G3 (25 - 40)
        (13.0, -13.0), (15.0, -14.0), (16.0, -16.0), (18.0, -17.0), (19.0, -19.0),
        # G4 (> 40)
        (28.0, -13.0), (29.0, -13.0), (28.0, -16.0), (29.0, -17.0), (30.0, -18.0),
    ]


def make_texture_phantom(width: int = 128, height: int = 128, seed: int = 0) -> GrayImage:
    """A denoising benchmark target: stacked tilted bars over a smooth ramp.

    Edge-rich like a spine radiograph crop, deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    yy = np.arange(height)[:, None] / max(height - 1, 1)
    px = (BACKGROUND_BASE + BACKGROUND_GRADIENT * yy) * np.ones((height, width))
    n_bars = 4
    for i in range(n_bars):
        cy = height * (i + 1) / (n_bars + 1)
        cx = width * 0.5 + rng.uniform(-0.06, 0.06) * width
        ang = rng.uniform(-18.0, 18.0)
        px = _paint_bar(px, cx, cy, ang, width * 0.45, height * 0.13)
    return GrayImage(np.clip(px, 0.0, 1.0))

"""End-to-end Cobb measurement from two user-selected vertebra regions.

Each region runs crop -> denoise -> equalize -> edge detect -> dominant-line
search independently; the Cobb angle is the absolute difference of the two
signed endplate slopes, which for opposite tilts equals the sum of their
magnitudes.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field

from .denoise import FILTERS, NlConfig
from .edges import CannyConfig, canny_otsu
from .enhance import histogram_equalize
from .imagecore import ROI_MIN_SIZE, GrayImage, Rect, crop_roi
from .lines import HoughConfig, LineRT, NoLineError, detect_endplate, line_slope_deg


class EndplateNotFoundError(RuntimeError):
    """Endplate detection failed in one region; .roi names which."""

    def __init__(self, roi: str):
        super().__init__(f"no endplate found ({roi})")
        self.roi = roi


@dataclass(frozen=True)
class PipelineConfig:
    nl: NlConfig = field(default_factory=NlConfig)
    canny: CannyConfig = field(default_factory=CannyConfig)
    hough: HoughConfig = field(default_factory=HoughConfig)
    denoiser: str = "nletm"

    def __post_init__(self):
        if self.denoiser not in FILTERS:
            raise ValueError(
                f"denoiser must be one of {sorted(FILTERS)}, got {self.denoiser!r}"
            )


@dataclass(frozen=True)
class Measurement:
    """The persisted clinical record of one Cobb measurement."""

    roi_superior: Rect
    roi_inferior: Rect
    line_superior: LineRT
    line_inferior: LineRT
    angle_superior: float
    angle_inferior: float
    cobb_deg: float
    timestamp: str
    image_id: str = ""
    observer_id: str = ""

    def to_json_dict(self) -> dict:
        """JSON record; angles in decimal degrees at two decimal places."""
        return {
            "image_id": self.image_id,
            "observer_id": self.observer_id,
            "timestamp": self.timestamp,
            "roi_superior": self.roi_superior.as_dict(),
            "roi_inferior": self.roi_inferior.as_dict(),
            "line_superior": _line_dict(self.line_superior),
            "line_inferior": _line_dict(self.line_inferior),
            "angle_superior": round(self.angle_superior, 2),
            "angle_inferior": round(self.angle_inferior, 2),
            "cobb_deg": round(self.cobb_deg, 2),
        }


def _line_dict(line: LineRT) -> dict:
    return {"rho": round(line.rho, 2), "theta": round(line.theta, 2), "votes": line.votes}


def combine_angles(a1: float, a2: float) -> float:
    """Cobb angle from two signed endplate slopes.

    For opposite tilts |a1 - a2| = |a1| + |a2|, the classical sum of the two
    extreme-vertebra angles; parallel endplates measure exactly 0.
    """
    if not (-90.0 < a1 < 90.0 and -90.0 < a2 < 90.0):
        raise ValueError(f"slopes must lie in (-90, 90), got {a1}, {a2}")
    return abs(a1 - a2)


def _endplate_slope(
    img: GrayImage, roi: Rect, cfg: PipelineConfig, label: str
) -> tuple[LineRT, float]:
    region = crop_roi(img, roi, min_size=ROI_MIN_SIZE)
    denoised = FILTERS[cfg.denoiser](region, cfg.nl)
    enhanced = histogram_equalize(denoised)
    edge_map = canny_otsu(enhanced, cfg.canny)
    try:
        line = detect_endplate(edge_map, cfg.hough)
    except NoLineError:
        raise EndplateNotFoundError(label) from None
    return line, line_slope_deg(line)


def measure_cobb(
    img: GrayImage,
    roi_sup: Rect,
    roi_inf: Rect,
    cfg: PipelineConfig | None = None,
    image_id: str = "",
    observer_id: str = "",
) -> Measurement:
    """Run the full measurement pipeline over both regions.

    Detected lines are in region-local coordinates; the Measurement keeps
    the ROIs so callers can translate them into full-image space.
    Deterministic: identical inputs give identical angles.
    """
    cfg = cfg or PipelineConfig()
    line_sup, angle_sup = _endplate_slope(img, roi_sup, cfg, "superior")
    line_inf, angle_inf = _endplate_slope(img, roi_inf, cfg, "inferior")
    return Measurement(
        roi_superior=roi_sup,
        roi_inferior=roi_inf,
        line_superior=line_sup,
        line_inferior=line_inf,
        angle_superior=angle_sup,
        angle_inferior=angle_inf,
        cobb_deg=combine_angles(angle_sup, angle_inf),
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        image_id=image_id,
        observer_id=observer_id,
    )

"""Straight-line detection over an edge map via rho-theta voting.

A line is x*cos(theta) + y*sin(theta) = rho with theta the normal angle
in degrees and (x, y) = (column, row). Vertebral endplates appear as the
dominant near-horizontal line, so the default theta band spans
[45, 135] degrees (lines within 45 degrees of horizontal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .edges import EdgeMap
from .imagecore import GrayImage
from .kernels import get_backend


class NoLineError(RuntimeError):
    """No line candidate received any vote."""


@dataclass(frozen=True)
class HoughConfig:
    rho_resolution: float = 1.0
    theta_resolution: float = 1.0
    theta_min: float = 45.0
    theta_max: float = 135.0

    def __post_init__(self):
        if self.rho_resolution <= 0 or self.theta_resolution <= 0:
            raise ValueError("rho_resolution and theta_resolution must be > 0")
        if self.theta_min >= self.theta_max:
            raise ValueError(
                f"theta_min {self.theta_min} must be < theta_max {self.theta_max}"
            )

    def theta_bins(self) -> np.ndarray:
        n = int(math.floor((self.theta_max - self.theta_min) / self.theta_resolution + 1e-9))
        return self.theta_min + self.theta_resolution * np.arange(n + 1)


@dataclass(frozen=True)
class LineRT:
    """A detected line: signed normal distance, normal angle, supporting votes."""

    rho: float
    theta: float
    votes: int


@dataclass(frozen=True)
class HoughAccumulator:
    """Vote grid over (rho, theta) bins plus the bin geometry."""

    votes: np.ndarray
    rho_resolution: float
    thetas: np.ndarray

    @property
    def n_half(self) -> int:
        return (self.votes.shape[0] - 1) // 2

    def rho_of(self, index: int) -> float:
        return (index - self.n_half) * self.rho_resolution

    def to_image(self) -> GrayImage:
        peak = self.votes.max()
        if peak == 0:
            return GrayImage(np.zeros_like(self.votes, dtype=np.float64))
        return GrayImage(self.votes / peak)


def hough_accumulate(
    edges: EdgeMap, cfg: HoughConfig, backend: str | None = None
) -> HoughAccumulator:
    """Vote each edge pixel into every theta bin at its rounded rho."""
    thetas = cfg.theta_bins()
    rad = np.deg2rad(thetas)
    diag = math.hypot(edges.width, edges.height)
    n_half = int(math.ceil(diag / cfg.rho_resolution))
    ys, xs = np.nonzero(edges.edges)
    votes = get_backend(backend).hough_votes(
        xs.astype(np.float64),
        ys.astype(np.float64),
        np.cos(rad),
        np.sin(rad),
        cfg.rho_resolution,
        n_half,
    )
    return HoughAccumulator(votes=votes, rho_resolution=cfg.rho_resolution, thetas=thetas)


def hough_peak(acc: HoughAccumulator, cfg: HoughConfig) -> LineRT:
    """Global maximum bin; ties go to the smaller theta bin, then smaller rho bin."""
    best = int(acc.votes.max())
    if best < 1:
        raise NoLineError("no line: accumulator has no votes")
    j, i = np.unravel_index(int(np.argmax(acc.votes.T)), acc.votes.T.shape)
    return LineRT(rho=acc.rho_of(int(i)), theta=float(acc.thetas[int(j)]), votes=best)


def detect_endplate(
    edges: EdgeMap, cfg: HoughConfig, backend: str | None = None
) -> LineRT:
    """Dominant line within the admissible theta band (the endplate candidate)."""
    try:
        return hough_peak(hough_accumulate(edges, cfg, backend=backend), cfg)
    except NoLineError:
        raise NoLineError("no endplate found") from None


def line_slope_deg(line: LineRT) -> float:
    """Inclination from horizontal in degrees; positive descends left to right."""
    return line.theta - 90.0

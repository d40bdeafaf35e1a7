"""Evaluation machinery: observer-variability tables and filter benchmarks.

Observer analysis summarizes repeated Cobb measurements as mean absolute
deviation (MAD), per image and then averaged per curve-severity group.
The filter benchmark scores each denoiser by mean PSNR against clean
images across seeded noise levels.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from io import StringIO

import numpy as np

from .denoise import FILTERS, NlConfig, h_for_sigma
from .imagecore import GrayImage, NoiseSpec, add_gaussian_noise, load_image, psnr

GROUPS = ("G1", "G2", "G3", "G4")
METHODS = ("manual", "digital")
OBSERVATIONS_HEADER = ["image_id", "observer_id", "session_id", "group", "method", "cobb_deg"]


def mad(values) -> float:
    """Mean absolute deviation from the arithmetic mean."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0:
        raise ValueError("mad of empty list")
    return float(np.abs(vals - vals.mean()).mean())


def group_of(cobb_deg: float) -> str:
    """Severity group by Cobb angle: <10, 10-25, 25-40, >40 degrees."""
    if cobb_deg < 10.0:
        return "G1"
    if cobb_deg < 25.0:
        return "G2"
    if cobb_deg < 40.0:
        return "G3"
    return "G4"


@dataclass(frozen=True)
class Observation:
    image_id: str
    observer_id: str
    session_id: str
    group: str
    method: str
    cobb_deg: float


@dataclass
class ObservationSet:
    records: list[Observation] = field(default_factory=list)

    def add(self, rec: Observation) -> None:
        if rec.group not in GROUPS:
            raise ValueError(f"unknown group {rec.group!r}")
        if rec.method not in METHODS:
            raise ValueError(f"unknown method {rec.method!r}")
        self.records.append(rec)

    @classmethod
    def from_csv(cls, text: str) -> "ObservationSet":
        reader = csv.DictReader(StringIO(text))
        missing = set(OBSERVATIONS_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"observations CSV missing columns: {sorted(missing)}")
        obs = cls()
        for row in reader:
            obs.add(
                Observation(
                    image_id=row["image_id"],
                    observer_id=row["observer_id"],
                    session_id=row["session_id"],
                    group=row["group"],
                    method=row["method"],
                    cobb_deg=float(row["cobb_deg"]),
                )
            )
        return obs

    def to_csv(self) -> str:
        buf = StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(OBSERVATIONS_HEADER)
        for r in self.records:
            writer.writerow(
                [r.image_id, r.observer_id, r.session_id, r.group, r.method,
                 f"{r.cobb_deg:.2f}"]
            )
        return buf.getvalue()


@dataclass
class VariabilityTable:
    """MAD cells keyed by (group, *by); `by` is (observer, method) or (method,)."""

    cells: dict[tuple, float]
    warnings: list[str] = field(default_factory=list)

    def method_cells(self) -> dict[str, list[float]]:
        out: dict[str, list[float]] = {}
        for key, value in self.cells.items():
            out.setdefault(key[-1], []).append(value)
        return out


def _session_means(records: list[Observation]) -> dict[str, float]:
    per_session: dict[str, list[float]] = {}
    for r in records:
        per_session.setdefault(r.session_id, []).append(r.cobb_deg)
    return {sid: float(np.mean(v)) for sid, v in per_session.items()}


def intra_observer_table(obs: ObservationSet) -> VariabilityTable:
    """Per-image MAD across an observer's sessions, averaged per group.

    Images with fewer than two sessions for an (observer, method) are
    skipped with a warning.
    """
    grouped: dict[tuple, dict[str, list[Observation]]] = {}
    for r in obs.records:
        grouped.setdefault((r.group, r.observer_id, r.method), {}).setdefault(
            r.image_id, []
        ).append(r)
    cells = {}
    warnings = []
    for key in sorted(grouped):
        image_mads = []
        for image_id in sorted(grouped[key]):
            sessions = _session_means(grouped[key][image_id])
            if len(sessions) < 2:
                warnings.append(
                    f"intra: image {image_id} has {len(sessions)} session(s) "
                    f"for observer {key[1]} ({key[2]}), skipped"
                )
                continue
            image_mads.append(mad(list(sessions.values())))
        if image_mads:
            cells[key] = float(np.mean(image_mads))
    return VariabilityTable(cells=cells, warnings=warnings)


def inter_observer_table(obs: ObservationSet) -> VariabilityTable:
    """Per-image MAD across observers' session-averaged values, per group."""
    grouped: dict[tuple, dict[str, dict[str, list[Observation]]]] = {}
    for r in obs.records:
        grouped.setdefault((r.group, r.method), {}).setdefault(
            r.image_id, {}
        ).setdefault(r.observer_id, []).append(r)
    cells = {}
    warnings = []
    for key in sorted(grouped):
        image_mads = []
        for image_id in sorted(grouped[key]):
            by_observer = grouped[key][image_id]
            if len(by_observer) < 2:
                warnings.append(
                    f"inter: image {image_id} has a single observer ({key[1]}), skipped"
                )
                continue
            observer_means = [
                float(np.mean(list(_session_means(recs).values())))
                for _, recs in sorted(by_observer.items())
            ]
            image_mads.append(mad(observer_means))
        if image_mads:
            cells[key] = float(np.mean(image_mads))
    return VariabilityTable(cells=cells, warnings=warnings)


@dataclass(frozen=True)
class Summary:
    means: dict[str, float]
    reductions: dict[str, dict[str, float]]


def summarize(table: VariabilityTable, comparisons: dict[str, dict[str, float]] | None = None) -> Summary:
    """Overall mean per method, plus percent reduction vs comparison values.

    Reduction = (other - ours) / other * 100.
    """
    if not table.cells:
        raise ValueError("empty table")
    means = {m: float(np.mean(v)) for m, v in table.method_cells().items()}
    reductions: dict[str, dict[str, float]] = {}
    for method, others in (comparisons or {}).items():
        if method not in means:
            continue
        reductions[method] = {
            label: (other - means[method]) / other * 100.0
            for label, other in others.items()
        }
    return Summary(means=means, reductions=reductions)


@dataclass(frozen=True)
class BenchmarkSpec:
    """PSNR benchmark over (image, sigma, filter) cells.

    Per cell, h follows the noise level as h_for_sigma(max(sigma, 1));
    seeds[i][j] seeds the noise of image i at sigmas[j]. The extra
    filter name "identity" scores the unfiltered noisy image.
    """

    clean_images: tuple[str, ...]
    sigmas: tuple[float, ...] = (10.0, 20.0, 30.0, 40.0, 50.0)
    filters: tuple[str, ...] = ("nlm", "nlem", "nletm")
    nl: NlConfig = field(default_factory=NlConfig)
    seeds: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if not self.clean_images or not self.sigmas or not self.filters:
            raise ValueError("clean_images, sigmas and filters must be nonempty")
        for name in self.filters:
            if name != "identity" and name not in FILTERS:
                raise ValueError(f"unknown filter {name!r}")

    def seed_for(self, image_index: int, sigma_index: int) -> int:
        if self.seeds is not None:
            return self.seeds[image_index][sigma_index]
        return 1000 * image_index + sigma_index


@dataclass
class BenchmarkResult:
    mean_psnr: dict[tuple[str, float], float]
    failures: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["filter", "sigma", "mean_psnr_db"])
        for (name, sigma) in sorted(self.mean_psnr):
            writer.writerow([name, f"{sigma:g}", f"{self.mean_psnr[(name, sigma)]:.2f}"])
        return buf.getvalue()


def psnr_benchmark(spec: BenchmarkSpec, images: list[GrayImage] | None = None) -> BenchmarkResult:
    """Mean PSNR per (filter, sigma) over the image bank.

    `images` bypasses file loading (benchmarks on in-memory phantoms);
    otherwise spec.clean_images paths load from disk. Unloadable images
    mark their cells failed and the run continues.
    """
    if images is None:
        images = []
        loadable: list[int] = []
        failures = []
        for i, path in enumerate(spec.clean_images):
            try:
                images.append(load_image(path))
                loadable.append(i)
            except Exception as exc:
                failures.append(f"{path}: {exc}")
    else:
        loadable = list(range(len(images)))
        failures = []

    scores: dict[tuple[str, float], list[float]] = {}
    for idx, clean in zip(loadable, images):
        for j, sigma in enumerate(spec.sigmas):
            noisy = add_gaussian_noise(clean, NoiseSpec(sigma=sigma, seed=spec.seed_for(idx, j)))
            cfg = NlConfig(
                patch_radius=spec.nl.patch_radius,
                search_radius=spec.nl.search_radius,
                h=h_for_sigma(max(sigma, 1.0)),
                trim_fraction=spec.nl.trim_fraction,
                median_tol=spec.nl.median_tol,
                median_max_iter=spec.nl.median_max_iter,
            )
            for name in spec.filters:
                restored = noisy if name == "identity" else FILTERS[name](noisy, cfg)
                scores.setdefault((name, sigma), []).append(psnr(clean, restored))
    mean_psnr = {}
    for key, vals in scores.items():
        mean_psnr[key] = math.inf if any(math.isinf(v) for v in vals) else float(np.mean(vals))
    return BenchmarkResult(mean_psnr=mean_psnr, failures=failures)

"""Cobb angle measurement from spine radiographs.

Pipeline per user-selected vertebra region: non-local denoising,
histogram equalization, automatically thresholded Canny edges, then
dominant-line search for the endplate slope. The Cobb angle combines
the two slopes. Includes PSNR filter benchmarking and observer
variability (MAD) analysis.
"""

from .cobb import (
    EndplateNotFoundError,
    Measurement,
    PipelineConfig,
    combine_angles,
    measure_cobb,
)
from .denoise import NlConfig, h_for_sigma, nlem, nletm, nlm, trimmed_mean
from .edges import CannyConfig, EdgeMap, canny, canny_otsu, otsu_threshold
from .enhance import histogram, histogram_equalize
from .imagecore import (
    GrayImage,
    ImageFormatError,
    NoiseSpec,
    Rect,
    add_gaussian_noise,
    crop_roi,
    load_image,
    psnr,
    save_image,
)
from .kernels import active_backend
from .lines import (
    HoughConfig,
    LineRT,
    NoLineError,
    detect_endplate,
    hough_accumulate,
    hough_peak,
    line_slope_deg,
)
from .reliability import (
    BenchmarkSpec,
    ObservationSet,
    inter_observer_table,
    intra_observer_table,
    mad,
    psnr_benchmark,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkSpec",
    "CannyConfig",
    "EdgeMap",
    "EndplateNotFoundError",
    "GrayImage",
    "HoughConfig",
    "ImageFormatError",
    "LineRT",
    "Measurement",
    "NlConfig",
    "NoLineError",
    "NoiseSpec",
    "ObservationSet",
    "PipelineConfig",
    "Rect",
    "active_backend",
    "add_gaussian_noise",
    "canny",
    "canny_otsu",
    "combine_angles",
    "crop_roi",
    "detect_endplate",
    "h_for_sigma",
    "histogram",
    "histogram_equalize",
    "hough_accumulate",
    "hough_peak",
    "inter_observer_table",
    "intra_observer_table",
    "line_slope_deg",
    "load_image",
    "mad",
    "measure_cobb",
    "nlem",
    "nletm",
    "nlm",
    "otsu_threshold",
    "psnr",
    "psnr_benchmark",
    "save_image",
    "summarize",
    "trimmed_mean",
]

"""Grayscale image values, file I/O, ROI cropping, noise injection and PSNR.

Images are immutable: pixel data is a read-only float64 array with
intensities in [0, 1]. 8-bit files map level k to k/255 on load and
intensities quantize back to round(v*255) on save.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from io import BytesIO

import numpy as np

ROI_MIN_SIZE = 16


class ImageFormatError(ValueError):
    """Raised for unreadable or unsupported image files."""


@dataclass(frozen=True)
class GrayImage:
    """A normalized grayscale raster; pixels[row, col] in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.float64, copy=True)
        if px.ndim != 2:
            raise ValueError(f"pixels must be 2-D, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"zero-dimension image: {px.shape}")
        if not np.isfinite(px).all():
            raise ValueError("pixel intensities must be finite")
        lo, hi = float(px.min()), float(px.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"intensities outside [0, 1]: min={lo}, max={hi}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in pixel coordinates (top-left corner + extent)."""

    x: int
    y: int
    w: int
    h: int

    def validate(self, img: GrayImage, min_size: int = 1) -> None:
        if self.w < min_size or self.h < min_size:
            raise ValueError(
                f"roi below minimum size: {self.w}x{self.h} (min {min_size}x{min_size})"
            )
        if self.x < 0 or self.y < 0:
            raise ValueError(f"roi out of bounds: negative origin ({self.x}, {self.y})")
        if self.x + self.w > img.width or self.y + self.h > img.height:
            raise ValueError(
                f"roi out of bounds: ({self.x}+{self.w}, {self.y}+{self.h}) "
                f"exceeds {img.width}x{img.height}"
            )

    def as_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian noise: sigma in 8-bit units, seeded for reproducibility."""

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


def _parse_pgm(data: bytes) -> np.ndarray:
    # Binary P5 with optional '#' comments in the header.
    if not data.startswith(b"P5"):
        raise ImageFormatError("unreadable file: not a binary PGM (P5)")
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(data):
            raise ImageFormatError("unreadable file: truncated PGM header")
        ch = data[pos : pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise ImageFormatError("unreadable file: truncated PGM header")
            pos = nl + 1
        elif ch.isspace():
            pos += 1
        else:
            m = re.match(rb"\d+", data[pos:])
            if not m:
                raise ImageFormatError("unreadable file: bad PGM header token")
            fields.append(int(m.group()))
            pos += m.end()
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise ImageFormatError("unreadable file: bad PGM header")
    pos += 1
    width, height, maxval = fields
    if maxval != 255:
        raise ImageFormatError(f"unsupported bit depth: PGM maxval {maxval}")
    if width < 1 or height < 1:
        raise ImageFormatError(f"zero-dimension image: {width}x{height}")
    raw = data[pos : pos + width * height]
    if len(raw) != width * height:
        raise ImageFormatError("unreadable file: truncated PGM pixel data")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width)


def _load_png(data: bytes) -> np.ndarray:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(BytesIO(data)) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                arr = np.asarray(im, dtype=np.float64)
            elif mode == "RGB":
                arr = np.asarray(im, dtype=np.float64).mean(axis=2)
            elif mode in ("I", "I;16", "I;16B", "F"):
                raise ImageFormatError(f"unsupported bit depth: PNG mode {mode}")
            else:
                raise ImageFormatError(f"unsupported PNG mode {mode}")
    except UnidentifiedImageError as exc:
        raise ImageFormatError("unreadable file: not a valid PNG") from exc
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ImageFormatError(f"zero-dimension image: {arr.shape}")
    return arr


def image_from_bytes(data: bytes) -> GrayImage:
    """Decode PGM (P5) or PNG bytes into a GrayImage."""
    if data.startswith(b"P5"):
        levels = _parse_pgm(data).astype(np.float64)
    elif data.startswith(b"\x89PNG"):
        levels = _load_png(data)
    else:
        raise ImageFormatError("unreadable file: unknown format (want PGM P5 or PNG)")
    return GrayImage(levels / 255.0)


def load_image(path: str | os.PathLike) -> GrayImage:
    """Load an 8-bit grayscale PGM (P5) or PNG; RGB PNG averages channels."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ImageFormatError(f"unreadable file: {path}: {exc}") from exc
    return image_from_bytes(data)


def to_levels(img: GrayImage) -> np.ndarray:
    """Quantize intensities to 8-bit levels round(v*255), ties to even."""
    return np.rint(img.pixels * 255.0).astype(np.uint8)


def image_to_bytes(img: GrayImage, fmt: str) -> bytes:
    levels = to_levels(img)
    if fmt == "pgm":
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        return header + levels.tobytes()
    if fmt == "png":
        from PIL import Image

        buf = BytesIO()
        Image.fromarray(levels, mode="L").save(buf, format="PNG")
        return buf.getvalue()
    raise ImageFormatError(f"unsupported save format: {fmt}")


def save_image(img: GrayImage, path: str | os.PathLike) -> None:
    """Write as PGM or PNG; the file extension selects the format."""
    ext = os.path.splitext(os.fspath(path))[1].lower().lstrip(".")
    if ext not in ("pgm", "png"):
        raise ImageFormatError(f"unsupported save format: .{ext} (want .pgm or .png)")
    data = image_to_bytes(img, ext)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise ImageFormatError(f"unwritable path: {path}: {exc}") from exc


def crop_roi(img: GrayImage, roi: Rect, min_size: int = 1) -> GrayImage:
    """Extract the sub-image under roi. Measurement ROIs use min_size=ROI_MIN_SIZE."""
    roi.validate(img, min_size=min_size)
    return GrayImage(img.pixels[roi.y : roi.y + roi.h, roi.x : roi.x + roi.w])


def add_gaussian_noise(img: GrayImage, spec: NoiseSpec) -> GrayImage:
    """Add N(0, (sigma/255)^2) noise, clamped to [0, 1]; same seed, same output."""
    if spec.sigma == 0:
        return img
    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(0.0, spec.sigma / 255.0, size=img.pixels.shape)
    return GrayImage(np.clip(img.pixels + noise, 0.0, 1.0))


def psnr(reference: GrayImage, test: GrayImage) -> float:
    """Peak signal-to-noise ratio in dB over 8-bit-scaled values; inf when equal."""
    if reference.pixels.shape != test.pixels.shape:
        raise ValueError(
            f"dimension mismatch: {reference.pixels.shape} vs {test.pixels.shape}"
        )
    diff = (reference.pixels - test.pixels) * 255.0
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)

"""Image pipeline: Gaussian denoising, HSV conversion, background masking,
resizing, normalization, and seeded augmentation.

Every operation is a pure function over immutable inputs. Images travel as
:class:`RasterImage`, a height x width x channels array with an explicit
color-space tag:

``RGB8``
    uint8 values in [0, 255].
``HSV``
    float64; hue in degrees [0, 360), saturation and value in [0, 1].
``FLOAT01``
    float64 values in [0, 1], what the classifier consumes.

The resize convention is bilinear with half-pixel centers and no corner
alignment (an exact 2x downscale therefore averages each 2x2 block).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import ColorSpaceError, ConfigError, ShapeError

RGB8 = "RGB8"
HSV = "HSV"
FLOAT01 = "FLOAT01"

_COLOR_SPACES = (RGB8, HSV, FLOAT01)


@dataclass(frozen=True)
class RasterImage:
    """Pixel grid with an explicit color-space tag.

    ``pixels`` is always a 3-D array shaped (height, width, channels) with
    channels 1 or 3. Value ranges are validated against ``color_space`` at
    construction time, so a RasterImage in hand is always well formed.
    ``meta`` carries optional provenance (e.g. the synthetic generator's
    ground-truth bean fraction) and never participates in equality.
    """

    pixels: np.ndarray
    color_space: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        px = self.pixels
        if not isinstance(px, np.ndarray) or px.ndim != 3:
            raise ShapeError("pixels must be a (height, width, channels) array")
        h, w, c = px.shape
        if h <= 0 or w <= 0:
            raise ShapeError(f"image dimensions must be positive, got {h}x{w}")
        if c not in (1, 3):
            raise ShapeError(f"channels must be 1 or 3, got {c}")
        if self.color_space not in _COLOR_SPACES:
            raise ColorSpaceError(f"unknown color space {self.color_space!r}")
        if self.color_space == RGB8:
            if px.dtype != np.uint8:
                raise ColorSpaceError("RGB8 images must be uint8")
        elif self.color_space == HSV:
            if c != 3:
                raise ShapeError("HSV images must have 3 channels")
            if not np.issubdtype(px.dtype, np.floating):
                raise ColorSpaceError("HSV images must be floating point")
            hch, sch, vch = px[..., 0], px[..., 1], px[..., 2]
            if hch.min() < 0 or hch.max() >= 360.0:
                raise ColorSpaceError("hue must lie in [0, 360)")
            if sch.min() < 0 or sch.max() > 1 or vch.min() < 0 or vch.max() > 1:
                raise ColorSpaceError("saturation/value must lie in [0, 1]")
        else:  # FLOAT01
            if not np.issubdtype(px.dtype, np.floating):
                raise ColorSpaceError("FLOAT01 images must be floating point")
            if px.min() < 0 or px.max() > 1:
                raise ColorSpaceError("FLOAT01 values must lie in [0, 1]")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def with_meta(self, **meta) -> "RasterImage":
        merged = dict(self.meta)
        merged.update(meta)
        return RasterImage(self.pixels, self.color_space, merged)


@dataclass(frozen=True)
class BooleanMask:
    """Per-pixel foreground flag; True keeps the pixel, False blacks it out."""

    bits: np.ndarray

    def __post_init__(self):
        if not isinstance(self.bits, np.ndarray) or self.bits.ndim != 2:
            raise ShapeError("mask bits must be a 2-D array")
        if self.bits.dtype != np.bool_:
            raise ShapeError("mask bits must be boolean")

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def foreground_fraction(self) -> float:
        return float(self.bits.mean())


@dataclass(frozen=True)
class PreprocessConfig:
    """Parameters of the deterministic preprocessing pipeline.

    HSV bounds select the foreground: a pixel survives when each component
    lies inside [lower, upper]. A hue lower bound above the upper bound
    selects the interval wrapping across 360 degrees. Defaults drop
    desaturated/dark pixels, i.e. white-lightbox or neutral backgrounds.
    """

    blur_kernel_size: int = 5
    blur_sigma: float = 1.0
    hsv_lower: tuple[float, float, float] = (0.0, 0.15, 0.10)
    hsv_upper: tuple[float, float, float] = (360.0, 1.0, 1.0)
    target_size: tuple[int, int] = (224, 224)  # (height, width)

    def __post_init__(self):
        k = self.blur_kernel_size
        if not isinstance(k, int) or k < 1 or k % 2 == 0:
            raise ConfigError(f"blur_kernel_size must be an odd integer >= 1, got {k}")
        if self.blur_sigma <= 0:
            raise ConfigError(f"blur_sigma must be positive, got {self.blur_sigma}")
        lo, hi = self.hsv_lower, self.hsv_upper
        if len(lo) != 3 or len(hi) != 3:
            raise ConfigError("hsv bounds must be (hue, saturation, value) triples")
        for name, (a, b) in (("saturation", (lo[1], hi[1])), ("value", (lo[2], hi[2]))):
            if not (0 <= a <= b <= 1):
                raise ConfigError(f"{name} bounds must satisfy 0 <= lower <= upper <= 1")
        if not (0 <= lo[0] <= 360 and 0 <= hi[0] <= 360):
            raise ConfigError("hue bounds must lie in [0, 360]")
        th, tw = self.target_size
        if th <= 0 or tw <= 0:
            raise ConfigError(f"target_size components must be positive, got {self.target_size}")

    def to_dict(self) -> dict:
        return {
            "blur_kernel_size": self.blur_kernel_size,
            "blur_sigma": self.blur_sigma,
            "hsv_lower": list(self.hsv_lower),
            "hsv_upper": list(self.hsv_upper),
            "target_size": list(self.target_size),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessConfig":
        return cls(
            blur_kernel_size=int(d["blur_kernel_size"]),
            blur_sigma=float(d["blur_sigma"]),
            hsv_lower=tuple(float(x) for x in d["hsv_lower"]),
            hsv_upper=tuple(float(x) for x in d["hsv_upper"]),
            target_size=tuple(int(x) for x in d["target_size"]),
        )

    def fingerprint(self) -> str:
        """Stable hash identifying this configuration; stored in model artifacts."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class AugmentConfig:
    """Stochastic training-time augmentation; all randomness comes from ``seed``."""

    rotation_range: float = 20.0  # degrees, draw from [-range, +range]
    zoom_range: float = 0.1      # draw zoom factor from [1-range, 1+range]
    shift_range: float = 0.1     # fraction of each dimension
    horizontal_flip: bool = True
    vertical_flip: bool = True
    seed: int = 0

    def __post_init__(self):
        if not (0 <= self.rotation_range <= 180):
            raise ConfigError(f"rotation_range must lie in [0, 180], got {self.rotation_range}")
        if not (0 <= self.zoom_range < 1):
            raise ConfigError(f"zoom_range must lie in [0, 1), got {self.zoom_range}")
        if not (0 <= self.shift_range <= 0.5):
            raise ConfigError(f"shift_range must lie in [0, 0.5], got {self.shift_range}")

    def to_dict(self) -> dict:
        return {
            "rotation_range": self.rotation_range,
            "zoom_range": self.zoom_range,
            "shift_range": self.shift_range,
            "horizontal_flip": self.horizontal_flip,
            "vertical_flip": self.vertical_flip,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentConfig":
        return cls(
            rotation_range=float(d["rotation_range"]),
            zoom_range=float(d["zoom_range"]),
            shift_range=float(d["shift_range"]),
            horizontal_flip=bool(d["horizontal_flip"]),
            vertical_flip=bool(d["vertical_flip"]),
            seed=int(d["seed"]),
        )

    def reseeded(self, seed: int) -> "AugmentConfig":
        return AugmentConfig(
            rotation_range=self.rotation_range,
            zoom_range=self.zoom_range,
            shift_range=self.shift_range,
            horizontal_flip=self.horizontal_flip,
            vertical_flip=self.vertical_flip,
            seed=seed,
        )


def save_config(config: PreprocessConfig | AugmentConfig, path: str | Path) -> None:
    """Write a config as a JSON document (schema documented in the README)."""
    kind = "preprocess" if isinstance(config, PreprocessConfig) else "augment"
    doc = {"kind": kind, **config.to_dict()}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_config(path: str | Path) -> PreprocessConfig | AugmentConfig:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    kind = doc.pop("kind", None)
    if kind == "preprocess":
        return PreprocessConfig.from_dict(doc)
    if kind == "augment":
        return AugmentConfig.from_dict(doc)
    raise ConfigError(f"unknown config kind {kind!r} in {path}")


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------

def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """Normalized 2-D Gaussian kernel, weights proportional to
    exp(-(dx^2 + dy^2) / (2 sigma^2)) and summing to 1."""
    if size < 1 or size % 2 == 0:
        raise ConfigError(f"kernel size must be an odd integer >= 1, got {size}")
    if sigma <= 0:
        raise ConfigError(f"sigma must be positive, got {sigma}")
    half = size // 2
    d = np.arange(-half, half + 1, dtype=np.float64)
    g1 = np.exp(-(d ** 2) / (2.0 * sigma ** 2))
    kernel = np.outer(g1, g1)
    return kernel / kernel.sum()


def blur_array(arr: np.ndarray, kernel_size: int, sigma: float) -> np.ndarray:
    """Convolve each channel with a normalized Gaussian, edge-replicated borders.

    Float in, float out; quantization is left to the caller.
    """
    kernel = gaussian_kernel(kernel_size, sigma)
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 2:
        return ndimage.convolve(arr, kernel, mode="nearest")
    return ndimage.convolve(arr, kernel[:, :, None], mode="nearest")


def gaussian_blur(img: RasterImage, config: PreprocessConfig) -> RasterImage:
    """Denoise an RGB8 image with a normalized Gaussian kernel."""
    _require_space(img, RGB8, "gaussian_blur")
    out = blur_array(img.pixels, config.blur_kernel_size, config.blur_sigma)
    out = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return RasterImage(out, RGB8, dict(img.meta))


def rgb_to_hsv(img: RasterImage) -> RasterImage:
    """Standard hexcone conversion; hue in degrees [0, 360), S and V in [0, 1]."""
    _require_space(img, RGB8, "rgb_to_hsv")
    if img.channels != 3:
        raise ShapeError("rgb_to_hsv requires a 3-channel image")
    rgb = img.pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = np.max(rgb, axis=-1)
    minc = np.min(rgb, axis=-1)
    delta = maxc - minc

    v = maxc
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)

    # Hue sector formula; achromatic pixels get hue 0 by convention.
    safe = np.where(delta > 0, delta, 1.0)
    h = np.zeros_like(maxc)
    is_r = (maxc == r) & (delta > 0)
    is_g = (maxc == g) & (delta > 0) & ~is_r
    is_b = (delta > 0) & ~is_r & ~is_g
    h = np.where(is_r, ((g - b) / safe) % 6.0, h)
    h = np.where(is_g, (b - r) / safe + 2.0, h)
    h = np.where(is_b, (r - g) / safe + 4.0, h)
    h = (h * 60.0) % 360.0

    out = np.stack([h, s, v], axis=-1)
    return RasterImage(out, HSV, dict(img.meta))


def compute_mask(img: RasterImage, config: PreprocessConfig) -> BooleanMask:
    """Foreground mask: True where every HSV component lies inside the bounds.

    A hue lower bound above the upper bound selects the wrapped interval,
    so red-brown hues straddling 0 degrees can be kept with e.g. (340, 20).
    """
    _require_space(img, HSV, "compute_mask")
    h, s, v = img.pixels[..., 0], img.pixels[..., 1], img.pixels[..., 2]
    lo, hi = config.hsv_lower, config.hsv_upper
    if lo[0] <= hi[0]:
        in_h = (h >= lo[0]) & (h <= hi[0])
    else:
        in_h = (h >= lo[0]) | (h <= hi[0])
    bits = in_h & (s >= lo[1]) & (s <= hi[1]) & (v >= lo[2]) & (v <= hi[2])
    return BooleanMask(bits)


def apply_mask(img: RasterImage, mask: BooleanMask) -> RasterImage:
    """Keep foreground pixels, set background pixels to zero."""
    if (img.height, img.width) != (mask.height, mask.width):
        raise ShapeError(
            f"mask {mask.height}x{mask.width} does not match image {img.height}x{img.width}"
        )
    out = np.where(mask.bits[..., None], img.pixels, np.zeros((), dtype=img.pixels.dtype))
    return RasterImage(out, img.color_space, dict(img.meta))


def normalize(img: RasterImage) -> RasterImage:
    """Map RGB8 values [0, 255] to FLOAT01 values [0, 1]."""
    _require_space(img, RGB8, "normalize")
    return RasterImage(img.pixels.astype(np.float64) / 255.0, FLOAT01, dict(img.meta))


def resize(img: RasterImage, target_size: tuple[int, int]) -> RasterImage:
    """Bilinear resize to (height, width) with half-pixel centers; color space kept."""
    th, tw = int(target_size[0]), int(target_size[1])
    if th <= 0 or tw <= 0:
        raise ConfigError(f"target size must be positive, got {target_size}")
    if (th, tw) == (img.height, img.width):
        return RasterImage(img.pixels.copy(), img.color_space, dict(img.meta))

    out = _bilinear_resize(img.pixels.astype(np.float64), th, tw)
    if img.color_space == RGB8:
        out = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    elif img.color_space == FLOAT01:
        out = np.clip(out, 0.0, 1.0)
    else:  # HSV: componentwise interpolation, clamped to valid ranges
        out[..., 0] = np.clip(out[..., 0], 0.0, np.nextafter(360.0, 0.0))
        out[..., 1:] = np.clip(out[..., 1:], 0.0, 1.0)
    return RasterImage(out, img.color_space, dict(img.meta))


def _bilinear_resize(px: np.ndarray, th: int, tw: int) -> np.ndarray:
    ih, iw = px.shape[:2]
    ys = np.clip((np.arange(th, dtype=np.float64) + 0.5) * ih / th - 0.5, 0, ih - 1)
    xs = np.clip((np.arange(tw, dtype=np.float64) + 0.5) * iw / tw - 0.5, 0, iw - 1)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, ih - 1)
    x1 = np.minimum(x0 + 1, iw - 1)
    wy = (ys - y0)[:, None, None]
    wx = (xs - x0)[None, :, None]
    top = px[y0[:, None], x0[None, :]] * (1 - wx) + px[y0[:, None], x1[None, :]] * wx
    bot = px[y1[:, None], x0[None, :]] * (1 - wx) + px[y1[:, None], x1[None, :]] * wx
    return top * (1 - wy) + bot * wy


def augment(img: RasterImage, config: AugmentConfig) -> RasterImage:
    """Random rotation/zoom/shift/flip, deterministic for a fixed seed.

    Draw order is fixed: rotation angle, zoom factor, x shift, y shift, then
    one Bernoulli(1/2) per enabled flip. Out-of-frame pixels are filled with 0.
    """
    _require_space(img, FLOAT01, "augment")
    rng = np.random.default_rng(config.seed)
    angle = np.deg2rad(rng.uniform(-config.rotation_range, config.rotation_range))
    zoom = rng.uniform(1.0 - config.zoom_range, 1.0 + config.zoom_range)
    tx = rng.uniform(-config.shift_range, config.shift_range) * img.width
    ty = rng.uniform(-config.shift_range, config.shift_range) * img.height
    flip_h = bool(rng.integers(0, 2)) if config.horizontal_flip else False
    flip_v = bool(rng.integers(0, 2)) if config.vertical_flip else False

    # Forward map: flip . rotate . zoom about the image center, then shift.
    c, s = np.cos(angle), np.sin(angle)
    fwd = np.array([[c, -s], [s, c]]) * zoom
    if flip_h:
        fwd = np.diag([-1.0, 1.0]) @ fwd
    if flip_v:
        fwd = np.diag([1.0, -1.0]) @ fwd
    inv = np.linalg.inv(fwd)

    cx, cy = (img.width - 1) / 2.0, (img.height - 1) / 2.0
    xs_out, ys_out = np.meshgrid(np.arange(img.width), np.arange(img.height))
    dx = xs_out - cx - tx
    dy = ys_out - cy - ty
    src_x = inv[0, 0] * dx + inv[0, 1] * dy + cx
    src_y = inv[1, 0] * dx + inv[1, 1] * dy + cy

    out = _bilinear_sample_zero(img.pixels, src_y, src_x)
    return RasterImage(np.clip(out, 0.0, 1.0), FLOAT01, dict(img.meta))


def _bilinear_sample_zero(px: np.ndarray, src_y: np.ndarray, src_x: np.ndarray) -> np.ndarray:
    """Bilinear sampling at fractional coordinates; outside pixels contribute 0."""
    ih, iw = px.shape[:2]
    y0 = np.floor(src_y).astype(np.intp)
    x0 = np.floor(src_x).astype(np.intp)
    y1, x1 = y0 + 1, x0 + 1
    wy = (src_y - y0)[..., None]
    wx = (src_x - x0)[..., None]

    def fetch(yi, xi):
        valid = (yi >= 0) & (yi < ih) & (xi >= 0) & (xi < iw)
        vals = px[np.clip(yi, 0, ih - 1), np.clip(xi, 0, iw - 1)]
        return np.where(valid[..., None], vals, 0.0)

    top = fetch(y0, x0) * (1 - wx) + fetch(y0, x1) * wx
    bot = fetch(y1, x0) * (1 - wx) + fetch(y1, x1) * wx
    return top * (1 - wy) + bot * wy


def preprocess(img: RasterImage, config: PreprocessConfig) -> RasterImage:
    """Full pipeline: blur -> HSV -> mask -> background removal -> resize -> [0,1].

    The mask is computed on the blurred image and applied to the blurred RGB
    pixels; the result is what the classifier consumes.
    """
    _require_space(img, RGB8, "preprocess")
    blurred = gaussian_blur(img, config)
    mask = compute_mask(rgb_to_hsv(blurred), config)
    masked = apply_mask(blurred, mask)
    resized = resize(masked, config.target_size)
    return normalize(resized)


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

def read_image(path: str | Path) -> RasterImage:
    """Read a PNG or JPEG file as an RGB8 image."""
    with Image.open(path) as im:
        rgb = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return RasterImage(rgb, RGB8, {"source": str(path)})


def write_image(img: RasterImage, path: str | Path) -> None:
    """Write an image as PNG or JPEG, chosen by the file suffix."""
    if img.color_space == RGB8:
        arr = img.pixels
    elif img.color_space == FLOAT01:
        arr = np.clip(np.rint(img.pixels * 255.0), 0, 255).astype(np.uint8)
    else:
        raise ColorSpaceError("only RGB8 and FLOAT01 images can be written to disk")
    if arr.shape[2] == 1:
        arr = arr[..., 0]
    Image.fromarray(arr).save(path)


def mask_to_image(mask: BooleanMask) -> RasterImage:
    """Render a mask as a black/white RGB8 image (useful for previews)."""
    gray = np.where(mask.bits, 255, 0).astype(np.uint8)
    return RasterImage(np.repeat(gray[..., None], 3, axis=2), RGB8)


def _require_space(img: RasterImage, space: str, op: str) -> None:
    if img.color_space != space:
        raise ColorSpaceError(f"{op} requires a {space} image, got {img.color_space}")

"""Grayscale image handling: PGM I/O, grayscale conversion, resizing and
conversion to CNN input tensors."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .labels import ClassLabel

INPUT_SIZE = 128


class PGMError(ValueError):
    """Base class for PGM decoding errors."""


class PGMHeaderError(PGMError):
    pass


class PGMMaxvalError(PGMError):
    pass


class PGMTruncatedError(PGMError):
    pass


@dataclass(eq=False)
class GrayImage:
    """8-bit single channel image stored as a (height, width) uint8 array."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"GrayImage needs a nonempty 2-D array, got shape {data.shape}")
        if data.dtype != np.uint8:
            if np.issubdtype(data.dtype, np.floating) and not np.all(np.isfinite(data)):
                raise ValueError("GrayImage intensities must be finite")
            if data.min() < 0 or data.max() > 255:
                raise ValueError("GrayImage intensities must lie in [0, 255]")
            data = data.astype(np.uint8)
        self.data = np.ascontiguousarray(data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.data.shape == other.data.shape and np.array_equal(self.data, other.data)


@dataclass(eq=False)
class RgbImage:
    """8-bit interleaved RGB image stored as a (height, width, 3) uint8 array."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3 or data.shape[2] != 3 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"RgbImage needs a (h, w, 3) array, got shape {data.shape}")
        self.data = np.ascontiguousarray(data, dtype=np.uint8)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def load_pgm(raw: bytes) -> GrayImage:
    """Decode a binary (P5) portable graymap with maxval <= 255."""
    pos = 0
    tokens = []
    for _ in range(4):
        m = _TOKEN.match(raw, pos)
        if m is None:
            raise PGMHeaderError("incomplete PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b"P5":
        raise PGMHeaderError(f"not a binary PGM (magic {tokens[0][:8]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise PGMHeaderError("non-integer PGM header field") from None
    if width < 1 or height < 1:
        raise PGMHeaderError(f"invalid PGM dimensions {width}x{height}")
    if maxval < 1:
        raise PGMHeaderError(f"invalid maxval {maxval}")
    if maxval > 255:
        raise PGMMaxvalError(f"maxval {maxval} > 255 is not supported")
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(raw):
        raise PGMTruncatedError("PGM payload missing")
    if raw[pos:pos + 1] not in (b" ", b"\t", b"\n", b"\r", b"\v", b"\f"):
        raise PGMHeaderError("missing whitespace after PGM header")
    pos += 1
    n = width * height
    payload = raw[pos:pos + n]
    if len(payload) < n:
        raise PGMTruncatedError(f"PGM payload has {len(payload)} of {n} bytes")
    data = np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()
    if np.any(data > maxval):
        raise PGMHeaderError("pixel value exceeds maxval")
    return GrayImage(data)


def save_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.data.tobytes()


def read_pgm(path) -> GrayImage:
    return load_pgm(Path(path).read_bytes())


def write_pgm(path, img: GrayImage) -> None:
    Path(path).write_bytes(save_pgm(img))


def rgb_to_gray(img: RgbImage) -> GrayImage:
    """BT.601 luma, rounded half-to-even and clamped to [0, 255]."""
    rgb = img.data.astype(np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return GrayImage(np.clip(np.rint(y), 0, 255).astype(np.uint8))


def _sample_coords(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    scale = n_in / n_out
    src = (np.arange(n_out) + 0.5) * scale - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    lo = np.floor(src).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, src - lo


def resize_bilinear(img: GrayImage, out_w: int, out_h: int) -> GrayImage:
    """Bilinear resize with pixel-center alignment and edge clamping."""
    if out_w < 1 or out_h < 1:
        raise ValueError(f"output size must be positive, got {out_w}x{out_h}")
    if (out_w, out_h) == (img.width, img.height):
        return GrayImage(img.data.copy())
    src = img.data.astype(np.float64)
    x0, x1, fx = _sample_coords(img.width, out_w)
    y0, y1, fy = _sample_coords(img.height, out_h)
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy)[:, None] + bottom * fy[:, None]
    return GrayImage(np.clip(np.rint(out), 0, 255).astype(np.uint8))


def downsample_sequence(frame_count: int, src_fps: float, dst_fps: float) -> list[int]:
    """Indices of the frames kept when reducing a src_fps stream to dst_fps.

    Frame 0 is always kept; later picks are the nearest source frame to each
    destination timestamp.
    """
    if dst_fps <= 0 or src_fps <= 0:
        raise ValueError("frame rates must be positive")
    if dst_fps > src_fps:
        raise ValueError(f"dst_fps {dst_fps} exceeds src_fps {src_fps}")
    ratio = src_fps / dst_fps
    out: list[int] = []
    k = 0
    while True:
        idx = int(round(k * ratio))
        if idx >= frame_count:
            break
        if not out or idx > out[-1]:
            out.append(idx)
        k += 1
    return out


def to_input_tensor(img: GrayImage, dtype=np.float64) -> np.ndarray:
    """Scale a 128x128 image to a (128, 128, 1) tensor in [0, 1]."""
    if img.data.shape != (INPUT_SIZE, INPUT_SIZE):
        raise ValueError(f"expected a {INPUT_SIZE}x{INPUT_SIZE} image, got {img.width}x{img.height}")
    return (img.data.astype(dtype) / 255.0)[:, :, None]


def preprocess(img, size: int = INPUT_SIZE) -> GrayImage:
    """Bring an arbitrary camera frame to the classifier input format.

    Color frames are converted to gray first, then resized.
    """
    if isinstance(img, RgbImage):
        img = rgb_to_gray(img)
    elif not isinstance(img, GrayImage):
        arr = np.asarray(img)
        img = rgb_to_gray(RgbImage(arr)) if arr.ndim == 3 else GrayImage(arr)
    if img.data.shape != (size, size):
        img = resize_bilinear(img, size, size)
    return img


LABEL_DIRS = {ClassLabel.LEFT: "left", ClassLabel.CENTER: "center", ClassLabel.RIGHT: "right"}


def load_dataset_dir(root) -> list[tuple[Path, GrayImage, ClassLabel]]:
    """Read ``<root>/{left,center,right}/*.pgm``; the directory name is the label.

    Files are returned sorted by label, then by name.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory {root} does not exist")
    items = []
    for label, name in LABEL_DIRS.items():
        for path in sorted((root / name).glob("*.pgm")):
            items.append((path, read_pgm(path), label))
    if not items:
        raise ValueError(f"no PGM images found under {root}/{{left,center,right}}")
    return items

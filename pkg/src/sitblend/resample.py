"""Image resampling with pinned-down index math.

Output pixel i samples source coordinate (i + 0.5) / scale - 0.5 per axis
(aligned pixel centers), where scale = out_len / in_len. Out-of-range taps
replicate the border pixel. Three kernels:

* nearest: floor(x + 0.5), i.e. halves always round up, never to even
* bilinear: 2-tap tent
* bicubic: 4-tap Catmull-Rom (a = -0.5), applied separably; values are
  clamped to [0, 255] only once at the end, so the overshoot of the cubic
  kernel is preserved between passes

Sizes derived from a factor use round-half-up as well.
"""

from __future__ import annotations

import numpy as np

from .errors import RasterError

METHODS = ("nearest", "bilinear", "bicubic")


def scaled_size(size: tuple, factor: float) -> tuple:
    """(w, h) scaled by factor, round-half-up, both dimensions >= 1."""
    if factor <= 0:
        raise RasterError(f"scale factor must be > 0, got {factor}")
    w = int(np.floor(size[0] * factor + 0.5))
    h = int(np.floor(size[1] * factor + 0.5))
    if w < 1 or h < 1:
        raise RasterError(f"factor {factor} collapses size {size} to {w}x{h}")
    return (w, h)


def resample(image: np.ndarray, factor: float, method: str = "bilinear") -> np.ndarray:
    h, w = np.asarray(image).shape[:2]
    return resample_to(image, scaled_size((w, h), factor), method)


def resample_to(image: np.ndarray, size: tuple, method: str = "bilinear") -> np.ndarray:
    """Resample to exact (width, height)."""
    if method not in METHODS:
        raise RasterError(f"unknown resample method {method!r} (one of {METHODS})")
    arr = np.asarray(image)
    if arr.ndim not in (2, 3):
        raise RasterError(f"expected 2-D or 3-D image, got shape {arr.shape}")
    out_w, out_h = int(size[0]), int(size[1])
    if out_w < 1 or out_h < 1:
        raise RasterError(f"target size must be positive, got {size}")

    was_uint8 = arr.dtype == np.uint8
    work = arr.astype(np.float64)
    work = _axis_resample(work, 0, out_h, method)
    work = _axis_resample(work, 1, out_w, method)
    if was_uint8:
        return np.round(np.clip(work, 0.0, 255.0)).astype(np.uint8)
    return work


def _axis_resample(arr: np.ndarray, axis: int, out_len: int, method: str) -> np.ndarray:
    in_len = arr.shape[axis]
    if in_len == out_len:
        return arr
    scale = out_len / in_len
    src = (np.arange(out_len, dtype=np.float64) + 0.5) / scale - 0.5

    if method == "nearest":
        idx = np.clip(np.floor(src + 0.5).astype(np.int64), 0, in_len - 1)
        return np.take(arr, idx, axis=axis)

    base = np.floor(src).astype(np.int64)
    t = src - base
    if method == "bilinear":
        taps = (base, base + 1)
        weights = (1.0 - t, t)
    else:
        taps = (base - 1, base, base + 1, base + 2)
        weights = _catmull_rom_weights(t)

    out = np.zeros(arr.shape[:axis] + (out_len,) + arr.shape[axis + 1:], dtype=np.float64)
    for idx, w in zip(taps, weights):
        gathered = np.take(arr, np.clip(idx, 0, in_len - 1), axis=axis)
        shape = [1] * arr.ndim
        shape[axis] = out_len
        out += gathered * w.reshape(shape)
    return out


def _catmull_rom_weights(t: np.ndarray):
    """Cubic convolution weights for taps at offsets -1, 0, 1, 2 (a = -0.5)."""
    a = -0.5
    t2 = t * t
    t3 = t2 * t
    w0 = a * (t3 - 2.0 * t2 + t)
    w1 = (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0
    w2 = -(a + 2.0) * t3 + (2.0 * a + 3.0) * t2 - a * t
    w3 = a * (t2 - t3)
    return (w0, w1, w2, w3)

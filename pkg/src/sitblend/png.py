"""PNG io with a byte-deterministic encoder.

Decoding goes through Pillow (it handles interlacing, palettes and ancillary
chunks), but encoding is done by hand: fixed chunk layout, filter type 0 on
every row, zlib level 6. Same pixels in, same bytes out, on every platform,
which is what manifest hashing needs.

Only 8-bit images are supported; a 16-bit file is rejected up front rather
than silently truncated.
"""

from __future__ import annotations

import io
import struct
import zlib

import numpy as np
from PIL import Image

from .errors import RasterError

_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# color type by channel count
_COLOR_TYPES = {1: 0, 3: 2, 4: 6}


def encode_png(image: np.ndarray) -> bytes:
    """Encode (H,W) gray, (H,W,3) RGB or (H,W,4) RGBA uint8 to PNG bytes."""
    arr = np.asarray(image)
    if arr.dtype != np.uint8:
        raise RasterError(f"encode_png needs uint8 pixels, got {arr.dtype}")
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in _COLOR_TYPES:
        raise RasterError(f"unsupported image shape {arr.shape}")
    h, w, channels = arr.shape
    if h == 0 or w == 0:
        raise RasterError("cannot encode an empty image")

    ihdr = struct.pack(">IIBBBBB", w, h, 8, _COLOR_TYPES[channels], 0, 0, 0)
    # filter byte 0 prepended to each row
    raw = np.empty((h, 1 + w * channels), dtype=np.uint8)
    raw[:, 0] = 0
    raw[:, 1:] = arr.reshape(h, w * channels)
    idat = zlib.compress(raw.tobytes(), 6)

    out = bytearray(_SIGNATURE)
    for tag, payload in ((b"IHDR", ihdr), (b"IDAT", idat), (b"IEND", b"")):
        out += struct.pack(">I", len(payload))
        out += tag
        out += payload
        out += struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    return bytes(out)


def decode_png(data: bytes, mode: str = "RGB") -> np.ndarray:
    """Decode PNG bytes to a uint8 array in ``mode`` ("RGB", "RGBA" or "L")."""
    if not data.startswith(_SIGNATURE) or len(data) < 33:
        raise RasterError("not a PNG file")
    bit_depth = data[24]
    if bit_depth > 8:
        raise RasterError(
            f"{bit_depth}-bit PNG not supported; re-export as 8-bit"
        )
    if mode not in ("RGB", "RGBA", "L"):
        raise RasterError(f"unsupported decode mode {mode!r}")
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except Exception as exc:
        raise RasterError(f"PNG decode failed: {exc}") from exc
    return np.asarray(img.convert(mode), dtype=np.uint8)


def write_png(path, image: np.ndarray) -> bytes:
    """Encode and write; returns the bytes so callers can hash them."""
    data = encode_png(image)
    with open(path, "wb") as fh:
        fh.write(data)
    return data


def read_png(path, mode: str = "RGB") -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_png(fh.read(), mode=mode)

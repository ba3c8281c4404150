"""Netpbm PPM (P3 ASCII / P6 binary) images with 8-bit channels."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np


class PpmError(ValueError):
    pass


@dataclass(frozen=True)
class PpmImage:
    """RGB raster, ``pixels`` of shape ``(height, width, 3)`` and dtype uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise PpmError(f"expected (H, W, 3) pixels, got shape {px.shape}")
        if px.dtype != np.uint8:
            if np.any(px < 0) or np.any(px > 255):
                raise PpmError("channel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def gray(cls, values) -> "PpmImage":
        v = np.clip(np.rint(np.asarray(values, dtype=float)), 0, 255).astype(np.uint8)
        return cls(np.repeat(v[:, :, None], 3, axis=2))


def _header_tokens(data: bytes, count: int):
    """First ``count`` whitespace-separated tokens, skipping '#' comments.

    Returns the tokens and the offset just past the single whitespace byte
    that ends the last one.
    """
    tokens, pos, n = [], 0, len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PpmError("truncated header")
        tokens.append(data[start:pos])
    if pos >= n and count > 1:
        raise PpmError("missing pixel data")
    return tokens, pos + 1


def decode_ppm(data: bytes) -> PpmImage:
    tokens, offset = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P3", b"P6"):
        raise PpmError(f"unsupported magic number {magic!r}")
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise PpmError("malformed header") from exc
    if w <= 0 or h <= 0:
        raise PpmError(f"bad image size {w}x{h}")
    if maxval != 255:
        raise PpmError(f"unsupported maxval {maxval}; only 255 is handled")
    count = w * h * 3
    if magic == b"P6":
        payload = data[offset:offset + count]
        if len(payload) < count:
            raise PpmError(f"truncated payload: {len(payload)} of {count} bytes")
        px = np.frombuffer(payload, dtype=np.uint8)
    else:
        words = data[offset - 1:].split()
        if len(words) < count:
            raise PpmError(f"truncated payload: {len(words)} of {count} values")
        try:
            vals = np.array([int(x) for x in words[:count]])
        except ValueError as exc:
            raise PpmError("non-numeric sample in P3 payload") from exc
        if vals.min() < 0 or vals.max() > 255:
            raise PpmError("sample outside [0, 255]")
        px = vals.astype(np.uint8)
    return PpmImage(px.reshape(h, w, 3).copy())


def encode_ppm(image: PpmImage, binary: bool = True) -> bytes:
    head = f"{'P6' if binary else 'P3'}\n{image.width} {image.height}\n255\n".encode()
    if binary:
        return head + image.pixels.tobytes()
    lines = [" ".join(str(int(v)) for v in row.ravel()) for row in image.pixels]
    return head + ("\n".join(lines) + "\n").encode()


def read_ppm(path) -> PpmImage:
    with open(path, "rb") as fh:
        return decode_ppm(fh.read())


def write_ppm(image: PpmImage, path, binary: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_ppm(image, binary))


def bundled_image_path() -> str:
    """Path of the 256x256 test image shipped with the package."""
    return os.path.join(os.path.dirname(os.path.dirname(__file__)), "data", "test256.ppm")


def synthetic_image(size: int = 256, seed: int = 7) -> PpmImage:
    """Deterministic test picture: smooth gradients, a disc, a square and a
    fine checkerboard patch, so projections have both smooth and sharp parts."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size] / (size - 1.0)
    r = 255 * (0.5 + 0.5 * np.sin(3.0 * x + 1.0) * np.cos(2.0 * y))
    g = 255 * x * (1 - y) + 60 * np.exp(-((x - 0.3) ** 2 + (y - 0.7) ** 2) / 0.02)
    b = 200 * (1 - x) * y + 40
    disc = (x - 0.65) ** 2 + (y - 0.35) ** 2 < 0.04
    r[disc], g[disc], b[disc] = 230, 40, 40
    square = (x > 0.1) & (x < 0.35) & (y > 0.1) & (y < 0.35)
    g[square], b[square] = 220, 220
    checker = ((np.floor(x * 32) + np.floor(y * 32)) % 2 == 0) & (x > 0.7) & (y > 0.7)
    r[checker] = g[checker] = b[checker] = 255
    noise = rng.integers(-6, 7, size=(size, size, 3))
    px = np.stack([r, g, b], axis=-1) + noise
    return PpmImage(np.clip(np.rint(px), 0, 255).astype(np.uint8))

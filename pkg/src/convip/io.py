"""Image and kernel file formats.

Images are plain PGM (P2 ASCII or P5 binary, maxval <= 255, pixels biased to
signed by subtracting 128) or CSV of signed integers, one image row per line.
Kernels are k*k whitespace- or comma-separated signed integers in row-major order.
"""
from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from .exceptions import ConvIPError, FileFormatError
from .golden import ImagePlane, Kernel

PGM_BIAS = 128


def _pgm_tokens(data: bytes, count: int):
    # header tokens, skipping '#' comments; returns tokens and offset after header
    tokens, pos = [], 0
    while len(tokens) < count:
        m = re.compile(rb"\s*(#[^\n]*\n\s*)*(\S+)").match(data, pos)
        if not m:
            raise FileFormatError("truncated PGM header")
        tokens.append(m.group(2))
        pos = m.end()
    return tokens, pos


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    (magic, w, h, maxval), pos = _pgm_tokens(data, 4)
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise FileFormatError(f"bad PGM header in {path}") from exc
    if maxval > 255 or w <= 0 or h <= 0:
        raise FileFormatError(f"unsupported PGM geometry {w}x{h} maxval {maxval}")
    if magic == b"P2":
        try:
            vals = [int(t) for t in data[pos:].split()]
        except ValueError as exc:
            raise FileFormatError(f"non-integer pixel in {path}") from exc
    elif magic == b"P5":
        raw = data[pos + 1:pos + 1 + w * h]
        vals = list(raw)
    else:
        raise FileFormatError(f"{path}: not a P2/P5 PGM (magic {magic!r})")
    if len(vals) != w * h:
        raise FileFormatError(f"{path}: expected {w * h} pixels, found {len(vals)}")
    arr = np.array(vals, dtype=np.int64).reshape(h, w)
    if arr.min() < 0 or arr.max() > maxval:
        raise FileFormatError(f"{path}: pixel outside [0, {maxval}]")
    return arr - PGM_BIAS


def read_csv_matrix(path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([int(t) for t in re.split(r"[,\s]+", line) if t])
        except ValueError as exc:
            raise FileFormatError(f"{path}: non-integer value in {line!r}") from exc
    if not rows or len({len(r) for r in rows}) != 1:
        raise FileFormatError(f"{path}: empty or ragged CSV")
    return np.array(rows, dtype=np.int64)


def read_image(path, bits: int = 8) -> ImagePlane:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            head = fh.read(2)
    except OSError as exc:
        raise FileFormatError(f"cannot read image {path}: {exc}") from exc
    arr = read_pgm(path) if head in (b"P2", b"P5") else read_csv_matrix(path)
    try:
        return ImagePlane(arr, bit_width=bits)
    except ConvIPError:
        raise
    except ValueError as exc:
        raise FileFormatError(str(exc)) from exc


def read_kernel(path, bits: int = 8) -> Kernel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileFormatError(f"cannot read kernel {path}: {exc}") from exc
    try:
        vals = [int(t) for t in re.split(r"[,\s]+", text.strip()) if t]
    except ValueError as exc:
        raise FileFormatError(f"{path}: non-integer coefficient") from exc
    k = math.isqrt(len(vals))
    if k == 0 or k * k != len(vals):
        raise FileFormatError(f"{path}: {len(vals)} coefficients is not a square kernel")
    return Kernel(np.array(vals, dtype=np.int64).reshape(k, k), bit_width=bits)


def write_pgm(path, values: np.ndarray):
    """Write signed 8-bit values as a biased P2 PGM."""
    h, w = values.shape
    body = "\n".join(" ".join(str(int(v) + PGM_BIAS) for v in row) for row in values)
    Path(path).write_text(f"P2\n{w} {h}\n255\n{body}\n")


def write_csv(path, values: np.ndarray):
    Path(path).write_text("\n".join(",".join(str(int(v)) for v in row) for row in values) + "\n")


def write_image(path, values: np.ndarray, bits: int):
    if Path(path).suffix.lower() == ".pgm" and bits == 8:
        write_pgm(path, values)
    else:
        write_csv(path, values)

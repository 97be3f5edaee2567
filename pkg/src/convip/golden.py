"""Reference 2-D convolution that every engine model must match bit for bit.

Semantics: valid padding, stride 1, cross-correlation (the kernel is not
flipped), exact integer accumulation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._validation import check_int_matrix
from .exceptions import DimensionError, WidthError
from .fixedpoint import accumulator_bits

MAX_OPERAND_BITS = 16


def _check_bits(bits: int) -> int:
    if not 2 <= bits <= MAX_OPERAND_BITS:
        raise WidthError(f"operand width must be in [2, {MAX_OPERAND_BITS}], got {bits}")
    return bits


@dataclass(frozen=True, eq=False)
class ImagePlane:
    """Row-major plane of signed raw pixel values, stored as ``(height, width)``."""

    pixels: np.ndarray
    bit_width: int = 8

    def __post_init__(self):
        _check_bits(self.bit_width)
        arr = check_int_matrix(self.pixels, self.bit_width, name="pixels")
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ImagePlane):
            return NotImplemented
        return self.bit_width == other.bit_width and np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Square coefficient matrix; ``flat`` is the serial load order."""

    coeffs: np.ndarray
    bit_width: int = 8

    def __post_init__(self):
        _check_bits(self.bit_width)
        arr = check_int_matrix(self.coeffs, self.bit_width, name="coeffs")
        if arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"kernel must be square, got {arr.shape}")
        object.__setattr__(self, "coeffs", arr)

    @property
    def k(self) -> int:
        return self.coeffs.shape[0]

    @property
    def flat(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.coeffs.ravel())

    def __eq__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        return self.bit_width == other.bit_width and np.array_equal(self.coeffs, other.coeffs)


@dataclass(frozen=True, eq=False)
class AccPlane:
    values: np.ndarray
    acc_bits: int

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, AccPlane):
            return NotImplemented
        return self.acc_bits == other.acc_bits and np.array_equal(self.values, other.values)


def _check_fits(img: ImagePlane, k: int):
    if img.width < k or img.height < k:
        raise DimensionError(f"{img.width}x{img.height} image is smaller than {k}x{k} kernel")


def output_shape(img: ImagePlane, k: int) -> tuple[int, int]:
    _check_fits(img, k)
    return img.height - k + 1, img.width - k + 1


def extract_windows(img: ImagePlane, k: int = 3) -> np.ndarray:
    """All k x k windows in output raster order, shape ``(n, k*k)``."""
    _check_fits(img, k)
    win = sliding_window_view(img.pixels, (k, k))
    return win.reshape(-1, k * k).copy()


def convolve_golden(img: ImagePlane, ker: Kernel) -> AccPlane:
    k = ker.k
    oh, ow = output_shape(img, k)
    win = sliding_window_view(img.pixels, (k, k))
    values = np.einsum("ijkl,kl->ij", win, ker.coeffs, dtype=np.int64)
    acc_bits = accumulator_bits(img.bit_width, ker.bit_width, k)
    return AccPlane(values.reshape(oh, ow), acc_bits)

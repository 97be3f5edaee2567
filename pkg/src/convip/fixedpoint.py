"""Signed two's-complement fixed-point scalars.

Every value is an integer ``raw`` interpreted as ``raw / 2**frac_bits``.
All functions are pure and operate on immutable values.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

from .exceptions import AccumulatorOverflowError, RangeError, WidthError

MAX_BITS = 32


class Rounding(enum.Enum):
    HALF_UP = "round-half-up"
    TRUNCATE = "truncate"


@dataclass(frozen=True)
class QFormat:
    """Signed fixed-point format with ``total_bits`` including the sign bit."""

    total_bits: int
    frac_bits: int = 0

    def __post_init__(self):
        if not 2 <= self.total_bits <= MAX_BITS:
            raise WidthError(f"total_bits must be in [2, {MAX_BITS}], got {self.total_bits}")
        if not 0 <= self.frac_bits < self.total_bits:
            raise WidthError(
                f"frac_bits must be in [0, {self.total_bits - 1}], got {self.frac_bits}"
            )

    @property
    def min_raw(self) -> int:
        return -(1 << (self.total_bits - 1))

    @property
    def max_raw(self) -> int:
        return (1 << (self.total_bits - 1)) - 1

    def contains(self, raw: int) -> bool:
        return self.min_raw <= raw <= self.max_raw

    def saturate(self, raw: int) -> int:
        return min(max(raw, self.min_raw), self.max_raw)

    def __str__(self):
        return f"Q{self.total_bits}.{self.frac_bits}"


Q8 = QFormat(8, 0)


@dataclass(frozen=True)
class FixedValue:
    raw: int
    format: QFormat = Q8

    def __post_init__(self):
        if not isinstance(self.raw, int):
            object.__setattr__(self, "raw", int(self.raw))
        if not self.format.contains(self.raw):
            raise RangeError(f"raw {self.raw} outside {self.format}")

    @property
    def total_bits(self) -> int:
        return self.format.total_bits

    @property
    def frac_bits(self) -> int:
        return self.format.frac_bits

    def to_fraction(self) -> Fraction:
        return Fraction(self.raw, 1 << self.frac_bits)

    def __float__(self):
        return self.raw / (1 << self.frac_bits)


def _round_shift(raw: int, shift: int, rounding: Rounding) -> int:
    # arithmetic right shift by ``shift`` bits with the requested rounding
    if shift <= 0:
        return raw << -shift
    if rounding is Rounding.HALF_UP:
        return (raw + (1 << (shift - 1))) >> shift
    return raw >> shift


def quantize(x: Real, fmt: QFormat, rounding: Rounding = Rounding.HALF_UP) -> FixedValue:
    """Nearest representable value to ``x``, saturated to the format range.

    ``TRUNCATE`` drops fractional bits (rounds toward minus infinity), which is
    what discarding low-order bits of a two's-complement word does.
    """
    if isinstance(x, float) and not math.isfinite(x):
        if math.isnan(x):
            raise ValueError("cannot quantize NaN")
        return FixedValue(fmt.max_raw if x > 0 else fmt.min_raw, fmt)
    scaled = Fraction(x) * (1 << fmt.frac_bits)
    if rounding is Rounding.HALF_UP:
        raw = math.floor(scaled + Fraction(1, 2))
    else:
        raw = math.floor(scaled)
    return FixedValue(fmt.saturate(raw), fmt)


def full_multiply(a: FixedValue, b: FixedValue) -> FixedValue:
    """Exact product in a format wide enough that it can never overflow."""
    total = a.total_bits + b.total_bits
    if total > MAX_BITS:
        raise WidthError(f"product width {total} exceeds {MAX_BITS} bits")
    return FixedValue(a.raw * b.raw, QFormat(total, a.frac_bits + b.frac_bits))


def accumulate(acc: FixedValue, p: FixedValue, acc_fmt: QFormat | None = None) -> FixedValue:
    """Exact ``acc + p`` in ``acc_fmt``; raises instead of wrapping."""
    acc_fmt = acc_fmt or acc.format
    if acc.format != acc_fmt:
        raise WidthError(f"accumulator is {acc.format}, expected {acc_fmt}")
    if p.frac_bits > acc_fmt.frac_bits:
        raise WidthError(f"{p.format} has more fraction bits than accumulator {acc_fmt}")
    if p.total_bits - p.frac_bits > acc_fmt.total_bits - acc_fmt.frac_bits:
        raise WidthError(f"{p.format} does not fit accumulator {acc_fmt}")
    aligned = p.raw << (acc_fmt.frac_bits - p.frac_bits)
    total = acc.raw + aligned
    if not acc_fmt.contains(total):
        raise AccumulatorOverflowError(f"sum {total} overflows {acc_fmt}")
    return FixedValue(total, acc_fmt)


def requantize(
    v: FixedValue,
    target: QFormat,
    rounding: Rounding = Rounding.HALF_UP,
    saturate: bool = True,
) -> FixedValue:
    raw = _round_shift(v.raw, v.frac_bits - target.frac_bits, rounding)
    if not target.contains(raw):
        if not saturate:
            raise RangeError(f"{v.raw} ({v.format}) does not fit {target}")
        raw = target.saturate(raw)
    return FixedValue(raw, target)


def fits_signed(value: int, bits: int) -> bool:
    return -(1 << (bits - 1)) <= value < (1 << (bits - 1))


def accumulator_bits(in_bits: int, w_bits: int, k: int) -> int:
    """Accumulator width that cannot overflow for a k x k dot product."""
    return in_bits + w_bits + math.ceil(math.log2(k * k)) + 1

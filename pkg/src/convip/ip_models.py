"""Cycle-counted behavioral models of the four convolution IPs.

Each engine first receives its k*k coefficients one per cycle, then accepts
one (Conv1/Conv2) or two (Conv3/Conv4) windows per cycle. Results leave a
fixed-latency pipeline in issue order.

Conv3 computes both of its streams with a single wide multiplier per tap by
packing the two pixel operands into one word (see ``packed_dual_multiply``).
"""
from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import (
    AccumulatorOverflowError,
    ArityError,
    DimensionError,
    OverloadError,
    PhaseError,
    WidthError,
)
from .fixedpoint import accumulator_bits, fits_signed
from .golden import AccPlane, ImagePlane, Kernel, extract_windows, output_shape

PIPELINE_LATENCY = 3

# Packing geometry: the high operand sits 18 bits above the low one. The packed
# word needs 27 signed bits (a = b = -128 gives -2**25 - 128), matching a
# 27x18 hard multiplier port; the coefficient is the 8-bit second operand.
PACK_SHIFT = 18
PACK_OPERAND_BITS = 8
_LOW_MASK = (1 << PACK_SHIFT) - 1
_LOW_SIGN = 1 << (PACK_SHIFT - 1)


class IpVariant(enum.Enum):
    CONV1 = (1, 0, 1, 16)
    CONV2 = (2, 1, 1, 16)
    CONV3 = (3, 1, 2, 8)
    CONV4 = (4, 2, 2, 16)

    def __init__(self, index, dsps, outputs_per_cycle, max_operand_bits):
        self.index = index
        self.dsps = dsps
        self.outputs_per_cycle = outputs_per_cycle
        self.max_operand_bits = max_operand_bits

    @property
    def label(self) -> str:
        return f"Conv_{self.index}"

    @property
    def key(self) -> str:
        return f"conv{self.index}"

    @classmethod
    def parse(cls, value) -> "IpVariant":
        """Accept an IpVariant, ``"conv3"``, ``"Conv_3"``, ``"CONV3"`` or ``3``."""
        if isinstance(value, cls):
            return value
        if isinstance(value, int):
            for v in cls:
                if v.index == value:
                    return v
        elif isinstance(value, str):
            norm = value.strip().lower().replace("_", "")
            for v in cls:
                if norm == v.key:
                    return v
        raise ValueError(f"unknown IP variant {value!r}")

    def __str__(self):
        return self.label


class MultiplyCounter:
    """Instrumentation: counts wide multiplications actually performed."""

    def __init__(self):
        self.count = 0

    def __repr__(self):
        return f"MultiplyCounter(count={self.count})"


def _check_pack_operand(name, v):
    if not fits_signed(v, PACK_OPERAND_BITS):
        raise WidthError(f"{name}={v} exceeds {PACK_OPERAND_BITS}-bit signed range")


@dataclass(frozen=True)
class PackedProduct:
    wide_raw: int
    offset_bits: int = PACK_SHIFT

    def split(self) -> tuple[int, int]:
        """Extract (high, low) products with the sign-borrow correction."""
        low = self.wide_raw & _LOW_MASK
        if low & _LOW_SIGN:
            low -= 1 << self.offset_bits
        high = self.wide_raw >> self.offset_bits
        if low < 0:
            # a negative low field borrowed one from the high field
            high += 1
        return high, low


def pack_operands(a: int, b: int) -> int:
    return (a << PACK_SHIFT) + b


def packed_dual_multiply(a: int, b: int, w: int, counter: MultiplyCounter | None = None):
    """Return ``(a*w, b*w)`` computed with one wide multiplication."""
    _check_pack_operand("a", a)
    _check_pack_operand("b", b)
    _check_pack_operand("w", w)
    wide = pack_operands(a, b) * w
    if counter is not None:
        counter.count += 1
    return PackedProduct(wide).split()


def packed_dual_multiply_array(a, b, w, counter: MultiplyCounter | None = None):
    """Vectorized ``packed_dual_multiply``; one wide multiply per element."""
    a, b, w = np.broadcast_arrays(*(np.asarray(x, dtype=np.int64) for x in (a, b, w)))
    for name, arr in (("a", a), ("b", b), ("w", w)):
        if arr.size and (arr.min() < -128 or arr.max() > 127):
            raise WidthError(f"{name} exceeds {PACK_OPERAND_BITS}-bit signed range")
    wide = ((a << PACK_SHIFT) + b) * w
    if counter is not None:
        counter.count += wide.size
    low = wide & _LOW_MASK
    low = np.where(low & _LOW_SIGN, low - (1 << PACK_SHIFT), low)
    high = (wide >> PACK_SHIFT) + (low < 0)
    return high, low


def mac_window(coeffs: Sequence[int], window: Sequence[int], acc_bits: int | None = None) -> int:
    """Exact dot product, checked against the accumulator width."""
    if len(coeffs) != len(window):
        raise DimensionError(f"{len(coeffs)} coefficients vs {len(window)} window values")
    acc = 0
    for c, x in zip(coeffs, window):
        acc += int(c) * int(x)
        if acc_bits is not None and not fits_signed(acc, acc_bits):
            raise AccumulatorOverflowError(f"partial sum {acc} overflows {acc_bits} bits")
    return acc


@dataclass(frozen=True)
class EngineState:
    """Clocked state of one IP instance. Transitions return new states."""

    variant: IpVariant
    k: int = 3
    operand_bits: int = 8
    coeff_regs: tuple[int, ...] = ()
    pipeline: tuple[tuple[int, int], ...] = ()  # (remaining cycles, result)
    cycle: int = 0
    wide_multiplies: int = 0
    fault: bool = False  # corrupt the next computed result once

    def __post_init__(self):
        if self.operand_bits > self.variant.max_operand_bits:
            raise WidthError(
                f"{self.variant.label} is limited to {self.variant.max_operand_bits}-bit "
                f"operands, got {self.operand_bits}"
            )
        if self.k < 1:
            raise DimensionError(f"kernel size must be positive, got {self.k}")

    @property
    def load_count(self) -> int:
        return len(self.coeff_regs)

    @property
    def loaded(self) -> bool:
        return self.load_count == self.k * self.k

    @property
    def acc_bits(self) -> int:
        return accumulator_bits(self.operand_bits, self.operand_bits, self.k)


def new_engine(variant, k: int = 3, operand_bits: int = 8, fault: bool = False) -> EngineState:
    """Fresh engine. ``fault`` corrupts the first result computed (negative control)."""
    return EngineState(IpVariant.parse(variant), k=k, operand_bits=operand_bits, fault=fault)


def reset(e: EngineState) -> EngineState:
    return EngineState(e.variant, k=e.k, operand_bits=e.operand_bits, fault=e.fault)


def load_coefficient(e: EngineState, c: int) -> EngineState:
    if e.loaded:
        raise OverloadError(f"all {e.k * e.k} coefficients already loaded; reset first")
    c = int(c)
    if not fits_signed(c, e.operand_bits):
        raise WidthError(f"coefficient {c} exceeds {e.operand_bits}-bit signed range")
    return replace(e, coeff_regs=e.coeff_regs + (c,), cycle=e.cycle + 1)


def load_kernel(e: EngineState, ker: Kernel) -> EngineState:
    if ker.k != e.k:
        raise DimensionError(f"engine expects {e.k}x{e.k} kernel, got {ker.k}x{ker.k}")
    for c in ker.flat:
        e = load_coefficient(e, c)
    return e


def _compute(e: EngineState, windows: list[tuple[int, ...]]) -> tuple[list[int], int]:
    # returns (results, wide multiplies used)
    acc_bits = e.acc_bits
    coeffs = e.coeff_regs
    if e.variant is IpVariant.CONV3:
        win_a, win_b = windows
        acc_a = acc_b = 0
        for c, xa, xb in zip(coeffs, win_a, win_b):
            pa, pb = packed_dual_multiply(xa, xb, c)
            acc_a += pa
            acc_b += pb
            for acc in (acc_a, acc_b):
                if not fits_signed(acc, acc_bits):
                    raise AccumulatorOverflowError(f"partial sum {acc} overflows {acc_bits} bits")
        return [acc_a, acc_b], len(coeffs)
    results = [mac_window(coeffs, w, acc_bits) for w in windows]
    # Conv1 multiplies in logic; Conv2/Conv4 spend one DSP multiply per tap and stream
    return results, len(coeffs) * len(windows) if e.variant.dsps else 0


def _advance(pipeline, issued):
    entries = [(rem, v) for rem, v in pipeline] + [(PIPELINE_LATENCY, v) for v in issued]
    emitted, kept = [], []
    for rem, v in entries:
        if rem - 1 == 0:
            emitted.append(v)
        else:
            kept.append((rem - 1, v))
    return tuple(kept), emitted


def step(e: EngineState, windows) -> tuple[EngineState, list[int]]:
    """Issue one cycle's windows; return the new state and emitted results."""
    if not e.loaded:
        raise PhaseError(f"{e.load_count}/{e.k * e.k} coefficients loaded; load phase incomplete")
    windows = list(windows)
    if len(windows) != e.variant.outputs_per_cycle:
        raise ArityError(
            f"{e.variant.label} takes {e.variant.outputs_per_cycle} window(s) per cycle, "
            f"got {len(windows)}"
        )
    size = e.k * e.k
    checked = []
    for w in windows:
        w = tuple(int(v) for v in np.asarray(w).ravel())
        if len(w) != size:
            raise DimensionError(f"window has {len(w)} values, expected {size}")
        for v in w:
            if not fits_signed(v, e.operand_bits):
                raise WidthError(f"pixel {v} exceeds {e.operand_bits}-bit signed range")
        checked.append(w)
    results, used = _compute(e, checked)
    if e.fault:
        results[0] += 1
    pipeline, emitted = _advance(e.pipeline, results)
    return replace(
        e, pipeline=pipeline, cycle=e.cycle + 1, wide_multiplies=e.wide_multiplies + used,
        fault=False,
    ), emitted


def idle(e: EngineState) -> tuple[EngineState, list[int]]:
    """Clock the engine once without issuing work."""
    pipeline, emitted = _advance(e.pipeline, [])
    return replace(e, pipeline=pipeline, cycle=e.cycle + 1), emitted


def drain(e: EngineState) -> tuple[EngineState, list[int]]:
    """Run the fixed ``PIPELINE_LATENCY``-cycle flush that ends a layer."""
    out = []
    for _ in range(PIPELINE_LATENCY):
        e, emitted = idle(e)
        out.extend(emitted)
    return e, out


@dataclass(frozen=True)
class LayerResult:
    outputs: tuple[AccPlane, ...]
    cycles: int
    wide_multiplies: int
    state: EngineState


def _split_streams(variant: IpVariant, images: Sequence[ImagePlane], k: int):
    if variant.outputs_per_cycle == 1:
        if len(images) != 1:
            raise ArityError(f"{variant.label} processes one image, got {len(images)}")
        return [extract_windows(images[0], k)], False
    if len(images) == 2:
        a, b = images
        if (a.height, a.width) != (b.height, b.width):
            raise DimensionError("paired images must have identical dimensions")
        return [extract_windows(a, k), extract_windows(b, k)], False
    if len(images) == 1:
        win = extract_windows(images[0], k)
        half = math.ceil(len(win) / 2)
        return [win[:half], win[half:]], True
    raise ArityError(f"{variant.label} processes one or two images, got {len(images)}")


def run_layer(variant, images, ker: Kernel, *, operand_bits: int | None = None,
              fault: bool = False) -> LayerResult:
    """Load ``ker``, stream every window of ``images`` through one engine and drain it.

    ``images`` is one ImagePlane or a sequence of them. Two-stream variants take
    two equally sized images, or one image whose windows are split into a first
    and second half. Returns one AccPlane per input image.
    """
    variant = IpVariant.parse(variant)
    if isinstance(images, ImagePlane):
        images = [images]
    images = list(images)
    if not images:
        raise ArityError("no input image")
    bits = operand_bits or max([ker.bit_width] + [img.bit_width for img in images])
    e = new_engine(variant, k=ker.k, operand_bits=bits, fault=fault)
    e = load_kernel(e, ker)

    streams, split = _split_streams(variant, images, ker.k)
    size = ker.k * ker.k
    n_cycles = max(len(s) for s in streams)
    padded = [len(s) < n_cycles for s in streams]
    bubble = np.zeros(size, dtype=np.int64)

    emitted = []
    for t in range(n_cycles):
        ws = [s[t] if t < len(s) else bubble for s in streams]
        e, out = step(e, ws)
        emitted.extend(out)
    e, out = drain(e)
    emitted.extend(out)

    # emission is in issue order, interleaved across streams per cycle
    per_stream = [emitted[i::len(streams)] for i in range(len(streams))]
    for i, pad in enumerate(padded):
        if pad:
            per_stream[i] = per_stream[i][: len(streams[i])]

    acc_bits = accumulator_bits(bits, bits, ker.k)
    if split:
        oh, ow = output_shape(images[0], ker.k)
        flat = np.array(per_stream[0] + per_stream[1], dtype=np.int64)
        planes = (AccPlane(flat.reshape(oh, ow), acc_bits),)
    else:
        planes = tuple(
            AccPlane(np.array(vals, dtype=np.int64).reshape(output_shape(img, ker.k)), acc_bits)
            for vals, img in zip(per_stream, images)
        )
    return LayerResult(planes, e.cycle, e.wide_multiplies, e)


def layer_cycles(variant, n_windows: int, k: int = 3) -> int:
    """Closed-form cycle count of ``run_layer``."""
    variant = IpVariant.parse(variant)
    return k * k + math.ceil(n_windows / variant.outputs_per_cycle) + PIPELINE_LATENCY

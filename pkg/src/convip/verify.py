"""Verification sweeps: exhaustive packed-multiply check and engine-vs-golden cases."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .golden import ImagePlane, Kernel, convolve_golden
from .ip_models import (
    IpVariant,
    MultiplyCounter,
    packed_dual_multiply,
    packed_dual_multiply_array,
    run_layer,
)

DEFAULT_SEED = 20250101


@dataclass
class PackingSweep:
    cases: int
    failures: int
    wide_multiplies: int

    @property
    def ok(self) -> bool:
        return self.failures == 0 and self.wide_multiplies == self.cases


def _sweep_w(w: int) -> tuple[int, int, int]:
    ab = np.arange(-128, 128, dtype=np.int64)
    a, b = np.meshgrid(ab, ab, indexing="ij")
    counter = MultiplyCounter()
    hi, lo = packed_dual_multiply_array(a, b, w, counter=counter)
    bad = np.count_nonzero((hi != a * w) | (lo != b * w))
    return a.size, int(bad), counter.count


def sweep_packing(workers: int = 4, weights=range(-128, 128)) -> PackingSweep:
    """Check every (a, b, w) in the signed 8-bit cube against plain products."""
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_sweep_w, weights))
    return PackingSweep(*(sum(p[i] for p in parts) for i in range(3)))


def random_case(rng: np.random.Generator, variant: IpVariant, bits: int = 8, k: int = 3,
                max_side: int = 12):
    lo, hi = -(1 << (bits - 1)), 1 << (bits - 1)
    h = int(rng.integers(k, max_side + 1))
    w = int(rng.integers(k, max_side + 1))
    n_images = 2 if variant.outputs_per_cycle == 2 and rng.random() < 0.5 else 1
    images = [ImagePlane(rng.integers(lo, hi, size=(h, w)), bits) for _ in range(n_images)]
    ker = Kernel(rng.integers(lo, hi, size=(k, k)), bits)
    return images, ker


def engine_matches_golden(variant, images, ker, fault: bool = False) -> bool:
    result = run_layer(variant, images, ker, fault=fault)
    expected = [convolve_golden(img, ker) for img in images]
    return len(result.outputs) == len(expected) and all(
        out == ref for out, ref in zip(result.outputs, expected)
    )


def equivalence_suite(cases: int = 50, seed: int = DEFAULT_SEED, variants=tuple(IpVariant),
                      fault: bool = False) -> dict[str, tuple[int, int]]:
    """Per-variant (passed, total) over ``cases`` seeded random layers."""
    rng = np.random.default_rng(seed)
    report = {}
    for variant in variants:
        passed = 0
        for _ in range(cases):
            images, ker = random_case(rng, variant)
            passed += engine_matches_golden(variant, images, ker, fault=fault)
        report[variant.label] = (passed, cases)
    return report


def _sweep_w_scalar(w: int) -> tuple[int, int, int]:
    counter = MultiplyCounter()
    bad = 0
    for a in range(-128, 128):
        for b in range(-128, 128):
            if packed_dual_multiply(a, b, w, counter) != (a * w, b * w):
                bad += 1
    return 65536, bad, counter.count


def sweep_packing_scalar(workers: int | None = None, weights=range(-128, 128)) -> PackingSweep:
    """Same cube as ``sweep_packing`` but through the scalar entry point, one call per case."""
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_sweep_w_scalar, weights, chunksize=8))
    return PackingSweep(*(sum(p[i] for p in parts) for i in range(3)))

"""scikit-learn style wrappers around the engine models and the allocator.

``ConvIP.fit`` loads a kernel into an engine; ``transform`` streams images
through it. ``IpAllocator.fit`` solves the allocation for a budget.
Both expose ``get_params``/``set_params`` and compose with sklearn tooling.
"""
from __future__ import annotations

from collections.abc import Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .allocator import Workload, allocate, allocate_bruteforce, explain
from .golden import ImagePlane, Kernel, convolve_golden
from .ip_models import IpVariant, load_kernel, new_engine, run_layer
from .resources import ResourceVector


class ConvIP(TransformerMixin, BaseEstimator):
    """One convolution IP instance.

    Parameters
    ----------
    variant : {"conv1", "conv2", "conv3", "conv4"}
    bits : int
        Declared operand width for pixels and coefficients.
    """

    def __init__(self, variant="conv2", bits=8):
        self.variant = variant
        self.bits = bits

    def fit(self, X, y=None):
        """Load kernel ``X`` (a k x k integer matrix) serially into a fresh engine."""
        variant = IpVariant.parse(self.variant)
        kernel = X if isinstance(X, Kernel) else Kernel(X, bit_width=self.bits)
        engine = load_kernel(new_engine(variant, k=kernel.k, operand_bits=self.bits), kernel)
        self.variant_ = variant
        self.kernel_ = kernel
        self.engine_ = engine
        self.load_cycles_ = engine.cycle
        return self

    def _planes(self, X):
        if isinstance(X, ImagePlane):
            return [X]
        if all(isinstance(x, ImagePlane) for x in X):
            return list(X)
        arr = np.asarray(X)
        if arr.ndim == 2:
            return [ImagePlane(arr, self.bits)]
        return [ImagePlane(x, self.bits) for x in arr]

    def transform(self, X):
        """Convolve one image, or a pair of images for two-stream variants.

        Returns a 2-D array for a single image, otherwise a list of arrays.
        The cycle count of the run is stored in ``cycles_``.
        """
        check_is_fitted(self, "engine_")
        planes = self._planes(X)
        result = run_layer(self.variant_, planes, self.kernel_, operand_bits=self.bits)
        self.cycles_ = result.cycles
        self.wide_multiplies_ = result.wide_multiplies
        outs = [p.values for p in result.outputs]
        return outs[0] if len(outs) == 1 else outs

    def score(self, X, y=None):
        """Fraction of output planes that are bit-identical to the golden model."""
        check_is_fitted(self, "engine_")
        planes = self._planes(X)
        got = self.transform(planes)
        got = [got] if isinstance(got, np.ndarray) else got
        ref = [convolve_golden(p, self.kernel_).values for p in planes]
        return float(np.mean([np.array_equal(g, r) for g, r in zip(got, ref)]))


class IpAllocator(BaseEstimator):
    """Choose IP instance counts maximizing convolutions per cycle.

    Parameters
    ----------
    operand_bits : int
    streams_wanted : int or None
    method : {"bnb", "bruteforce"}
    """

    def __init__(self, operand_bits=8, streams_wanted=None, method="bnb"):
        self.operand_bits = operand_bits
        self.streams_wanted = streams_wanted
        self.method = method

    def fit(self, X, y=None):
        budget = X if isinstance(X, ResourceVector) else ResourceVector.from_mapping(
            X if isinstance(X, Mapping) else dict(zip(("luts", "regs", "clbs", "dsps"), X))
        )
        wl = Workload(self.operand_bits, self.streams_wanted)
        if self.method == "bnb":
            alloc = allocate(budget, wl)
        elif self.method == "bruteforce":
            alloc = allocate_bruteforce(budget, wl)
        else:
            raise ValueError(f"unknown method {self.method!r}")
        self.budget_ = budget
        self.allocation_ = alloc
        self.counts_ = {v.key: n for v, n in alloc.counts.items()}
        self.throughput_ = alloc.throughput
        return self

    def explain(self) -> dict:
        check_is_fitted(self, "allocation_")
        return explain(self.allocation_, self.budget_)

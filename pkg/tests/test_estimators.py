import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from convip.estimators import ConvIP, IpAllocator
from convip.exceptions import WidthError
from convip.golden import ImagePlane, Kernel, convolve_golden
from convip.resources import ResourceVector


def test_get_set_params():
    est = ConvIP(variant="conv3", bits=8)
    assert est.get_params() == {"variant": "conv3", "bits": 8}
    est.set_params(variant="conv4")
    assert clone(est).get_params()["variant"] == "conv4"


def test_fit_loads_kernel_serially(rng):
    est = ConvIP("conv2").fit(rng.integers(-128, 128, (3, 3)))
    assert est.load_cycles_ == 9
    assert est.engine_.load_count == 9


def test_transform_matches_golden(rng):
    ker = rng.integers(-128, 128, (3, 3))
    img = rng.integers(-128, 128, (8, 8))
    out = ConvIP("conv1").fit(ker).transform(img)
    ref = convolve_golden(ImagePlane(img), Kernel(ker)).values
    assert np.array_equal(out, ref)


def test_transform_pair(rng):
    ker = rng.integers(-128, 128, (3, 3))
    imgs = rng.integers(-128, 128, (2, 6, 6))
    est = ConvIP("conv3").fit(ker)
    a, b = est.transform(imgs)
    assert est.cycles_ == 9 + 16 + 3
    assert est.score(list(imgs)) == 1.0
    assert np.array_equal(b, convolve_golden(ImagePlane(imgs[1]), Kernel(ker)).values)


def test_fit_transform(rng):
    ker = rng.integers(-128, 128, (3, 3))
    out = ConvIP("conv4").fit_transform(ker)  # convolve the kernel with itself
    assert out.shape == (1, 1)
    assert out[0, 0] == int((ker * ker).sum())


def test_not_fitted():
    with pytest.raises(NotFittedError):
        ConvIP().transform(np.zeros((3, 3)))


def test_conv3_width_limit(rng):
    with pytest.raises(WidthError):
        ConvIP("conv3", bits=9).fit(rng.integers(-128, 128, (3, 3)))


def test_allocator_estimator():
    est = IpAllocator(operand_bits=8).fit({"luts": 45, "regs": 32, "clbs": 10, "dsps": 1})
    assert est.counts_ == {"conv1": 0, "conv2": 0, "conv3": 1, "conv4": 0}
    assert est.throughput_ == 2
    assert est.explain()["binding"] == ["luts", "regs", "clbs", "dsps"]


def test_allocator_methods_agree():
    budget = ResourceVector(400, 200, 60, 6)
    a = IpAllocator(16, method="bnb").fit(budget)
    b = clone(a).set_params(method="bruteforce").fit(budget)
    assert a.allocation_ == b.allocation_


def test_allocator_sequence_budget():
    assert IpAllocator(16).fit([45, 32, 10, 1]).counts_["conv2"] == 1


def test_allocator_bad_method():
    with pytest.raises(ValueError):
        IpAllocator(method="greedy").fit([1, 1, 1, 1])

"""Bit-accurate models, resource profiles and allocation for four FPGA convolution IPs."""
from .allocator import Allocation, Workload, allocate, allocate_bruteforce, explain
from .estimators import ConvIP, IpAllocator
from .fixedpoint import FixedValue, QFormat, Rounding, accumulate, full_multiply, quantize, requantize
from .golden import AccPlane, ImagePlane, Kernel, convolve_golden, extract_windows
from .ip_models import (
    EngineState,
    IpVariant,
    MultiplyCounter,
    load_coefficient,
    mac_window,
    new_engine,
    packed_dual_multiply,
    reset,
    run_layer,
    step,
)
from .resources import Budget, IpProfile, ResourceVector, aggregate, fits, profile_of

__version__ = "0.1.0"

"""Measured per-IP resource profiles and linear resource accounting."""
from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from ._validation import check_counts
from .exceptions import FileFormatError
from .ip_models import IpVariant

DIMENSIONS = ("luts", "regs", "clbs", "dsps")
_COUNT_LIMIT = (1 << 63) - 1


@dataclass(frozen=True)
class ResourceVector:
    luts: int = 0
    regs: int = 0
    clbs: int = 0
    dsps: int = 0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise TypeError(f"{f.name} must be an integer, got {v!r}")
            if v < 0:
                raise ValueError(f"{f.name} must be non-negative, got {v}")
            if v > _COUNT_LIMIT:
                raise OverflowError(f"{f.name}={v} exceeds the 64-bit resource counter")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.luts, self.regs, self.clbs, self.dsps)

    def to_dict(self) -> dict[str, int]:
        return asdict(self)

    def __iter__(self):
        return iter(self.as_tuple())

    def __add__(self, other: ResourceVector) -> ResourceVector:
        return ResourceVector(*(a + b for a, b in zip(self, other)))

    def __sub__(self, other: ResourceVector) -> ResourceVector:
        return ResourceVector(*(a - b for a, b in zip(self, other)))

    def __mul__(self, n: int) -> ResourceVector:
        return ResourceVector(*(a * n for a in self))

    __rmul__ = __mul__

    def fits_within(self, ceiling: ResourceVector) -> bool:
        return all(a <= b for a, b in zip(self, ceiling))

    __le__ = fits_within

    @classmethod
    def from_mapping(cls, data: Mapping) -> ResourceVector:
        if not isinstance(data, Mapping):
            raise FileFormatError(f"expected an object with keys {DIMENSIONS}")
        missing = [k for k in DIMENSIONS if k not in data]
        extra = [k for k in data if k not in DIMENSIONS]
        if missing or extra:
            raise FileFormatError(f"budget keys: missing {missing}, unexpected {extra}")
        try:
            return cls(**{k: data[k] for k in DIMENSIONS})
        except (TypeError, ValueError, OverflowError) as exc:
            raise FileFormatError(str(exc)) from exc


# The fabric envelope an allocation must fit.
Budget = ResourceVector


def load_budget(path) -> Budget:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"cannot read budget {path}: {exc}") from exc
    return ResourceVector.from_mapping(data)


@dataclass(frozen=True)
class IpProfile:
    variant: IpVariant
    resources: ResourceVector
    wns_ns: float  # slack at 200 MHz, reported only
    power_w: float  # reported only

    @property
    def outputs_per_cycle(self) -> int:
        return self.variant.outputs_per_cycle

    @property
    def max_operand_bits(self) -> int:
        return self.variant.max_operand_bits

    def to_dict(self) -> dict:
        return {
            "ip": self.variant.label,
            **self.resources.to_dict(),
            "wns_ns": self.wns_ns,
            "power_w": self.power_w,
            "outputs_per_cycle": self.outputs_per_cycle,
            "max_operand_bits": self.max_operand_bits,
        }


# ZCU104, 200 MHz, 8-bit data, 3x3 kernel.
PROFILES: Mapping[IpVariant, IpProfile] = {
    IpVariant.CONV1: IpProfile(IpVariant.CONV1, ResourceVector(105, 54, 15, 0), 2.596, 0.593),
    IpVariant.CONV2: IpProfile(IpVariant.CONV2, ResourceVector(30, 22, 5, 1), 2.276, 0.594),
    IpVariant.CONV3: IpProfile(IpVariant.CONV3, ResourceVector(45, 32, 10, 1), 2.086, 0.594),
    IpVariant.CONV4: IpProfile(IpVariant.CONV4, ResourceVector(42, 23, 8, 2), 2.870, 0.596),
}


def profile_of(variant) -> IpProfile:
    return PROFILES[IpVariant.parse(variant)]


def aggregate(counts: Mapping) -> ResourceVector:
    total = ResourceVector()
    for v, n in check_counts(counts).items():
        total = total + PROFILES[v].resources * n
    return total


def fits(counts: Mapping, budget: Budget) -> bool:
    try:
        used = aggregate(counts)
    except OverflowError:
        return False
    return used.fits_within(budget)

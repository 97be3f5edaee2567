"""Input validation helpers shared by the data types and estimators."""
from __future__ import annotations

from collections.abc import Mapping

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DimensionError, WidthError


def check_int_matrix(x, bits: int, name: str = "array") -> np.ndarray:
    """Return ``x`` as a read-only 2-D int64 array whose entries fit ``bits`` signed bits."""
    try:
        arr = check_array(x, dtype=None, ensure_2d=True, ensure_min_samples=1,
                          ensure_min_features=1, input_name=name)
    except ValueError as exc:
        raise DimensionError(str(exc)) from exc
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise WidthError(f"{name} must hold integers")
    arr = np.array(arr, dtype=np.int64)
    lo, hi = -(1 << (bits - 1)), (1 << (bits - 1)) - 1
    if arr.size and (arr.min() < lo or arr.max() > hi):
        raise WidthError(f"{name} values exceed {bits}-bit signed range [{lo}, {hi}]")
    arr.setflags(write=False)
    return arr


def check_counts(counts: Mapping) -> dict:
    """Normalize a variant->count mapping, accepting variant names as keys."""
    from .ip_models import IpVariant

    out = {v: 0 for v in IpVariant}
    for key, n in counts.items():
        v = IpVariant.parse(key)
        n = int(n)
        if n < 0:
            raise ValueError(f"negative count {n} for {v.label}")
        out[v] += n
    return out

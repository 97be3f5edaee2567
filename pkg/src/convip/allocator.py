"""Resource-driven IP selection.

Chooses how many instances of each variant to place so that total
convolutions per cycle is maximal within a resource budget. This is a
4-variable bounded multi-dimensional knapsack; ``allocate`` solves it by
branch and bound and ``allocate_bruteforce`` by plain enumeration. Both
minimize the same total order::

    (-throughput, dsps used, luts used, counts Conv1..Conv4)

so their results are identical whenever both run.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .exceptions import SearchSpaceError, WidthError
from .ip_models import IpVariant
from .resources import DIMENSIONS, PROFILES, Budget, ResourceVector, aggregate

BRUTEFORCE_LIMIT = 10**7

# closed-form variable is last; DSP-heavy variants branch first
_SEARCH_ORDER = (IpVariant.CONV4, IpVariant.CONV3, IpVariant.CONV2, IpVariant.CONV1)


@dataclass(frozen=True)
class Workload:
    operand_bits: int = 8
    streams_wanted: int | None = None

    def __post_init__(self):
        if not 1 <= self.operand_bits <= 16:
            raise WidthError(f"operand_bits must be in [1, 16], got {self.operand_bits}")
        if self.streams_wanted is not None and self.streams_wanted < 0:
            raise ValueError(f"streams_wanted must be non-negative, got {self.streams_wanted}")

    def eligible(self) -> list[IpVariant]:
        return [v for v in IpVariant if v.max_operand_bits >= self.operand_bits]


@dataclass(frozen=True)
class Allocation:
    counts: Mapping[IpVariant, int]
    throughput: int
    used: ResourceVector = field(default_factory=ResourceVector)

    @classmethod
    def from_counts(cls, counts: Mapping) -> Allocation:
        full = {v: int(counts.get(v, 0)) for v in IpVariant}
        thr = sum(n * v.outputs_per_cycle for v, n in full.items())
        return cls(full, thr, aggregate(full))

    def count_tuple(self) -> tuple[int, ...]:
        return tuple(self.counts[v] for v in IpVariant)

    def nonzero(self) -> dict[str, int]:
        return {v.label: n for v, n in self.counts.items() if n}

    def __eq__(self, other):
        if not isinstance(other, Allocation):
            return NotImplemented
        return self.count_tuple() == other.count_tuple()

    def __hash__(self):
        return hash(self.count_tuple())


def _ceiling(v: IpVariant, residual, cap) -> int:
    cost = PROFILES[v].resources
    n = min(r // c for r, c in zip(residual, cost) if c)
    if cap is not None:
        n = min(n, cap // v.outputs_per_cycle)
    return n


def _ceilings(budget: Budget, wl: Workload) -> dict[IpVariant, int]:
    eligible = set(wl.eligible())
    return {
        v: _ceiling(v, budget.as_tuple(), wl.streams_wanted) if v in eligible else 0
        for v in IpVariant
    }


def _dual_prices(columns, rows_rhs, values):
    """Feasible LP dual prices: ``A.T @ y >= values`` with ``y >= 0``.

    For any residual right-hand side ``r``, ``r @ y`` bounds the LP value of the
    remaining variables, so one solve at the root serves every node.
    """
    A = np.array(columns, dtype=float).T  # rows x vars
    w = np.array(values, dtype=float)
    res = linprog(c=np.array(rows_rhs, dtype=float), A_ub=-A.T, b_ub=-w,
                  bounds=[(0, None)] * A.shape[0], method="highs")
    y = np.maximum(res.x, 0.0) if res.status == 0 else None
    if y is None or np.any(A.T @ y <= 0):
        # fall back to single-row prices; every variant consumes LUTs
        y = np.zeros(A.shape[0])
        y[0] = max(wi / A[0, j] for j, wi in enumerate(w))
    # rescale so dual feasibility holds despite solver tolerance
    scale = max(1.0, float(np.max(w / (A.T @ y))))
    return y * scale * (1 + 1e-9)


def allocate(budget: Budget, wl: Workload | None = None) -> Allocation:
    """Exact branch and bound over instance counts.

    The lexicographic objective is folded into one integer score
    ``throughput * big - dsps * mid - luts`` whose weights exceed any possible
    DSP/LUT total, so comparing scores equals comparing keys up to the final
    count-tuple tie-break. Nodes are pruned with precomputed LP dual prices.
    """
    wl = wl or Workload()
    ceilings = _ceilings(budget, wl)
    order = [v for v in _SEARCH_ORDER if ceilings[v] > 0]
    if not order:
        return Allocation.from_counts({})
    cap = wl.streams_wanted
    mid = budget.luts + 1
    big = (budget.dsps + 1) * mid
    score = {v: v.outputs_per_cycle * big - PROFILES[v].resources.dsps * mid
             - PROFILES[v].resources.luts for v in order}
    cols = {v: PROFILES[v].resources.as_tuple() + ((v.outputs_per_cycle,) if cap is not None else ())
            for v in order}
    rhs = budget.as_tuple() + ((cap,) if cap is not None else ())
    prices = [float(y) for y in _dual_prices([cols[v] for v in order], rhs,
                                              [score[v] for v in order])]
    # the node bound is linear in each count with slope -reduced_cost <= 0
    ascending = {v: sum(c * y for c, y in zip(cols[v], prices)) - score[v] > 1e-6 * big
                 for v in order}
    last = len(order) - 1

    best = None  # (score, negated count tuple)
    best_counts = None
    counts = {v: 0 for v in IpVariant}

    def visit(i, residual, total):
        nonlocal best, best_counts
        v = order[i]
        col = cols[v]
        n_max = min(ceilings[v], min(r // c for r, c in zip(residual, col) if c))
        if i == last:
            counts[v] = n_max
            cand = (total + n_max * score[v], tuple(-counts[u] for u in IpVariant))
            if best is None or cand > best:
                best, best_counts = cand, dict(counts)
            counts[v] = 0
            return
        steps = range(n_max + 1) if ascending[v] else range(n_max, -1, -1)
        for n in steps:
            res = tuple(r - n * c for r, c in zip(residual, col))
            t = total + n * score[v]
            if best is not None and t + sum(r * y for r, y in zip(res, prices)) < best[0] - 1:
                if ascending[v]:
                    break
                continue
            counts[v] = n
            visit(i + 1, res, t)
            counts[v] = 0

    visit(0, rhs, 0)
    return Allocation.from_counts(best_counts)


def search_space_size(budget: Budget, wl: Workload | None = None) -> int:
    wl = wl or Workload()
    return math.prod(n + 1 for n in _ceilings(budget, wl).values())


def allocate_bruteforce(budget: Budget, wl: Workload | None = None,
                        limit: int = BRUTEFORCE_LIMIT) -> Allocation:
    wl = wl or Workload()
    ceilings = _ceilings(budget, wl)
    size = math.prod(n + 1 for n in ceilings.values())
    if size > limit:
        raise SearchSpaceError(f"{size} count vectors exceed the enumeration limit {limit}")
    variants = list(IpVariant)
    grids = np.meshgrid(*(np.arange(ceilings[v] + 1, dtype=np.int64) for v in variants),
                        indexing="ij")
    combos = np.stack([g.ravel() for g in grids], axis=1)
    cost = np.array([PROFILES[v].resources.as_tuple() for v in variants], dtype=np.int64)
    opc = np.array([v.outputs_per_cycle for v in variants], dtype=np.int64)
    used = combos @ cost
    thr = combos @ opc
    ok = np.all(used <= np.array(budget.as_tuple()), axis=1)
    if wl.streams_wanted is not None:
        ok &= thr <= wl.streams_wanted
    combos, used, thr = combos[ok], used[ok], thr[ok]
    # lexsort: last key is primary
    keys = [combos[:, j] for j in reversed(range(len(variants)))]
    idx = np.lexsort(keys + [used[:, 0], used[:, 3], -thr])[0]
    return Allocation.from_counts(dict(zip(variants, (int(n) for n in combos[idx]))))


def explain(a: Allocation, budget: Budget) -> dict:
    """Residual resources and the dimensions that stop another instance being placed.

    A dimension is *binding* when the budget provides some of it but the
    residual is below the smallest non-zero per-instance cost among all
    variants. Dimensions the budget does not provide at all are listed
    separately as ``unavailable``.
    """
    residual = budget - a.used
    binding, unavailable = [], []
    for i, dim in enumerate(DIMENSIONS):
        if budget.as_tuple()[i] == 0:
            unavailable.append(dim)
            continue
        costs = [p.resources.as_tuple()[i] for p in PROFILES.values()]
        smallest = min(c for c in costs if c)
        if residual.as_tuple()[i] < smallest:
            binding.append(dim)
    return {
        "counts": {v.label: a.counts[v] for v in IpVariant},
        "throughput": a.throughput,
        "used": a.used.to_dict(),
        "budget": budget.to_dict(),
        "residual": residual.to_dict(),
        "binding": binding,
        "unavailable": unavailable,
    }

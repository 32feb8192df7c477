"""Exact 0-1 knapsack with real-valued weights.

Both selection subproblems of the alternating solver are single-constraint
binary programs, so they are solved here exactly by depth-first branch and
bound with the fractional (Dantzig) relaxation as upper bound.

Ties on value are broken in favour of fewer selected items, then the
lexicographically smallest sorted index tuple.  This makes the returned
selection unique for a given instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

REL_TOL = 1e-12
ABS_TOL = 1e-15


class KnapsackInfeasible(ValueError):
    """Capacity is negative, so not even the empty selection fits."""


@dataclass
class KnapsackInstance:
    values: np.ndarray
    weights: np.ndarray
    capacity: float
    forced_zero: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        self.capacity = float(self.capacity)
        self.forced_zero = frozenset(int(i) for i in self.forced_zero)
        if self.values.shape != self.weights.shape or self.values.ndim != 1:
            raise ValueError("values and weights must be 1-d arrays of equal length")
        if np.any(self.values < 0) or np.any(self.weights < 0):
            raise ValueError("values and weights must be non-negative")
        if not np.all(np.isfinite(self.values)) or not np.all(np.isfinite(self.weights)):
            raise ValueError("values and weights must be finite")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def effective_capacity(self) -> float:
        return self.capacity * (1.0 + REL_TOL) + ABS_TOL

    def fits(self, weight: float) -> bool:
        return weight <= self.effective_capacity


def _check_capacity(inst: KnapsackInstance) -> None:
    if inst.effective_capacity < 0:
        raise KnapsackInfeasible(f"capacity {inst.capacity} is negative")


def _partition(inst: KnapsackInstance):
    """Split items into (always taken, candidates sorted by density)."""
    cap = inst.effective_capacity
    free, cands = [], []
    for i in range(inst.n):
        if i in inst.forced_zero or inst.values[i] <= 0:
            continue
        if inst.weights[i] == 0:
            free.append(i)
        elif inst.weights[i] <= cap:
            cands.append(i)
    with np.errstate(over="ignore"):  # tiny weights give an infinite density, which sorts first
        cands.sort(key=lambda i: (-inst.values[i] / inst.weights[i], i))
    return free, cands


def fractional_bound(inst: KnapsackInstance) -> float:
    """Optimal value of the LP relaxation with x in [0, 1]^n."""
    _check_capacity(inst)
    free, cands = _partition(inst)
    total = math.fsum(inst.values[i] for i in free)
    room = inst.effective_capacity
    for i in cands:
        w = inst.weights[i]
        if w <= room:
            total += inst.values[i]
            room -= w
        else:
            total += inst.values[i] * room / w
            break
    return total


def solve_exact(inst: KnapsackInstance) -> tuple[np.ndarray, float]:
    """Return ``(x, value)`` maximising ``values @ x`` under the capacity."""
    _check_capacity(inst)
    free, cands = _partition(inst)
    cap = inst.effective_capacity
    v = [float(inst.values[i]) for i in cands]
    w = [float(inst.weights[i]) for i in cands]
    m = len(cands)

    # suffix sums let the bound stop early once everything left fits
    suffix_v = [0.0] * (m + 1)
    suffix_w = [0.0] * (m + 1)
    for j in range(m - 1, -1, -1):
        suffix_v[j] = suffix_v[j + 1] + v[j]
        suffix_w[j] = suffix_w[j + 1] + w[j]

    def upper(level: int, room: float) -> float:
        if suffix_w[level] <= room:
            return suffix_v[level]
        bound = 0.0
        for j in range(level, m):
            if w[j] <= room:
                bound += v[j]
                room -= w[j]
            else:
                return bound + v[j] * room / w[j]
        return bound

    best_key = (0.0, 0, ())  # value, item count, sorted original indices
    best_val = 0.0
    chosen: list[int] = []

    def consider(value_est: float) -> None:
        nonlocal best_key, best_val
        if value_est < best_val * (1.0 - 1e-9) - 1e-15:
            return
        idx = tuple(sorted(cands[j] for j in chosen))
        value = math.fsum(v[j] for j in chosen)
        key = (value, len(idx), idx)
        if _better(key, best_key):
            best_key = key
            best_val = value

    def dfs(level: int, value: float, weight: float) -> None:
        if level == m:
            consider(value)
            return
        slack = 1e-9 * max(1.0, best_val)
        if value + upper(level, cap - weight) < best_val - slack:
            return
        if weight + w[level] <= cap:
            chosen.append(level)
            dfs(level + 1, value + v[level], weight + w[level])
            chosen.pop()
        dfs(level + 1, value, weight)

    dfs(0, 0.0, 0.0)

    x = np.zeros(inst.n, dtype=np.int8)
    for i in free:
        x[i] = 1
    for i in best_key[2]:
        x[i] = 1
    value = math.fsum(inst.values[i] for i in np.flatnonzero(x))
    return x, value


def _better(a, b) -> bool:
    if a[0] != b[0]:
        return a[0] > b[0]
    if a[1] != b[1]:
        return a[1] < b[1]
    return a[2] < b[2]

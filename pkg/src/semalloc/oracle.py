"""Exhaustive solver for small instances of the reduced selection problem."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from semalloc import model
from semalloc.instance import Scenario, Selection
from semalloc.semantics import total_objective

MAX_BITS = 24
_CHUNK = 1 << 16


class InstanceTooLarge(ValueError):
    pass


@dataclass
class OracleResult:
    objective: float
    selection: Selection
    n_feasible: int


def selection_bits(scenario: Scenario) -> int:
    return sum(1 + d.n_triplets for d in scenario.devices)


def brute_force(scenario: Scenario, tol: float = model.FEASIBILITY_TOL) -> OracleResult:
    """Enumerate every (alpha, eta) and keep the best feasible one.

    Bit order is ``alpha_1..alpha_K`` followed by each device's ``eta`` in
    turn; candidate ``i`` is the bit string of ``i`` with the first bit most
    significant, so scanning ``i`` upward and keeping the first maximum
    returns the lexicographically smallest optimal bit string.
    """
    n_bits = selection_bits(scenario)
    if n_bits > MAX_BITS:
        raise InstanceTooLarge(f"{n_bits} selection bits exceed the limit of {MAX_BITS}")
    cfg = scenario.config
    k_total = scenario.n_devices
    scale = cfg.time_threshold_s * cfg.total_bandwidth_hz
    active = 1.0 / (scale * np.log2(1.0 + scenario.c_th))
    idle = model.LN2 / (scale * scenario.c_th)
    allowed = model.power_feasible(scenario)

    # column j of the bit matrix -> owning device and triplet payload/value
    owner = np.concatenate([np.full(d.n_triplets, k) for k, d in enumerate(scenario.devices)] + [np.zeros(0, int)]).astype(int)
    sizes = np.concatenate([d.sizes for d in scenario.devices] + [np.zeros(0)])
    values = np.concatenate([d.values for d in scenario.devices] + [np.zeros(0)])
    shifts = np.arange(n_bits - 1, -1, -1, dtype=np.int64)

    best_obj, best_idx, n_feasible = -1.0, 0, 0
    total = 1 << n_bits
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        bits = ((idx[:, None] >> shifts[None, :]) & 1).astype(float)
        alpha = bits[:, :k_total]
        eta = bits[:, k_total:]
        a_per_item = alpha[:, owner] if owner.size else np.zeros_like(eta)
        cost = np.where(a_per_item > 0, active, idle) * sizes
        lhs = (eta * cost).sum(axis=1)
        power_ok = np.all((alpha == 0) | allowed[None, :], axis=1)
        feasible = power_ok & (lhs <= 1.0 + tol)
        obj = (eta * a_per_item * values).sum(axis=1)
        n_feasible += int(feasible.sum())
        obj = np.where(feasible, obj, -1.0)
        j = int(np.argmax(obj))
        if obj[j] > best_obj:
            best_obj, best_idx = float(obj[j]), int(idx[j])

    bitstr = format(best_idx, f"0{n_bits}b") if n_bits else ""
    alpha = np.array([int(c) for c in bitstr[:k_total]], dtype=np.int8)
    eta, pos = [], k_total
    for d in scenario.devices:
        eta.append(np.array([int(c) for c in bitstr[pos : pos + d.n_triplets]], dtype=np.int8))
        pos += d.n_triplets
    sel = Selection(alpha, eta)
    return OracleResult(total_objective(sel, scenario), sel, n_feasible)

"""Comparison schemes with a fixed per-device bandwidth split.

* ``eb_semc``: equal split, importance-aware triplet choice per device.
* ``rb_semc``: random split (uniform on the simplex), same triplet choice.
* ``trad_semc``: equal split, triplets sent in source order until the
  deadline; only complete triplets count.

Every scheme transmits at the minimum BER-feasible power; devices that would
need more than the power cap stay silent but keep their bandwidth share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from semalloc import model
from semalloc.instance import Allocation, Scenario, Selection
from semalloc.knapsack import KnapsackInstance, solve_exact
from semalloc.semantics import se_percent, total_objective


@dataclass
class BaselineResult:
    scheme: str
    selection: Selection
    allocation: Allocation
    objective: float
    se_percent: float


def per_device_capacity_bits(band: np.ndarray, scenario: Scenario) -> np.ndarray:
    """Bits each device can push within the deadline at the BER-floor SNR."""
    cfg = scenario.config
    return np.array([model.rate_bps(b, cfg, scenario.c_th) * cfg.time_threshold_s for b in band])


def _knapsack_selection(device, capacity_bits: float) -> np.ndarray:
    if device.n_triplets == 0:
        return np.zeros(0, dtype=np.int8)
    x, _ = solve_exact(KnapsackInstance(device.values, device.sizes, capacity_bits))
    return x


def _prefix_selection(device, capacity_bits: float) -> np.ndarray:
    eta = np.zeros(device.n_triplets, dtype=np.int8)
    sent = 0.0
    for n, size in enumerate(device.sizes):
        if sent + size > capacity_bits:
            break
        sent += size
        eta[n] = 1
    return eta


def _require_devices(scenario: Scenario) -> int:
    if scenario.n_devices < 1:
        raise ValueError("baselines need at least one device")
    return scenario.n_devices


def _fixed_split(scheme: str, scenario: Scenario, band: np.ndarray, pick) -> BaselineResult:
    ok = model.power_feasible(scenario)
    caps = per_device_capacity_bits(band, scenario)
    alpha = ok.astype(np.int8)
    eta = [
        pick(dev, caps[k]) if ok[k] else np.zeros(dev.n_triplets, dtype=np.int8)
        for k, dev in enumerate(scenario.devices)
    ]
    sel = Selection(alpha, eta)
    power = np.array(
        [model.required_power(int(a), scenario.c_th, d.link) for a, d in zip(alpha, scenario.devices)]
    )
    obj = total_objective(sel, scenario)
    return BaselineResult(scheme, sel, Allocation(power, band.astype(float)), obj, se_percent(sel, scenario))


def eb_semc(scenario: Scenario) -> BaselineResult:
    k = _require_devices(scenario)
    return _fixed_split("EB-SEMC", scenario, np.full(k, 1.0 / k), _knapsack_selection)


def random_split(n: int, seed: int) -> np.ndarray:
    """Bandwidth fractions uniform on the simplex (normalised exponentials)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.standard_exponential(size=n)
    return draws / draws.sum()


def rb_semc(scenario: Scenario, seed: int = 0) -> BaselineResult:
    _require_devices(scenario)
    band = random_split(scenario.n_devices, seed)
    return _fixed_split("RB-SEMC", scenario, band, _knapsack_selection)


def trad_semc(scenario: Scenario) -> BaselineResult:
    k = _require_devices(scenario)
    return _fixed_split("Trad-SEMC", scenario, np.full(k, 1.0 / k), _prefix_selection)


def check_constraints(result: BaselineResult, scenario: Scenario, rel_tol: float = 1e-9) -> None:
    """Assert deadline, BER, bandwidth and power constraints under the scheme's allocation."""
    cfg = scenario.config
    alloc = result.allocation
    bits = model.selected_bits(result.selection, scenario)
    assert alloc.band_fraction.min(initial=0.0) >= 0
    assert math.fsum(alloc.band_fraction) <= 1.0 + rel_tol
    for k, (a, dev) in enumerate(zip(result.selection.alpha, scenario.devices)):
        if not a:
            continue
        gamma = model.snr(alloc.power_w[k], dev.link)
        assert scenario.ber_model.ber(gamma) <= cfg.ber_threshold * (1 + rel_tol), f"device {k} BER"
        assert alloc.power_w[k] <= cfg.max_power_w * (1 + rel_tol), f"device {k} power"
        rate = model.rate_bps(alloc.band_fraction[k], cfg, gamma)
        t = model.tx_time_s(bits[k], rate)
        assert t <= cfg.time_threshold_s * (1 + rel_tol), f"device {k} deadline"

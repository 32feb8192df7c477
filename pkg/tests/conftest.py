import math

import numpy as np
import pytest

from semalloc.instance import Device, Scenario, Selection
from semalloc.model import ChannelConfig, DeviceLink, noise_power
from semalloc.scenario import ScenarioSpec, generate_scenario
from semalloc.semantics import Triplet

# B = 1 MHz, PSD 1e-17 W/Hz integrated over B -> 1e-11 W, T_th = 8 ms,
# P_max = 10 mW, BER 1e-5 -> C_th = 1e5.  A device at 100 m with |h|^2 = 1
# then has D = 1e7 per watt and needs exactly P_max.
BASE_CFG = ChannelConfig()
LOG2_CTH = math.log2(1.0 + 1e5)


def make_scenario(devices, cfg=BASE_CFG, ber_model=None, seed=None):
    """devices: list of (distance_m, fading_gain, [(size_bits, importance, recovery), ...])."""
    n_w = noise_power(cfg)
    devs = []
    for dist, gain, trips in devices:
        triplets = tuple(Triplet(n, float(s), float(i), float(r)) for n, (s, i, r) in enumerate(trips))
        devs.append(Device(DeviceLink(dist, gain, n_w), triplets))
    kwargs = {}
    if ber_model is not None:
        kwargs["ber_model"] = ber_model
    return Scenario(cfg, tuple(devs), seed=seed, **kwargs)


def bits_for_active_weight(w, cfg=BASE_CFG):
    """Triplet size whose active bandwidth fraction is ``w``."""
    return w * cfg.time_threshold_s * cfg.total_bandwidth_hz * LOG2_CTH


def random_small_scenario(rng, k_max=3, n_max=3, cfg=BASE_CFG):
    """Hand-rolled random instance near the bandwidth limit at 100 m."""
    devices = []
    for _ in range(int(rng.integers(1, k_max + 1))):
        n = int(rng.integers(1, n_max + 1))
        trips = [
            (float(rng.uniform(0.05, 0.7) * bits_for_active_weight(1.0, cfg)), float(rng.uniform()), float(rng.uniform(0.5, 1)))
            for _ in range(n)
        ]
        gain = float(rng.choice([1.0, 1.5, 0.5]))  # 0.5 -> needs 2x the power cap
        devices.append((100.0, gain, trips))
    return make_scenario(devices, cfg)


@pytest.fixture
def default_scenario():
    return generate_scenario(ScenarioSpec(seed=0))


def all_selections(scenario):
    """Every (alpha, eta), independent of the library enumerator."""
    import itertools

    k = scenario.n_devices
    sizes = [d.n_triplets for d in scenario.devices]
    for bits in itertools.product((0, 1), repeat=k + sum(sizes)):
        alpha = np.array(bits[:k])
        eta, pos = [], k
        for n in sizes:
            eta.append(np.array(bits[pos : pos + n]))
            pos += n
        yield Selection(alpha, eta)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

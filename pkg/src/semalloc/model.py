"""Link-budget math and evaluation of the pooled bandwidth constraint.

All powers are in watts, bandwidths in Hz and times in seconds.  A device's
channel is summarised by its per-watt SNR coefficient ``D = |h|^2 / (d^2 N)``
so that ``snr = P * D``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from semalloc.instance import Scenario, Selection

LN2 = math.log(2.0)

# Tolerance used when certifying that a selection satisfies the pooled
# bandwidth constraint (sum of bandwidth fractions <= 1).
FEASIBILITY_TOL = 1e-9
# the power cap is inclusive; this absorbs round-off in C_th / D
POWER_REL_TOL = 1e-12


class InfeasibleRateError(ValueError):
    """Raised when a nonzero payload must be sent at zero rate."""


@dataclass(frozen=True)
class ChannelConfig:
    """Network-wide radio parameters.

    ``noise_variance_w`` overrides the integrated noise power.  When it is
    ``None`` the noise power seen by each device is the PSD integrated over
    the whole band.
    """

    total_bandwidth_hz: float = 1e6
    noise_psd_w_per_hz: float = 1e-17
    ber_threshold: float = 1e-5
    time_threshold_s: float = 8e-3
    max_power_w: float = 0.01
    noise_variance_w: float | None = None

    def __post_init__(self):
        for name in ("total_bandwidth_hz", "noise_psd_w_per_hz", "time_threshold_s", "max_power_w"):
            value = getattr(self, name)
            if not value > 0 or not math.isfinite(value):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if not 0.0 < self.ber_threshold < 1.0:
            raise ValueError(f"ber_threshold must lie in (0, 1), got {self.ber_threshold!r}")
        if self.noise_variance_w is not None and not self.noise_variance_w > 0:
            raise ValueError(f"noise_variance_w must be positive, got {self.noise_variance_w!r}")

    def replace(self, **changes) -> "ChannelConfig":
        fields = {
            "total_bandwidth_hz": self.total_bandwidth_hz,
            "noise_psd_w_per_hz": self.noise_psd_w_per_hz,
            "ber_threshold": self.ber_threshold,
            "time_threshold_s": self.time_threshold_s,
            "max_power_w": self.max_power_w,
            "noise_variance_w": self.noise_variance_w,
        }
        fields.update(changes)
        return ChannelConfig(**fields)


def noise_power(cfg: ChannelConfig) -> float:
    """Noise power in watts: PSD times total bandwidth unless overridden."""
    if cfg.noise_variance_w is not None:
        return cfg.noise_variance_w
    return cfg.noise_psd_w_per_hz * cfg.total_bandwidth_hz


@dataclass(frozen=True)
class DeviceLink:
    distance_m: float
    fading_gain: float
    noise_power_w: float

    def __post_init__(self):
        if not self.distance_m > 0:
            raise ValueError(f"distance_m must be positive, got {self.distance_m!r}")
        if not self.fading_gain >= 0:
            raise ValueError(f"fading_gain must be non-negative, got {self.fading_gain!r}")
        if not self.noise_power_w > 0:
            raise ValueError(f"noise_power_w must be positive, got {self.noise_power_w!r}")

    @property
    def channel_coefficient(self) -> float:
        return self.fading_gain / (self.distance_m**2 * self.noise_power_w)


class BerModel:
    """Monotone BER curve ``ber = f(snr)`` together with its inverse."""

    name = "abstract"

    def ber(self, gamma: float) -> float:
        raise NotImplementedError

    def snr_for(self, ber: float) -> float:
        raise NotImplementedError


class ReciprocalBer(BerModel):
    """``f(snr) = 1 / snr``."""

    name = "reciprocal"

    def ber(self, gamma: float) -> float:
        if gamma <= 0:
            return math.inf
        return 1.0 / gamma

    def snr_for(self, ber: float) -> float:
        return 1.0 / ber


BER_MODELS = {ReciprocalBer.name: ReciprocalBer}


def snr(power_w: float, link: DeviceLink) -> float:
    return power_w * link.channel_coefficient


def rate_bps(band_fraction: float, cfg: ChannelConfig, gamma: float) -> float:
    return band_fraction * cfg.total_bandwidth_hz * math.log2(1.0 + gamma)


def tx_time_s(selected_bits: float, rate: float) -> float:
    if selected_bits == 0:
        return 0.0
    if rate <= 0:
        raise InfeasibleRateError(f"cannot send {selected_bits} bits at rate {rate}")
    return selected_bits / rate


def c_threshold(model: BerModel, beta_th: float) -> float:
    """SNR floor that keeps the BER at ``beta_th``."""
    return model.snr_for(beta_th)


def required_power(alpha_k: int, c_th: float, link: DeviceLink) -> float:
    if not alpha_k:
        return 0.0
    if c_th == 0:
        return 0.0
    coeff = link.channel_coefficient
    if coeff == 0:
        return math.inf
    return c_th / coeff


def closed_form_bandwidth(alpha_k: int, selected_bits: float, cfg: ChannelConfig, c_th: float) -> float:
    """Bandwidth fraction that makes the transmission time exactly T_th.

    For a deselected device the value is the limit of the closed form as the
    selection variable goes to zero, which is what the pooled constraint uses.
    """
    if selected_bits == 0:
        return 0.0
    scale = cfg.time_threshold_s * cfg.total_bandwidth_hz
    if alpha_k:
        return selected_bits / (scale * math.log2(1.0 + c_th))
    return LN2 * selected_bits / (scale * c_th)


def selected_bits(selection: "Selection", scenario: "Scenario") -> np.ndarray:
    """Per-device payload W_k of a selection, in bits."""
    return np.array(
        [float(np.dot(eta, dev.sizes)) for eta, dev in zip(selection.eta, scenario.devices)],
        dtype=float,
    )


def exact_constraint_lhs(selection: "Selection", scenario: "Scenario") -> float:
    cfg = scenario.config
    c_th = scenario.c_th
    bits = selected_bits(selection, scenario)
    return math.fsum(
        closed_form_bandwidth(int(a), w, cfg, c_th) for a, w in zip(selection.alpha, bits)
    )


def relaxed_constraint_lhs(selection: "Selection", scenario: "Scenario") -> float:
    cfg = scenario.config
    c_th = scenario.c_th
    bits = selected_bits(selection, scenario)
    scale = LN2 / (cfg.time_threshold_s * cfg.total_bandwidth_hz)
    return scale * math.fsum((int(a) + 1.0 / c_th) * w for a, w in zip(selection.alpha, bits))


def power_feasible(scenario: "Scenario") -> np.ndarray:
    """Boolean mask of devices whose required power fits under the cap."""
    cap = scenario.config.max_power_w * (1.0 + POWER_REL_TOL)
    return np.array(
        [required_power(1, scenario.c_th, dev.link) <= cap for dev in scenario.devices],
        dtype=bool,
    )


def is_feasible(selection: "Selection", scenario: "Scenario", tol: float = FEASIBILITY_TOL) -> bool:
    """True when the selection meets the pooled bandwidth and power constraints."""
    if exact_constraint_lhs(selection, scenario) > 1.0 + tol:
        return False
    allowed = power_feasible(scenario)
    return not any(int(a) and not ok for a, ok in zip(selection.alpha, allowed))

"""Problem-instance containers shared by the solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from semalloc.model import (
    BerModel,
    ChannelConfig,
    DeviceLink,
    ReciprocalBer,
    c_threshold,
    noise_power,
)
from semalloc.semantics import KnowledgeBase, Triplet


@dataclass(frozen=True)
class Device:
    link: DeviceLink
    triplets: tuple[Triplet, ...]
    knowledge_base: KnowledgeBase | None = None
    position_m: tuple[float, float] | None = None

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.array([t.size_bits for t in self.triplets], dtype=float)

    @cached_property
    def values(self) -> np.ndarray:
        """Per-triplet importance x recovery."""
        return np.array([t.value for t in self.triplets], dtype=float)

    @property
    def n_triplets(self) -> int:
        return len(self.triplets)


@dataclass(frozen=True)
class Scenario:
    config: ChannelConfig
    devices: tuple[Device, ...]
    ber_model: BerModel = field(default_factory=ReciprocalBer)
    seed: int | None = None

    @property
    def n_devices(self) -> int:
        return len(self.devices)

    @cached_property
    def c_th(self) -> float:
        return c_threshold(self.ber_model, self.config.ber_threshold)

    def with_config(self, **changes) -> "Scenario":
        """Copy of the scenario with some channel parameters replaced.

        Device links are rebuilt when the noise power changes.
        """
        cfg = self.config.replace(**changes)
        n_w = noise_power(cfg)
        devices = tuple(
            Device(
                link=DeviceLink(d.link.distance_m, d.link.fading_gain, n_w),
                triplets=d.triplets,
                knowledge_base=d.knowledge_base,
                position_m=d.position_m,
            )
            if d.link.noise_power_w != n_w
            else d
            for d in self.devices
        )
        return Scenario(cfg, devices, self.ber_model, self.seed)


@dataclass
class Selection:
    """Binary user vector ``alpha`` and one triplet vector ``eta[k]`` per device."""

    alpha: np.ndarray
    eta: list[np.ndarray]

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.int8)
        self.eta = [np.asarray(e, dtype=np.int8) for e in self.eta]
        if len(self.alpha) != len(self.eta):
            raise ValueError(f"alpha has {len(self.alpha)} entries but eta has {len(self.eta)}")

    @classmethod
    def empty(cls, scenario: Scenario) -> "Selection":
        return cls(
            np.zeros(scenario.n_devices, dtype=np.int8),
            [np.zeros(d.n_triplets, dtype=np.int8) for d in scenario.devices],
        )

    @classmethod
    def full(cls, scenario: Scenario) -> "Selection":
        return cls(
            np.ones(scenario.n_devices, dtype=np.int8),
            [np.ones(d.n_triplets, dtype=np.int8) for d in scenario.devices],
        )

    def copy(self) -> "Selection":
        return Selection(self.alpha.copy(), [e.copy() for e in self.eta])

    def check(self, scenario: Scenario) -> None:
        if len(self.alpha) != scenario.n_devices:
            raise ValueError(f"selection covers {len(self.alpha)} devices, scenario has {scenario.n_devices}")
        for k, (e, d) in enumerate(zip(self.eta, scenario.devices)):
            if len(e) != d.n_triplets:
                raise ValueError(f"device {k}: eta has {len(e)} entries, device has {d.n_triplets} triplets")

    def bitstring(self) -> str:
        bits = list(self.alpha) + [b for e in self.eta for b in e]
        return "".join(str(int(b)) for b in bits)

    def __eq__(self, other):
        if not isinstance(other, Selection):
            return NotImplemented
        return (
            np.array_equal(self.alpha, other.alpha)
            and len(self.eta) == len(other.eta)
            and all(np.array_equal(a, b) for a, b in zip(self.eta, other.eta))
        )


@dataclass
class Allocation:
    power_w: np.ndarray
    band_fraction: np.ndarray

"""Seeded scenario generation and the scenario JSON format.

A scenario places ``K`` devices uniformly in a square with the base station
at its centre, draws Rayleigh power gains ``|h|^2 ~ Exp(1)``, and gives each
device a list of triplets with sizes (8 bits per letter), importance and
recovery scores.  Triplets are either synthetic (letter counts and scores
drawn from the configured ranges) or read from a spec file with texts, in
which case scores come from the hashing embedder.

Every random draw goes through one ``numpy.random.Generator(PCG64(seed))``
in a fixed order, so a spec and seed determine the scenario exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np

from semalloc.instance import Device, Scenario
from semalloc.model import BER_MODELS, ChannelConfig, DeviceLink, ReciprocalBer, noise_power
from semalloc.semantics import (
    HashEmbedder,
    KnowledgeBase,
    Triplet,
    importance_score,
    recovery_score,
    size_bits,
    tokenize,
)

RNG_ALGORITHM = "numpy.random.PCG64"
SCENARIO_FORMAT = "semalloc-scenario/1"


def reference_channel(**overrides) -> ChannelConfig:
    """Channel used in the reference experiments.

    The noise figure 1e-14 is applied directly as the noise variance in the
    SNR; the PSD field records the same number converted from mW/Hz.
    """
    params = dict(
        total_bandwidth_hz=1e6,
        noise_psd_w_per_hz=1e-17,
        ber_threshold=1e-5,
        time_threshold_s=8e-3,
        max_power_w=0.01,
        noise_variance_w=1e-14,
    )
    params.update(overrides)
    return ChannelConfig(**params)


class SpecError(ValueError):
    pass


@dataclass
class ScenarioSpec:
    n_devices: int = 10
    area_side_m: float = 1000.0
    bs_position: tuple[float, float] | None = None
    triplets_per_device: tuple[int, int] = (5, 15)
    letters_per_triplet: tuple[int, int] = (20, 80)
    importance_range: tuple[float, float] = (0.0, 1.0)
    recovery_range: tuple[float, float] = (0.5, 1.0)
    channel: ChannelConfig = field(default_factory=reference_channel)
    seed: int = 0
    # explicit devices with triplet texts; overrides the synthetic source
    devices: list[dict] | None = None
    corruption_prob: float = 0.2
    embedding_dim: int = 256

    def __post_init__(self):
        errors = []
        if self.devices is not None:
            if not self.devices:
                errors.append("devices: must list at least one device")
            self.n_devices = len(self.devices)
        if not isinstance(self.n_devices, int) or self.n_devices < 1:
            errors.append(f"n_devices: must be an integer >= 1, got {self.n_devices!r}")
        if not self.area_side_m > 0:
            errors.append(f"area_side_m: must be positive, got {self.area_side_m!r}")
        lo, hi = self.triplets_per_device
        if not (isinstance(lo, int) and isinstance(hi, int) and 0 <= lo <= hi):
            errors.append(f"triplets_per_device: need integers 0 <= lo <= hi, got {self.triplets_per_device!r}")
        lo, hi = self.letters_per_triplet
        if not (isinstance(lo, int) and isinstance(hi, int) and 0 <= lo <= hi):
            errors.append(f"letters_per_triplet: need integers 0 <= lo <= hi, got {self.letters_per_triplet!r}")
        for name in ("importance_range", "recovery_range"):
            lo, hi = getattr(self, name)
            if not 0.0 <= lo <= hi <= 1.0:
                errors.append(f"{name}: need 0 <= lo <= hi <= 1, got {(lo, hi)!r}")
        if not 0.0 <= self.corruption_prob <= 1.0:
            errors.append(f"corruption_prob: must lie in [0, 1], got {self.corruption_prob!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            errors.append(f"seed: must be a non-negative integer, got {self.seed!r}")
        if errors:
            raise SpecError("; ".join(errors))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SpecError(f"unknown spec fields: {', '.join(unknown)}")
        kwargs = dict(data)
        if "channel" in kwargs:
            try:
                kwargs["channel"] = reference_channel(**kwargs["channel"])
            except (TypeError, ValueError) as exc:
                raise SpecError(f"channel: {exc}") from exc
        for key in ("bs_position", "triplets_per_device", "letters_per_triplet", "importance_range", "recovery_range"):
            if kwargs.get(key) is not None:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


def _corrupt(text: str, prob: float, rng: np.random.Generator) -> str:
    out = []
    for tok in tokenize(text):
        if rng.random() < prob:
            letters = rng.integers(0, 26, size=max(len(tok), 3))
            tok = "".join(chr(ord("a") + int(c)) for c in letters)
        out.append(tok)
    return " ".join(out)


def _text_triplets(dev_spec: dict, spec: ScenarioSpec, rng: np.random.Generator, embedder: HashEmbedder):
    kb_text = dev_spec.get("knowledge_base")
    kb = KnowledgeBase(text=kb_text) if kb_text else None
    triplets = []
    for n, t in enumerate(dev_spec.get("triplets", [])):
        text = t.get("text")
        if text is None:
            size = float(t["size_bits"])
        else:
            size = float(size_bits(text))
        if "importance" in t:
            imp = float(t["importance"])
        elif text is not None and kb is not None:
            imp = importance_score(text, kb, embedder)
        else:
            raise SpecError(f"triplet {n}: importance missing and no text/knowledge base to score it")
        if "recovery" in t:
            rec = float(t["recovery"])
        elif text is not None:
            recovered = t.get("recovered_text")
            if recovered is None:
                recovered = _corrupt(text, spec.corruption_prob, rng)
            rec = recovery_score(text, recovered, embedder) if tokenize(recovered) else 0.0
        else:
            raise SpecError(f"triplet {n}: recovery missing and no text to score it")
        triplets.append(Triplet(n, size, imp, rec, text))
    return tuple(triplets), kb


def generate_scenario(spec: ScenarioSpec) -> Scenario:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    cfg = spec.channel
    n_w = noise_power(cfg)
    side = spec.area_side_m
    bs = spec.bs_position or (side / 2.0, side / 2.0)
    k_total = spec.n_devices

    positions = rng.uniform(0.0, side, size=(k_total, 2))
    gains = rng.standard_exponential(size=k_total)
    embedder = HashEmbedder(spec.embedding_dim)

    devices = []
    for k in range(k_total):
        x, y = (float(v) for v in positions[k])
        dist = math.hypot(x - bs[0], y - bs[1])
        gain = float(gains[k])
        kb = None
        if spec.devices is not None:
            dev_spec = spec.devices[k]
            dist = float(dev_spec.get("distance_m", dist))
            gain = float(dev_spec.get("fading_gain", gain))
            triplets, kb = _text_triplets(dev_spec, spec, rng, embedder)
        else:
            n_trip = int(rng.integers(spec.triplets_per_device[0], spec.triplets_per_device[1] + 1))
            letters = rng.integers(spec.letters_per_triplet[0], spec.letters_per_triplet[1] + 1, size=n_trip)
            imp = rng.uniform(*spec.importance_range, size=n_trip)
            rec = rng.uniform(*spec.recovery_range, size=n_trip)
            triplets = tuple(
                Triplet(n, float(8 * letters[n]), float(imp[n]), float(rec[n])) for n in range(n_trip)
            )
        devices.append(Device(DeviceLink(dist, gain, n_w), triplets, kb, (x, y)))
    return Scenario(cfg, tuple(devices), ReciprocalBer(), spec.seed)


def scenario_to_dict(scenario: Scenario) -> dict:
    devices = []
    for k, dev in enumerate(scenario.devices):
        entry = {
            "id": k,
            "distance_m": dev.link.distance_m,
            "fading_gain": dev.link.fading_gain,
            "triplets": [
                {
                    "id": t.id,
                    "size_bits": t.size_bits,
                    "importance": t.importance,
                    "recovery": t.recovery,
                    "text": t.text,
                }
                for t in dev.triplets
            ],
        }
        if dev.position_m is not None:
            entry["position_m"] = list(dev.position_m)
        if dev.knowledge_base is not None and dev.knowledge_base.text is not None:
            entry["knowledge_base"] = dev.knowledge_base.text
        devices.append(entry)
    return {
        "format": SCENARIO_FORMAT,
        "rng": RNG_ALGORITHM,
        "seed": scenario.seed,
        "ber_model": scenario.ber_model.name,
        "channel": asdict(scenario.config),
        "devices": devices,
    }


def scenario_from_dict(data: dict) -> Scenario:
    if data.get("format") != SCENARIO_FORMAT:
        raise SpecError(f"format: expected {SCENARIO_FORMAT!r}, got {data.get('format')!r}")
    try:
        cfg = ChannelConfig(**data["channel"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"channel: {exc}") from exc
    ber_name = data.get("ber_model", ReciprocalBer.name)
    if ber_name not in BER_MODELS:
        raise SpecError(f"ber_model: unknown model {ber_name!r}")
    n_w = noise_power(cfg)
    devices = []
    for k, d in enumerate(data.get("devices", [])):
        try:
            triplets = tuple(
                Triplet(int(t["id"]), float(t["size_bits"]), float(t["importance"]), float(t["recovery"]), t.get("text"))
                for t in d["triplets"]
            )
            link = DeviceLink(float(d["distance_m"]), float(d["fading_gain"]), n_w)
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"devices[{k}]: {exc}") from exc
        kb = KnowledgeBase(text=d["knowledge_base"]) if d.get("knowledge_base") else None
        pos = tuple(d["position_m"]) if d.get("position_m") is not None else None
        devices.append(Device(link, triplets, kb, pos))
    return Scenario(cfg, tuple(devices), BER_MODELS[ber_name](), data.get("seed"))


def dumps_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2, sort_keys=True) + "\n"


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def load_spec(path) -> ScenarioSpec:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise SpecError("spec file must hold a JSON object")
    return ScenarioSpec.from_dict(data)

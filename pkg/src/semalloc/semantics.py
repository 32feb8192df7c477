"""Triplets, text similarity scores and the semantic-efficiency objective."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

if TYPE_CHECKING:
    from semalloc.instance import Scenario, Selection

BITS_PER_LETTER = 8

_TOKEN_RE = re.compile(r"[^\W_]+")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def letter_count(text: str) -> int:
    """Number of alphabetic characters; spaces, digits and punctuation are ignored."""
    return sum(1 for ch in text if ch.isalpha())


def size_bits(text: str) -> int:
    return BITS_PER_LETTER * letter_count(text)


@dataclass(frozen=True)
class Triplet:
    id: int
    size_bits: float
    importance: float
    recovery: float
    text: str | None = None

    def __post_init__(self):
        if not self.size_bits >= 0:
            raise ValueError(f"triplet {self.id}: size_bits must be >= 0, got {self.size_bits!r}")
        for name in ("importance", "recovery"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"triplet {self.id}: {name} must lie in [0, 1], got {value!r}")
        if self.text is not None and self.size_bits != size_bits(self.text):
            raise ValueError(
                f"triplet {self.id}: size_bits {self.size_bits} does not match "
                f"{BITS_PER_LETTER} x letters of {self.text!r}"
            )

    @property
    def value(self) -> float:
        return self.importance * self.recovery


@dataclass(frozen=True)
class KnowledgeBase:
    text: str | None = None
    vector: tuple[float, ...] | None = None

    def embedding(self, embedder: "HashEmbedder") -> np.ndarray:
        if self.vector is not None:
            vec = np.asarray(self.vector, dtype=float)
        elif self.text is not None:
            vec = embedder.embed(self.text)
        else:
            raise ValueError("knowledge base has neither text nor vector")
        if not np.any(vec):
            raise ValueError("knowledge base embedding is the zero vector")
        return vec


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.casefold())


class HashEmbedder:
    """Bag-of-words hashing embedder.

    Each case-folded token adds one count at ``fnv1a_64(utf8(token)) % dim``.
    The map is fixed, so vectors are reproducible across processes and
    platforms (unlike Python's salted ``hash``).
    """

    def __init__(self, dim: int = 256):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        tokens = tokenize(text)
        if not tokens:
            raise ValueError(f"cannot embed text without tokens: {text!r}")
        vec = np.zeros(self.dim)
        for tok in tokens:
            vec[fnv1a_64(tok.encode("utf-8")) % self.dim] += 1.0
        return vec


def embed(embedder: HashEmbedder, text: str) -> np.ndarray:
    return embedder.embed(text)


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0 or nv == 0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    c = float(np.dot(u, v)) / (nu * nv)
    return min(1.0, max(-1.0, c))


def _clamped_similarity(a: np.ndarray, b: np.ndarray) -> float:
    return min(1.0, max(0.0, cosine(a, b)))


def importance_score(triplet_text: str, kb: KnowledgeBase | str, embedder: HashEmbedder) -> float:
    if isinstance(kb, str):
        kb = KnowledgeBase(text=kb)
    return _clamped_similarity(embedder.embed(triplet_text), kb.embedding(embedder))


def recovery_score(original_text: str, recovered_text: str, embedder: HashEmbedder) -> float:
    return _clamped_similarity(embedder.embed(original_text), embedder.embed(recovered_text))


def device_semantic_efficiency(eta, triplets: Sequence[Triplet]) -> float:
    eta = np.asarray(eta)
    if len(eta) != len(triplets):
        raise ValueError(f"eta has length {len(eta)} but device has {len(triplets)} triplets")
    return math.fsum(t.value for bit, t in zip(eta, triplets) if bit)


def total_objective(selection: "Selection", scenario: "Scenario") -> float:
    return math.fsum(
        device_semantic_efficiency(eta, dev.triplets)
        for a, eta, dev in zip(selection.alpha, selection.eta, scenario.devices)
        if a
    )


def total_semantic_mass(scenario: "Scenario") -> float:
    return math.fsum(t.value for dev in scenario.devices for t in dev.triplets)


def se_percent(selection: "Selection", scenario: "Scenario") -> float:
    denom = total_semantic_mass(scenario)
    if denom <= 0:
        raise ValueError("semantic efficiency is undefined: total importance x recovery is zero")
    return min(100.0, 100.0 * total_objective(selection, scenario) / denom)


IMPORTANCE_COLUMNS = ("device_id", "triplet_id", "text", "importance", "recovery")


def importance_rows(scenario: "Scenario") -> Iterable[tuple]:
    for k, dev in enumerate(scenario.devices):
        for t in dev.triplets:
            yield (k, t.id, t.text or "", repr(t.importance), repr(t.recovery))


def write_importance_csv(scenario: "Scenario", stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(IMPORTANCE_COLUMNS)
    writer.writerows(importance_rows(scenario))

"""Quantum erasure and depolarizing channels, reduced to X/Z error bit strings."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ERASURE = "erasure"
DEPOLARIZING = "depolarizing"
KINDS = (ERASURE, DEPOLARIZING)


@dataclass(frozen=True)
class ChannelModel:
    kind: str
    param: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}; expected one of {KINDS}")
        if not (0.0 <= self.param <= 1.0) or math.isnan(self.param):
            raise ValueError(f"channel parameter {self.param} outside [0, 1]")

    @classmethod
    def parse(cls, text: str) -> ChannelModel:
        """Parse ``kind:param``, e.g. ``erasure:0.3`` or ``depolarizing:0.05``."""
        kind, sep, param = text.partition(":")
        if not sep:
            raise ValueError(f"channel spec {text!r} must look like kind:param")
        try:
            value = float(param)
        except ValueError as exc:
            raise ValueError(f"bad channel parameter in {text!r}") from exc
        return cls(kind.strip().lower(), value)

    def with_param(self, param: float) -> ChannelModel:
        return ChannelModel(self.kind, param)

    def __str__(self) -> str:
        return f"{self.kind}:{self.param!r}"


def quantum_erasure(eps: float) -> ChannelModel:
    return ChannelModel(ERASURE, eps)


def depolarizing(p: float) -> ChannelModel:
    return ChannelModel(DEPOLARIZING, p)


@dataclass(frozen=True, eq=False)
class PauliErrorSample:
    """X part, Z part and erasure flags of one channel realisation."""

    e_x: np.ndarray
    e_z: np.ndarray
    erased: np.ndarray  # boolean mask; all False for depolarizing noise

    @property
    def n(self) -> int:
        return int(self.e_x.size)

    @property
    def erased_indices(self) -> np.ndarray:
        return np.flatnonzero(self.erased)


def sample(ch: ChannelModel, n: int, rng: np.random.Generator) -> PauliErrorSample:
    if n < 1:
        raise ValueError("sample length must be >= 1")
    if ch.kind == ERASURE:
        erased = rng.random(n) < ch.param
        bits = rng.integers(0, 2, size=(2, n), dtype=np.uint8)
        bits &= erased.astype(np.uint8)
        return PauliErrorSample(bits[0], bits[1], erased)
    # Pauli draw: [0, p/3) -> X, [p/3, 2p/3) -> Y, [2p/3, p) -> Z, else I
    r = rng.random(n)
    third = ch.param / 3.0
    is_x = r < third
    is_y = (r >= third) & (r < 2 * third)
    is_z = (r >= 2 * third) & (r < ch.param)
    e_x = (is_x | is_y).astype(np.uint8)
    e_z = (is_z | is_y).astype(np.uint8)
    return PauliErrorSample(e_x, e_z, np.zeros(n, dtype=bool))


def design_crossover(ch: ChannelModel) -> float:
    """Per-pipeline flip (or erasure) probability used to construct outer codes."""
    if ch.kind == ERASURE:
        return ch.param
    return 2.0 * ch.param / 3.0

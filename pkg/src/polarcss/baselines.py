"""Single-code reference schemes compared against the concatenation."""

from __future__ import annotations

import numpy as np

from . import polar
from .channels import ChannelModel, design_crossover
from .concat import CodingScheme, SideDecode, flip_llr, inner_bp_decode, inner_erasure_decode
from .css_ldpc import DEFAULT_MAX_ITERS, CssCode, Side, pipeline_view


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


class PolarOnlyScheme(CodingScheme):
    """The same polar code on both sides, directly on the physical qubits.

    Physical lengths that are not a power of two use a shortened code.
    """

    name = "polar-only"

    def __init__(self, n_physical: int, k: int, design_eps: float):
        if n_physical < 1:
            raise ValueError("n_physical must be >= 1")
        self.n_physical = n_physical
        self.design_eps = float(design_eps)
        self.spec = polar.construct(_next_pow2(n_physical), k, design_eps, n_tx=n_physical)

    def k_side(self, side: Side) -> int:
        return self.spec.k

    def describe(self) -> dict:
        return {
            "scheme": self.name,
            "n_physical": self.n_physical,
            "mother_n": self.spec.n,
            "k": self.spec.k,
            "design_eps": self.design_eps,
        }

    def encode_side(self, side: Side, info: np.ndarray) -> np.ndarray:
        return polar.encode_batch(self.spec, info)

    def decode_side(self, side, received, erased, channel: ChannelModel) -> SideDecode:
        batch = received.shape[0]
        if erased is not None:
            bits, delivered = polar.sc_decode_erasure_batch(self.spec, received, ~erased)
        else:
            mag = flip_llr(design_crossover(channel))
            bits = polar.sc_decode_soft_batch(self.spec, mag * (1.0 - 2.0 * received.astype(float)))
            delivered = np.ones_like(bits, dtype=bool)
        return SideDecode(
            bits=bits,
            delivered=delivered,
            ops=np.full(batch, polar.sc_ops(self.spec.n), dtype=np.int64),
            inner_converged=np.ones(batch),
            inner_iterations=np.zeros(batch),
        )


class LdpcOnlyScheme(CodingScheme):
    """``blocks`` independent copies of the inner code, no outer code.

    On the erasure channel information positions left undetermined by the
    inner solver count as erased (delivered=False).
    """

    name = "ldpc-only"

    def __init__(self, inner: CssCode, blocks: int = 1, max_bp_iters: int = DEFAULT_MAX_ITERS):
        if blocks < 1:
            raise ValueError("blocks must be >= 1")
        self.inner = inner
        self.blocks = blocks
        self.max_bp_iters = max_bp_iters
        self.pipelines = {s: pipeline_view(inner, s) for s in (Side.X, Side.Z)}
        self.n_physical = blocks * inner.n_in

    def k_side(self, side: Side) -> int:
        return self.blocks * self.pipelines[Side(side)].k_in

    def describe(self) -> dict:
        return {
            "scheme": self.name,
            "inner": dict(self.inner.params),
            "n_in": self.inner.n_in,
            "blocks": self.blocks,
            "max_bp_iters": self.max_bp_iters,
        }

    def encode_side(self, side: Side, info: np.ndarray) -> np.ndarray:
        pipe = self.pipelines[side]
        batch = info.shape[0]
        seg = info.reshape(batch * self.blocks, pipe.k_in)
        return pipe.encode_batch(seg).reshape(batch, self.n_physical)

    def decode_side(self, side, received, erased, channel: ChannelModel) -> SideDecode:
        pipe = self.pipelines[side]
        batch = received.shape[0]
        B = self.blocks
        rx = received.reshape(batch * B, pipe.n_in)
        if erased is not None:
            corrected, undetermined, resolved, ops = inner_erasure_decode(pipe, rx, erased.reshape(batch * B, pipe.n_in))
            delivered = ~undetermined[:, pipe.info_positions]
            iters = np.zeros(batch * B)
        else:
            corrected, resolved, iters, ops = inner_bp_decode(pipe, rx, design_crossover(channel), self.max_bp_iters)
            delivered = np.ones((batch * B, pipe.k_in), dtype=bool)
        bits = corrected[:, pipe.info_positions]
        return SideDecode(
            bits=bits.reshape(batch, B * pipe.k_in),
            delivered=delivered.reshape(batch, B * pipe.k_in),
            ops=ops.reshape(batch, B).sum(axis=1),
            inner_converged=resolved.reshape(batch, B).mean(axis=1),
            inner_iterations=np.asarray(iters, dtype=float).reshape(batch, B).mean(axis=1),
        )

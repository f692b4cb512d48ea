"""Polar outer codes over quantum LDPC CSS inner codes.

Per error side the pipeline is

    info --polar encode--> outer codeword (length B*k_in)
         --split into B segments--> systematic inner encoding (B*n_in bits)

and decoding runs the inner syndrome decoder block by block before handing
the inner information positions to the outer SC decoder.  On the erasure
channel positions the inner decoder cannot pin down are passed on as
erasures; on the depolarizing channel the inner BP hard decisions are passed
on with a calibrated reliability.

:class:`CodingScheme` is the batched interface shared with the polar-only and
LDPC-only baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import polar
from .channels import ERASURE, ChannelModel, PauliErrorSample, design_crossover, sample
from .css_ldpc import DEFAULT_MAX_ITERS, CssCode, PipelineCode, Side, decode_bp_batch, pipeline_view, syndrome_batch
from .gf2 import as_bits, solve_restricted_batch

SIDES = (Side.X, Side.Z)
CALIBRATION_BLOCKS = 10_000
CALIBRATION_TAG = 0x5EED_CA1B


def flip_llr(q: float) -> float:
    """``ln((1-q)/q)`` clamped to the decoders' LLR range."""
    if q <= 0.0:
        return polar.LLR_CLAMP
    if q >= 0.5:
        return 0.0
    return min(math.log((1.0 - q) / q), polar.LLR_CLAMP)


@dataclass
class SideDecode:
    """Batched decoding result for one error side."""

    bits: np.ndarray  # (batch, k)
    delivered: np.ndarray  # (batch, k) False where the decoder returned an erasure
    ops: np.ndarray  # (batch,)
    inner_converged: np.ndarray  # (batch,) fraction of inner blocks resolved
    inner_iterations: np.ndarray  # (batch,) mean inner iterations per block

    def errors(self, info: np.ndarray) -> np.ndarray:
        return ((self.bits != info) | ~self.delivered).sum(axis=1)


@dataclass(frozen=True)
class TrialOutcome:
    side_x_ok: bool
    side_z_ok: bool
    info_bit_errors_x: int
    info_bit_errors_z: int
    inner_converged_fraction: float
    inner_iterations: float = 0.0
    op_count: int = 0

    @property
    def ok(self) -> bool:
        return self.side_x_ok and self.side_z_ok


@dataclass
class OutcomeBatch:
    """Column-oriented :class:`TrialOutcome` records for a run of trials."""

    side_x_ok: np.ndarray
    side_z_ok: np.ndarray
    info_bit_errors_x: np.ndarray
    info_bit_errors_z: np.ndarray
    inner_converged_fraction: np.ndarray
    inner_iterations: np.ndarray
    op_count: np.ndarray

    def __len__(self) -> int:
        return int(self.side_x_ok.size)

    def outcomes(self) -> list[TrialOutcome]:
        return [
            TrialOutcome(
                bool(self.side_x_ok[i]),
                bool(self.side_z_ok[i]),
                int(self.info_bit_errors_x[i]),
                int(self.info_bit_errors_z[i]),
                float(self.inner_converged_fraction[i]),
                float(self.inner_iterations[i]),
                int(self.op_count[i]),
            )
            for i in range(len(self))
        ]

    @classmethod
    def concatenate(cls, parts: list[OutcomeBatch]) -> OutcomeBatch:
        names = cls.__dataclass_fields__
        return cls(**{k: np.concatenate([getattr(p, k) for p in parts]) for k in names})


class CodingScheme:
    """Batched encode/decode contract used by the Monte Carlo harness."""

    name = "abstract"
    n_physical: int

    def k_side(self, side: Side) -> int:
        raise NotImplementedError

    def encode_side(self, side: Side, info: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def decode_side(self, side: Side, received: np.ndarray, erased: np.ndarray | None, channel: ChannelModel) -> SideDecode:
        raise NotImplementedError

    def prepare(self, channel: ChannelModel, seed: int) -> None:
        """Hook for per-configuration calibration before trials run."""

    @property
    def k_x(self) -> int:
        return self.k_side(Side.X)

    @property
    def k_z(self) -> int:
        return self.k_side(Side.Z)

    @property
    def rate_classical(self) -> float:
        return self.k_x / self.n_physical

    @property
    def rate_quantum(self) -> float:
        return (self.k_x + self.k_z - self.n_physical) / self.n_physical

    def describe(self) -> dict:
        return {"scheme": self.name, "n_physical": self.n_physical}

    def run_batch(self, channel: ChannelModel, info_x, info_z, e_x, e_z, erased) -> OutcomeBatch:
        """Encode, apply the sampled errors, decode, and score both sides."""
        results = {}
        for side, info, err in ((Side.X, info_x, e_x), (Side.Z, info_z, e_z)):
            received = self.encode_side(side, info) ^ err
            er = erased if channel.kind == ERASURE else None
            results[side] = self.decode_side(side, received, er, channel)
        rx, rz = results[Side.X], results[Side.Z]
        ex, ez = rx.errors(info_x), rz.errors(info_z)
        return OutcomeBatch(
            side_x_ok=ex == 0,
            side_z_ok=ez == 0,
            info_bit_errors_x=ex,
            info_bit_errors_z=ez,
            inner_converged_fraction=(rx.inner_converged + rz.inner_converged) / 2.0,
            inner_iterations=(rx.inner_iterations + rz.inner_iterations) / 2.0,
            op_count=rx.ops + rz.ops,
        )


def _is_pow2(n: int) -> bool:
    return n >= 1 and not n & (n - 1)


def inner_erasure_decode(pipe: PipelineCode, received: np.ndarray, erased: np.ndarray):
    """Erasure-decode a (blocks, n_in) array.

    Returns corrected bits, the undetermined mask, per-block consistency (the
    erasure counterpart of BP convergence) and operation counts.
    """
    s = syndrome_batch(pipe.H, received)
    est, undetermined, consistent, ops = solve_restricted_batch(pipe.H.packed, pipe.n_in, s, erased)
    return received ^ est, undetermined, consistent, ops


def inner_bp_decode(pipe: PipelineCode, received: np.ndarray, q0: float, max_iters: int):
    s = syndrome_batch(pipe.H, received)
    est, conv, iters, ops = decode_bp_batch(pipe.H, s, np.full(pipe.n_in, flip_llr(q0)), max_iters, graph=pipe.graph)
    return received ^ est, conv, iters, ops


def calibrate_inner_residual(pipe: PipelineCode, channel: ChannelModel, seed: int, blocks: int = CALIBRATION_BLOCKS, max_iters: int = DEFAULT_MAX_ITERS) -> float:
    """Empirical bit error rate on the information positions after inner BP.

    Draws ``blocks`` independent blocks from a generator seeded by
    ``(seed, CALIBRATION_TAG)``.  A run with no residual errors returns half
    an error per observed bit instead of 0.  An inner code without checks
    returns the raw crossover.
    """
    if pipe.H.rows == 0:
        # no checks: the residual channel is the raw one, known exactly
        return design_crossover(channel)
    rng = np.random.default_rng([seed, CALIBRATION_TAG])
    errs = np.empty((blocks, pipe.n_in), dtype=np.uint8)
    for b in range(blocks):
        smp = sample(channel, pipe.n_in, rng)
        errs[b] = smp.e_x if pipe.side is Side.X else smp.e_z
    q0 = design_crossover(channel)
    corrected, _, _, _ = inner_bp_decode(pipe, errs, q0, max_iters)
    info = corrected[:, pipe.info_positions]
    total = info.size
    wrong = int(info.sum())
    if total == 0:
        return 0.0
    return max(wrong, 0.5) / total


@dataclass(eq=False)
class ConcatScheme(CodingScheme):
    inner: CssCode
    blocks: int
    pipelines: dict
    outers: dict
    design_eps: float
    outer_k_fraction: float
    max_bp_iters: int = DEFAULT_MAX_ITERS

    name = "concat"

    def __post_init__(self):
        self.residual_q: dict[Side, float] = {}

    @property
    def pipeline_x(self) -> PipelineCode:
        return self.pipelines[Side.X]

    @property
    def pipeline_z(self) -> PipelineCode:
        return self.pipelines[Side.Z]

    @property
    def outer_x(self) -> polar.PolarCodeSpec:
        return self.outers[Side.X]

    @property
    def outer_z(self) -> polar.PolarCodeSpec:
        return self.outers[Side.Z]

    @property
    def n_physical(self) -> int:
        return self.blocks * self.inner.n_in

    total_physical = n_physical

    def k_side(self, side: Side) -> int:
        return self.outers[Side(side)].k

    def describe(self) -> dict:
        d = {
            "scheme": self.name,
            "inner": dict(self.inner.params),
            "n_in": self.inner.n_in,
            "k_in": {s.value: self.pipelines[s].k_in for s in SIDES},
            "blocks": self.blocks,
            "outer_k_fraction": self.outer_k_fraction,
            "design_eps": self.design_eps,
            "max_bp_iters": self.max_bp_iters,
        }
        return d

    def encode_side(self, side: Side, info: np.ndarray) -> np.ndarray:
        pipe = self.pipelines[side]
        outer_cw = polar.encode_batch(self.outers[side], info)  # (batch, B*k_in)
        batch = outer_cw.shape[0]
        seg = outer_cw.reshape(batch * self.blocks, pipe.k_in)
        return pipe.encode_batch(seg).reshape(batch, self.n_physical)

    def prepare(self, channel: ChannelModel, seed: int) -> None:
        self.residual_q = {}
        if channel.kind != ERASURE:
            for side in SIDES:
                self.residual_q[side] = calibrate_inner_residual(
                    self.pipelines[side], channel, seed, max_iters=self.max_bp_iters
                )

    def decode_side(self, side: Side, received: np.ndarray, erased: np.ndarray | None, channel: ChannelModel) -> SideDecode:
        pipe = self.pipelines[side]
        outer = self.outers[side]
        batch = received.shape[0]
        B = self.blocks
        blocks_rx = received.reshape(batch * B, pipe.n_in)
        info_pos = pipe.info_positions
        if erased is not None:
            corrected, undetermined, resolved, ops = inner_erasure_decode(pipe, blocks_rx, erased.reshape(batch * B, pipe.n_in))
            sym = corrected[:, info_pos].reshape(batch, outer.n_tx)
            known = ~undetermined[:, info_pos].reshape(batch, outer.n_tx)
            bits, delivered = polar.sc_decode_erasure_batch(outer, sym, known)
            iters = np.zeros(batch * B)
        else:
            q0 = design_crossover(channel)
            corrected, resolved, iters, ops = inner_bp_decode(pipe, blocks_rx, q0, self.max_bp_iters)
            if side not in self.residual_q:
                raise RuntimeError("soft decoding needs prepare() to calibrate the inner residual")
            mag = flip_llr(self.residual_q[side])
            hard = corrected[:, info_pos].reshape(batch, outer.n_tx)
            bits = polar.sc_decode_soft_batch(outer, mag * (1.0 - 2.0 * hard.astype(float)))
            delivered = np.ones_like(bits, dtype=bool)
        total_ops = ops.reshape(batch, B).sum(axis=1) + polar.sc_ops(outer.n)
        return SideDecode(
            bits=bits,
            delivered=delivered,
            ops=total_ops,
            inner_converged=resolved.reshape(batch, B).mean(axis=1),
            inner_iterations=np.asarray(iters, dtype=float).reshape(batch, B).mean(axis=1),
        )


def build(inner: CssCode, blocks: int, outer_k_fraction: float, design_eps: float, max_bp_iters: int = DEFAULT_MAX_ITERS) -> ConcatScheme:
    """Assemble the concatenated scheme for both error sides."""
    if blocks < 1:
        raise ValueError("blocks must be >= 1")
    if not 0.0 < outer_k_fraction <= 1.0:
        raise ValueError("outer_k_fraction must lie in (0, 1]")
    pipelines, outers = {}, {}
    for side in SIDES:
        pipe = pipeline_view(inner, side)
        N = blocks * pipe.k_in
        if not _is_pow2(N):
            raise ValueError(f"outer length B*k_in = {blocks}*{pipe.k_in} = {N} is not a power of two ({side.value} side)")
        k = int(math.floor(outer_k_fraction * N + 0.5))
        pipelines[side] = pipe
        outers[side] = polar.construct(N, k, design_eps)
    return ConcatScheme(
        inner=inner,
        blocks=blocks,
        pipelines=pipelines,
        outers=outers,
        design_eps=float(design_eps),
        outer_k_fraction=float(outer_k_fraction),
        max_bp_iters=max_bp_iters,
    )


def encode(scheme: CodingScheme, info_x, info_z) -> tuple[np.ndarray, np.ndarray]:
    """Physical X- and Z-pipeline strings for one pair of information words."""
    ix = as_bits(info_x, scheme.k_x)
    iz = as_bits(info_z, scheme.k_z)
    return scheme.encode_side(Side.X, ix[None])[0], scheme.encode_side(Side.Z, iz[None])[0]


def decode(
    scheme: CodingScheme,
    noise: PauliErrorSample,
    channel: ChannelModel | None = None,
    info_x=None,
    info_z=None,
) -> TrialOutcome:
    """Decode one channel sample against the transmitted words (default: all zero).

    ``channel`` defaults to the quantum erasure model, whose decoders only use
    the sample's erased set.
    """
    if noise.n != scheme.n_physical:
        raise ValueError(f"sample length {noise.n} != physical length {scheme.n_physical}")
    if channel is None:
        channel = ChannelModel(ERASURE, 0.0)
    ix = np.zeros(scheme.k_x, np.uint8) if info_x is None else as_bits(info_x, scheme.k_x)
    iz = np.zeros(scheme.k_z, np.uint8) if info_z is None else as_bits(info_z, scheme.k_z)
    batch = scheme.run_batch(channel, ix[None], iz[None], noise.e_x[None], noise.e_z[None], noise.erased[None])
    return batch.outcomes()[0]

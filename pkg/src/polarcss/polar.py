"""Polar codes: construction by channel polarization, encoding, SC decoding.

The transform is ``x = u F^{(x)m}`` with ``F = [[1, 0], [1, 1]]`` in natural
order (no bit reversal).  With that ordering the successive-cancellation tree
pairs output ``j`` with output ``j + n/2`` at the root, so the first
polarization step acting on the raw channel decides the most significant bit
of the synthetic-channel index.

Decoders are batched: they take arrays of shape ``(batch, n)`` and run one
recursion for the whole batch.  Erasure-domain symbols are carried as a pair
``(value, known)``; at the public boundary they use the int8 alphabet
``{0, 1, ERASED}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gf2 import as_bits

ERASED = -1
LLR_CLAMP = 30.0


class DecodeFailure(Exception):
    """SC erasure decoding could not decide an information bit."""

    def __init__(self, index: int):
        super().__init__(f"information bit at index {index} is erased")
        self.index = index


def _log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"block length {n} is not a power of two")
    return n.bit_length() - 1


def bhattacharyya_bec(m: int, eps: float) -> np.ndarray:
    """Bhattacharyya parameters of the ``2**m`` synthetic channels of BEC(eps)."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability {eps} outside [0, 1]")
    if m < 0:
        raise ValueError("level count must be non-negative")
    z = np.array([float(eps)])
    for _ in range(m):
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def bhattacharyya_bec_profile(z_out) -> np.ndarray:
    """Synthetic-channel erasure probabilities for independent, non-identical BECs.

    ``z_out[j]`` is the erasure probability of output ``j``.  Follows the SC
    tree directly: the root combines outputs ``j`` and ``j + n/2``.  Agrees with
    :func:`bhattacharyya_bec` when every entry equals ``eps``.
    """
    z = np.asarray(z_out, dtype=float)
    _log2_exact(z.size)
    if z.size == 1:
        return z.copy()
    h = z.size // 2
    a, b = z[:h], z[h:]
    return np.concatenate(
        [bhattacharyya_bec_profile(a + b - a * b), bhattacharyya_bec_profile(a * b)]
    )


@dataclass(frozen=True, eq=False)
class PolarCodeSpec:
    """A polar code: block length ``n = 2**m``, information set, reliabilities.

    ``n_tx < n`` describes a shortened code: the last ``n - n_tx`` codeword
    bits are forced to zero by freezing the matching inputs, are not
    transmitted, and enter the decoder as known zeros.
    """

    m: int
    k: int
    info_set: np.ndarray
    z_params: np.ndarray
    eps: float
    n_tx: int = -1
    frozen_value: int = 0
    frozen_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = 1 << self.m
        info = np.asarray(self.info_set, dtype=np.int64)
        if self.n_tx < 0:
            object.__setattr__(self, "n_tx", n)
        if info.size != self.k or (info.size and (np.any(np.diff(info) <= 0) or info[0] < 0 or info[-1] >= n)):
            raise ValueError("info_set must hold k sorted distinct indices below n")
        if np.any(info >= self.n_tx):
            raise ValueError("shortened positions cannot carry information")
        z = np.asarray(self.z_params, dtype=float)
        if z.size != n or np.any((z < 0) | (z > 1)):
            raise ValueError("z_params must hold n values in [0, 1]")
        frozen = np.ones(n, dtype=bool)
        frozen[info] = False
        info.setflags(write=False)
        z.setflags(write=False)
        frozen.setflags(write=False)
        object.__setattr__(self, "info_set", info)
        object.__setattr__(self, "z_params", z)
        object.__setattr__(self, "frozen_mask", frozen)

    @property
    def n(self) -> int:
        return 1 << self.m

    @property
    def rate(self) -> float:
        return self.k / self.n_tx

    def union_bound(self) -> float:
        """``sum(Z_i for i in A)``, an upper bound on the SC block error rate on the BEC."""
        return float(self.z_params[self.info_set].sum())

    def to_text(self) -> str:
        lines = [str(self.m), str(self.k), repr(float(self.eps))]
        lines.append(" ".join(str(int(i)) for i in self.info_set))
        lines.append(" ".join(format(float(z), ".17g") for z in self.z_params))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> PolarCodeSpec:
        lines = text.splitlines()
        if len(lines) < 5:
            raise ValueError("polar spec text needs 5 lines")
        m, k, eps = int(lines[0]), int(lines[1]), float(lines[2])
        info = [int(t) for t in lines[3].split()]
        z = [float(t) for t in lines[4].split()]
        return cls(m=m, k=k, info_set=np.array(info, dtype=np.int64), z_params=np.array(z), eps=eps)


def construct(n: int, k: int, eps: float, n_tx: int | None = None) -> PolarCodeSpec:
    """Pick the ``k`` most reliable synthetic channels of BEC(eps).

    Ties go to the lower index.  With ``n_tx`` given the code is shortened to
    ``n_tx`` transmitted bits; the untransmitted tail is treated as a perfect
    channel when computing reliabilities and its inputs are always frozen.
    """
    m = _log2_exact(n)
    if n_tx is None:
        n_tx = n
    if not 1 <= n_tx <= n:
        raise ValueError(f"transmitted length {n_tx} must lie in [1, {n}]")
    if not 0 <= k <= n_tx:
        raise ValueError(f"k={k} must lie in [0, {n_tx}]")
    if n_tx == n:
        z = bhattacharyya_bec(m, eps)
        candidates = np.arange(n)
    else:
        if not 0.0 <= eps <= 1.0:
            raise ValueError(f"erasure probability {eps} outside [0, 1]")
        z_out = np.where(np.arange(n) < n_tx, eps, 0.0)
        z = bhattacharyya_bec_profile(z_out)
        candidates = np.arange(n_tx)
    order = candidates[np.argsort(z[candidates], kind="stable")]
    info = np.sort(order[:k])
    return PolarCodeSpec(m=m, k=k, info_set=info, z_params=z, eps=float(eps), n_tx=n_tx)


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Apply ``F^{(x)m}`` along the last axis (in-place butterfly, natural order)."""
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    _log2_exact(n)
    lead = x.shape[:-1]
    h = 1
    while h < n:
        v = x.reshape(lead + (n // (2 * h), 2, h))
        v[..., 0, :] ^= v[..., 1, :]
        h *= 2
    return x


def _place_info(spec: PolarCodeSpec, info: np.ndarray) -> np.ndarray:
    u = np.zeros(info.shape[:-1] + (spec.n,), dtype=np.uint8)
    u[..., spec.info_set] = info
    return u


def encode(spec: PolarCodeSpec, info) -> np.ndarray:
    """Encode one information word (length ``k``) to ``n_tx`` code bits."""
    info = as_bits(info, spec.k)
    return encode_batch(spec, info[None, :])[0]


def encode_batch(spec: PolarCodeSpec, info: np.ndarray) -> np.ndarray:
    info = np.asarray(info, dtype=np.uint8)
    if info.ndim != 2 or info.shape[1] != spec.k:
        raise ValueError(f"expected info words of length {spec.k}")
    return polar_transform(_place_info(spec, info))[:, : spec.n_tx]


def sc_ops(n: int) -> int:
    """Elementary operations of one SC pass: f, g and partial-sum XOR per butterfly."""
    return 3 * (n // 2) * _log2_exact(n)


# -- erasure-domain SC ---------------------------------------------------------


def _sc_erasure(val, known, frozen, lo, out_val, out_known):
    size = val.shape[1]
    if size == 1:
        if frozen[lo]:
            v = np.zeros_like(val)
            k = np.ones_like(known)
        else:
            v = val & known
            k = known
        out_val[:, lo] = v[:, 0]
        out_known[:, lo] = k[:, 0]
        return v, k
    h = size // 2
    av, ak, bv, bk = val[:, :h], known[:, :h], val[:, h:], known[:, h:]
    tv, tk = _sc_erasure(av ^ bv, ak & bk, frozen, lo, out_val, out_known)
    gk = bk | (ak & tk)
    gv = np.where(bk, bv, av ^ tv) & gk
    sv, sk = _sc_erasure(gv, gk, frozen, lo + h, out_val, out_known)
    return np.concatenate([tv ^ sv, sv], axis=1), np.concatenate([tk & sk, sk], axis=1)


def _pad_known(spec: PolarCodeSpec, val: np.ndarray, known: np.ndarray):
    if spec.n_tx == spec.n:
        return val, known
    pad = spec.n - spec.n_tx
    b = val.shape[0]
    val = np.concatenate([val, np.zeros((b, pad), dtype=np.uint8)], axis=1)
    known = np.concatenate([known, np.ones((b, pad), dtype=bool)], axis=1)
    return val, known


def sc_decode_erasure_batch(spec: PolarCodeSpec, values: np.ndarray, known: np.ndarray):
    """Batched SC over the ternary alphabet.

    ``values``/``known`` are (batch, n_tx).  Returns ``(info_bits, info_known)``
    of shape (batch, k).  An erased decision stays erased and propagates as an
    unknown partial sum, so known outputs are always correct on a pure
    erasure channel.
    """
    val = np.asarray(values, dtype=np.uint8)
    kn = np.asarray(known, dtype=bool)
    if val.ndim != 2 or val.shape[1] != spec.n_tx or kn.shape != val.shape:
        raise ValueError(f"expected (batch, {spec.n_tx}) channel symbols")
    val, kn = _pad_known(spec, val & kn, kn)
    b = val.shape[0]
    out_val = np.zeros((b, spec.n), dtype=np.uint8)
    out_known = np.zeros((b, spec.n), dtype=bool)
    _sc_erasure(val, kn, spec.frozen_mask, 0, out_val, out_known)
    return out_val[:, spec.info_set], out_known[:, spec.info_set]


def sc_decode_erasure(spec: PolarCodeSpec, y) -> np.ndarray:
    """SC-decode one received word over ``{0, 1, ERASED}``.

    Raises :class:`DecodeFailure` carrying the first information index whose
    decision is erased.
    """
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (spec.n_tx,):
        raise ValueError(f"expected {spec.n_tx} channel symbols")
    if not np.isin(y, (0, 1, ERASED)).all():
        raise ValueError("symbols must be 0, 1 or ERASED")
    known = y != ERASED
    vals = np.where(known, y, 0).astype(np.uint8)
    bits, ok = sc_decode_erasure_batch(spec, vals[None], known[None])
    if not ok[0].all():
        raise DecodeFailure(int(spec.info_set[np.argmin(ok[0])]))
    return bits[0]


# -- soft SC -------------------------------------------------------------------


def _check_node(a, b):
    # 2 atanh(tanh(a/2) tanh(b/2)) without overflow
    return np.logaddexp(0.0, a + b) - np.logaddexp(a, b)


def _sc_soft(llr, frozen, lo, out):
    size = llr.shape[1]
    if size == 1:
        if frozen[lo]:
            u = np.zeros((llr.shape[0], 1), dtype=np.uint8)
        else:
            u = (llr < 0).astype(np.uint8)
        out[:, lo] = u[:, 0]
        return u
    h = size // 2
    a, b = llr[:, :h], llr[:, h:]
    top = _sc_soft(_check_node(a, b), frozen, lo, out)
    bot = _sc_soft(b + (1.0 - 2.0 * top) * a, frozen, lo + h, out)
    return np.concatenate([top ^ bot, bot], axis=1)


def sc_decode_soft_batch(spec: PolarCodeSpec, llr: np.ndarray) -> np.ndarray:
    """Batched soft-input SC; positive LLR favours bit 0.  Returns (batch, k)."""
    llr = np.asarray(llr, dtype=float)
    if llr.ndim != 2 or llr.shape[1] != spec.n_tx:
        raise ValueError(f"expected (batch, {spec.n_tx}) LLRs")
    llr = np.clip(np.nan_to_num(llr, nan=0.0, posinf=LLR_CLAMP, neginf=-LLR_CLAMP), -LLR_CLAMP, LLR_CLAMP)
    if spec.n_tx < spec.n:
        pad = np.full((llr.shape[0], spec.n - spec.n_tx), LLR_CLAMP)
        llr = np.concatenate([llr, pad], axis=1)
    out = np.zeros((llr.shape[0], spec.n), dtype=np.uint8)
    _sc_soft(llr, spec.frozen_mask, 0, out)
    return out[:, spec.info_set]


def sc_decode_soft(spec: PolarCodeSpec, llr) -> np.ndarray:
    llr = np.asarray(llr, dtype=float)
    if llr.shape != (spec.n_tx,):
        raise ValueError(f"expected {spec.n_tx} LLRs")
    return sc_decode_soft_batch(spec, llr[None])[0]

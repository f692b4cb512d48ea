"""Quantum LDPC CSS codes in the binary symplectic picture.

An X error pattern is detected by the Z-type checks ``Hz`` and a Z error
pattern by ``Hx``; each side is decoded as a classical syndrome problem.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from . import gf2
from .gf2 import BitMatrix, NoSolution

LLR_CLAMP = 30.0
DEFAULT_MAX_ITERS = 50


class Side(str, enum.Enum):
    X = "X"
    Z = "Z"


class Outcome(str, enum.Enum):
    SUCCESS = "SUCCESS"
    DETECTED = "DETECTED"
    LOGICAL = "LOGICAL"


class DetectedFailure(Exception):
    """The erasure system was inconsistent; the syndrome cannot come from the erased set."""


@dataclass(frozen=True, eq=False)
class CssCode:
    Hx: BitMatrix
    Hz: BitMatrix
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.Hx.cols != self.Hz.cols:
            raise ValueError("Hx and Hz must have the same number of columns")
        if not gf2.mat_mul(self.Hx, self.Hz.T).is_zero():
            raise ValueError("Hx Hz^T != 0: not a CSS code")

    @property
    def n_in(self) -> int:
        return self.Hx.cols

    @cached_property
    def k_logical(self) -> int:
        return self.n_in - gf2.rank(self.Hx) - gf2.rank(self.Hz)

    def detecting(self, side: Side | str) -> BitMatrix:
        return self.Hz if Side(side) is Side.X else self.Hx

    def stabilizers(self, side: Side | str) -> BitMatrix:
        return self.Hx if Side(side) is Side.X else self.Hz


HAMMING_7_4 = BitMatrix.from_rows(["1010101", "0110011", "0001111"])


def steane_code() -> CssCode:
    return CssCode(HAMMING_7_4, HAMMING_7_4, params={"name": "steane"})


def identity_code(n_in: int = 1) -> CssCode:
    """Trivial inner code with no checks; every qubit is an information position."""
    empty = BitMatrix.zeros(0, n_in)
    return CssCode(empty, empty, params={"name": "identity", "n_in": n_in})


def circulant(first_row) -> np.ndarray:
    first_row = np.asarray(first_row, dtype=np.uint8)
    L = first_row.size
    return np.array([np.roll(first_row, i) for i in range(L)], dtype=np.uint8).reshape(L, L)


def deleted_rows(half_len: int, rows_kept: int) -> list[int]:
    """Evenly spaced rows to drop: every ``ceil(half_len/deleted)``-th row from 0.

    When the stride leaves fewer than ``deleted`` candidates the same stride is
    repeated from offsets 1, 2, ... until enough rows are collected.
    """
    d = half_len - rows_kept
    if d <= 0:
        return []
    step = math.ceil(half_len / d)
    chosen: list[int] = []
    offset = 0
    while len(chosen) < d:
        for i in range(offset, half_len, step):
            if i not in chosen:
                chosen.append(i)
                if len(chosen) == d:
                    break
        offset += 1
    return sorted(chosen)


def bicycle_construct(half_len: int, row_weight: int, rows_kept: int, seed: int) -> CssCode:
    """Dual-containing bicycle code ``H = [C | C^T]`` with ``Hx = Hz = H``."""
    if half_len < 1:
        raise ValueError("half_len must be positive")
    if row_weight % 2 or not 0 < row_weight <= half_len:
        raise ValueError("row_weight must be even and in (0, half_len]")
    if not 0 <= rows_kept <= half_len:
        raise ValueError("rows_kept must lie in [0, half_len]")
    rng = np.random.default_rng(seed)
    first = np.zeros(half_len, dtype=np.uint8)
    first[rng.choice(half_len, size=row_weight, replace=False)] = 1
    C = circulant(first)
    H0 = np.concatenate([C, C.T], axis=1)
    keep = np.setdiff1d(np.arange(half_len), deleted_rows(half_len, rows_kept))
    H = BitMatrix(H0[keep].reshape(keep.size, 2 * half_len))
    params = {
        "name": "bicycle",
        "half_len": half_len,
        "row_weight": row_weight,
        "rows_kept": rows_kept,
        "seed": seed,
    }
    return CssCode(H, H, params=params)


def syndrome(H: BitMatrix, e) -> np.ndarray:
    return gf2.mat_vec(H, e)


def syndrome_batch(H: BitMatrix, e: np.ndarray) -> np.ndarray:
    """Row-wise syndromes of a (batch, n) error array."""
    e = np.asarray(e)
    if e.shape[-1] != H.cols:
        raise ValueError("dimension mismatch")
    return (e.astype(np.int64) @ H.dense.T.astype(np.int64) & 1).astype(np.uint8)


def decode_erasure(H: BitMatrix, s, erased) -> gf2.RestrictedSolution:
    """Solve for an error supported on the erased set (free variables 0)."""
    try:
        return gf2.solve_restricted(H, s, erased)
    except NoSolution as exc:
        raise DetectedFailure(str(exc)) from exc


# -- syndrome belief propagation ---------------------------------------------------


class TannerGraph:
    """Edge lists and padded neighbourhoods of a parity-check matrix."""

    def __init__(self, H: BitMatrix):
        self.m, self.n = H.shape
        chk, var = np.nonzero(H.dense)
        self.edges = chk.size
        self.chk = chk
        self.var = var
        dc = np.bincount(chk, minlength=self.m) if self.m else np.zeros(0, int)
        dv = np.bincount(var, minlength=self.n)
        self.dc_max = int(dc.max()) if dc.size else 0
        self.dv_max = int(dv.max()) if dv.size else 0
        # padded edge index tables; index ``edges`` is a dummy slot
        self.check_edges = np.full((self.m, max(self.dc_max, 1)), self.edges, dtype=np.int64)
        self.var_edges = np.full((self.n, max(self.dv_max, 1)), self.edges, dtype=np.int64)
        fill_c = np.zeros(self.m, dtype=np.int64)
        fill_v = np.zeros(self.n, dtype=np.int64)
        for e, (c, v) in enumerate(zip(chk, var)):
            self.check_edges[c, fill_c[c]] = e
            fill_c[c] += 1
            self.var_edges[v, fill_v[v]] = e
            fill_v[v] += 1
        self.check_vars = np.where(self.check_edges < self.edges, np.append(var, 0)[self.check_edges], -1)


def decode_bp_batch(H: BitMatrix, s: np.ndarray, prior_llr: np.ndarray, max_iters: int = DEFAULT_MAX_ITERS, graph: TannerGraph | None = None):
    """Flooding sum-product syndrome decoding for a batch of syndromes.

    ``s`` is (batch, m); ``prior_llr`` is (n,) or (batch, n), positive meaning
    "no error".  Returns ``(estimate, converged, iterations, ops)`` with
    per-entry arrays; ``ops`` counts message updates (two per edge per
    iteration).
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    g = graph if graph is not None else TannerGraph(H)
    s = np.asarray(s, dtype=np.uint8)
    batch = s.shape[0]
    prior = np.broadcast_to(np.clip(np.asarray(prior_llr, dtype=float), -LLR_CLAMP, LLR_CLAMP), (batch, g.n))
    est = (prior < 0).astype(np.uint8)
    converged = np.zeros(batch, dtype=bool)
    iters = np.zeros(batch, dtype=np.int64)
    ops = np.zeros(batch, dtype=np.int64)
    if g.edges == 0:
        # nothing to pass messages on: the prior decision stands
        converged[:] = (syndrome_batch(H, est) == s).all(axis=1)
        return est, converged, iters, ops

    sign = 1.0 - 2.0 * s.astype(float)  # (batch, m)
    active = np.arange(batch)
    v2c = prior[:, g.var].copy()  # (batch, E)
    pri = prior.copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        for it in range(1, max_iters + 1):
            b = active.size
            # check -> variable, exclusive products via prefix/suffix
            t = np.tanh(np.concatenate([v2c, np.zeros((b, 1))], axis=1) / 2.0)
            t[:, -1] = 1.0
            tc = t[:, g.check_edges]  # (b, m, dc)
            pre = np.cumprod(np.concatenate([np.ones((b, g.m, 1)), tc[:, :, :-1]], axis=2), axis=2)
            suf = np.cumprod(np.concatenate([np.ones((b, g.m, 1)), tc[:, :, :0:-1]], axis=2), axis=2)[:, :, ::-1]
            excl = pre * suf * sign[active][:, :, None]
            msg = np.clip(2.0 * np.arctanh(excl), -LLR_CLAMP, LLR_CLAMP)
            c2v = np.zeros((b, g.edges + 1))
            valid = g.check_edges < g.edges
            c2v[:, g.check_edges[valid]] = msg[:, valid]
            c2v[:, -1] = 0.0
            # variable -> check
            total = pri[active] + c2v[:, g.var_edges].sum(axis=2)
            v2c = np.clip(total[:, g.var] - c2v[:, : g.edges], -LLR_CLAMP, LLR_CLAMP)
            hard = (total < 0).astype(np.uint8)
            est[active] = hard
            ops[active] += 2 * g.edges
            iters[active] = it
            pad = np.concatenate([hard, np.zeros((b, 1), dtype=np.uint8)], axis=1)
            synd = np.bitwise_xor.reduce(pad[:, np.where(g.check_vars >= 0, g.check_vars, g.n)], axis=2)
            done = (synd == s[active]).all(axis=1)
            converged[active[done]] = True
            keep = ~done
            active = active[keep]
            v2c = v2c[keep]
            if active.size == 0:
                break
    return est, converged, iters, ops


def decode_bp(H: BitMatrix, s, prior_llr, max_iters: int = DEFAULT_MAX_ITERS):
    """Single-syndrome BP; returns ``(estimate, converged, iterations)``."""
    s = gf2.as_bits(s, H.rows)
    prior = np.asarray(prior_llr, dtype=float)
    if prior.shape != (H.cols,):
        raise ValueError("prior_llr length must equal the number of columns")
    est, conv, iters, _ = decode_bp_batch(H, s[None], prior, max_iters)
    return est[0], bool(conv[0]), int(iters[0])


def decode_min_weight(H: BitMatrix, s, max_weight: int | None = None) -> np.ndarray:
    """Minimum-weight error with syndrome ``s`` by exhaustive search (small codes only)."""
    s = gf2.as_bits(s, H.rows)
    n = H.cols
    cols = [H.dense[:, j] for j in range(n)]
    top = n if max_weight is None else max_weight
    for w in range(top + 1):
        for supp in combinations(range(n), w):
            acc = np.zeros(H.rows, dtype=np.uint8)
            for j in supp:
                acc ^= cols[j]
            if np.array_equal(acc, s):
                e = np.zeros(n, dtype=np.uint8)
                e[list(supp)] = 1
                return e
    raise NoSolution("no error of bounded weight matches the syndrome")


def logical_failure(code: CssCode, e_true, e_hat, side: Side | str) -> Outcome:
    r = gf2.as_bits(e_true, code.n_in) ^ gf2.as_bits(e_hat, code.n_in)
    if gf2.mat_vec(code.detecting(side), r).any():
        return Outcome.DETECTED
    if gf2.in_row_space(code.stabilizers(side), r):
        return Outcome.SUCCESS
    return Outcome.LOGICAL


@dataclass(frozen=True, eq=False)
class PipelineCode:
    """Classical view of one CSS side: the code ``ker(H)`` in systematic form."""

    side: Side
    H: BitMatrix
    G_sys: BitMatrix
    info_positions: np.ndarray

    @property
    def n_in(self) -> int:
        return self.H.cols

    @property
    def k_in(self) -> int:
        return int(self.info_positions.size)

    @cached_property
    def graph(self) -> TannerGraph:
        return TannerGraph(self.H)

    def encode_batch(self, data: np.ndarray) -> np.ndarray:
        """Systematically encode (batch, k_in) segments to (batch, n_in)."""
        data = np.asarray(data, dtype=np.int64)
        return (data @ self.G_sys.dense.astype(np.int64) & 1).astype(np.uint8)


def pipeline_view(code: CssCode, side: Side | str) -> PipelineCode:
    side = Side(side)
    H = code.detecting(side)
    G, info = gf2.kernel_basis(H)
    return PipelineCode(side=side, H=H, G_sys=G, info_positions=np.array(info, dtype=np.int64))

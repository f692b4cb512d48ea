"""Exact linear algebra over GF(2).

Vectors are plain ``numpy`` arrays of ``uint8`` holding 0/1.  Matrices are
wrapped in :class:`BitMatrix`, which keeps a dense copy alongside lazily built
sparse (row support lists) and bit-packed views.  Single-matrix routines
eliminate on Python integers (one int per row, bit ``j`` = column ``j``);
the batched restricted solver used by the erasure decoders eliminates on
packed ``uint64`` words, vectorised over the batch axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

BitVector = np.ndarray


class NoSolution(Exception):
    """The restricted linear system has no solution."""


def as_bits(v, length: int | None = None) -> BitVector:
    """Coerce a 0/1 sequence into a ``uint8`` vector (values are validated)."""
    arr = np.asarray(v)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D bit vector, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("bit vector entries must be 0 or 1")
    if length is not None and arr.size != length:
        raise ValueError(f"expected length {length}, got {arr.size}")
    return arr.astype(np.uint8, copy=False)


def _row_to_int(row: np.ndarray) -> int:
    if row.size == 0:
        return 0
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


def _int_to_row(value: int, ncols: int) -> np.ndarray:
    nbytes = (ncols + 7) // 8
    raw = np.frombuffer(value.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, count=ncols, bitorder="little")


class BitMatrix:
    """Immutable 0/1 matrix with dense, sparse-by-row and packed views."""

    __slots__ = ("_dense", "__dict__")

    def __init__(self, data, cols: int | None = None):
        arr = np.asarray(data, dtype=np.int64)
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, 0 if cols is None else cols)
        if arr.ndim != 2:
            raise ValueError(f"BitMatrix needs 2-D data, got shape {arr.shape}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("BitMatrix entries must be 0 or 1")
        dense = arr.astype(np.uint8)
        dense.setflags(write=False)
        self._dense = dense

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_rows(cls, rows: Iterable[str | Sequence[int]], cols: int | None = None) -> BitMatrix:
        """Build from 0/1 strings (``"1010101"``) or 0/1 sequences."""
        parsed = [[int(c) for c in r] if isinstance(r, str) else list(r) for r in rows]
        if not parsed:
            return cls.zeros(0, cols or 0)
        return cls(parsed)

    @classmethod
    def from_sparse(cls, rows: int, cols: int, supports: Sequence[Iterable[int]]) -> BitMatrix:
        if len(supports) != rows:
            raise ValueError("one support list per row is required")
        dense = np.zeros((rows, cols), dtype=np.uint8)
        for i, supp in enumerate(supports):
            for j in supp:
                if not 0 <= j < cols:
                    raise ValueError(f"column index {j} out of range")
                dense[i, j] ^= 1
        return cls(dense)

    # -- views ----------------------------------------------------------
    @property
    def dense(self) -> np.ndarray:
        return self._dense

    @property
    def shape(self) -> tuple[int, int]:
        return self._dense.shape

    @property
    def rows(self) -> int:
        return self._dense.shape[0]

    @property
    def cols(self) -> int:
        return self._dense.shape[1]

    @cached_property
    def row_support(self) -> tuple[np.ndarray, ...]:
        """Sparse view: sorted column indices of the ones in each row."""
        return tuple(np.flatnonzero(r) for r in self._dense)

    @cached_property
    def col_support(self) -> tuple[np.ndarray, ...]:
        return tuple(np.flatnonzero(c) for c in self._dense.T)

    @cached_property
    def row_ints(self) -> tuple[int, ...]:
        return tuple(_row_to_int(r) for r in self._dense)

    @cached_property
    def packed(self) -> np.ndarray:
        """Rows packed little-endian into ``uint64`` words, shape (rows, words)."""
        return pack_rows(self._dense)

    def to_sparse(self) -> list[list[int]]:
        return [s.tolist() for s in self.row_support]

    def __getitem__(self, idx):
        i, j = idx
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry {idx} outside {self.shape}")
        return int(self._dense[i, j])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._dense, other._dense))

    def __hash__(self) -> int:
        return hash((self.shape, self._dense.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols}, nnz={int(self._dense.sum())})"

    @property
    def T(self) -> BitMatrix:
        return BitMatrix(self._dense.T)

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        return mat_mul(self, other)

    def select_rows(self, idx) -> BitMatrix:
        return BitMatrix(self._dense[np.asarray(idx, dtype=np.intp)].reshape(-1, self.cols))

    def is_zero(self) -> bool:
        return not self._dense.any()

    # -- text fixture format ---------------------------------------------
    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols}"]
        lines += ["".join("1" if b else "0" for b in r) for r in self._dense]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> BitMatrix:
        lines = text.splitlines()
        if not lines:
            raise ValueError("empty matrix text")
        try:
            rows, cols = (int(t) for t in lines[0].split())
        except ValueError as exc:
            raise ValueError(f"bad matrix header {lines[0]!r}") from exc
        body = lines[1 : 1 + rows]
        if len(body) != rows or any(len(r) != cols or set(r) - {"0", "1"} for r in body):
            raise ValueError("matrix body does not match its header")
        if rows == 0:
            return cls.zeros(0, cols)
        return cls.from_rows(body)


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis of a 0/1 array into little-endian ``uint64`` words."""
    bits = np.asarray(bits, dtype=np.uint8)
    ncols = bits.shape[-1]
    words = max(1, (ncols + 63) // 64)
    padded = np.zeros(bits.shape[:-1] + (words * 64,), dtype=np.uint8)
    padded[..., :ncols] = bits
    by = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(by).view("<u8").reshape(bits.shape[:-1] + (words,))


def unpack_rows(words: np.ndarray, ncols: int) -> np.ndarray:
    by = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(by, axis=-1, count=ncols, bitorder="little")


def _check_vec(M: BitMatrix, v) -> BitVector:
    v = as_bits(v)
    if v.size != M.cols:
        raise ValueError(f"dimension mismatch: matrix has {M.cols} columns, vector length {v.size}")
    return v


def mat_vec(M: BitMatrix, v) -> BitVector:
    """Return ``M v`` over GF(2)."""
    v = _check_vec(M, v)
    return (M.dense.astype(np.int64) @ v.astype(np.int64) & 1).astype(np.uint8)


def mat_mul(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    if A.cols != B.rows:
        raise ValueError(f"dimension mismatch: {A.shape} @ {B.shape}")
    return BitMatrix(A.dense.astype(np.int64) @ B.dense.astype(np.int64) & 1)


def transpose(M: BitMatrix) -> BitMatrix:
    return M.T


def _reduce(rows: list[int], column_order: Iterable[int]) -> tuple[list[int], list[int], list[int]]:
    """Reduced row echelon form on int-encoded rows.

    Returns ``(reduced_rows, pivots, leftover)`` where ``pivots[r]`` is the
    pivot column of ``reduced_rows[r]`` and ``leftover`` holds the rows that
    received no pivot (zero on every scanned column).  Columns are scanned in
    ``column_order`` so the lowest available index becomes a pivot.
    """
    rows = list(rows)
    pivots: list[int] = []
    done = 0
    for c in column_order:
        bit = 1 << c
        sel = next((i for i in range(done, len(rows)) if rows[i] & bit), None)
        if sel is None:
            continue
        rows[done], rows[sel] = rows[sel], rows[done]
        p = rows[done]
        for i in range(len(rows)):
            if i != done and rows[i] & bit:
                rows[i] ^= p
        pivots.append(c)
        done += 1
    return rows[:done], pivots, rows[done:]


def rref(M: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Reduced row echelon form (zero rows removed) and its pivot columns."""
    red, piv, _ = _reduce(list(M.row_ints), range(M.cols))
    if not red:
        return BitMatrix.zeros(0, M.cols), []
    return BitMatrix(np.array([_int_to_row(r, M.cols) for r in red])), piv


def rank(M: BitMatrix) -> int:
    """Row rank over GF(2)."""
    return len(_reduce(list(M.row_ints), range(M.cols))[1])


def in_row_space(M: BitMatrix, v) -> bool:
    """True iff ``v`` is a GF(2) combination of the rows of ``M``."""
    v = _check_vec(M, v)
    red, piv, _ = _reduce(list(M.row_ints), range(M.cols))
    x = _row_to_int(v)
    for r, c in zip(red, piv):
        if x >> c & 1:
            x ^= r
    return x == 0


@dataclass(frozen=True)
class RestrictedSolution:
    """Solution of ``M x = s`` with ``x`` supported on a given index set.

    ``x`` sets every free variable to 0.  ``undetermined`` marks the support
    positions whose value differs between solutions (nonzero in some kernel
    vector of the restricted system); all other positions are forced.
    """

    x: BitVector
    free_count: int
    undetermined: np.ndarray


def solve_restricted(M: BitMatrix, s, support: Iterable[int]) -> RestrictedSolution:
    s = as_bits(s)
    if s.size != M.rows:
        raise ValueError(f"syndrome length {s.size} does not match {M.rows} rows")
    supp = sorted({int(j) for j in support})
    if supp and not (0 <= supp[0] and supp[-1] < M.cols):
        raise ValueError("support index out of range")
    n = M.cols
    mask = sum(1 << j for j in supp)
    aug = 1 << n
    rows = [(r & mask) | (aug if sb else 0) for r, sb in zip(M.row_ints, s)]
    red, piv, leftover = _reduce(rows, supp)
    if any(leftover):
        raise NoSolution("restricted system is inconsistent")
    x = np.zeros(n, dtype=np.uint8)
    pivset = set(piv)
    free = [j for j in supp if j not in pivset]
    free_mask = sum(1 << j for j in free)
    undetermined = np.zeros(n, dtype=bool)
    undetermined[free] = True
    for r, c in zip(red, piv):
        x[c] = r >> n & 1
        if r & free_mask:
            undetermined[c] = True
    return RestrictedSolution(x=x, free_count=len(free), undetermined=undetermined)


def kernel_basis(M: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Systematic basis of ``ker(M)``.

    Returns ``(G, info)`` where ``info`` lists the non-pivot columns in
    ascending order and ``G`` restricted to those columns is the identity.
    """
    n = M.cols
    red, piv, _ = _reduce(list(M.row_ints), range(n))
    pivset = set(piv)
    info = [j for j in range(n) if j not in pivset]
    G = np.zeros((len(info), n), dtype=np.uint8)
    for t, f in enumerate(info):
        G[t, f] = 1
        for r, c in zip(red, piv):
            if r >> f & 1:
                G[t, c] = 1
    return BitMatrix(G.reshape(len(info), n)), info


def solve_restricted_batch(
    H_packed: np.ndarray, ncols: int, syndromes: np.ndarray, support: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised :func:`solve_restricted` over a batch of (syndrome, support) pairs.

    ``H_packed`` is ``BitMatrix.packed``; ``syndromes`` is (batch, rows) and
    ``support`` a (batch, ncols) boolean mask.  Returns
    ``(x, undetermined, consistent, ops)``; ``ops`` counts bit operations per
    batch entry, one per bit of every augmented row XOR.
    """
    batch = syndromes.shape[0]
    nrows = H_packed.shape[0]
    x = np.zeros((batch, ncols), dtype=np.uint8)
    undetermined = np.zeros((batch, ncols), dtype=bool)
    consistent = np.ones(batch, dtype=bool)
    ops = np.zeros(batch, dtype=np.int64)
    if batch == 0 or nrows == 0:
        undetermined[:] = support
        return x, undetermined, consistent, ops

    smask = pack_rows(support.astype(np.uint8))  # (batch, W)
    A = H_packed[None, :, :] & smask[:, None, :]  # (batch, rows, W)
    s = syndromes.astype(bool).copy()
    used = np.zeros((batch, nrows), dtype=bool)
    pivot_row = np.full((batch, ncols), -1, dtype=np.int64)
    ar = np.arange(batch)
    one = np.uint64(1)
    for c in range(ncols):
        w, b = divmod(c, 64)
        colbits = ((A[:, :, w] >> np.uint64(b)) & one).astype(bool)
        cand = colbits & ~used
        has = cand.any(axis=1)
        if not has.any():
            continue
        p = np.argmax(cand, axis=1)
        elim = colbits & has[:, None]
        elim[ar, p] = False
        prow = A[ar, p]  # (batch, W)
        ps = s[ar, p]
        A ^= np.where(elim[:, :, None], prow[:, None, :], np.uint64(0))
        s ^= elim & ps[:, None]
        used[ar[has], p[has]] = True
        pivot_row[has, c] = p[has]
        ops += elim.sum(axis=1) * (ncols + 1)

    consistent = ~(s & ~used).any(axis=1)
    is_pivot = pivot_row >= 0
    free = support & ~is_pivot
    free_packed = pack_rows(free.astype(np.uint8))  # (batch, W)
    # a pivot column is undetermined iff its reduced row touches a free column
    touches_free = ((A & free_packed[:, None, :]) != 0).any(axis=2)  # (batch, rows)
    safe_row = np.where(is_pivot, pivot_row, 0)
    rb = np.broadcast_to(ar[:, None], safe_row.shape)
    x[is_pivot] = s[rb, safe_row][is_pivot]
    undetermined = free | (is_pivot & touches_free[rb, safe_row])
    return x, undetermined, consistent, ops

"""Morton-hybrid index codec and the matrix container it addresses.

The matrix is cut into ``T x T`` blocks. Blocks are ordered along the Z curve
(NW, NE, SW, SE at every level) and each block is stored row-major, so

    encode(i, j) = interleave(i // T, j // T) * T**2 + (i % T) * T + j % T

with the block-row bit placed above the block-column bit in each pair.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from os import PathLike

import numpy as np

from ._validation import check_layout, check_square_matrix
from .field import FieldModulus


@dataclass(frozen=True)
class LayoutParams:
    """Side ``n`` (elements) and truncation block side ``t``; ``n == 2**m * t``."""

    n: int
    t: int
    m: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "m", check_layout(self.n, self.t))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "t", int(self.t))

    @property
    def block_size(self) -> int:
        return self.t * self.t

    @property
    def size(self) -> int:
        return self.n * self.n


# shift-and-mask dilation of 32-bit block coordinates
def spread_bits(x: int) -> int:
    x &= 0xFFFFFFFF
    x = (x | (x << 16)) & 0x0000FFFF0000FFFF
    x = (x | (x << 8)) & 0x00FF00FF00FF00FF
    x = (x | (x << 4)) & 0x0F0F0F0F0F0F0F0F
    x = (x | (x << 2)) & 0x3333333333333333
    x = (x | (x << 1)) & 0x5555555555555555
    return x


def compact_bits(x: int) -> int:
    x &= 0x5555555555555555
    x = (x | (x >> 1)) & 0x3333333333333333
    x = (x | (x >> 2)) & 0x0F0F0F0F0F0F0F0F
    x = (x | (x >> 4)) & 0x00FF00FF00FF00FF
    x = (x | (x >> 8)) & 0x0000FFFF0000FFFF
    x = (x | (x >> 16)) & 0x00000000FFFFFFFF
    return x


def encode(i: int, j: int, p: LayoutParams) -> int:
    """Morton-hybrid index of Cartesian cell ``(i, j)``."""
    n = p.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"cell ({i}, {j}) outside {n}x{n} matrix")
    t = p.t
    bi, li = divmod(i, t)
    bj, lj = divmod(j, t)
    return ((spread_bits(bi) << 1) | spread_bits(bj)) * (t * t) + li * t + lj


def _check_index(z: int, p: LayoutParams) -> None:
    if not 0 <= z < p.n * p.n:
        raise IndexError(f"Morton-hybrid index {z} outside [0, {p.n * p.n})")


def extract_i(z: int, p: LayoutParams) -> int:
    """Row coordinate of the cell stored at index ``z``."""
    _check_index(z, p)
    t = p.t
    block, off = divmod(z, t * t)
    return compact_bits(block >> 1) * t + off // t


def extract_j(z: int, p: LayoutParams) -> int:
    """Column coordinate of the cell stored at index ``z``."""
    _check_index(z, p)
    t = p.t
    block, off = divmod(z, t * t)
    return compact_bits(block) * t + off % t


def extract(z: int, p: LayoutParams) -> tuple[int, int]:
    _check_index(z, p)
    t = p.t
    block, off = divmod(z, t * t)
    li, lj = divmod(off, t)
    return compact_bits(block >> 1) * t + li, compact_bits(block) * t + lj


_U = np.uint64


def _spread_array(x: np.ndarray) -> np.ndarray:
    x = x.astype(_U) & _U(0xFFFFFFFF)
    x = (x | (x << _U(16))) & _U(0x0000FFFF0000FFFF)
    x = (x | (x << _U(8))) & _U(0x00FF00FF00FF00FF)
    x = (x | (x << _U(4))) & _U(0x0F0F0F0F0F0F0F0F)
    x = (x | (x << _U(2))) & _U(0x3333333333333333)
    x = (x | (x << _U(1))) & _U(0x5555555555555555)
    return x


def _compact_array(x: np.ndarray) -> np.ndarray:
    x = x.astype(_U) & _U(0x5555555555555555)
    x = (x | (x >> _U(1))) & _U(0x3333333333333333)
    x = (x | (x >> _U(2))) & _U(0x0F0F0F0F0F0F0F0F)
    x = (x | (x >> _U(4))) & _U(0x00FF00FF00FF00FF)
    x = (x | (x >> _U(8))) & _U(0x0000FFFF0000FFFF)
    x = (x | (x >> _U(16))) & _U(0x00000000FFFFFFFF)
    return x


def encode_array(i, j, p: LayoutParams) -> np.ndarray:
    """Elementwise :func:`encode` over broadcastable index arrays (int64 result)."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    n = p.n
    if i.size and (i.min() < 0 or i.max() >= n):
        raise IndexError(f"row index outside [0, {n})")
    if j.size and (j.min() < 0 or j.max() >= n):
        raise IndexError(f"column index outside [0, {n})")
    t = p.t
    bi, li = np.divmod(i, t)
    bj, lj = np.divmod(j, t)
    block = (_spread_array(bi) << _U(1)) | _spread_array(bj)
    return block.astype(np.int64) * (t * t) + li * t + lj


def extract_array(z, p: LayoutParams) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise inverse of :func:`encode_array`; returns ``(i, j)``."""
    z = np.asarray(z, dtype=np.int64)
    if z.size and (z.min() < 0 or z.max() >= p.n * p.n):
        raise IndexError(f"Morton-hybrid index outside [0, {p.n * p.n})")
    t = p.t
    block, off = np.divmod(z, t * t)
    li, lj = np.divmod(off, t)
    ub = block.astype(_U)
    i = _compact_array(ub >> _U(1)).astype(np.int64) * t + li
    j = _compact_array(ub).astype(np.int64) * t + lj
    return i, j


@lru_cache(maxsize=32)
def _permutation(n: int, t: int) -> np.ndarray:
    p = LayoutParams(n, t)
    i, j = np.indices((n, n), dtype=np.int64)
    perm = encode_array(i, j, p).ravel()
    perm.setflags(write=False)
    return perm


def permutation(p: LayoutParams) -> np.ndarray:
    """Flat Morton-hybrid offset of every cell, in row-major cell order."""
    return _permutation(p.n, p.t)


class MortonHybridMatrix:
    """Square GF(q) matrix stored as a flat array in Morton-hybrid order.

    The element at Cartesian ``(i, j)`` lives at ``data[encode(i, j)]``.
    """

    __slots__ = ("params", "modulus", "data")

    def __init__(self, params: LayoutParams, modulus: FieldModulus, data=None):
        self.params = params
        self.modulus = modulus
        if data is None:
            data = np.zeros(params.size, dtype=np.int64)
        else:
            data = np.asarray(data, dtype=np.int64)
            if data.shape != (params.size,):
                raise ValueError(
                    f"data must be flat with {params.size} entries, got shape {data.shape}"
                )
        self.data = data

    @classmethod
    def zeros(cls, n: int, t: int, q: int | FieldModulus = 2) -> MortonHybridMatrix:
        return cls(LayoutParams(n, t), _as_modulus(q))

    @classmethod
    def random(cls, n: int, t: int, q: int | FieldModulus = 2, rng=None) -> MortonHybridMatrix:
        rng = np.random.default_rng(rng)
        m = _as_modulus(q)
        p = LayoutParams(n, t)
        return cls(p, m, rng.integers(0, m.q, size=p.size, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def t(self) -> int:
        return self.params.t

    @property
    def q(self) -> int:
        return self.modulus.q

    def copy(self) -> MortonHybridMatrix:
        return MortonHybridMatrix(self.params, self.modulus, self.data.copy())

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return int(self.data[encode(ij[0], ij[1], self.params)])

    def __setitem__(self, ij: tuple[int, int], value: int) -> None:
        self.data[encode(ij[0], ij[1], self.params)] = int(value) % self.q

    def to_row_major(self) -> np.ndarray:
        return to_row_major(self)

    def __repr__(self):
        return f"MortonHybridMatrix(n={self.n}, t={self.t}, q={self.q})"


def _as_modulus(q) -> FieldModulus:
    return q if isinstance(q, FieldModulus) else FieldModulus(int(q))


def from_row_major(rows, t: int, q: int | FieldModulus = 2) -> MortonHybridMatrix:
    """Build a Morton-hybrid matrix from a dense row-major grid."""
    m = _as_modulus(q)
    arr = check_square_matrix(rows, t, m.q)
    p = LayoutParams(arr.shape[0], t)
    data = np.empty(p.size, dtype=np.int64)
    data[permutation(p)] = arr.ravel()
    return MortonHybridMatrix(p, m, data)


def to_row_major(M: MortonHybridMatrix) -> np.ndarray:
    """Dense row-major copy of ``M``."""
    n = M.params.n
    return M.data[permutation(M.params)].reshape(n, n)


def parse_matrix(text: str) -> MortonHybridMatrix:
    """Parse the text fixture format: header ``N T q`` then N rows of residues."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    header = lines[0].split()
    if len(header) != 3:
        raise ValueError(f"header must be 'N T q', got {lines[0]!r}")
    n, t, q = (int(v) for v in header)
    body = lines[1:]
    if len(body) != n:
        raise ValueError(f"expected {n} rows, found {len(body)}")
    rows = []
    for k, ln in enumerate(body):
        vals = [int(v) for v in ln.split()]
        if len(vals) != n:
            raise ValueError(f"row {k} has {len(vals)} entries, expected {n}")
        rows.append(vals)
    m = FieldModulus(q)
    arr = np.array(rows, dtype=np.int64).reshape(n, n)
    if arr.size and (arr.min() < 0 or arr.max() >= q):
        raise ValueError(f"entries must be residues in [0, {q})")
    return from_row_major(arr, t, m)


def format_matrix(M: MortonHybridMatrix) -> str:
    rows = to_row_major(M)
    out = [f"{M.n} {M.t} {M.q}"]
    out.extend(" ".join(str(int(v)) for v in row) for row in rows)
    return "\n".join(out) + "\n"


def read_matrix(path: str | PathLike) -> MortonHybridMatrix:
    with open(path, encoding="ascii") as fh:
        return parse_matrix(fh.read())


def write_matrix(M: MortonHybridMatrix, path: str | PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_matrix(M))

"""Sub-matrix descriptors, alignment/containment predicates, and quadrant splitting."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from math import isqrt
from typing import NamedTuple, Optional

from ._validation import ContractError
from .layout import MortonHybridMatrix, encode, extract, extract_i, extract_j


class Quadrant(IntEnum):
    NW = 0
    NE = 1
    SW = 2
    SE = 3


@dataclass(frozen=True, slots=True)
class SubmatrixDesc:
    """Rectangle of ``matrix`` starting at Morton-hybrid index ``sigma``, ``r`` rows by ``c`` columns.

    ``i`` and ``j`` cache the Cartesian start ``(extract_i(sigma), extract_j(sigma))``;
    leave them at -1 to have them derived.
    """

    matrix: MortonHybridMatrix
    sigma: int
    r: int
    c: int
    i: int = field(default=-1, compare=False, repr=False)
    j: int = field(default=-1, compare=False, repr=False)

    def __post_init__(self):
        if self.r < 0 or self.c < 0:
            raise ContractError(f"negative extent {self.r}x{self.c}")
        if self.i < 0 or self.j < 0:
            i, j = extract(self.sigma, self.matrix.params)
            object.__setattr__(self, "i", i)
            object.__setattr__(self, "j", j)
        n = self.matrix.params.n
        if self.i + self.r > n or self.j + self.c > n:
            raise ContractError(
                f"{self.r}x{self.c} sub-matrix at ({self.i}, {self.j}) exceeds {n}x{n} container"
            )

    @classmethod
    def at(cls, matrix: MortonHybridMatrix, i: int, j: int, r: int, c: int) -> SubmatrixDesc:
        """Descriptor for the ``r x c`` rectangle whose first cell is ``(i, j)``."""
        return cls(matrix, encode(i, j, matrix.params), r, c, i, j)

    @property
    def row(self) -> int:
        return self.i

    @property
    def col(self) -> int:
        return self.j

    @property
    def start(self) -> tuple[int, int]:
        return self.i, self.j

    @property
    def empty(self) -> bool:
        return self.r == 0 or self.c == 0

    def cells(self) -> set[tuple[int, int]]:
        i, j = self.i, self.j
        return {(i + a, j + b) for a in range(self.r) for b in range(self.c)}


@dataclass(frozen=True, slots=True)
class AlignedDesc:
    """Square aligned block of ``matrix``: ``lam`` elements from index ``alpha``.

    Square aligned blocks of the quad recursion occupy the contiguous range
    ``[alpha, alpha + lam)`` with ``alpha`` a multiple of ``lam``.
    """

    matrix: MortonHybridMatrix
    alpha: int
    lam: int

    def __post_init__(self):
        bs = self.matrix.params.block_size
        ratio, rem = divmod(self.lam, bs)
        if rem or ratio < 1 or ratio & (ratio - 1) or (ratio.bit_length() - 1) % 2:
            raise ContractError(f"lambda={self.lam} is not (2**d * T)**2")
        if self.alpha % self.lam or not 0 <= self.alpha < self.matrix.params.size:
            raise ContractError(f"alpha={self.alpha} is not a lambda-aligned offset")

    @classmethod
    def root(cls, matrix: MortonHybridMatrix) -> AlignedDesc:
        return cls(matrix, 0, matrix.params.size)

    @property
    def side(self) -> int:
        return isqrt(self.lam)

    @property
    def corner(self) -> tuple[int, int]:
        return extract(self.alpha, self.matrix.params)

    @property
    def is_base(self) -> bool:
        return self.lam == self.matrix.params.block_size

    def as_submatrix(self) -> SubmatrixDesc:
        s = self.side
        return SubmatrixDesc(self.matrix, self.alpha, s, s)


def is_aligned(s: SubmatrixDesc) -> bool:
    """True iff ``s`` starts on a block corner and is ``2**a * T`` by ``2**b * T``."""
    t = s.matrix.params.t
    i, j = s.i, s.j
    if i % t or j % t:
        return False
    for d in (s.r, s.c):
        if d < t or d % t:
            return False
        k = d // t
        if k & (k - 1):
            return False
    return True


def is_contained(s: SubmatrixDesc) -> bool:
    """True iff every cell of ``s`` lies in a single ``T x T`` row-major block."""
    if s.empty:
        return True
    t = s.matrix.params.t
    i, j = s.i, s.j
    return i // t == (i + s.r - 1) // t and j // t == (j + s.c - 1) // t


def quadrants(a: AlignedDesc) -> tuple[AlignedDesc, AlignedDesc, AlignedDesc, AlignedDesc]:
    """The NW, NE, SW, SE children of ``a``, stored consecutively in that order."""
    if a.is_base:
        raise ContractError("cannot split a T x T base-case block")
    q = a.lam // 4
    m, al = a.matrix, a.alpha
    return (
        AlignedDesc(m, al, q),
        AlignedDesc(m, al + q, q),
        AlignedDesc(m, al + 2 * q, q),
        AlignedDesc(m, al + 3 * q, q),
    )


class SplitResult(NamedTuple):
    pieces: tuple[Optional[SubmatrixDesc], ...]
    r_n: int
    c_w: int
    r_s: int
    c_e: int

    @property
    def offsets(self) -> tuple[tuple[int, int], ...]:
        """Row/column offset of each quadrant's piece from the start of the split descriptor."""
        return ((0, 0), (0, self.c_w), (self.r_n, 0), (self.r_n, self.c_w))


def _inside(a: AlignedDesc, s: SubmatrixDesc) -> bool:
    ai, aj = a.corner
    side = a.side
    i, j = s.i, s.j
    return ai <= i and aj <= j and i + s.r <= ai + side and j + s.c <= aj + side


def split_sub(a: AlignedDesc, s: SubmatrixDesc) -> SplitResult:
    """Cut ``s`` along the quadrant boundaries of ``a``.

    Pieces are indexed by :class:`Quadrant`; a quadrant that holds no cell of
    ``s`` gets ``None``.
    """
    if s.matrix is not a.matrix:
        raise ContractError("descriptor and aligned block reference different matrices")
    if not _inside(a, s):
        raise ContractError("sub-matrix is not inside the aligned block")
    p = a.matrix.params
    lq = a.lam // 4
    e_ne = a.alpha + 2 * lq - 1
    e_sw = a.alpha + 3 * lq - 1
    i_s, j_s = s.i, s.j
    r_n = min(max(extract_i(e_ne, p) - i_s + 1, 0), s.r)
    c_w = min(max(extract_j(e_sw, p) - j_s + 1, 0), s.c)
    r_s = s.r - r_n
    c_e = s.c - c_w

    m = s.matrix
    pieces: list[Optional[SubmatrixDesc]] = [None, None, None, None]
    if r_n and c_w:
        pieces[Quadrant.NW] = SubmatrixDesc(m, s.sigma, r_n, c_w, i_s, j_s)
    if r_n and c_e:
        pieces[Quadrant.NE] = SubmatrixDesc.at(m, i_s, j_s + c_w, r_n, c_e)
    if r_s and c_w:
        pieces[Quadrant.SW] = SubmatrixDesc.at(m, i_s + r_n, j_s, r_s, c_w)
    if r_s and c_e:
        pieces[Quadrant.SE] = SubmatrixDesc.at(m, i_s + r_n, j_s + c_w, r_s, c_e)
    return SplitResult(tuple(pieces), r_n, c_w, r_s, c_e)

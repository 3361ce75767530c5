"""Sub-matrix multiplication kernels over Morton-hybrid matrices.

All kernels accumulate ``S_A += S_B @ S_C`` in GF(q) in place on the output
matrix and return the :class:`InstrumentCounters` gathered while doing so.

* :func:`mm_naive` addresses every cell through ``encode`` and performs one
  flat multiply; it is the correctness oracle.
* :func:`mm_default` recurses on the sub-matrices themselves, halving any
  dimension larger than ``T``. Its base cases are generally scattered and are
  addressed cell by cell through ``encode``.
* :func:`mm_oblivious` recurses on the aligned quadrants of the containers and
  carries the parts of each sub-matrix along, so every base case is contained
  in one ``T x T`` block and is addressed as ``sigma + i*T + j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from ._validation import ContainmentError, ContractError
from .field import matmul_acc
from .layout import encode_array
from .submatrix import (
    AlignedDesc,
    SubmatrixDesc,
    is_contained,
    quadrants,
    split_sub,
)


@dataclass
class InstrumentCounters:
    """Per-invocation counters. ``encode_calls`` includes ``base_case_encode_calls``."""

    base_case_calls: int = 0
    scalar_macs: int = 0
    encode_calls: int = 0
    base_case_encode_calls: int = 0
    max_consecutive_jump: int = 0
    recursive_calls: int = 0
    max_children: int = 0
    track_jumps: bool = True
    jumps: Optional[list] = field(default=None, repr=False)

    def record_addresses(self, addresses: np.ndarray) -> None:
        """Record the address gaps of one row-major traversal."""
        if not self.track_jumps or addresses.size < 2:
            return
        flat = addresses.ravel()
        gaps = np.abs(flat[1:] - flat[:-1])
        self.max_consecutive_jump = max(self.max_consecutive_jump, int(gaps.max()))
        if self.jumps is not None:
            self.jumps.extend(gaps.tolist())


@dataclass(frozen=True)
class MultiplyProblem:
    """``sA (r x c) += sB (r x k) @ sC (k x c)`` over three matrices."""

    sA: SubmatrixDesc
    sB: SubmatrixDesc
    sC: SubmatrixDesc

    def __post_init__(self):
        a, b, c = self.sA, self.sB, self.sC
        if a.r != b.r or a.c != c.c or b.c != c.r:
            raise ContractError(
                f"shape mismatch: A {a.r}x{a.c}, B {b.r}x{b.c}, C {c.r}x{c.c}"
            )
        if a.matrix is b.matrix or a.matrix is c.matrix:
            raise ContractError("output matrix must be distinct from the operands")
        qs = {a.matrix.q, b.matrix.q, c.matrix.q}
        if len(qs) != 1:
            raise ContractError(f"operands live in different fields: {sorted(qs)}")

    @property
    def shape(self) -> tuple[int, int, int]:
        """``(rows, inner, cols)``."""
        return self.sA.r, self.sB.c, self.sA.c

    @property
    def macs(self) -> int:
        r, k, c = self.shape
        return r * k * c


def _grid(desc: SubmatrixDesc) -> tuple[np.ndarray, np.ndarray]:
    i, j = desc.start
    return (
        np.arange(i, i + desc.r, dtype=np.int64)[:, None],
        np.arange(j, j + desc.c, dtype=np.int64)[None, :],
    )


def _encoded_addresses(desc: SubmatrixDesc, counters: InstrumentCounters) -> np.ndarray:
    rows, cols = _grid(desc)
    addr = encode_array(rows, cols, desc.matrix.params)
    counters.encode_calls += addr.size
    return addr


def mm_naive(p: MultiplyProblem, counters: InstrumentCounters | None = None) -> InstrumentCounters:
    """Reference kernel: every cell addressed through ``encode``."""
    counters = counters if counters is not None else InstrumentCounters()
    r, k, c = p.shape
    if not (r and k and c):
        return counters
    aA = _encoded_addresses(p.sA, counters)
    aB = _encoded_addresses(p.sB, counters)
    aC = _encoded_addresses(p.sC, counters)
    for addr in (aA, aB, aC):
        counters.record_addresses(addr)
    A = p.sA.matrix.data
    A[aA] = matmul_acc(A[aA], p.sB.matrix.data[aB], p.sC.matrix.data[aC], p.sA.matrix.q)
    counters.base_case_calls += 1
    counters.scalar_macs += r * k * c
    return counters


# default recursion


def _halves(start: int, n: int, t: int) -> tuple[tuple[int, int], ...]:
    if n <= t:
        return ((start, n),)
    h = (n + 1) // 2
    return ((start, h), (start + h, n - h))


def _encoded_base_case(a: SubmatrixDesc, b: SubmatrixDesc, c: SubmatrixDesc,
                       counters: InstrumentCounters) -> None:
    before = counters.encode_calls
    aA = _encoded_addresses(a, counters)
    aB = _encoded_addresses(b, counters)
    aC = _encoded_addresses(c, counters)
    counters.base_case_encode_calls += counters.encode_calls - before
    if counters.track_jumps:
        for addr in (aA, aB, aC):
            counters.record_addresses(addr)
    A = a.matrix.data
    A[aA] = matmul_acc(A[aA], b.matrix.data[aB], c.matrix.data[aC], a.matrix.q)
    counters.base_case_calls += 1
    counters.scalar_macs += a.r * b.c * a.c


def _default(a: SubmatrixDesc, b: SubmatrixDesc, c: SubmatrixDesc,
             counters: InstrumentCounters) -> None:
    counters.recursive_calls += 1
    t = a.matrix.params.t
    r, k, n = a.r, b.c, a.c
    if r <= t and k <= t and n <= t:
        _encoded_base_case(a, b, c, counters)
        return
    ai, aj = a.start
    bi, bj = b.start
    ci, cj = c.start
    A, B, C = a.matrix, b.matrix, c.matrix
    xs, zs, ys = _halves(0, r, t), _halves(0, k, t), _halves(0, n, t)
    children = 0
    for x0, xr in xs:
        for y0, yn in ys:
            for z0, zk in zs:
                counters.encode_calls += 3
                _default(
                    SubmatrixDesc.at(A, ai + x0, aj + y0, xr, yn),
                    SubmatrixDesc.at(B, bi + x0, bj + z0, xr, zk),
                    SubmatrixDesc.at(C, ci + z0, cj + y0, zk, yn),
                    counters,
                )
                children += 1
    counters.max_children = max(counters.max_children, children)


def mm_default(p: MultiplyProblem, counters: InstrumentCounters | None = None) -> InstrumentCounters:
    """Recursive multiply on the sub-matrices, split at ``ceil(dim / 2)`` until every dimension is ``<= T``."""
    counters = counters if counters is not None else InstrumentCounters()
    if not all(p.shape):
        return counters
    _check_layouts(p)
    _default(p.sA, p.sB, p.sC, counters)
    return counters


# alignment-preserving recursion


class Piece(NamedTuple):
    """A sub-matrix part plus its row/column range inside the original operand's grid."""

    desc: SubmatrixDesc
    row_off: int
    col_off: int
    row_end: int
    col_end: int

    @classmethod
    def of(cls, desc: SubmatrixDesc, row_off: int = 0, col_off: int = 0) -> Piece:
        return cls(desc, row_off, col_off, row_off + desc.r, col_off + desc.c)


def _restrict(pc: Piece, r0: int, r1: int, c0: int, c1: int,
              counters: InstrumentCounters | None) -> Piece:
    if r0 == pc.row_off and c0 == pc.col_off and r1 == pc.row_end and c1 == pc.col_end:
        return pc
    d = pc.desc
    if counters is not None:
        counters.encode_calls += 1
    desc = SubmatrixDesc.at(d.matrix, d.i + r0 - pc.row_off, d.j + c0 - pc.col_off, r1 - r0, c1 - c0)
    return Piece(desc, r0, c0, r1, c1)


def compatible_parts(pa: Piece, pb: Piece, pc: Piece,
                     counters: InstrumentCounters | None = None
                     ) -> Optional[tuple[Piece, Piece, Piece]]:
    """Trim three pieces to the part whose product contributes to the output piece.

    ``pa`` spans (x, y), ``pb`` spans (x, z) and ``pc`` spans (z, y) of the
    original problem. The shared ranges are intersected; ``None`` means the
    combination contributes nothing.
    """
    x0, x1 = max(pa.row_off, pb.row_off), min(pa.row_end, pb.row_end)
    if x0 >= x1:
        return None
    z0, z1 = max(pb.col_off, pc.row_off), min(pb.col_end, pc.row_end)
    if z0 >= z1:
        return None
    y0, y1 = max(pc.col_off, pa.col_off), min(pc.col_end, pa.col_end)
    if y0 >= y1:
        return None
    return (
        _restrict(pa, x0, x1, y0, y1, counters),
        _restrict(pb, x0, x1, z0, z1, counters),
        _restrict(pc, z0, z1, y0, y1, counters),
    )


def _block_view(desc: SubmatrixDesc) -> np.ndarray:
    # contained piece: cell (i, j) sits at sigma + i*T + j, i.e. a slice of the
    # store viewed as rows of length T
    t = desc.matrix.params.t
    row, col = divmod(desc.sigma, t)
    return desc.matrix.data.reshape(-1, t)[row:row + desc.r, col:col + desc.c]


@lru_cache(maxsize=64)
def _ranges(t: int) -> tuple[np.ndarray, np.ndarray]:
    return np.arange(t, dtype=np.int64)[:, None] * t, np.arange(t, dtype=np.int64)[None, :]


def _offset_addresses(desc: SubmatrixDesc) -> np.ndarray:
    rows, cols = _ranges(desc.matrix.params.t)
    return desc.sigma + rows[:desc.r] + cols[:, :desc.c]


def base_case_mm(ca: SubmatrixDesc, cb: SubmatrixDesc, cc: SubmatrixDesc,
                 counters: InstrumentCounters | None = None) -> InstrumentCounters:
    """Multiply three contained pieces using row-major offsets only.

    Raises :class:`ContainmentError` if any piece straddles a block boundary.
    """
    counters = counters if counters is not None else InstrumentCounters()
    for name, d in (("A", ca), ("B", cb), ("C", cc)):
        if not is_contained(d):
            raise ContainmentError(f"base-case operand {name} is scattered: {d.r}x{d.c} at {d.start}")
    if ca.r != cb.r or ca.c != cc.c or cb.c != cc.r:
        raise ContractError("base-case pieces are not conformable")
    counters.base_case_calls += 1
    if ca.empty or cb.empty:
        return counters
    if counters.track_jumps:
        for d in (ca, cb, cc):
            counters.record_addresses(_offset_addresses(d))
    va = _block_view(ca)
    va[...] = matmul_acc(va, _block_view(cb), _block_view(cc), ca.matrix.q)
    counters.scalar_macs += ca.r * cb.c * ca.c
    return counters


def _split_pieces(a: AlignedDesc, pc: Piece, counters: InstrumentCounters) -> list[Optional[Piece]]:
    res = split_sub(a, pc.desc)
    out: list[Optional[Piece]] = []
    for t, (d, (dr, dc)) in enumerate(zip(res.pieces, res.offsets)):
        if d is None:
            out.append(None)
            continue
        if t:
            counters.encode_calls += 1
        out.append(Piece.of(d, pc.row_off + dr, pc.col_off + dc))
    return out


def _oblivious(aA: AlignedDesc, pA: Piece, aB: AlignedDesc, pB: Piece,
               aC: AlignedDesc, pC: Piece, counters: InstrumentCounters) -> None:
    counters.recursive_calls += 1
    if aA.is_base:
        base_case_mm(pA.desc, pB.desc, pC.desc, counters)
        return
    qA, qB, qC = quadrants(aA), quadrants(aB), quadrants(aC)
    sA = _split_pieces(aA, pA, counters)
    sB = _split_pieces(aB, pB, counters)
    sC = _split_pieces(aC, pC, counters)
    children = 0
    for t, pa in enumerate(sA):
        if pa is None:
            continue
        for u, pb in enumerate(sB):
            if pb is None or pb.row_off >= pa.row_end or pa.row_off >= pb.row_end:
                continue
            for v, pc in enumerate(sC):
                if pc is None:
                    continue
                trimmed = compatible_parts(pa, pb, pc, counters)
                if trimmed is None:
                    continue
                children += 1
                _oblivious(qA[t], trimmed[0], qB[u], trimmed[1], qC[v], trimmed[2], counters)
    counters.max_children = max(counters.max_children, children)


def _check_layouts(p: MultiplyProblem) -> None:
    params = {p.sA.matrix.params, p.sB.matrix.params, p.sC.matrix.params}
    if len(params) != 1:
        raise ContractError("A, B and C must share the same layout parameters")


def mm_oblivious(p: MultiplyProblem, counters: InstrumentCounters | None = None) -> InstrumentCounters:
    """Recurse on the aligned quadrants of A, B and C so every base case is contained."""
    counters = counters if counters is not None else InstrumentCounters()
    _check_layouts(p)
    if not all(p.shape):
        return counters
    _oblivious(
        AlignedDesc.root(p.sA.matrix), Piece.of(p.sA),
        AlignedDesc.root(p.sB.matrix), Piece.of(p.sB),
        AlignedDesc.root(p.sC.matrix), Piece.of(p.sC),
        counters,
    )
    return counters


KERNELS = {"naive": mm_naive, "default": mm_default, "oblivious": mm_oblivious}

"""Exact arithmetic over prime fields GF(q)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_INT64_MAX = np.iinfo(np.int64).max


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class FieldModulus:
    """Prime modulus ``q`` with ``2 <= q < 2**31``.

    The bound keeps every product of two residues inside a signed 64-bit
    integer, so reduction never needs big-integer arithmetic.
    """

    q: int = 2

    def __post_init__(self):
        q = self.q
        if not isinstance(q, (int, np.integer)) or isinstance(q, bool):
            raise TypeError(f"modulus must be an integer, got {type(q).__name__}")
        if not 2 <= q < 2**31:
            raise ValueError(f"modulus must satisfy 2 <= q < 2**31, got {q}")
        if not is_prime(int(q)):
            raise ValueError(f"modulus {q} is not prime")
        object.__setattr__(self, "q", int(q))

    def element(self, v: int) -> FieldElement:
        return FieldElement(int(v) % self.q, self)

    def check_residue(self, v: int) -> int:
        if not 0 <= v < self.q:
            raise ValueError(f"{v} is not a residue modulo {self.q}")
        return v


GF2 = FieldModulus(2)


def add(a: int, b: int, m: FieldModulus) -> int:
    """Return ``(a + b) mod q``."""
    s = a + b
    return s - m.q if s >= m.q else s


def mul(a: int, b: int, m: FieldModulus) -> int:
    """Return ``(a * b) mod q``."""
    return (a * b) % m.q


@dataclass(frozen=True)
class FieldElement:
    v: int
    modulus: FieldModulus = GF2

    def __post_init__(self):
        self.modulus.check_residue(self.v)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise ValueError("operands belong to different fields")
            return other.v
        if isinstance(other, (int, np.integer)):
            return int(other) % self.modulus.q
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(add(self.v, b, self.modulus), self.modulus)

    __radd__ = __add__

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(mul(self.v, b, self.modulus), self.modulus)

    __rmul__ = __mul__

    def __int__(self):
        return self.v


def inner_chunk(q: int) -> int:
    """Largest inner dimension whose residue dot products fit in int64."""
    return max(1, _INT64_MAX // ((q - 1) ** 2))


_FLOAT_EXACT = 2**53


def matmul_acc(acc: np.ndarray, b: np.ndarray, c: np.ndarray, q: int) -> np.ndarray:
    """Return ``(acc + b @ c) mod q`` for int64 residue arrays.

    When every dot product stays below 2**53 the product goes through float64
    BLAS, which is exact there. Otherwise the inner dimension is processed in
    chunks small enough that no int64 partial sum overflows before reduction.
    """
    k = b.shape[1]
    if k * (q - 1) ** 2 + q < _FLOAT_EXACT:
        prod = b.astype(np.float64) @ c.astype(np.float64)
        return (acc + prod.astype(np.int64)) % q
    step = inner_chunk(q)
    if k <= step:
        return (acc + (b @ c) % q) % q
    out = acc.copy()
    for s in range(0, k, step):
        out = (out + (b[:, s:s + step] @ c[s:s + step, :]) % q) % q
    return out

"""Input validation helpers and the exception types raised across the package."""
from __future__ import annotations

import numpy as np


class ContractError(ValueError):
    """A caller broke an operation's precondition."""


class ContainmentError(ContractError):
    """A base-case operand is scattered across more than one row-major block."""


def block_exponent(n: int, t: int) -> int | None:
    """Return ``m`` with ``n == 2**m * t``, or None if no such ``m`` exists."""
    if t < 1 or n < t or n % t:
        return None
    ratio = n // t
    if ratio & (ratio - 1):
        return None
    return ratio.bit_length() - 1


def check_layout(n: int, t: int) -> int:
    """Validate side ``n`` against truncation ``t``; return the block-grid exponent."""
    if isinstance(n, bool) or isinstance(t, bool):
        raise TypeError("sizes must be integers")
    n, t = int(n), int(t)
    if t < 1:
        raise ValueError(f"truncation size must be >= 1, got {t}")
    if n > 2**32:
        raise ValueError(f"side {n} exceeds 2**32")
    m = block_exponent(n, t)
    if m is None:
        raise ValueError(f"side {n} is not of the form 2**m * {t}")
    return m


def check_square_matrix(X, t: int, q: int | None = None) -> np.ndarray:
    """Coerce ``X`` to a square int64 array whose side is ``2**m * t``.

    Entries are reduced modulo ``q`` when it is given; negative entries are
    rejected rather than silently wrapped.
    """
    arr = np.asarray(X)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square 2-D array, got shape {arr.shape}")
    if arr.dtype.kind not in "iub":
        if arr.dtype.kind == "f" and np.all(np.mod(arr, 1) == 0):
            arr = arr.astype(np.int64)
        else:
            raise ValueError(f"expected integer residues, got dtype {arr.dtype}")
    arr = arr.astype(np.int64, copy=True)
    check_layout(arr.shape[0], t)
    if arr.size and arr.min() < 0:
        raise ValueError("residues must be non-negative")
    if q is not None:
        arr %= q
    return arr

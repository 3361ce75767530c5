"""Morton-hybrid matrix layout and cache-oblivious sub-matrix multiplication over GF(q)."""
from ._validation import ContainmentError, ContractError
from .estimators import MortonHybridLayout, SubmatrixMultiplier
from .field import GF2, FieldElement, FieldModulus
from .layout import (
    LayoutParams,
    MortonHybridMatrix,
    encode,
    extract_i,
    extract_j,
    from_row_major,
    read_matrix,
    to_row_major,
    write_matrix,
)
from .multiply import (
    InstrumentCounters,
    MultiplyProblem,
    base_case_mm,
    compatible_parts,
    mm_default,
    mm_naive,
    mm_oblivious,
)
from .submatrix import (
    AlignedDesc,
    Quadrant,
    SubmatrixDesc,
    is_aligned,
    is_contained,
    quadrants,
    split_sub,
)

__all__ = [
    "AlignedDesc", "ContainmentError", "ContractError", "FieldElement", "FieldModulus",
    "GF2", "InstrumentCounters", "LayoutParams", "MortonHybridLayout", "MortonHybridMatrix",
    "MultiplyProblem", "Quadrant", "SubmatrixDesc", "SubmatrixMultiplier", "base_case_mm",
    "compatible_parts", "encode", "extract_i", "extract_j", "from_row_major", "is_aligned",
    "is_contained", "mm_default", "mm_naive", "mm_oblivious", "quadrants", "read_matrix",
    "split_sub", "to_row_major", "write_matrix",
]
__version__ = "0.1.0"

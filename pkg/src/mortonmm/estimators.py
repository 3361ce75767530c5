"""scikit-learn style wrappers around the layout codec and the multiplication kernels."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_square_matrix
from .field import FieldModulus
from .layout import LayoutParams, MortonHybridMatrix, from_row_major, permutation
from .multiply import KERNELS, InstrumentCounters, MultiplyProblem
from .submatrix import SubmatrixDesc


class MortonHybridLayout(TransformerMixin, BaseEstimator):
    """Reorder a square row-major matrix into Morton-hybrid order and back.

    Parameters
    ----------
    truncation : int
        Side ``T`` of the row-major leaf blocks.
    modulus : int
        Prime field size; entries are reduced modulo it on the way in.

    Attributes
    ----------
    params_ : LayoutParams
    modulus_ : FieldModulus
    """

    def __init__(self, truncation: int = 32, modulus: int = 2):
        self.truncation = truncation
        self.modulus = modulus

    def fit(self, X, y=None):
        self.modulus_ = FieldModulus(self.modulus)
        arr = check_square_matrix(X, self.truncation, self.modulus_.q)
        self.params_ = LayoutParams(arr.shape[0], self.truncation)
        self.n_features_in_ = arr.shape[1]
        return self

    def _check_side(self, n):
        if n != self.params_.n:
            raise ValueError(f"fitted for side {self.params_.n}, got {n}")

    def transform(self, X):
        """Flat Morton-hybrid data of ``X``."""
        check_is_fitted(self, "params_")
        arr = check_square_matrix(X, self.truncation, self.modulus_.q)
        self._check_side(arr.shape[0])
        data = np.empty(self.params_.size, dtype=np.int64)
        data[permutation(self.params_)] = arr.ravel()
        return data

    def inverse_transform(self, Z):
        check_is_fitted(self, "params_")
        z = np.asarray(Z, dtype=np.int64)
        if z.shape != (self.params_.size,):
            raise ValueError(f"expected flat data of length {self.params_.size}, got {z.shape}")
        n = self.params_.n
        return z[permutation(self.params_)].reshape(n, n)

    def to_matrix(self, X) -> MortonHybridMatrix:
        check_is_fitted(self, "params_")
        return from_row_major(X, self.truncation, self.modulus_)


class SubmatrixMultiplier(BaseEstimator):
    """Accumulate ``S_A += S_B @ S_C`` with a chosen kernel.

    ``algorithm`` is one of ``"oblivious"``, ``"default"`` or ``"naive"``.
    After :meth:`multiply`, ``counters_`` holds the run's instrumentation.
    """

    def __init__(self, algorithm: str = "oblivious", track_jumps: bool = True):
        self.algorithm = algorithm
        self.track_jumps = track_jumps

    def multiply(self, sA: SubmatrixDesc, sB: SubmatrixDesc, sC: SubmatrixDesc):
        if self.algorithm not in KERNELS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {sorted(KERNELS)}")
        kernel = KERNELS[self.algorithm]
        self.counters_ = kernel(MultiplyProblem(sA, sB, sC),
                                InstrumentCounters(track_jumps=self.track_jumps))
        return self

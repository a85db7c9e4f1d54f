"""Hot-loop kernels with compiled/pure-Python selection at import.

The propagation right-hand side is ``out = (c0 A0 + c1 A1 + c2 A2) x`` over
three sparse matrices with fixed structure and time-dependent scalars. The
compiled Cython kernel does a single fused pass; the fallback recombines the
aligned data arrays and uses scipy's CSR matvec. Set ``KERRCHAIN_PURE_PYTHON=1``
to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp

if os.environ.get("KERRCHAIN_PURE_PYTHON"):
    _fused = None
else:
    try:
        from . import _fused
    except ImportError:
        _fused = None

HAVE_EXT = _fused is not None


def _aligned(mats):
    """CSR (indptr, indices) union pattern plus per-matrix aligned data."""
    union = None
    for m in mats:
        a = abs(m).tocsr()
        union = a if union is None else union + a
    union = union.tocsr()
    union.sum_duplicates()
    union.sort_indices()
    n_cols = union.shape[1]
    rows_u = np.repeat(np.arange(union.shape[0], dtype=np.int64), np.diff(union.indptr))
    keys_u = rows_u * n_cols + union.indices
    aligned = []
    for m in mats:
        s = m.tocsr()
        s.sum_duplicates()
        s.sort_indices()
        rows = np.repeat(np.arange(s.shape[0], dtype=np.int64), np.diff(s.indptr))
        keys = rows * n_cols + s.indices
        pos = np.searchsorted(keys_u, keys)
        if pos.size and (pos.max() >= keys_u.size or not np.array_equal(keys_u[pos], keys)):
            raise AssertionError("pattern alignment failed")
        data = np.zeros(union.nnz, dtype=complex)
        data[pos] = s.data
        aligned.append(data)
    return union.indptr.astype(np.int32), union.indices.astype(np.int32), aligned


class FusedOperator:
    """c0*A0 + c1*A1 + c2*A2 applied to vectors with per-call scalars."""

    def __init__(self, a0, a1, a2):
        mats = [getattr(m, "matrix", m) for m in (a0, a1, a2)]
        if len({m.shape for m in mats}) != 1:
            raise ValueError("matrices must share a shape")
        self.shape = mats[0].shape
        self.indptr, self.indices, (self.d0, self.d1, self.d2) = _aligned(mats)
        # reusable CSR container for the fallback path
        self._csr = sp.csr_matrix(
            (np.zeros_like(self.d0), self.indices, self.indptr), shape=self.shape
        )
        self.uses_ext = HAVE_EXT

    def apply(self, c0: complex, c1: complex, c2: complex, x: np.ndarray, out=None) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=complex)
        if out is None:
            out = np.empty_like(x)
        if self.uses_ext:
            _fused.fused3_matvec(
                self.indptr, self.indices, self.d0, self.d1, self.d2,
                complex(c0), complex(c1), complex(c2), x, out,
            )
        else:
            self._csr.data = self.d0 * c0 + self.d1 * c1 + self.d2 * c2
            out[:] = self._csr.dot(x)
        return out

"""Backend selection for the sparse-times-dense kernels.

The compiled Cython module is preferred when its build succeeded; otherwise
the scipy implementation is used.  Setting the environment variable
``EPRCASCADE_PURE_PYTHON`` to any non-empty value forces the fallback, which
is how the benchmark and the backend-equivalence tests exercise both paths.
"""

import os

import numpy as np

if os.environ.get("EPRCASCADE_PURE_PYTHON"):
    from . import _speedups_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built on this platform
        from . import _speedups_py as _impl

        BACKEND = "python"

spmm_left_acc = _impl.spmm_left_acc
spmm_right_acc = _impl.spmm_right_acc


def backend_name():
    return BACKEND


def csr_parts(mat):
    """Normalise a scipy sparse matrix to (indptr, indices, data) for the kernels."""
    mat = mat.tocsr()
    mat.sort_indices()
    return (
        np.asarray(mat.indptr, dtype=np.int64),
        np.asarray(mat.indices, dtype=np.int64),
        np.ascontiguousarray(mat.data, dtype=np.complex128),
    )

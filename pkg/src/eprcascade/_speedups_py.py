"""Pure scipy fallback for the compiled kernels in ``_speedups.pyx``.

Call signatures match the compiled module exactly so the two can be swapped
at import time.  The right-multiply uses B.T acting on x.T to stay inside
scipy's fast CSC-times-dense path.
"""

import numpy as np
from scipy.sparse import csr_matrix


def spmm_left_acc(indptr, indices, data, x, out, alpha):
    """out += alpha * (A @ x) for A in CSR form."""
    mat = csr_matrix((data, indices, indptr), shape=(out.shape[0], x.shape[0]))
    out += alpha * (mat @ x)


def spmm_right_acc(indptr, indices, data, x, out, alpha):
    """out += alpha * (x @ B) for B in CSR form."""
    nmid = indptr.shape[0] - 1
    mat = csr_matrix((data, indices, indptr), shape=(nmid, out.shape[1]))
    out += alpha * np.ascontiguousarray((mat.T @ x.T).T)

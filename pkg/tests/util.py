"""Independent oracles shared by the tests.

The forward transform here is built from the recursive block definition
(base case: all-ones lower-left triangle with -1 above, later dimensions via
Kronecker lifting), deliberately not reusing the library's encoding code.
"""

import numpy as np


def base_forward(m: int) -> np.ndarray:
    """m x m matrix with +1 on and below the diagonal, -1 above."""
    out = -np.ones((m, m))
    out[np.tril_indices(m)] = 1.0
    return out


def build_forward(dims) -> np.ndarray:
    """Forward transform for a product domain; dimension 1 varies fastest, so
    later dimensions are the outer Kronecker factors."""
    mat = base_forward(dims[0])
    for m in dims[1:]:
        mat = np.kron(base_forward(m), mat)
    return mat


def build_inverse_rows(domain):
    """Dense inverse assembled from the library's sparse rows."""
    from metricldp.mdrq import binv_row

    size = domain.total_size
    return np.array([binv_row(x, domain).to_dense(size) for x in domain.points()])

"""Fused stencil kernel (numba).  Falls back to numpy when numba is absent."""

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None


def _rhs_rows(re, im, q, out_r, out_i, r0, r1, nu1, c1, alpha1, c2, inv_dx2, periodic):
    n = re.shape[0]
    lo = np.empty(n, np.int64)
    hi = np.empty(n, np.int64)
    for k in range(n):
        lo[k] = k - 1
        hi[k] = k + 1
    # ghost cells: wrap, or mirror onto the edge cell itself
    lo[0] = n - 1 if periodic else 0
    hi[n - 1] = 0 if periodic else n - 1
    for j in range(r0, r1):
        js = lo[j]
        jn = hi[j]
        for i in range(n):
            iw = lo[i]
            ie = hi[i]
            a = re[j, i]
            b = im[j, i]
            lr = ((re[j, iw] + re[j, ie]) + (re[js, i] + re[jn, i]) - 4.0 * a) * inv_dx2
            li = ((im[j, iw] + im[j, ie]) + (im[js, i] + im[jn, i]) - 4.0 * b) * inv_dx2
            sink = alpha1 * (a * a + b * b)
            qq = q[j, i]
            out_r[j, i] = nu1 * (lr - c1 * li) + qq * a - sink * (a - c2 * b)
            out_i[j, i] = nu1 * (li + c1 * lr) + qq * b - sink * (b + c2 * a)


if numba is not None:
    rhs_rows = numba.njit(nogil=True, cache=True)(_rhs_rows)
else:  # pragma: no cover
    rhs_rows = None

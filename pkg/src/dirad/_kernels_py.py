"""NumPy implementation of the batch distance kernel.

Import-time fallback when the compiled extension is unavailable. Must stay
bit-identical to both the compiled kernel and the scalar reference in
``distance.record_distance``: the accumulation runs attribute by attribute in
index order, and Minkowski powers go through libm pow (np.power is allowed to
differ in the last ulp on SIMD builds, so it cannot be used here).
"""

import math

import numpy as np

BACKEND = "python"

_libm_pow = np.frompyfunc(math.pow, 2, 1)


def pairwise(queries, train, codes, p):
    """Distance matrix between query rows and training rows.

    codes[j] selects the per-attribute variant: 0 absolute, 1 ramp, 2 signed.
    """
    nq, m = queries.shape
    n = train.shape[0]
    out = np.zeros((nq, n), dtype=np.float64)
    for j in range(m):
        buf = queries[:, j, None] - train[None, :, j]
        c = codes[j]
        if c == 0:
            np.abs(buf, out=buf)
        elif c == 1:
            np.maximum(buf, 0.0, out=buf)
        if p != 1.0:
            buf = _libm_pow(buf, p).astype(np.float64)
        out += buf
    if p != 1.0:
        out = _libm_pow(out, 1.0 / p).astype(np.float64)
    return out

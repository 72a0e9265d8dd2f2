"""Brute-force reference computations, independent of the package's log-variable path.

These work directly in r on power-graded grids, the way one would check a
singular integral by hand, and are only used to pin expected values.
"""

import numpy as np
from numpy.polynomial.legendre import leggauss


def graded_composite_gauss(F, upper, M=1_000_000, gamma=60.0, order=4, lower=0.0):
    """int_lower^upper F(r) dr on nodes lower + (upper-lower) (i/M)^gamma, chunked."""
    x, w = leggauss(order)
    total = 0.0
    chunk = 200_000
    for start in range(0, M, chunk):
        i = np.arange(start, min(start + chunk, M) + 1, dtype=float)
        edges = lower + (upper - lower) * (i / M) ** gamma
        a, b = edges[:-1], edges[1:]
        # panels below ~1e-290 carry no representable mass and overflow r^a
        keep = (b > a) & (a > 1e-290)
        a, b = a[keep], b[keep]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        r = mid[:, None] + half[:, None] * x[None, :]
        total += float(np.sum(half[:, None] * w[None, :] * F(r)))
    return total

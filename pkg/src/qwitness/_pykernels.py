"""Numpy fallback for the compiled kernels in ``_ckernels.pyx``.

The scans repeat the compiled arithmetic operation for operation, so both
backends pick the same grid point with the same objective bits. Moment
sums use numpy's pairwise summation instead of the compiled compensated
loop; the two agree to a few ulps.
"""

import numpy as np


def _lo_eig(a1, a2, b, xi2):
    t = b * b - 1 + a1 * a1 - a2 * a2
    base = b * b + 1 - a1 * a1 - a2 * a2 - 2 * xi2
    s = a1 + a2
    root = np.sqrt(t * t + 4 * s * s * xi2)
    return 0.5 * (base - root)


def scan_reduced(a1_values, step, a2_max):
    best, best_a1, best_a2, count = np.inf, 0.0, 0.0, 0
    for a1 in np.asarray(a1_values, dtype=float):
        a1 = float(a1)
        lim = min(1.0 - a1, a2_max)
        if lim < 0:
            continue
        j = np.arange(int(lim / step) + 2, dtype=float)
        a2 = j * step
        a2 = a2[a2 <= lim]
        b = a2 / (1.0 - a1)
        vals = _lo_eig(a1, a2, b, a1 * a2)
        count += vals.size
        k = int(np.argmin(vals))
        if vals[k] < best:
            best, best_a1, best_a2 = float(vals[k]), a1, float(a2[k])
    return best, best_a1, best_a2, count


def scan_full(grid, b_values, tol):
    grid = np.asarray(grid, dtype=float)
    b = np.asarray(b_values, dtype=float)[:, None]
    xi = grid[None, :]
    xi2 = xi * xi
    best, arg, count = np.inf, (0.0, 0.0, 0.0, 0.0), 0
    for a1 in grid:
        a1 = float(a1)
        for a2 in grid:
            a2 = float(a2)
            s3 = a1 * a2 - xi2
            s4 = (1.0 - a1) * (b - a2) - xi2
            feasible = (b - a2 >= -tol) & (s3 >= -tol) & (s4 >= -tol)
            n = int(feasible.sum())
            if n == 0:
                continue
            count += n
            vals = np.where(feasible, _lo_eig(a1, a2, b, xi2), np.inf)
            k = int(np.argmin(vals))
            v = float(vals.flat[k])
            if v < best:
                kb, kx = np.unravel_index(k, vals.shape)
                best, arg = v, (a1, a2, float(b[kb, 0]), float(grid[kx]))
    return (best, *arg, count)


def batch_moments(x):
    x = np.asarray(x, dtype=float)
    n = x.size
    if n == 0:
        return 0, 0.0, 0.0, 0.0, 0.0
    q = x * x
    x0, q0 = x[0], q[0]
    mean = x0 + float(np.sum(x - x0)) / n
    mean_sq = q0 + float(np.sum(q - q0)) / n
    d = x - mean
    dq = q - mean_sq
    return n, float(mean), float(d @ d), float(mean_sq), float(dq @ dq)

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled scan and moment kernels. The scans must match _pykernels operation for operation."""

from libc.math cimport sqrt, INFINITY


cdef inline double lo_eig(double a1, double a2, double b, double xi2) noexcept nogil:
    cdef double t = b * b - 1 + a1 * a1 - a2 * a2
    cdef double base = b * b + 1 - a1 * a1 - a2 * a2 - 2 * xi2
    cdef double s = a1 + a2
    cdef double root = sqrt(t * t + 4 * s * s * xi2)
    return 0.5 * (base - root)


def scan_reduced(const double[::1] a1_values, double step, double a2_max):
    """Exhaustive scan of the reduced family; returns (best, a1, a2, evaluations)."""
    cdef Py_ssize_t i, j
    cdef double a1, a2, b, lim, val
    cdef double best = INFINITY, best_a1 = 0.0, best_a2 = 0.0
    cdef long long count = 0
    with nogil:
        for i in range(a1_values.shape[0]):
            a1 = a1_values[i]
            lim = 1.0 - a1
            if a2_max < lim:
                lim = a2_max
            j = 0
            a2 = 0.0
            while a2 <= lim:
                b = a2 / (1.0 - a1)
                val = lo_eig(a1, a2, b, a1 * a2)
                count += 1
                if val < best:
                    best = val
                    best_a1 = a1
                    best_a2 = a2
                j += 1
                a2 = j * step
    return best, best_a1, best_a2, count


def scan_full(const double[::1] grid, const double[::1] b_values, double tol):
    """Scan (a1, a2, b, xi) over the feasible set, loops nested in that order.

    Returns (best, a1, a2, b, xi, evaluations).
    """
    cdef Py_ssize_t i, j, k, l, n = grid.shape[0], nb = b_values.shape[0]
    cdef double a1, a2, b, xi, xi2, s3, s4, val
    cdef double best = INFINITY, ba1 = 0.0, ba2 = 0.0, bb = 0.0, bxi = 0.0
    cdef long long count = 0
    with nogil:
        for i in range(n):
            a1 = grid[i]
            for j in range(n):
                a2 = grid[j]
                for k in range(nb):
                    b = b_values[k]
                    if b - a2 < -tol:
                        continue
                    for l in range(n):
                        xi = grid[l]
                        xi2 = xi * xi
                        s3 = a1 * a2 - xi2
                        if s3 < -tol:
                            break
                        s4 = (1.0 - a1) * (b - a2) - xi2
                        if s4 < -tol:
                            break
                        val = lo_eig(a1, a2, b, xi2)
                        count += 1
                        if val < best:
                            best = val
                            ba1 = a1
                            ba2 = a2
                            bb = b
                            bxi = xi
    return best, ba1, ba2, bb, bxi, count


cdef inline void _kahan_add(double* total, double* comp, double value) noexcept nogil:
    cdef double y = value - comp[0]
    cdef double t = total[0] + y
    comp[0] = (t - total[0]) - y
    total[0] = t


def batch_moments(const double[::1] x):
    """(n, mean, M2) for x and for x**2, shifted two-pass with compensated sums."""
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double x0, q0, mean, mean_sq, d
    cdef double s = 0.0, cs = 0.0, sq = 0.0, csq = 0.0
    cdef double m2 = 0.0, cm2 = 0.0, m2_sq = 0.0, cm2_sq = 0.0
    if n == 0:
        return 0, 0.0, 0.0, 0.0, 0.0
    x0 = x[0]
    q0 = x0 * x0
    with nogil:
        for i in range(n):
            _kahan_add(&s, &cs, x[i] - x0)
            _kahan_add(&sq, &csq, x[i] * x[i] - q0)
        mean = x0 + s / n
        mean_sq = q0 + sq / n
        for i in range(n):
            d = x[i] - mean
            _kahan_add(&m2, &cm2, d * d)
            d = x[i] * x[i] - mean_sq
            _kahan_add(&m2_sq, &cm2_sq, d * d)
    return n, mean, m2, mean_sq, m2_sq

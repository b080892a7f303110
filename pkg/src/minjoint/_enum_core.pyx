# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled subset-enumeration kernels (the hot loop of vertex/ray enumeration).

Mirrors the interface and semantics of ``_enum_py`` exactly: unique-solution
subsets are detected through LAPACK singular values, solutions come from an
LU solve of the same subset, and feasibility short-circuits row by row.
"""

import numpy as np

from scipy.linalg.cython_lapack cimport dgesv, dgesvd

_LWORK = 1024


cdef int _next_combination(Py_ssize_t* c, Py_ssize_t r, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i = r - 1
    cdef Py_ssize_t j
    while i >= 0 and c[i] == m - r + i:
        i -= 1
    if i < 0:
        return 0
    c[i] += 1
    for j in range(i + 1, r):
        c[j] = c[j - 1] + 1
    return 1


def vertex_candidates(double[:, ::1] w, double[::1] t, double eps_rank,
                      double feas_tol):
    """See ``_enum_py.vertex_candidates``."""
    cdef Py_ssize_t m = w.shape[0]
    cdef Py_ssize_t k = w.shape[1]
    if k == 0 or m < k:
        return np.empty((0, k))

    a_np = np.empty(k * k)      # column-major subset copy for the SVD
    b_np = np.empty(k * k)      # second copy, consumed by the LU solve
    s_np = np.empty(k)
    x_np = np.empty(k)
    work_np = np.empty(_LWORK)
    ipiv_np = np.empty(k, dtype=np.intc)
    comb_np = np.arange(k, dtype=np.intp)
    out_np = np.empty((256, k))

    cdef double[::1] a = a_np
    cdef double[::1] b = b_np
    cdef double[::1] s = s_np
    cdef double[::1] x = x_np
    cdef double[::1] work = work_np
    cdef int[::1] ipiv = ipiv_np
    cdef Py_ssize_t[::1] comb = comb_np
    cdef double[:, ::1] out = out_np

    cdef char jobn = b'N'
    cdef int kk = <int> k
    cdef int one = 1
    cdef int lwork = _LWORK
    cdef int info
    cdef double dummy = 0.0
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t row, col
    cdef double acc
    cdef bint feasible
    cdef int more = 1

    while more:
        # LAPACK is column-major: a[col * k + row] holds subset entry (row, col).
        for row in range(k):
            for col in range(k):
                a[col * k + row] = w[comb[row], col]
                b[col * k + row] = w[comb[row], col]
            x[row] = t[comb[row]]
        dgesvd(&jobn, &jobn, &kk, &kk, &a[0], &kk, &s[0], &dummy, &one,
               &dummy, &one, &work[0], &lwork, &info)
        if info == 0 and s[0] > 0.0 and s[k - 1] > eps_rank * s[0]:
            dgesv(&kk, &one, &b[0], &kk, &ipiv[0], &x[0], &kk, &info)
            if info == 0:
                feasible = True
                for row in range(m):
                    acc = 0.0
                    for col in range(k):
                        acc += w[row, col] * x[col]
                    if acc < t[row] - feas_tol:
                        feasible = False
                        break
                if feasible:
                    if count == out.shape[0]:
                        new_np = np.empty((2 * out.shape[0], k))
                        new_np[:count] = out_np
                        out_np = new_np
                        out = out_np
                    for col in range(k):
                        out[count, col] = x[col]
                    count += 1
        more = _next_combination(&comb[0], k, m)
    return np.asarray(out_np[:count]).copy()


def ray_candidates(double[:, ::1] w, double eps_rank, double feas_tol):
    """See ``_enum_py.ray_candidates``."""
    cdef Py_ssize_t m = w.shape[0]
    cdef Py_ssize_t k = w.shape[1]
    if k == 0:
        return np.empty((0, 0))
    if k == 1:
        for cand in (np.array([1.0]), np.array([-1.0])):
            if np.all(np.asarray(w) @ cand >= -feas_tol):
                return cand[None, :]
        return np.empty((0, 1))
    cdef Py_ssize_t r = k - 1
    if m < r:
        return np.empty((0, k))

    a_np = np.empty(k * r)
    s_np = np.empty(r)
    u_np = np.empty(k * k)
    work_np = np.empty(_LWORK)
    comb_np = np.arange(r, dtype=np.intp)
    out_np = np.empty((256, k))

    cdef double[::1] a = a_np
    cdef double[::1] s = s_np
    cdef double[::1] u = u_np
    cdef double[::1] work = work_np
    cdef Py_ssize_t[::1] comb = comb_np
    cdef double[:, ::1] out = out_np

    cdef char joba = b'A'
    cdef char jobn = b'N'
    cdef int mm = <int> k
    cdef int nn = <int> r
    cdef int one = 1
    cdef int lwork = _LWORK
    cdef int info
    cdef double dummy = 0.0
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t row, col
    cdef double acc, sign
    cdef bint pos, neg
    cdef int more = 1

    while more:
        # Row-major copy; LAPACK factors the transpose (k x r), whose left
        # singular vectors span the subset's row space plus its complement.
        for row in range(r):
            for col in range(k):
                a[row * k + col] = w[comb[row], col]
        dgesvd(&joba, &jobn, &mm, &nn, &a[0], &mm, &s[0], &u[0], &mm,
               &dummy, &one, &work[0], &lwork, &info)
        if info == 0 and s[0] > 0.0 and s[r - 1] > eps_rank * s[0]:
            # Null direction of the subset rows: the trailing column of U.
            pos = True
            neg = True
            for row in range(m):
                acc = 0.0
                for col in range(k):
                    acc += w[row, col] * u[col + r * k]
                if acc < -feas_tol:
                    pos = False
                if acc > feas_tol:
                    neg = False
                if not pos and not neg:
                    break
            if pos or neg:
                sign = 1.0 if pos else -1.0
                if count == out.shape[0]:
                    new_np = np.empty((2 * out.shape[0], k))
                    new_np[:count] = out_np
                    out_np = new_np
                    out = out_np
                for col in range(k):
                    out[count, col] = sign * u[col + r * k]
                count += 1
        more = _next_combination(&comb[0], r, m)
    return np.asarray(out_np[:count]).copy()

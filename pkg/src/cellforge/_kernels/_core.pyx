# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``pure.py``.

Same constraint-row and CSG-program encodings, same IEEE expressions in the
same per-point order; only early exits differ.  Keep the two files in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

DEF MAX_STACK = 64


cdef inline double _margin(double x, double y, double z, const double* row) noexcept nogil:
    cdef int code = <int> row[0]
    cdef double du, dv
    if code == 0:
        return row[1] * (x - row[2])
    elif code == 1:
        return row[1] * (y - row[2])
    elif code == 2:
        return row[1] * (z - row[2])
    elif code == 3:
        du = y - row[2]
        dv = z - row[3]
    elif code == 4:
        du = x - row[2]
        dv = z - row[3]
    else:
        du = x - row[2]
        dv = y - row[3]
    return row[1] * (sqrt(du * du + dv * dv) - row[4])


cdef inline double _min_margin(double x, double y, double z,
                               const double[:, ::1] cons) noexcept nogil:
    cdef double best = 1e300
    cdef double m
    cdef Py_ssize_t j
    for j in range(cons.shape[0]):
        m = _margin(x, y, z, &cons[j, 0])
        if m < best:
            best = m
    return best


cdef inline bint _all_above(double x, double y, double z,
                            const double[:, ::1] cons, double eps) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(cons.shape[0]):
        if _margin(x, y, z, &cons[j, 0]) <= eps:
            return 0
    return 1


def min_margins(const double[:, ::1] points, const double[:, ::1] cons):
    cdef Py_ssize_t n = points.shape[0]
    out = np.full(n, np.inf)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    if cons.shape[0] == 0:
        return out
    for i in range(n):
        o[i] = _min_margin(points[i, 0], points[i, 1], points[i, 2], cons)
    return out


def count_hits_two(const double[:, ::1] points, const double[:, ::1] cons_a,
                   const double[:, ::1] cons_b, double eps):
    cdef Py_ssize_t i, n = points.shape[0]
    cdef long hits = 0
    for i in range(n):
        if _all_above(points[i, 0], points[i, 1], points[i, 2], cons_a, eps) and \
           _all_above(points[i, 0], points[i, 1], points[i, 2], cons_b, eps):
            hits += 1
    return hits


def any_hit_two(const double[:, ::1] points, const double[:, ::1] cons_a,
                const double[:, ::1] cons_b, double eps):
    cdef Py_ssize_t i, n = points.shape[0]
    for i in range(n):
        if _all_above(points[i, 0], points[i, 1], points[i, 2], cons_a, eps) and \
           _all_above(points[i, 0], points[i, 1], points[i, 2], cons_b, eps):
            return True
    return False


cdef inline bint _csg_member_one(const long long[::1] ops, const double[:, ::1] params,
                                 double x, double y, double z) noexcept nogil:
    cdef bint stack[MAX_STACK]
    cdef int top = -1
    cdef Py_ssize_t i
    cdef int op, axis
    cdef double du, dv, w
    cdef bint a, b
    for i in range(ops.shape[0]):
        op = <int> ops[i]
        if op == 0:
            top += 1
            stack[top] = (x > params[i, 0]) and (x < params[i, 1]) and \
                         (y > params[i, 2]) and (y < params[i, 3]) and \
                         (z > params[i, 4]) and (z < params[i, 5])
        elif op == 1:
            axis = <int> params[i, 0]
            if axis == 0:
                du = y - params[i, 1]; dv = z - params[i, 2]; w = x
            elif axis == 1:
                du = x - params[i, 1]; dv = z - params[i, 2]; w = y
            else:
                du = x - params[i, 1]; dv = y - params[i, 2]; w = z
            top += 1
            stack[top] = (w > params[i, 4]) and (w < params[i, 5]) and \
                         (sqrt(du * du + dv * dv) < params[i, 3])
        else:
            b = stack[top]; top -= 1
            a = stack[top]
            if op == 2:
                stack[top] = a or b
            elif op == 3:
                stack[top] = a and b
            else:
                stack[top] = a and not b
    return stack[0]


def csg_member(const long long[::1] ops, const double[:, ::1] params,
               const double[:, ::1] points):
    cdef Py_ssize_t i, n = points.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    for i in range(n):
        o[i] = _csg_member_one(ops, params, points[i, 0], points[i, 1], points[i, 2])
    return out


cdef inline bint _cells_member_one(const double[:, ::1] cells_flat,
                                   const long long[::1] offsets,
                                   double x, double y, double z) noexcept nogil:
    cdef Py_ssize_t c, j
    cdef bint inside
    for c in range(offsets.shape[0] - 1):
        inside = 1
        for j in range(offsets[c], offsets[c + 1]):
            if _margin(x, y, z, &cells_flat[j, 0]) <= 0.0:
                inside = 0
                break
        if inside:
            return 1
    return 0


def cells_member(const double[:, ::1] cells_flat, const long long[::1] offsets,
                 const double[:, ::1] points):
    cdef Py_ssize_t i, n = points.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    for i in range(n):
        o[i] = _cells_member_one(cells_flat, offsets, points[i, 0], points[i, 1], points[i, 2])
    return out


cdef inline bint _near_any_one(const double[:, ::1] surf_rows,
                               double x, double y, double z, double eps) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(surf_rows.shape[0]):
        if fabs(_margin(x, y, z, &surf_rows[j, 0])) < eps:
            return 1
    return 0


def near_any_surface(const double[:, ::1] surf_rows, const double[:, ::1] points,
                     double eps):
    cdef Py_ssize_t i, n = points.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    for i in range(n):
        o[i] = _near_any_one(surf_rows, points[i, 0], points[i, 1], points[i, 2], eps)
    return out


def agreement_count(const long long[::1] ops, const double[:, ::1] params,
                    const double[:, ::1] surf_rows,
                    const double[:, ::1] cells_flat, const long long[::1] offsets,
                    const double[:, ::1] points, double eps):
    cdef Py_ssize_t i, n = points.shape[0]
    cdef long agree = 0, used = 0
    cdef double x, y, z
    cdef bint expr, part
    for i in range(n):
        x = points[i, 0]; y = points[i, 1]; z = points[i, 2]
        if _near_any_one(surf_rows, x, y, z, eps):
            continue
        used += 1
        expr = _csg_member_one(ops, params, x, y, z)
        part = _cells_member_one(cells_flat, offsets, x, y, z)
        if expr == part:
            agree += 1
    return agree, used


def march(const double[:, ::1] origins, const double[::1] direction,
          double step, long nsteps,
          const double[:, ::1] cells_flat, const long long[::1] offsets,
          double eps):
    cdef Py_ssize_t i, n = origins.shape[0]
    cdef long k
    cdef double t, x, y, z
    cdef Py_ssize_t c, j
    cdef bint inside
    out = np.full(n, -1, dtype=np.int32)
    cdef int[::1] o = out
    for i in range(n):
        for k in range(nsteps):
            t = k * step
            x = origins[i, 0] + direction[0] * t
            y = origins[i, 1] + direction[1] * t
            z = origins[i, 2] + direction[2] * t
            inside = 0
            for c in range(offsets.shape[0] - 1):
                inside = 1
                for j in range(offsets[c], offsets[c + 1]):
                    if _margin(x, y, z, &cells_flat[j, 0]) <= eps:
                        inside = 0
                        break
                if inside:
                    break
            if inside:
                o[i] = <int> k
                break
    return out

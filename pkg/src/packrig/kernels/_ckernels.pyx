# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the hot loops; same signatures as _pykernels."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sinh, asin, sqrt

cnp.import_array()


def corner_angles(radii, tri):
    cdef double[:] r = np.ascontiguousarray(radii, dtype=np.float64)
    cdef long[:, :] t = np.ascontiguousarray(tri, dtype=np.int64)
    cdef Py_ssize_t f = t.shape[0], k
    cdef int i
    cdef double ri, rj, rk
    out = np.empty((f, 3), dtype=np.float64)
    cdef double[:, :] o = out
    for k in range(f):
        for i in range(3):
            ri = r[t[k, i]]
            rj = r[t[k, (i + 1) % 3]]
            rk = r[t[k, (i + 2) % 3]]
            o[k, i] = 2.0 * asin(sqrt(sinh(rj) * sinh(rk) / (sinh(ri + rj) * sinh(ri + rk))))
    return out


def angle_sums(radii, tri):
    cdef long[:, :] t = np.ascontiguousarray(tri, dtype=np.int64)
    cdef double[:, :] ang = corner_angles(radii, tri)
    out = np.zeros(len(radii), dtype=np.float64)
    cdef double[:] o = out
    cdef Py_ssize_t k
    cdef int i
    for k in range(t.shape[0]):
        for i in range(3):
            o[t[k, i]] += ang[k, i]
    return out


cdef inline int _corner(unsigned char blue, signed char si, signed char so) nogil:
    if not blue:
        return 0
    if si != 0 and so != 0:
        return 2 if (si > 0) == (so > 0) else 0
    if si != 0 or so != 0:
        return 1
    return 2


def vertex_weights(colors, states, cv, ein, sin, eout, sout, n_vertices):
    cdef unsigned char[:, :] c = np.ascontiguousarray(colors, dtype=np.uint8)
    cdef signed char[:, :] s = np.ascontiguousarray(states, dtype=np.int8)
    cdef long[:] vv = np.ascontiguousarray(cv, dtype=np.int64)
    cdef long[:] ei = np.ascontiguousarray(ein, dtype=np.int64)
    cdef long[:] eo = np.ascontiguousarray(eout, dtype=np.int64)
    cdef signed char[:] gi = np.ascontiguousarray(sin, dtype=np.int8)
    cdef signed char[:] go = np.ascontiguousarray(sout, dtype=np.int8)
    cdef Py_ssize_t n = c.shape[0], m = vv.shape[0], a, k
    out = np.zeros((n, n_vertices), dtype=np.int32)
    cdef int[:, :] o = out
    with nogil:
        for a in range(n):
            for k in range(m):
                o[a, vv[k]] += _corner(c[a, vv[k]], s[a, ei[k]] * gi[k], s[a, eo[k]] * go[k])
    return out


def triangle_weights(colors, states, cv, ein, sin, eout, sout):
    cdef unsigned char[:, :] c = np.ascontiguousarray(colors, dtype=np.uint8)
    cdef signed char[:, :] s = np.ascontiguousarray(states, dtype=np.int8)
    cdef long[:] vv = np.ascontiguousarray(cv, dtype=np.int64)
    cdef long[:] ei = np.ascontiguousarray(ein, dtype=np.int64)
    cdef long[:] eo = np.ascontiguousarray(eout, dtype=np.int64)
    cdef signed char[:] gi = np.ascontiguousarray(sin, dtype=np.int8)
    cdef signed char[:] go = np.ascontiguousarray(sout, dtype=np.int8)
    cdef Py_ssize_t n = c.shape[0], m = vv.shape[0], a, k
    out = np.zeros((n, m // 3), dtype=np.int32)
    cdef int[:, :] o = out
    with nogil:
        for a in range(n):
            for k in range(m):
                o[a, k // 3] += _corner(c[a, vv[k]], s[a, ei[k]] * gi[k], s[a, eo[k]] * go[k])
    return out

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

DEF MAXN = 16
DEF MAXC = 16


def merge_sorted(cnp.ndarray[cnp.int64_t, ndim=1] keys, cnp.ndarray[cnp.complex128_t, ndim=1] amps, double prune):
    cdef Py_ssize_t n = keys.shape[0]
    if n == 0:
        return keys, amps
    cdef Py_ssize_t i, m = 0
    cdef bint presorted = True
    for i in range(1, n):
        if keys[i] < keys[i - 1]:
            presorted = False
            break
    if not presorted:
        # gather once so the accumulation loop reads memory sequentially
        order = np.argsort(keys)
        keys = keys[order]
        amps = amps[order]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ok = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] oa = np.empty(n, dtype=np.complex128)
    cdef long long cur = keys[0]
    cdef double complex acc = 0
    for i in range(n):
        if keys[i] != cur:
            if acc.real * acc.real + acc.imag * acc.imag > prune * prune:
                ok[m] = cur
                oa[m] = acc
                m += 1
            cur = keys[i]
            acc = 0
        acc = acc + amps[i]
    if (acc.real * acc.real + acc.imag * acc.imag) > prune * prune:
        ok[m] = cur
        oa[m] = acc
        m += 1
    return ok[:m].copy(), oa[:m].copy()


def ring_fuse(cnp.ndarray F_in, fusion_out_s, x_in, j_in, int s, double prune):
    cdef double complex[:, :, :, :, :, ::1] F = F_in
    cdef int n = len(x_in)
    cdef int x[MAXN]
    cdef int j[MAXN]
    cdef int nch[MAXN]
    cdef int ch[MAXN][MAXC]
    cdef int pos[MAXN]
    cdef int y[MAXN]
    cdef double complex acc[MAXN + 1]
    cdef int k, t
    cdef double complex c
    cdef double p2 = prune * prune
    if n > MAXN:
        raise ValueError("ring too long")
    for k in range(n):
        x[k] = x_in[k]
        j[k] = j_in[k]
        opts = fusion_out_s[x[k]]
        nch[k] = len(opts)
        if nch[k] > MAXC:
            raise ValueError("too many fusion channels")
        for t in range(nch[k]):
            ch[k][t] = opts[t]
        pos[k] = 0
    ys = []
    cs = []
    # iterative depth-first search over y_0 .. y_{n-1}
    k = 0
    acc[0] = 1.0
    pos[0] = 0
    while k >= 0:
        if pos[k] >= nch[k]:
            pos[k] = 0
            k -= 1
            if k >= 0:
                pos[k] += 1
            continue
        y[k] = ch[k][pos[k]]
        if k == 0:
            acc[1] = acc[0]
        else:
            acc[k + 1] = acc[k] * F[j[k], x[k], s, y[k - 1], x[k - 1], y[k]]
        if acc[k + 1].real * acc[k + 1].real + acc[k + 1].imag * acc[k + 1].imag <= p2:
            pos[k] += 1
            continue
        if k == n - 1:
            c = acc[n] * F[j[0], x[0], s, y[n - 1], x[n - 1], y[0]]
            if c.real * c.real + c.imag * c.imag > p2:
                ys.append(tuple([y[t] for t in range(n)]))
                cs.append(c)
            pos[k] += 1
        else:
            k += 1
            pos[k] = 0
    return ys, cs

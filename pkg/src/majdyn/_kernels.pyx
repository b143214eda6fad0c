# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for majority dynamics on CSR graphs.

Mirrors ``_fallback`` exactly; both are exercised by the test-suite.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t idx_t
ctypedef cnp.int8_t op_t


def neighbor_sums(const idx_t[::1] indptr, const idx_t[::1] indices, const op_t[::1] c):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef idx_t s
    out = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] o = out
    for i in range(n):
        s = 0
        for k in range(indptr[i], indptr[i + 1]):
            s += c[indices[k]]
        o[i] = s
    return out


cdef inline void _step(const idx_t[::1] indptr, const idx_t[::1] indices,
                       const op_t[:] cur, op_t[:] nxt, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef idx_t s
    for i in range(n):
        s = 0
        for k in range(indptr[i], indptr[i + 1]):
            s += cur[indices[k]]
        nxt[i] = 1 if s > 0 else -1


def sync_step(const idx_t[::1] indptr, const idx_t[::1] indices, const op_t[::1] c):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out = np.empty(n, dtype=np.int8)
    cdef op_t[::1] o = out
    _step(indptr, indices, c, o, n)
    return out


def sync_run(const idx_t[::1] indptr, const idx_t[::1] indices, const op_t[::1] c0, Py_ssize_t t_max):
    """Iterate until A[t+2] == A[t] for some t <= t_max - 2.

    Returns ``(history, t_cycle)``; history holds rows ``0..t_cycle+2``, or
    all computed rows with ``t_cycle = -1`` when the horizon runs out.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t cap = 16 if t_max + 1 > 16 else t_max + 1
    cdef Py_ssize_t t, i, rows
    cdef bint same
    if cap < 3:
        cap = 3
    hist = np.empty((cap, n), dtype=np.int8)
    cdef op_t[:, ::1] h = hist
    h[0, :] = c0
    _step(indptr, indices, h[0], h[1], n)
    rows = 2
    t = 0
    while t + 2 <= t_max:
        if rows == cap:
            cap = cap * 2
            if cap > t_max + 1:
                cap = t_max + 1
            grown = np.empty((cap, n), dtype=np.int8)
            grown[:rows] = hist[:rows]
            hist = grown
            h = hist
        _step(indptr, indices, h[t + 1], h[t + 2], n)
        rows += 1
        same = True
        for i in range(n):
            if h[t + 2, i] != h[t, i]:
                same = False
                break
        if same:
            return hist[: t + 3].copy(), t
        t += 1
    return hist[:rows].copy(), -1


def async_run(const idx_t[::1] indptr, const idx_t[::1] indices, op_t[::1] c,
              const idx_t[::1] verts, bint stop_when_stable=True):
    """Apply update events to ``c`` in place.

    Returns ``(flip_positions, consumed, stable)``: positions in ``verts`` whose
    update changed the opinion, how many events were applied, and whether the
    final configuration is a fixed point.  With ``stop_when_stable`` the run
    halts as soon as no vertex disagrees with its neighbourhood sign
    (``consumed == 0`` when the initial configuration is already stable).
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t m = verts.shape[0]
    cdef Py_ssize_t e, k, v, u
    cdef idx_t unstable = 0
    cdef op_t new, old
    sums_arr = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] s = sums_arr
    for v in range(n):
        for k in range(indptr[v], indptr[v + 1]):
            s[v] += c[indices[k]]
        if (s[v] > 0) != (c[v] > 0):
            unstable += 1
    flips = np.empty(m, dtype=np.int64)
    cdef idx_t[::1] f = flips
    cdef Py_ssize_t nf = 0
    if stop_when_stable and unstable == 0:
        return flips[:0].copy(), 0, True
    for e in range(m):
        v = verts[e]
        new = 1 if s[v] > 0 else -1
        old = c[v]
        if new != old:
            f[nf] = e
            nf += 1
            c[v] = new
            # v itself is now stable; neighbours' sums shift by 2*new
            unstable -= 1
            for k in range(indptr[v], indptr[v + 1]):
                u = indices[k]
                if u == v:
                    s[u] += 2 * new
                    continue
                if (s[u] > 0) != (c[u] > 0):
                    unstable -= 1
                s[u] += 2 * new
                if (s[u] > 0) != (c[u] > 0):
                    unstable += 1
            if stop_when_stable and unstable == 0:
                return flips[:nf].copy(), e + 1, True
    return flips[:nf].copy(), m, unstable == 0


def cone_backward(const idx_t[::1] indptr, const idx_t[::1] indices, Py_ssize_t i,
                  const idx_t[::1] verts):
    """Light cone of ``i`` after the events ``verts`` (in forward time order).

    Events are scanned backwards: an update of an active vertex replaces it
    by its neighbourhood.  Returns a boolean membership mask.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t e, k, v
    mask = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] a = mask
    a[i] = 1
    for e in range(verts.shape[0] - 1, -1, -1):
        v = verts[e]
        if a[v]:
            a[v] = 0
            for k in range(indptr[v], indptr[v + 1]):
                a[indices[k]] = 1
    return mask.astype(bool)

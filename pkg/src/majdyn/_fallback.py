"""Pure Python / numpy versions of the compiled kernels (same signatures)."""

import numpy as np


def neighbor_sums(indptr, indices, c):
    c = np.asarray(c, dtype=np.int64)
    return np.add.reduceat(c[indices], indptr[:-1])


def sync_step(indptr, indices, c):
    return np.where(neighbor_sums(indptr, indices, c) > 0, 1, -1).astype(np.int8)


def sync_run(indptr, indices, c0, t_max):
    hist = [np.asarray(c0, dtype=np.int8).copy()]
    hist.append(sync_step(indptr, indices, hist[0]))
    t = 0
    while t + 2 <= t_max:
        hist.append(sync_step(indptr, indices, hist[t + 1]))
        if np.array_equal(hist[t + 2], hist[t]):
            return np.array(hist), t
        t += 1
    return np.array(hist), -1


def async_run(indptr, indices, c, verts, stop_when_stable=True):
    ptr = indptr.tolist()
    idx = indices.tolist()
    cur = c.tolist()
    n = len(cur)
    s = neighbor_sums(indptr, indices, c).tolist()
    unstable = sum((s[v] > 0) != (cur[v] > 0) for v in range(n))
    if stop_when_stable and unstable == 0:
        return np.zeros(0, dtype=np.int64), 0, True
    flips = []
    consumed = len(verts)
    for e, v in enumerate(verts.tolist()):
        new = 1 if s[v] > 0 else -1
        if new == cur[v]:
            continue
        flips.append(e)
        cur[v] = new
        unstable -= 1
        for u in idx[ptr[v] : ptr[v + 1]]:
            if u == v:
                s[u] += 2 * new
                continue
            before = (s[u] > 0) != (cur[u] > 0)
            s[u] += 2 * new
            unstable += ((s[u] > 0) != (cur[u] > 0)) - before
        if stop_when_stable and unstable == 0:
            consumed = e + 1
            break
    c[:] = cur
    return np.array(flips, dtype=np.int64), consumed, unstable == 0


def cone_backward(indptr, indices, i, verts):
    ptr = indptr.tolist()
    idx = indices.tolist()
    active = {int(i)}
    for v in reversed(verts.tolist()):
        if v in active:
            active.discard(v)
            active.update(idx[ptr[v] : ptr[v + 1]])
    mask = np.zeros(len(ptr) - 1, dtype=bool)
    mask[list(active)] = True
    return mask

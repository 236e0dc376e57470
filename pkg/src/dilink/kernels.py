"""Hot graph kernels: masked BFS distances and unit-capacity max-flow.

Every kernel exists twice: a numba ``@njit`` version operating on CSR
adjacency, and a vectorised numpy version operating on the flat arc
endpoint arrays.  The module-level names (`bfs`, `max_flow`) point at the
numba version unless numba is unavailable or disabled through
``DILINK_DISABLE_NUMBA``.

Both versions pick augmenting paths by the same rule (level-synchronous
BFS; a vertex's parent is the smallest residual key ``2*arc + backward``
among arcs from the previous level), so they return identical flows.

Conventions: vertex and arc ids are int64, ``mask`` is a bool array over
arcs, ``flow`` is a uint8 array over arcs, unreachable distance is -1.
"""

import numpy as np

from ._jit import HAVE_NUMBA, njit

__all__ = ["HAVE_NUMBA", "BACKEND", "bfs", "max_flow", "csr",
           "bfs_numba", "bfs_numpy", "max_flow_numba", "max_flow_numpy"]


def csr(n, starts):
    """Return ``(ptr, order)`` grouping arc ids by ``starts``, arc id ascending."""
    starts = np.asarray(starts, dtype=np.int64)
    order = np.argsort(starts, kind="stable").astype(np.int64)
    counts = np.bincount(starts, minlength=n)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, order


# --- numba ---------------------------------------------------------------

@njit(cache=True)
def bfs_numba(n, starts, ends, ptr, order, mask, source):
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[source] = 0
    queue[0] = source
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for idx in range(ptr[u], ptr[u + 1]):
            a = order[idx]
            if mask[a]:
                v = ends[a]
                if dist[v] < 0:
                    dist[v] = du
                    queue[tail] = v
                    tail += 1
    return dist


@njit(cache=True)
def _augment_numba(n, tails, heads, out_ptr, out_order, in_ptr, in_order,
                   mask, flow, s, t):
    dist = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    dist[s] = 0
    frontier[0] = s
    nf = 1
    level = 0
    while nf > 0 and dist[t] < 0:
        nn = 0
        for fi in range(nf):
            u = frontier[fi]
            for idx in range(out_ptr[u], out_ptr[u + 1]):
                a = out_order[idx]
                if mask[a] and flow[a] == 0:
                    v = heads[a]
                    key = 2 * a
                    if dist[v] < 0:
                        dist[v] = level + 1
                        parent[v] = key
                        nxt[nn] = v
                        nn += 1
                    elif dist[v] == level + 1 and key < parent[v]:
                        parent[v] = key
            for idx in range(in_ptr[u], in_ptr[u + 1]):
                a = in_order[idx]
                if flow[a] == 1:
                    v = tails[a]
                    key = 2 * a + 1
                    if dist[v] < 0:
                        dist[v] = level + 1
                        parent[v] = key
                        nxt[nn] = v
                        nn += 1
                    elif dist[v] == level + 1 and key < parent[v]:
                        parent[v] = key
        for fi in range(nn):
            frontier[fi] = nxt[fi]
        nf = nn
        level += 1
    if dist[t] < 0:
        return False
    v = t
    while v != s:
        key = parent[v]
        a = key >> 1
        if key & 1:
            flow[a] = 0
            v = heads[a]
        else:
            flow[a] = 1
            v = tails[a]
    return True


@njit(cache=True)
def max_flow_numba(n, tails, heads, out_ptr, out_order, in_ptr, in_order,
                   mask, s, t, limit):
    flow = np.zeros(tails.shape[0], dtype=np.uint8)
    value = 0
    if s == t:
        return value, flow
    while value < limit:
        if not _augment_numba(n, tails, heads, out_ptr, out_order, in_ptr,
                              in_order, mask, flow, s, t):
            break
        value += 1
    return value, flow


# --- numpy ---------------------------------------------------------------

def bfs_numpy(n, starts, ends, ptr, order, mask, source):
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    starts = starts[mask]
    ends = ends[mask]
    frontier = np.zeros(n, dtype=bool)
    frontier[source] = True
    level = 0
    while True:
        cand = ends[frontier[starts]]
        cand = cand[dist[cand] < 0]
        if cand.size == 0:
            return dist
        level += 1
        dist[cand] = level
        frontier[:] = False
        frontier[cand] = True


def _augment_numpy(n, tails, heads, arc_ids, mask, flow, s, t):
    dist = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    dist[s] = 0
    frontier = np.zeros(n, dtype=bool)
    frontier[s] = True
    fwd_ok = mask & (flow == 0)
    bwd_ok = flow == 1
    level = 0
    while dist[t] < 0:
        fsel = fwd_ok & frontier[tails]
        bsel = bwd_ok & frontier[heads]
        verts = np.concatenate((heads[fsel], tails[bsel]))
        keys = np.concatenate((2 * arc_ids[fsel], 2 * arc_ids[bsel] + 1))
        fresh = dist[verts] < 0
        verts = verts[fresh]
        keys = keys[fresh]
        if verts.size == 0:
            return False
        srt = np.lexsort((keys, verts))
        verts = verts[srt]
        keys = keys[srt]
        uniq, first = np.unique(verts, return_index=True)
        level += 1
        dist[uniq] = level
        parent[uniq] = keys[first]
        frontier[:] = False
        frontier[uniq] = True
    v = t
    while v != s:
        key = int(parent[v])
        a = key >> 1
        if key & 1:
            flow[a] = 0
            v = int(heads[a])
        else:
            flow[a] = 1
            v = int(tails[a])
    return True


def max_flow_numpy(n, tails, heads, out_ptr, out_order, in_ptr, in_order,
                   mask, s, t, limit):
    flow = np.zeros(tails.shape[0], dtype=np.uint8)
    value = 0
    if s == t:
        return value, flow
    arc_ids = np.arange(tails.shape[0], dtype=np.int64)
    while value < limit and _augment_numpy(n, tails, heads, arc_ids, mask, flow, s, t):
        value += 1
    return value, flow


if HAVE_NUMBA:
    BACKEND = "numba"
    bfs = bfs_numba
    max_flow = max_flow_numba
else:
    BACKEND = "numpy"
    bfs = bfs_numpy
    max_flow = max_flow_numpy

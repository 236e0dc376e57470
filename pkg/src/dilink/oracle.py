"""Exact reference solvers.

These favour obviously-correct search over speed; they are the ground
truth the polynomial solver and the gadget compiler are checked against.
All searches visit arcs in ascending id order, so certificates are
reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Optional, Sequence

import numpy as np

from .digraph import INF, Digraph, GraphError, LinkageQuery, Path, topological_order

ORACLE_MAX_VERTICES = 14
ORACLE_MAX_STATES = 5_000_000
SAT_MAX_VARIABLES = 24


class OracleLimitError(ValueError):
    """Instance exceeds a configured oracle size guard."""


def bounded_paths(g: Digraph, s: int, t: int, cap: float | int,
                  max_states: int = ORACLE_MAX_STATES) -> Iterator[Path]:
    """Simple ``(s, t)``-paths with at most ``cap`` arcs, depth-first by arc id.

    Branches are cut once the partial length plus the remaining distance to
    ``t`` exceeds ``cap``.
    """
    to_t = g.distances_to(t).tolist()
    if to_t[s] < 0 or to_t[s] > cap:
        return
    out = [g.out_arcs(v) for v in range(g.n)]
    heads = g.heads.tolist()
    on_path = [False] * g.n
    verts, arcs = [s], []
    on_path[s] = True
    states = 0
    # iterative DFS: stack of next-arc indices per depth
    stack = [0]
    if s == t:
        yield Path((s,), ())
        return
    while stack:
        u = verts[-1]
        i = stack[-1]
        if i >= len(out[u]):
            stack.pop()
            on_path[verts.pop()] = False
            if arcs:
                arcs.pop()
            continue
        stack[-1] = i + 1
        a = out[u][i]
        v = heads[a]
        if on_path[v] or to_t[v] < 0 or len(arcs) + 1 + to_t[v] > cap:
            continue
        states += 1
        if states > max_states:
            raise OracleLimitError(f"bounded path search exceeded {max_states} states")
        if v == t:
            yield Path(tuple(verts) + (v,), tuple(arcs) + (a,))
            continue
        verts.append(v)
        arcs.append(a)
        on_path[v] = True
        stack.append(0)


def _residual_shortest(g: Digraph, s: int, t: int, banned: Sequence[int]) -> Optional[Path]:
    """Shortest ``(s, t)``-path avoiding ``banned`` arcs, ties by arc id."""
    mask = np.ones(g.m, dtype=bool)
    mask[list(banned)] = False
    if s == t:
        return Path((s,), ())
    parent = [-1] * g.n
    seen = [False] * g.n
    seen[s] = True
    dq = deque([s])
    while dq:
        u = dq.popleft()
        for a in g.out_arcs(u):
            v = int(g.heads[a])
            if mask[a] and not seen[v]:
                seen[v] = True
                parent[v] = a
                if v == t:
                    arcs = []
                    while v != s:
                        arcs.append(parent[v])
                        v = int(g.tails[parent[v]])
                    return Path.from_arcs(g, s, arcs[::-1])
                dq.append(v)
    return None


def _guard(g: Digraph, limit: int) -> None:
    if g.n > limit:
        raise OracleLimitError(f"oracle limited to {limit} vertices, instance has {g.n}")


def brute_force_sw2l(g: Digraph, q: LinkageQuery, *, first_side: int = 1,
                     max_vertices: int = ORACLE_MAX_VERTICES) -> Optional[tuple[Path, Path]]:
    """Exhaustive SW2L search.

    Enumerates every bounded path of ``first_side`` and checks the other side
    by a shortest-path search in the residual digraph, which is exact because
    a residual shortest path is optimal among all disjoint completions.
    """
    _guard(g, max_vertices)
    q.check(g)
    d1 = g.distance(q.s1, q.t1)
    d2 = g.distance(q.s2, q.t2)
    if d1 == INF or d2 == INF:
        return None
    sides = [(q.s1, q.t1, d1 + q.k1), (q.s2, q.t2, d2 + q.k2)]
    if first_side == 2:
        sides.reverse()
    (sa, ta, ca), (sb, tb, cb) = sides
    for p in bounded_paths(g, sa, ta, ca):
        other = _residual_shortest(g, sb, tb, p.arcs)
        if other is not None and other.length <= cb:
            return (p, other) if first_side == 1 else (other, p)
    return None


def ssw2l_solve(g: Digraph, s1: int, t1: int, s2: int, t2: int, k: int,
                max_states: int = ORACLE_MAX_STATES) -> Optional[tuple[Path, Path]]:
    """Semi-short variant: only the first path is length-bounded.

    The guard applies to the bounded-side search, not to ``n``, so long
    subdivided gadget instances are fine.
    """
    d1 = g.distance(s1, t1)
    if d1 == INF:
        return None
    for p in bounded_paths(g, s1, t1, d1 + k, max_states):
        other = _residual_shortest(g, s2, t2, p.arcs)
        if other is not None:
            return p, other
    return None


# --- acyclic weak k-linkage ------------------------------------------------

@dataclass(frozen=True)
class WeakLinkageInstance:
    graph: Digraph
    pairs: tuple[tuple[int, int], ...]
    caps: Optional[tuple[Optional[int], ...]] = None

    def __post_init__(self):
        if not self.pairs:
            raise GraphError("need at least one terminal pair")
        if self.caps is not None and len(self.caps) != len(self.pairs):
            raise GraphError("one cap per pair")

    def cap(self, i: int) -> float | int:
        if self.caps is None or self.caps[i] is None:
            return INF
        return self.caps[i]


def acyclic_weak_k_linkage(inst: WeakLinkageInstance) -> Optional[list[Path]]:
    """Pebble-game search for arc-disjoint paths in an acyclic digraph.

    Works on the line digraph (arcs become vertices, plus one private entry
    and exit per pair), where arc-disjointness becomes vertex-disjointness.
    One pebble per pair; the unfinished pebble lowest in topological order
    is the only one allowed to move, and never onto an occupied vertex.
    A vertex a pebble has left can then never be reached by another pebble,
    which makes the search both sound and complete.  Visited states are
    memoised, so the search touches at most ``(m + 2k)^k`` positions (times
    the used-length counters when caps are given).
    """
    g = inst.graph
    order = topological_order(g)  # raises NotAcyclicError
    pos = {v: i for i, v in enumerate(order)}
    k = len(inst.pairs)
    active = [i for i, (s, t) in enumerate(inst.pairs) if s != t]
    m = g.m
    # line-digraph ids: arcs 0..m-1, entry of pair i = m + 2i, exit = m + 2i + 1
    entry = {i: m + 2 * i for i in active}
    exit_ = {i: m + 2 * i + 1 for i in active}

    def rank(x: int) -> tuple:
        if x < m:
            return (pos[int(g.tails[x])], pos[int(g.heads[x])], x)
        i, is_exit = divmod(x - m, 2)
        s, t = inst.pairs[i]
        return (pos[t], len(order) + 1, x) if is_exit else (pos[s], -1, x)

    def successors(x: int, i: int) -> list[int]:
        s, t = inst.pairs[i]
        v = s if x == entry[i] else int(g.heads[x])
        nxt = g.out_arcs(v)
        if v == t:
            nxt = nxt + [exit_[i]]
        return nxt

    caps = [inst.cap(i) for i in range(k)]
    start = tuple(entry[i] for i in active)
    start_len = tuple(0 for _ in active)
    seen = set()
    stack = [(start, start_len, ())]
    while stack:
        state, lens, moves = stack.pop()
        key = (state, lens)
        if key in seen:
            continue
        seen.add(key)
        todo = [j for j, i in enumerate(active) if state[j] != exit_[i]]
        if not todo:
            return _trace(g, inst, active, moves)
        j = min(todo, key=lambda j: rank(state[j]))
        i = active[j]
        occupied = set(state)
        # push in reverse so the smallest arc id is explored first
        for y in reversed(successors(state[j], i)):
            if y in occupied:
                continue
            step = 0 if y == exit_[i] else 1
            if lens[j] + step > caps[i]:
                continue
            nstate = state[:j] + (y,) + state[j + 1:]
            nlens = lens[:j] + (lens[j] + step,) + lens[j + 1:]
            stack.append((nstate, nlens, moves + ((j, y),)))
    return None


def _trace(g, inst, active, moves) -> list[Path]:
    arcs = {j: [] for j in range(len(active))}
    for j, y in moves:
        if y < g.m:
            arcs[j].append(y)
    paths = []
    for i, (s, t) in enumerate(inst.pairs):
        if i in active:
            paths.append(Path.from_arcs(g, s, arcs[active.index(i)]))
        else:
            paths.append(Path((s,), ()))
    return paths


def exhaustive_weak_linkage(inst: WeakLinkageInstance) -> Optional[list[Path]]:
    """All path tuples, tried in product order; for cross-checking only."""
    g = inst.graph
    options = []
    for i, (s, t) in enumerate(inst.pairs):
        cap = inst.cap(i)
        options.append(list(bounded_paths(g, s, t, g.n if cap == INF else cap)))
    for combo in product(*options):
        used = set()
        ok = True
        for p in combo:
            if used & set(p.arcs):
                ok = False
                break
            used |= set(p.arcs)
        if ok:
            return list(combo)
    return None


# --- SAT -----------------------------------------------------------------

def evaluate_clause(clause: Sequence[int], values: Sequence[bool]) -> bool:
    return any(values[abs(lit) - 1] == (lit > 0) for lit in clause)


def sat_brute_force(f) -> Optional[tuple[bool, ...]]:
    """First satisfying assignment in ascending binary order (x1 = lowest bit)."""
    n, clauses = f.n, f.clauses
    if n > SAT_MAX_VARIABLES:
        raise OracleLimitError(f"brute-force SAT limited to {SAT_MAX_VARIABLES} variables")
    for bits in range(1 << n):
        values = tuple(bool(bits >> i & 1) for i in range(n))
        if all(evaluate_clause(c, values) for c in clauses):
            return values
    return None

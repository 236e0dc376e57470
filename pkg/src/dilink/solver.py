"""Short weak 2-linkage: exception-sequence enumeration plus an exact inner search.

For slack bounds ``k1, k2`` a solution path ``P_l`` uses at most ``k_l`` arcs
outside the shortest-arc DAG ``A_l`` of its source.  The solver guesses
those arcs as ordered exception sequences, builds an auxiliary digraph in
which every admissible stretch of ``P_l`` between exceptions becomes an
exactly-shortest path between two new terminals, and looks for the
required family of arc-disjoint shortest paths there.

Connector calibration
---------------------
Stretches live inside ``A_l``, so a stretch from ``x`` to ``y`` has length
``lev(y) - lev(x)`` with ``lev`` the BFS level from ``s_l``.  The in-connector
to ``x`` has length ``lev(x) + 1`` and the out-connector from ``y`` has length
``H - lev(y) + 1``, where the horizon ``H`` is the largest of ``d(s_l, t_l)``
and the levels of the exception tails.  Every stretch then costs exactly
``H + 2`` end to end, and any route that leaves ``A_l`` costs more.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import islice
from typing import Iterator, Optional

import numpy as np

from . import kernels
from .digraph import (INF, Digraph, LevelDecomposition, LinkageQuery, Path,
                      bfs_levels, dag_distance)

log = logging.getLogger(__name__)


class InternalInvariantError(RuntimeError):
    """An invariant the algorithm guarantees was observed broken."""


@dataclass(frozen=True)
class ExceptionSequence:
    side: int
    arcs: tuple[int, ...]
    slack_used: int = 0

    def __len__(self):
        return len(self.arcs)


def chain_length(g: Digraph, ld: LevelDecomposition, arcs, target: int) -> float | int:
    """Length of the cheapest ``A``-route from the source through ``arcs`` to ``target``."""
    total = 0
    cur = ld.source
    for a in arcs:
        v, u = g.arc(a)
        total += dag_distance(ld, cur, v) + 1
        cur = u
    return total + dag_distance(ld, cur, target)


def feasibility_check(e1: ExceptionSequence, e2: ExceptionSequence,
                      ld1: LevelDecomposition, ld2: LevelDecomposition,
                      q: LinkageQuery) -> bool:
    g = ld1.graph
    for e, ld, t, k in ((e1, ld1, q.t1, q.k1), (e2, ld2, q.t2, q.k2)):
        d = ld.distance(t)
        if d == INF or len(e.arcs) > k:
            return False
        if chain_length(g, ld, e.arcs, t) > d + k:
            return False
    return True


def feasible_sequences(g: Digraph, ld: LevelDecomposition, target: int, k: int,
                       side: int) -> list[ExceptionSequence]:
    """All feasible ordered exception sequences for one side, lexicographic order."""
    d = ld.distance(target)
    if d == INF:
        return []
    bound = d + k
    off = np.flatnonzero(~ld.shortest_mask)
    off_tails = g.tails[off]
    out: list[ExceptionSequence] = []
    seq: list[int] = []
    used = np.zeros(g.m, dtype=bool)

    def visit(cur: int, prefix: int) -> None:
        row = ld.dag_row(cur)
        rest = 0 if cur == target else int(row[target])
        if rest >= 0 and prefix + rest <= bound:
            out.append(ExceptionSequence(side, tuple(seq), prefix + rest - d))
        if len(seq) == k:
            return
        for a, dv in zip(off.tolist(), row[off_tails].tolist()):
            if dv < 0 or used[a] or prefix + dv + 1 > bound:
                continue
            used[a] = True
            seq.append(a)
            visit(int(g.heads[a]), prefix + dv + 1)
            seq.pop()
            used[a] = False

    visit(ld.source, 0)
    return out


def enumerate_exception_pairs(g: Digraph, q: LinkageQuery, ld1: LevelDecomposition,
                              ld2: LevelDecomposition
                              ) -> Iterator[tuple[ExceptionSequence, ExceptionSequence]]:
    """Feasible pairs ordered by total size, then by (E1, E2) arc-id tuples."""
    f1 = feasible_sequences(g, ld1, q.t1, q.k1, 1)
    f2 = feasible_sequences(g, ld2, q.t2, q.k2, 2)
    by_len: dict[int, list[ExceptionSequence]] = {}
    for e in f2:
        by_len.setdefault(len(e), []).append(e)
    for total in range(q.k1 + q.k2 + 1):
        for e1 in f1:
            if len(e1) <= total:
                yield from ((e1, e2) for e2 in by_len.get(total - len(e1), ()))


# --- auxiliary digraph ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class AuxiliaryGraph:
    """The input digraph extended by four terminals and calibrated connectors.

    Vertices ``0..n-1`` and arcs ``0..m-1`` are those of ``base`` with the
    same ids.  ``origin_map[v]`` is ``("original", v)``, ``("terminal", name)``
    or ``("connector", side, kind, anchor_index, position)``.
    """

    base: Digraph
    graph: Digraph
    added_terminals: tuple[int, int, int, int]
    origin_map: tuple[tuple, ...]
    horizon_1: int
    horizon_2: int
    connectors: tuple[tuple[int, str, int, int], ...]

    @property
    def shortest_len_1(self) -> int:
        return self.horizon_1 + 2

    @property
    def shortest_len_2(self) -> int:
        return self.horizon_2 + 2

    def shortest_len(self, side: int) -> int:
        return self.shortest_len_1 if side == 1 else self.shortest_len_2


def build_auxiliary(g: Digraph, q: LinkageQuery, e1: ExceptionSequence,
                    e2: ExceptionSequence, ld1: Optional[LevelDecomposition] = None,
                    ld2: Optional[LevelDecomposition] = None) -> AuxiliaryGraph:
    ld1 = ld1 or bfs_levels(g, q.s1)
    ld2 = ld2 or bfs_levels(g, q.s2)
    n = g.n
    arcs = g.arcs()
    origin: list[tuple] = [("original", v) for v in range(n)]
    terminals = (n, n + 1, n + 2, n + 3)
    origin += [("terminal", name) for name in ("s1'", "t1'", "s2'", "t2'")]
    connectors = []

    def level(ld, v):
        d = ld.distance(v)
        if d == INF:
            raise InternalInvariantError(f"connector anchor {v} unreachable from {ld.source}")
        return d

    def connect(start, end, length, side, kind, anchor):
        prev = start
        for pos in range(1, length):
            fresh = len(origin)
            origin.append(("connector", side, kind, anchor, pos))
            arcs.append((prev, fresh))
            prev = fresh
        arcs.append((prev, end))
        connectors.append((side, kind, anchor, length))

    horizons = []
    for side, (e, ld, s, t) in enumerate(((e1, ld1, q.s1, q.t1), (e2, ld2, q.s2, q.t2)), 1):
        src, snk = terminals[2 * side - 2], terminals[2 * side - 1]
        ends = [g.arc(a) for a in e.arcs]
        horizon = max([level(ld, t)] + [level(ld, v) for v, _ in ends])
        horizons.append(horizon)
        for idx, x in enumerate([s] + [u for _, u in ends]):
            connect(src, x, level(ld, x) + 1, side, "in", idx)
        for idx, y in enumerate([t] + [v for v, _ in ends]):
            connect(y, snk, horizon - level(ld, y) + 1, side, "out", idx)

    aux = Digraph(len(origin), arcs, multi=True)
    return AuxiliaryGraph(g, aux, terminals, tuple(origin), horizons[0], horizons[1],
                          tuple(connectors))


@dataclass(frozen=True, eq=False)
class InnerInstance:
    aux: AuxiliaryGraph
    a1: int
    a2: int
    dag1: np.ndarray
    dag2: np.ndarray
    aux_dist_1: float | int
    aux_dist_2: float | int


def shortest_path_dag(g: Digraph, s: int, t: int) -> tuple[np.ndarray, float | int]:
    """Mask of arcs on some shortest ``(s, t)``-path, and ``d(s, t)``."""
    ds = g.distances_from(s)
    if ds[t] < 0:
        return np.zeros(g.m, dtype=bool), INF
    dt = g.distances_to(t)
    du = ds[g.tails]
    dv = dt[g.heads]
    mask = (du >= 0) & (dv >= 0) & (du + 1 + dv == ds[t])
    return mask, int(ds[t])


def build_inner_instance(aux: AuxiliaryGraph, e1: ExceptionSequence,
                         e2: ExceptionSequence) -> InnerInstance:
    s1p, t1p, s2p, t2p = aux.added_terminals
    dag1, dist1 = shortest_path_dag(aux.graph, s1p, t1p)
    dag2, dist2 = shortest_path_dag(aux.graph, s2p, t2p)
    # exception arcs are reserved for their own side and excluded from every stretch
    reserved = list(e1.arcs) + list(e2.arcs)
    dag1[reserved] = False
    dag2[reserved] = False
    for dag, dist, side in ((dag1, dist1, 1), (dag2, dist2, 2)):
        if dist != aux.shortest_len(side):
            raise InternalInvariantError(
                f"side {side}: auxiliary distance {dist} != target {aux.shortest_len(side)}")
    return InnerInstance(aux, len(e1) + 1, len(e2) + 1, dag1, dag2, dist1, dist2)


@dataclass
class InnerStats:
    nodes: int = 0
    flows: int = 0


def _decompose(g: Digraph, flow: np.ndarray, s: int, t: int, count: int) -> list[list[int]]:
    remaining = flow.astype(bool)
    paths = []
    for _ in range(count):
        cur, path = s, []
        while cur != t:
            lo, hi = g.out_ptr[cur], g.out_ptr[cur + 1]
            cand = g.out_order[lo:hi]
            cand = cand[remaining[cand]]
            if cand.size == 0:
                raise InternalInvariantError("flow decomposition stuck")
            a = int(cand.min())
            remaining[a] = False
            path.append(a)
            cur = int(g.heads[a])
        paths.append(path)
    return paths


def inner_solve(inst: InnerInstance, stats: Optional[InnerStats] = None
                ) -> Optional[tuple[list[list[int]], list[list[int]]]]:
    """Find ``a1`` side-1 and ``a2`` side-2 shortest paths, all arc-disjoint.

    Branches only on arcs that both current flows want: each such arc is
    denied to side 2 first, then to side 1.  Any solution leaves a shared
    arc unused by at least one side, so one branch keeps it; the search
    is exact.
    """
    stats = stats if stats is not None else InnerStats()
    g = inst.aux.graph
    s1p, t1p, s2p, t2p = inst.aux.added_terminals
    shared = inst.dag1 & inst.dag2

    def flow(mask, s, t, need):
        stats.flows += 1
        value, f = kernels.max_flow(g.n, g.tails, g.heads, g.out_ptr, g.out_order,
                                    g.in_ptr, g.in_order, mask, s, t, need)
        return f if value >= need else None

    def search(mask1, mask2, f1, f2):
        stats.nodes += 1
        if f1 is None:
            f1 = flow(mask1, s1p, t1p, inst.a1)
            if f1 is None:
                return None
        if f2 is None:
            f2 = flow(mask2, s2p, t2p, inst.a2)
            if f2 is None:
                return None
        clash = np.flatnonzero(shared & (f1 == 1) & (f2 == 1))
        if clash.size == 0:
            return f1, f2
        a = int(clash[0])
        m2 = mask2.copy()
        m2[a] = False
        found = search(mask1, m2, f1, None)
        if found is not None:
            return found
        m1 = mask1.copy()
        m1[a] = False
        return search(m1, mask2, None, f2)

    found = search(inst.dag1, inst.dag2, None, None)
    if found is None:
        return None
    f1, f2 = found
    return (_decompose(g, f1, s1p, t1p, inst.a1), _decompose(g, f2, s2p, t2p, inst.a2))


def stitched_arcs(paths: list[list[int]], e: ExceptionSequence, aux: AuxiliaryGraph) -> list[int]:
    """D-arcs of the inner paths plus the exception arcs, sorted."""
    m = aux.base.m
    arcs = [a for p in paths for a in p if a < m]
    arcs.extend(e.arcs)
    return sorted(arcs)


def reconstruct_path(paths: list[list[int]], e: ExceptionSequence, aux: AuxiliaryGraph,
                     s: int, t: int) -> Path:
    g = aux.base
    arcs = stitched_arcs(paths, e, aux)
    if len(set(arcs)) != len(arcs):
        raise InternalInvariantError("stitched arc set repeats an arc")
    balance: dict[int, int] = {}
    out: dict[int, list[int]] = {}
    for a in arcs:
        u, v = g.arc(a)
        balance[u] = balance.get(u, 0) + 1
        balance[v] = balance.get(v, 0) - 1
        out.setdefault(u, []).append(a)
    expect = {} if s == t else {s: 1, t: -1}
    for v in set(balance) | set(expect):
        if balance.get(v, 0) != expect.get(v, 0):
            raise InternalInvariantError(f"degree imbalance at vertex {v}")
    for lst in out.values():
        lst.reverse()  # pop() yields the smallest arc id first
    walk_v, walk_a = [s], []
    while walk_v[-1] != t:
        nxt = out.get(walk_v[-1])
        if not nxt:
            raise InternalInvariantError("stitched walk stuck before reaching target")
        a = nxt.pop()
        walk_a.append(a)
        walk_v.append(int(g.heads[a]))
    # loop-erase: cycles in the walk are dropped along with any detached ones
    verts, path_arcs, pos = [s], [], {s: 0}
    for a in walk_a:
        v = int(g.heads[a])
        if v in pos:
            cut = pos[v]
            for w in verts[cut + 1:]:
                del pos[w]
            del verts[cut + 1:]
            del path_arcs[cut:]
        else:
            pos[v] = len(verts)
            verts.append(v)
            path_arcs.append(a)
    return Path(tuple(verts), tuple(path_arcs))


# --- top level -----------------------------------------------------------

@dataclass(frozen=True)
class LinkageSolution:
    p1: Path
    p2: Path
    witness_e1: ExceptionSequence
    witness_e2: ExceptionSequence
    bound1: int
    bound2: int

    @property
    def lengths(self) -> tuple[int, int]:
        return self.p1.length, self.p2.length


@dataclass
class SolveStats:
    pairs_examined: int = 0
    overlap_skipped: int = 0
    inner_searches: int = 0
    search_nodes: int = 0
    aux_checks: int = 0
    aux_plus_two_violations: int = 0


@dataclass
class SolveResult:
    answer: str  # YES | NO | UNKNOWN
    solution: Optional[LinkageSolution] = None
    stats: SolveStats = field(default_factory=SolveStats)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: Optional[str] = None  # bad-endpoint | not-path | shared-arc | too-long

    def __bool__(self):
        return self.ok


def verify_paths(g: Digraph, w1, w2, s1: int, t1: int, s2: int, t2: int,
                 cap1: float | int, cap2: float | int) -> Verdict:
    """Check two vertex sequences against terminals and length caps."""
    arcsets = []
    for walk in (w1, w2):
        walk = [int(v) for v in walk]
        if not walk or len(set(walk)) != len(walk):
            return Verdict(False, "not-path")
        arcs = []
        for u, v in zip(walk, walk[1:]):
            if not (0 <= u < g.n and 0 <= v < g.n):
                return Verdict(False, "not-path")
            a = g.arc_id(u, v)
            if a is None:
                return Verdict(False, "not-path")
            arcs.append(a)
        arcsets.append((walk, arcs))
    (w1, a1), (w2, a2) = arcsets
    if (w1[0], w1[-1]) != (s1, t1) or (w2[0], w2[-1]) != (s2, t2):
        return Verdict(False, "bad-endpoint")
    if set(a1) & set(a2):
        return Verdict(False, "shared-arc")
    if len(a1) > cap1 or len(a2) > cap2:
        return Verdict(False, "too-long")
    return Verdict(True)


def verify_solution(g: Digraph, q: LinkageQuery, sol: LinkageSolution) -> Verdict:
    return verify_paths(g, sol.p1.vertices, sol.p2.vertices, q.s1, q.t1, q.s2, q.t2,
                        g.distance(q.s1, q.t1) + q.k1, g.distance(q.s2, q.t2) + q.k2)


@dataclass(frozen=True, eq=False)
class _Context:
    g: Digraph
    q: LinkageQuery
    ld1: LevelDecomposition
    ld2: LevelDecomposition


def _evaluate(ctx: _Context, e1: ExceptionSequence, e2: ExceptionSequence):
    """One candidate pair -> (solution or None, local stats)."""
    st = SolveStats(pairs_examined=1)
    if set(e1.arcs) & set(e2.arcs):
        st.overlap_skipped = 1
        return None, st
    aux = build_auxiliary(ctx.g, ctx.q, e1, e2, ctx.ld1, ctx.ld2)
    inst = build_inner_instance(aux, e1, e2)
    st.aux_checks = 2
    d1 = ctx.ld1.distance(ctx.q.t1)
    d2 = ctx.ld2.distance(ctx.q.t2)
    st.aux_plus_two_violations = int(inst.aux_dist_1 != d1 + 2) + int(inst.aux_dist_2 != d2 + 2)
    st.inner_searches = 1
    inner = InnerStats()
    found = inner_solve(inst, inner)
    st.search_nodes = inner.nodes
    if found is None:
        return None, st
    side1, side2 = found
    p1 = reconstruct_path(side1, e1, aux, ctx.q.s1, ctx.q.t1)
    p2 = reconstruct_path(side2, e2, aux, ctx.q.s2, ctx.q.t2)
    sol = LinkageSolution(p1, p2, e1, e2, d1 + ctx.q.k1, d2 + ctx.q.k2)
    return sol, st


def _merge(total: SolveStats, part: SolveStats) -> None:
    for name in vars(total):
        setattr(total, name, getattr(total, name) + getattr(part, name))


def solve_detailed(g: Digraph, q: LinkageQuery, *, threads: int = 1,
                   limit_candidates: Optional[int] = None) -> SolveResult:
    """Run the full candidate loop; ``answer`` is UNKNOWN only when the cap was hit."""
    q.check(g)
    stats = SolveStats()
    ld1 = bfs_levels(g, q.s1)
    ld2 = bfs_levels(g, q.s2)
    if ld1.distance(q.t1) == INF or ld2.distance(q.t2) == INF:
        return SolveResult("NO", None, stats)
    ctx = _Context(g, q, ld1, ld2)
    pairs = enumerate_exception_pairs(g, q, ld1, ld2)
    if limit_candidates is not None:
        pairs = islice(pairs, limit_candidates + 1)
    pairs = iter(pairs)
    batch_size = 1 if threads <= 1 else 4 * threads
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    seen = 0
    try:
        while True:
            batch = list(islice(pairs, batch_size))
            if limit_candidates is not None and seen + len(batch) > limit_candidates:
                batch = batch[:limit_candidates - seen]
                capped = True
            else:
                capped = False
            seen += len(batch)
            if pool is None:
                results = [_evaluate(ctx, e1, e2) for e1, e2 in batch]
            else:
                results = list(pool.map(lambda p: _evaluate(ctx, *p), batch))
            # min-index reduction keeps the answer independent of worker count
            for _, st in results:
                _merge(stats, st)
            for sol, _ in results:
                if sol is not None:
                    check = verify_solution(g, q, sol)
                    if not check:
                        raise InternalInvariantError(f"solver produced invalid certificate: {check.reason}")
                    return SolveResult("YES", sol, stats)
            if capped:
                return SolveResult("UNKNOWN", None, stats)
            if not batch:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    return SolveResult("NO", None, stats)


def solve(g: Digraph, q: LinkageQuery, threads: int = 1) -> Optional[LinkageSolution]:
    return solve_detailed(g, q, threads=threads).solution

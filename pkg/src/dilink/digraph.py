"""Digraph storage, BFS level decompositions and the instance file format.

Vertices are 0-indexed in memory and 1-indexed on disk; only the parser and
the serializers translate between the two.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels

INF = math.inf
"""Distance to an unreachable vertex."""


class GraphError(ValueError):
    """Raised when a digraph would violate its structural invariants."""


class NotAcyclicError(GraphError):
    pass


class InstanceParseError(ValueError):
    """Malformed instance or certificate text.

    ``kind`` is one of ``header``, ``self-loop``, ``duplicate-arc``,
    ``vertex-range``, ``syntax``, ``query``, ``certificate``.
    """

    def __init__(self, kind: str, lineno: int, message: str):
        self.kind = kind
        self.lineno = lineno
        super().__init__(f"line {lineno}: {kind}: {message}")


class Digraph:
    """A simple digraph with stable arc ids ``0..m-1``.

    The arrays are read-only; treat instances as immutable.  ``multi=True``
    skips the simple-graph checks and is reserved for internal auxiliary
    graphs that need parallel connector arcs.
    """

    __slots__ = ("n", "tails", "heads", "labels", "_index",
                 "out_ptr", "out_order", "in_ptr", "in_order")

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]],
                 labels: Optional[Sequence[str]] = None, *, multi: bool = False):
        arcs = list(arcs)
        if n < 0:
            raise GraphError("negative vertex count")
        tails = np.fromiter((a[0] for a in arcs), dtype=np.int64, count=len(arcs))
        heads = np.fromiter((a[1] for a in arcs), dtype=np.int64, count=len(arcs))
        if arcs and (tails.min() < 0 or heads.min() < 0 or tails.max() >= n or heads.max() >= n):
            raise GraphError("arc endpoint out of range")
        index: dict[tuple[int, int], int] = {}
        if not multi:
            for i, (u, v) in enumerate(arcs):
                if u == v:
                    raise GraphError(f"self-loop at vertex {u}")
                if (u, v) in index:
                    raise GraphError(f"duplicate arc {u}->{v}")
                index[(u, v)] = i
        if labels is not None and len(labels) != n:
            raise GraphError("label count differs from vertex count")
        tails.flags.writeable = False
        heads.flags.writeable = False
        self.n = n
        self.tails = tails
        self.heads = heads
        self.labels = tuple(labels) if labels is not None else None
        self._index = index if not multi else None
        self.out_ptr, self.out_order = kernels.csr(n, tails)
        self.in_ptr, self.in_order = kernels.csr(n, heads)

    @property
    def m(self) -> int:
        return int(self.tails.shape[0])

    def arcs(self) -> list[tuple[int, int]]:
        return list(zip(self.tails.tolist(), self.heads.tolist()))

    def arc(self, a: int) -> tuple[int, int]:
        return int(self.tails[a]), int(self.heads[a])

    def arc_id(self, u: int, v: int) -> Optional[int]:
        if self._index is None:
            raise GraphError("arc lookup by endpoints is undefined on a multigraph")
        return self._index.get((u, v))

    def out_arcs(self, v: int) -> list[int]:
        return self.out_order[self.out_ptr[v]:self.out_ptr[v + 1]].tolist()

    def in_arcs(self, v: int) -> list[int]:
        return self.in_order[self.in_ptr[v]:self.in_ptr[v + 1]].tolist()

    def full_mask(self) -> np.ndarray:
        return np.ones(self.m, dtype=bool)

    def distances_from(self, source: int, mask: Optional[np.ndarray] = None) -> np.ndarray:
        """Arc-count distances from ``source`` (-1 = unreachable)."""
        if mask is None:
            mask = self.full_mask()
        return kernels.bfs(self.n, self.tails, self.heads, self.out_ptr,
                           self.out_order, mask, source)

    def distances_to(self, target: int, mask: Optional[np.ndarray] = None) -> np.ndarray:
        """Arc-count distances to ``target`` (-1 = unreachable)."""
        if mask is None:
            mask = self.full_mask()
        return kernels.bfs(self.n, self.heads, self.tails, self.in_ptr,
                           self.in_order, mask, target)

    def distance(self, x: int, y: int) -> float | int:
        d = int(self.distances_from(x)[y])
        return INF if d < 0 else d

    def __eq__(self, other):
        if not isinstance(other, Digraph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.tails, other.tails)
                and np.array_equal(self.heads, other.heads))

    def __hash__(self):
        return hash((self.n, self.tails.tobytes(), self.heads.tobytes()))

    def __repr__(self):
        return f"Digraph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class LinkageQuery:
    s1: int
    t1: int
    s2: int
    t2: int
    k1: int = 0
    k2: int = 0

    def check(self, g: Digraph) -> None:
        for v in (self.s1, self.t1, self.s2, self.t2):
            if not 0 <= v < g.n:
                raise GraphError(f"query vertex {v} out of range")
        if self.k1 < 0 or self.k2 < 0:
            raise GraphError("slack must be non-negative")

    def with_slack(self, k1: int, k2: int) -> "LinkageQuery":
        return LinkageQuery(self.s1, self.t1, self.s2, self.t2, k1, k2)


def _as_distance(d: int) -> float | int:
    return INF if d < 0 else int(d)


@dataclass(frozen=True, eq=False)
class LevelDecomposition:
    """BFS levels from ``source`` and the arcs joining consecutive levels."""

    graph: Digraph
    source: int
    dist: np.ndarray
    levels: tuple[tuple[int, ...], ...]
    shortest_mask: np.ndarray
    _dag_rows: dict = field(default_factory=dict, repr=False)

    @property
    def shortest_arcs(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.shortest_mask).tolist())

    def distance(self, v: int) -> float | int:
        return _as_distance(int(self.dist[v]))

    def in_dag(self, a: int) -> bool:
        return bool(self.shortest_mask[a])

    def dag_row(self, x: int) -> np.ndarray:
        """Distances from ``x`` inside the shortest-arc subgraph (-1 = none)."""
        row = self._dag_rows.get(x)
        if row is None:
            row = self.graph.distances_from(x, self.shortest_mask)
            self._dag_rows[x] = row
        return row

    def dag_distance(self, x: int, y: int) -> float | int:
        return dag_distance(self, x, y)


def bfs_levels(g: Digraph, source: int) -> LevelDecomposition:
    dist = g.distances_from(source)
    dt = dist[g.tails]
    dh = dist[g.heads]
    mask = (dt >= 0) & (dh == dt + 1)
    mask.flags.writeable = False
    dist.flags.writeable = False
    reach = dist[dist >= 0]
    depth = int(reach.max()) + 1 if reach.size else 0
    levels = tuple(tuple(np.flatnonzero(dist == i).tolist()) for i in range(depth))
    return LevelDecomposition(g, source, dist, levels, mask)


def dag_distance(ld: LevelDecomposition, x: int, y: int) -> float | int:
    if x == y:
        return 0
    return _as_distance(int(ld.dag_row(x)[y]))


@dataclass(frozen=True)
class Path:
    """A path given by its vertex sequence and the matching arc ids."""

    vertices: tuple[int, ...]
    arcs: tuple[int, ...]

    @classmethod
    def from_vertices(cls, g: Digraph, vertices: Sequence[int]) -> "Path":
        vertices = tuple(int(v) for v in vertices)
        if not vertices:
            raise GraphError("empty vertex sequence")
        arcs = []
        for u, v in zip(vertices, vertices[1:]):
            a = g.arc_id(u, v)
            if a is None:
                raise GraphError(f"no arc {u}->{v}")
            arcs.append(a)
        if len(set(arcs)) != len(arcs):
            raise GraphError("arc repeated along path")
        return cls(vertices, tuple(arcs))

    @classmethod
    def from_arcs(cls, g: Digraph, start: int, arcs: Sequence[int]) -> "Path":
        verts = [start]
        for a in arcs:
            u, v = g.arc(a)
            if u != verts[-1]:
                raise GraphError(f"arc {a} does not continue the path")
            verts.append(v)
        return cls(tuple(verts), tuple(int(a) for a in arcs))

    @property
    def length(self) -> int:
        return len(self.arcs)

    @property
    def source(self) -> int:
        return self.vertices[0]

    @property
    def target(self) -> int:
        return self.vertices[-1]


def off_dag_arc_count(ld: LevelDecomposition, p: Path) -> int:
    return sum(1 for a in p.arcs if not ld.shortest_mask[a])


def topological_order(g: Digraph) -> list[int]:
    """Kahn's algorithm, always taking the smallest available vertex."""
    indeg = np.bincount(g.heads, minlength=g.n).tolist()
    heap = [v for v in range(g.n) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for a in g.out_arcs(u):
            v = int(g.heads[a])
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(order) != g.n:
        raise NotAcyclicError("digraph contains a directed cycle")
    return order


def is_acyclic(g: Digraph) -> bool:
    try:
        topological_order(g)
    except NotAcyclicError:
        return False
    return True


# --- file formats --------------------------------------------------------

def _ints(parts, lineno, kind="syntax"):
    try:
        return [int(x) for x in parts]
    except ValueError:
        raise InstanceParseError(kind, lineno, "expected integers") from None


def parse_instance(text: str) -> tuple[Digraph, Optional[LinkageQuery]]:
    """Parse ``p dilink`` instance text into a digraph and optional query."""
    n = m = None
    arcs: list[tuple[int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    query = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if n is None:
            if tag != "p" or len(parts) != 4 or parts[1] != "dilink":
                raise InstanceParseError("header", lineno, "expected 'p dilink <n> <m>'")
            n, m = _ints(parts[2:], lineno, "header")
            if n < 0 or m < 0:
                raise InstanceParseError("header", lineno, "negative size")
            continue
        if tag == "p":
            raise InstanceParseError("header", lineno, "second header line")
        if tag == "a":
            if len(parts) != 3:
                raise InstanceParseError("syntax", lineno, "expected 'a <tail> <head>'")
            u, v = _ints(parts[1:], lineno)
            if not (1 <= u <= n and 1 <= v <= n):
                raise InstanceParseError("vertex-range", lineno, f"vertex outside 1..{n}")
            if u == v:
                raise InstanceParseError("self-loop", lineno, f"self-loop at {u}")
            if (u, v) in seen:
                raise InstanceParseError("duplicate-arc", lineno,
                                         f"arc {u} {v} already on line {seen[(u, v)]}")
            seen[(u, v)] = lineno
            arcs.append((u - 1, v - 1))
        elif tag == "q":
            if query is not None:
                raise InstanceParseError("query", lineno, "second query line")
            if len(parts) != 7:
                raise InstanceParseError("query", lineno, "expected 'q s1 t1 s2 t2 k1 k2'")
            s1, t1, s2, t2, k1, k2 = _ints(parts[1:], lineno, "query")
            if not all(1 <= v <= n for v in (s1, t1, s2, t2)):
                raise InstanceParseError("vertex-range", lineno, f"query vertex outside 1..{n}")
            if k1 < 0 or k2 < 0:
                raise InstanceParseError("query", lineno, "negative slack")
            query = LinkageQuery(s1 - 1, t1 - 1, s2 - 1, t2 - 1, k1, k2)
        else:
            raise InstanceParseError("syntax", lineno, f"unknown line type {tag!r}")
    if n is None:
        raise InstanceParseError("header", 0, "missing 'p dilink' header")
    if len(arcs) != m:
        raise InstanceParseError("header", 0, f"header declares {m} arcs, found {len(arcs)}")
    return Digraph(n, arcs), query


def serialize_instance(g: Digraph, q: Optional[LinkageQuery] = None,
                       comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"p dilink {g.n} {g.m}")
    lines.extend(f"a {u + 1} {v + 1}" for u, v in g.arcs())
    if q is not None:
        lines.append(f"q {q.s1 + 1} {q.t1 + 1} {q.s2 + 1} {q.t2 + 1} {q.k1} {q.k2}")
    return "\n".join(lines) + "\n"


def serialize_certificate(paths: Optional[tuple[Path, Path]]) -> str:
    if paths is None:
        return "s NO\n"
    p1, p2 = paths
    return ("s YES\n"
            "p1 " + " ".join(str(v + 1) for v in p1.vertices) + "\n"
            "p2 " + " ".join(str(v + 1) for v in p2.vertices) + "\n")


def parse_certificate(text: str, n: int) -> Optional[tuple[list[int], list[int]]]:
    """Return the two 0-indexed vertex lists, or None for an ``s NO`` file.

    Only the syntax and vertex range are checked here; whether the lists
    are paths is the verifier's job.
    """
    answer = None
    walks: dict[str, list[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "s":
            if len(parts) != 2 or parts[1] not in ("YES", "NO") or answer is not None:
                raise InstanceParseError("certificate", lineno, "expected a single 's YES' or 's NO'")
            answer = parts[1]
        elif parts[0] in ("p1", "p2"):
            if parts[0] in walks or len(parts) < 2:
                raise InstanceParseError("certificate", lineno, f"bad {parts[0]} line")
            verts = _ints(parts[1:], lineno, "certificate")
            if not all(1 <= v <= n for v in verts):
                raise InstanceParseError("vertex-range", lineno, f"vertex outside 1..{n}")
            walks[parts[0]] = [v - 1 for v in verts]
        else:
            raise InstanceParseError("certificate", lineno, f"unknown line type {parts[0]!r}")
    if answer is None:
        raise InstanceParseError("certificate", 0, "missing 's' line")
    if answer == "NO":
        if walks:
            raise InstanceParseError("certificate", 0, "paths given for a NO answer")
        return None
    if set(walks) != {"p1", "p2"}:
        raise InstanceParseError("certificate", 0, "YES certificate needs p1 and p2")
    return walks["p1"], walks["p2"]

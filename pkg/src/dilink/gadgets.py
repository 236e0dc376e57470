"""Instance compilers: 3-SAT to semi-short weak 2-linkage, the acyclic
subdivision transform, vertex padding, and seeded random generators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .digraph import (Digraph, GraphError, LinkageQuery, Path, topological_order)
from .oracle import evaluate_clause


class CnfParseError(ValueError):
    pass


class GadgetPathError(ValueError):
    """A path does not have the shape the gadget decoding expects."""


class AssignmentError(ValueError):
    def __init__(self, clause_index: int):
        self.clause_index = clause_index
        super().__init__(f"assignment falsifies clause {clause_index + 1}")


@dataclass(frozen=True)
class CnfFormula:
    """A 3-CNF.  Literals are signed 1-based variable indices.

    ``pos_occ[i]`` / ``neg_occ[i]`` list ``(clause, position)`` for each
    occurrence of ``x_{i+1}`` / its negation, clause-major then position.
    """

    n: int
    clauses: tuple[tuple[int, int, int], ...]
    pos_occ: tuple[tuple[tuple[int, int], ...], ...] = field(init=False)
    neg_occ: tuple[tuple[tuple[int, int], ...], ...] = field(init=False)

    def __post_init__(self):
        pos = [[] for _ in range(self.n)]
        neg = [[] for _ in range(self.n)]
        for j, clause in enumerate(self.clauses):
            if len(clause) != 3:
                raise CnfParseError(f"clause {j + 1} has {len(clause)} literals, expected 3")
            for p, lit in enumerate(clause):
                if lit == 0 or abs(lit) > self.n:
                    raise CnfParseError(f"clause {j + 1}: literal {lit} out of range")
                (pos if lit > 0 else neg)[abs(lit) - 1].append((j, p))
        for i in range(self.n):
            if not pos[i] and not neg[i]:
                raise CnfParseError(f"variable {i + 1} appears in no clause")
        object.__setattr__(self, "pos_occ", tuple(map(tuple, pos)))
        object.__setattr__(self, "neg_occ", tuple(map(tuple, neg)))

    @property
    def m(self) -> int:
        return len(self.clauses)

    def a(self, i: int) -> int:
        """Largest same-literal occurrence count of variable ``i`` (0-based)."""
        return max(len(self.pos_occ[i]), len(self.neg_occ[i]))

    def occurrence(self, j: int, p: int) -> int:
        """1-based rank of the literal at clause ``j`` position ``p`` among equal literals."""
        lit = self.clauses[j][p]
        occ = (self.pos_occ if lit > 0 else self.neg_occ)[abs(lit) - 1]
        return occ.index((j, p)) + 1

    def satisfied_by(self, values: Sequence[bool]) -> bool:
        return all(evaluate_clause(c, values) for c in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n} {self.m}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


SAMPLE_CLAUSES = ((2, 3, 4), (-1, 3, -4), (1, -2, -3), (1, 2, -4))


def sample_formula() -> CnfFormula:
    return CnfFormula(4, SAMPLE_CLAUSES)


def parse_dimacs_cnf(text: str) -> CnfFormula:
    n = m = None
    tokens: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if n is not None or len(parts) != 4 or parts[1] != "cnf":
                raise CnfParseError(f"line {lineno}: malformed header {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise CnfParseError(f"line {lineno}: malformed header {line!r}") from None
            continue
        if n is None:
            raise CnfParseError(f"line {lineno}: clause before 'p cnf' header")
        try:
            tokens.extend(int(x) for x in line.split())
        except ValueError:
            raise CnfParseError(f"line {lineno}: non-integer literal") from None
    if n is None:
        raise CnfParseError("missing 'p cnf' header")
    clauses, cur = [], []
    for tok in tokens:
        if tok == 0:
            clauses.append(tuple(cur))
            cur = []
        else:
            cur.append(tok)
    if cur:
        raise CnfParseError("last clause is not zero-terminated")
    if len(clauses) != m:
        raise CnfParseError(f"header declares {m} clauses, found {len(clauses)}")
    return CnfFormula(n, tuple(clauses))


# --- the SSW2L gadget ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class GadgetLayout:
    """The compiled digraph with every vertex's role.

    ``true_side[i]`` / ``false_side[i]`` are the vertex sequences of the two
    ``(u_i, v_i)``-paths ``T_i`` / ``F_i`` including both ends.
    ``clause_routes[j][p]`` is the full vertex sequence ``c_j ... c'_j`` that
    the second path takes through the literal at position ``p``.
    """

    graph: Digraph
    roles: tuple[str, ...]
    formula: CnfFormula
    k: int
    subdivision_count: int
    s1: int
    t1: int
    s2: int
    t2: int
    true_side: tuple[tuple[int, ...], ...]
    false_side: tuple[tuple[int, ...], ...]
    clause_vertices: tuple[tuple[int, int], ...]
    clause_routes: tuple[tuple[tuple[int, ...], ...], ...]
    pre_subdivision_n: int

    @property
    def query(self) -> LinkageQuery:
        return LinkageQuery(self.s1, self.t1, self.s2, self.t2, self.k, 0)

    def roles_text(self) -> str:
        return "".join(f"v {v + 1} {r}\n" for v, r in enumerate(self.roles))


def subdivision_count(f: CnfFormula, k: int, cheap: bool = False) -> int:
    """Internal vertices per clause arc: ``mn + 2n + k``.

    ``cheap`` gives ``ceil((2n + k + sum a_i) / 2)`` instead.  That count is
    not always enough: a clause detour costs ``2 * (count + 1) + 1`` arcs but
    can skip close to ``2 * sum a_i + 2n`` of them, so an unsatisfiable
    formula may get a YES gadget.  Use it only for small demo graphs.
    """
    if cheap:
        return math.ceil((2 * f.n + k + sum(f.a(i) for i in range(f.n))) / 2)
    return f.m * f.n + 2 * f.n + k


def build_ssw2l_gadget(f: CnfFormula, k: int = 0, *, cheap_subdivision: bool = False) -> GadgetLayout:
    if k < 0:
        raise ValueError("k must be non-negative")
    roles: list[str] = []
    arcs: list[tuple[int, int]] = []

    def vertex(role: str) -> int:
        roles.append(role)
        return len(roles) - 1

    s1, t1, s2, t2 = (vertex(r) for r in ("s1", "t1", "s2", "t2"))
    ys, ybars, true_side, false_side, us, vs = [], [], [], [], [], []
    for i in range(f.n):
        a = f.a(i)
        u = vertex(f"u{i + 1}")
        v = vertex(f"v{i + 1}")
        y = {r: vertex(f"y({i + 1},{r})") for r in range(1, 2 * a + 1)}
        yb = {r: vertex(f"ybar({i + 1},{r})") for r in range(1, 2 * a + 1)}
        t_side = (u,) + tuple(y[r] for r in range(2 * a, 0, -1)) + (v,)
        f_side = (u,) + tuple(yb[r] for r in range(2 * a, 0, -1)) + (v,)
        for side in (t_side, f_side):
            arcs.extend(zip(side, side[1:]))
        ys.append(y)
        ybars.append(yb)
        true_side.append(t_side)
        false_side.append(f_side)
        us.append(u)
        vs.append(v)
    clause_vs = [(vertex(f"c{j + 1}"), vertex(f"c'{j + 1}")) for j in range(f.m)]
    pre_n = len(roles)

    for i in range(f.n - 1):
        arcs.append((vs[i], us[i + 1]))
    arcs.append((s1, us[0]))
    arcs.append((vs[-1], t1))
    arcs.append((s2, clause_vs[0][0]))
    arcs.append((clause_vs[-1][1], t2))
    for j in range(f.m - 1):
        arcs.append((clause_vs[j][1], clause_vs[j + 1][0]))

    sub = subdivision_count(f, k, cheap_subdivision)
    clause_arc_id = 0

    def subdivided(a: int, b: int) -> tuple[int, ...]:
        nonlocal clause_arc_id
        clause_arc_id += 1
        chain = [a] + [vertex(f"sub({clause_arc_id},{pos})") for pos in range(1, sub + 1)] + [b]
        arcs.extend(zip(chain, chain[1:]))
        return tuple(chain)

    routes = []
    for j, clause in enumerate(f.clauses):
        cj, cpj = clause_vs[j]
        per_lit = []
        for p, lit in enumerate(clause):
            r = f.occurrence(j, p)
            side = ys if lit > 0 else ybars
            hi, lo = side[abs(lit) - 1][2 * r], side[abs(lit) - 1][2 * r - 1]
            into = subdivided(cj, hi)
            out = subdivided(lo, cpj)
            per_lit.append(into + out)
        routes.append(tuple(per_lit))

    g = Digraph(len(roles), arcs, labels=roles)
    return GadgetLayout(g, tuple(roles), f, k, sub, s1, t1, s2, t2, tuple(true_side),
                        tuple(false_side), tuple(clause_vs), tuple(routes), pre_n)


def assignment_to_linkage(layout: GadgetLayout, f: CnfFormula,
                          phi: Sequence[bool]) -> tuple[Path, Path]:
    if len(phi) != f.n:
        raise ValueError(f"assignment has {len(phi)} values for {f.n} variables")
    for j, clause in enumerate(f.clauses):
        if not evaluate_clause(clause, phi):
            raise AssignmentError(j)
    g = layout.graph
    p1 = [layout.s1]
    for i in range(f.n):
        p1.extend(layout.false_side[i] if phi[i] else layout.true_side[i])
    p1.append(layout.t1)
    p2 = [layout.s2]
    for j, clause in enumerate(f.clauses):
        p = next(p for p, lit in enumerate(clause) if evaluate_clause((lit,), phi))
        p2.extend(layout.clause_routes[j][p])
    p2.append(layout.t2)
    return Path.from_vertices(g, p1), Path.from_vertices(g, p2)


def linkage_to_assignment(layout: GadgetLayout, p1: Path) -> tuple[bool, ...]:
    on = set(p1.vertices)
    for v in p1.vertices:
        role = layout.roles[v]
        if role.startswith(("c", "sub(")):
            raise GadgetPathError(f"path touches clause vertex {role}")
    phi = []
    for i in range(layout.formula.n):
        t_in = any(v in on for v in layout.true_side[i][1:-1])
        f_in = any(v in on for v in layout.false_side[i][1:-1])
        if t_in == f_in:
            raise GadgetPathError(f"path uses {'both' if t_in else 'neither'} sides of W{i + 1}")
        phi.append(f_in)
    return tuple(phi)


# --- transforms ----------------------------------------------------------

def subdivide_for_w1(g: Digraph) -> Digraph:
    """Replace each arc ``v_i v_j`` (topological positions) by a path of length ``j - i``.

    Original vertices keep their ids; fresh vertices are appended in arc order.
    """
    order = topological_order(g)
    pos = {v: i for i, v in enumerate(order)}
    n = g.n
    arcs = []
    for u, v in g.arcs():
        prev = u
        for _ in range(pos[v] - pos[u] - 1):
            arcs.append((prev, n))
            prev = n
            n += 1
        arcs.append((prev, v))
    return Digraph(n, arcs)


def pad_vertices(g: Digraph, target_n: int) -> Digraph:
    if target_n < g.n:
        raise GraphError(f"target size {target_n} is below the current {g.n} vertices")
    labels = None if g.labels is None else g.labels + ("",) * (target_n - g.n)
    return Digraph(target_n, g.arcs(), labels=labels)


def eth_padding_size(n: int, eps: float) -> int:
    """Padded vertex count ``ceil(2 ** (n ** (1 / (1 + eps))))``; only sane for tiny ``n``."""
    return math.ceil(2 ** (n ** (1 / (1 + eps))))


# --- generators ----------------------------------------------------------

def gen_random_digraph(rng: np.random.Generator, n: int, p: float, *, acyclic: bool = False) -> Digraph:
    arcs = []
    for u in range(n):
        for v in range(n):
            if u == v or (acyclic and v < u):
                continue
            if rng.random() < p:
                arcs.append((u, v))
    if acyclic:
        perm = rng.permutation(n)
        arcs = [(int(perm[u]), int(perm[v])) for u, v in arcs]
    return Digraph(n, arcs)


def _pick_pair(rng, g: Digraph) -> tuple[int, int]:
    reachable = []
    for s in range(g.n):
        dist = g.distances_from(s)
        reachable.extend((s, int(t)) for t in np.flatnonzero(dist > 0))
    if reachable:
        return reachable[rng.integers(len(reachable))]
    s, t = rng.choice(g.n, size=2, replace=False)
    return int(s), int(t)


def gen_random_instance(seed: int, n: int, arc_probability: float, k1: int, k2: int
                        ) -> tuple[Digraph, LinkageQuery]:
    if n < 2:
        raise ValueError("need at least two vertices")
    if not 0 <= arc_probability < 1:
        raise ValueError("arc probability must be in [0, 1)")
    rng = np.random.default_rng(seed)
    g = gen_random_digraph(rng, n, arc_probability)
    s1, t1 = _pick_pair(rng, g)
    s2, t2 = _pick_pair(rng, g)
    return g, LinkageQuery(s1, t1, s2, t2, k1, k2)


def gen_random_cnf(seed: int, n: int, m: int, *, repeat_probability: float = 0.25) -> CnfFormula:
    """Random 3-CNF over exactly ``n`` variables, each used at least once.

    With probability ``repeat_probability`` a literal copies an earlier one in
    its clause, so small formulas can still be unsatisfiable.
    """
    if 3 * m < n:
        raise ValueError("too few clauses to mention every variable")
    rng = np.random.default_rng(seed)
    while True:
        clauses = []
        for _ in range(m):
            clause = []
            for p in range(3):
                if p and rng.random() < repeat_probability:
                    lit = clause[rng.integers(p)]
                else:
                    lit = int(rng.integers(1, n + 1)) * (1 if rng.random() < 0.5 else -1)
                clause.append(lit)
            clauses.append(tuple(clause))
        if {abs(l) for c in clauses for l in c} == set(range(1, n + 1)):
            return CnfFormula(n, tuple(clauses))


def sample_path(rng: np.random.Generator, g: Digraph, source: int,
                max_len: Optional[int] = None) -> Path:
    """Random self-avoiding walk from ``source``, stopped at a random length."""
    stop = int(rng.integers(0, (max_len or g.n) + 1))
    verts, arcs, seen = [source], [], {source}
    while len(arcs) < stop:
        choices = [a for a in g.out_arcs(verts[-1]) if int(g.heads[a]) not in seen]
        if not choices:
            break
        a = choices[rng.integers(len(choices))]
        v = int(g.heads[a])
        verts.append(v)
        arcs.append(a)
        seen.add(v)
    return Path(tuple(verts), tuple(arcs))

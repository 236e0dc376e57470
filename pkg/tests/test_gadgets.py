import itertools

import numpy as np
import pytest

import brute
from dilink.digraph import (Digraph, GraphError, LinkageQuery, NotAcyclicError, Path, is_acyclic,
                            serialize_instance, topological_order)
from dilink.gadgets import (AssignmentError, CnfFormula, CnfParseError, GadgetPathError,
                            assignment_to_linkage, build_ssw2l_gadget, eth_padding_size,
                            sample_formula, gen_random_cnf, gen_random_digraph,
                            gen_random_instance, linkage_to_assignment, pad_vertices,
                            parse_dimacs_cnf, subdivide_for_w1, subdivision_count)
from dilink.oracle import bounded_paths, sat_brute_force, ssw2l_solve
from dilink.solver import solve, verify_paths

SAMPLE_PHI = (True, True, True, False)
ALL_EIGHT = CnfFormula(3, tuple((a, 2 * b, 3 * c) for a in (1, -1) for b in (1, -1)
                                for c in (1, -1)))


def _verify_ssw2l(layout, p1, p2):
    cap = layout.graph.distance(layout.s1, layout.t1) + layout.k
    return verify_paths(layout.graph, p1.vertices, p2.vertices, layout.s1, layout.t1,
                        layout.s2, layout.t2, cap, float("inf"))


class TestCnf:
    def test_sample_formula_counts(self):
        f = sample_formula()
        assert (f.n, f.m) == (4, 4)
        assert [f.a(i) for i in range(4)] == [2, 2, 2, 2]

    def test_repeated_literal(self):
        f = parse_dimacs_cnf("p cnf 1 1\n1 1 1 0\n")
        assert (f.n, f.m, f.a(0)) == (1, 1, 3)
        assert [f.occurrence(0, p) for p in range(3)] == [1, 2, 3]

    @pytest.mark.parametrize("text", [
        "p cnf 2 1\n1 2 0\n",
        "p cnf 2 1\n1 2 3 0\n",
        "p cnf 3 1\n1 2 -2 0\n",
        "1 2 3 0\n",
        "p cnf 3 2\n1 2 3 0\n",
        "p cnf 3 1\n1 2 x 0\n",
        "p cnf 3 1\n1 2 3\n",
    ])
    def test_parse_errors(self, text):
        with pytest.raises(CnfParseError):
            parse_dimacs_cnf(text)

    def test_dimacs_round_trip(self):
        f = sample_formula()
        assert parse_dimacs_cnf("c comment\n" + f.to_dimacs()) == f

    def test_clause_split_across_lines(self):
        assert parse_dimacs_cnf("p cnf 3 1\n1 -2\n3 0\n").clauses == ((1, -2, 3),)


class TestGadgetGeometry:
    def test_sample_formula_counts(self):
        f = sample_formula()
        layout = build_ssw2l_gadget(f, 1)
        g = layout.graph
        assert layout.pre_subdivision_n == 52
        assert layout.subdivision_count == 25
        roles = layout.roles
        assert sum(r.startswith("sub(") for r in roles) == 24 * 25
        assert g.n == 52 + 24 * 25
        assert g.distance(layout.s1, layout.t1) == 25
        for j, routes in enumerate(layout.clause_routes):
            for route in routes:
                # c_j -> y-pair -> c'_j, each clause arc a 26-arc path
                assert len(route) == 2 * 27
                assert Path.from_vertices(g, route[:27]).length == 26

    def test_gadget_sides(self):
        f = sample_formula()
        layout = build_ssw2l_gadget(f, 0)
        g = layout.graph
        for i in range(f.n):
            t, fs = layout.true_side[i], layout.false_side[i]
            assert len(t) - 2 == len(fs) - 2 == 2 * f.a(i)
            assert not set(t[1:-1]) & set(fs[1:-1])
            Path.from_vertices(g, t)
            Path.from_vertices(g, fs)

    def test_clause_degrees_before_subdivision(self):
        f = sample_formula()
        layout = build_ssw2l_gadget(f, 0)
        g = layout.graph
        for j, (c, cp) in enumerate(layout.clause_vertices):
            into_lit = [a for a in g.out_arcs(c) if layout.roles[int(g.heads[a])].startswith("sub(")]
            from_lit = [a for a in g.in_arcs(cp) if layout.roles[int(g.tails[a])].startswith("sub(")]
            assert len(into_lit) == len(from_lit) == 3

    def test_single_variable(self):
        f = parse_dimacs_cnf("p cnf 1 1\n1 1 1 0\n")
        layout = build_ssw2l_gadget(f, 0)
        assert len(layout.true_side[0]) == 8
        role = layout.roles
        landing = {role[route[len(route) // 2 - 1]] for route in layout.clause_routes[0]}
        assert landing == {"y(1,2)", "y(1,4)", "y(1,6)"}

    def test_subdivision_counts(self):
        f = sample_formula()
        assert subdivision_count(f, 1) == 25
        assert subdivision_count(f, 1, cheap=True) == 9

    def test_roles_text(self):
        layout = build_ssw2l_gadget(parse_dimacs_cnf("p cnf 1 1\n1 1 1 0\n"), 0)
        lines = layout.roles_text().splitlines()
        assert lines[:4] == ["v 1 s1", "v 2 t1", "v 3 s2", "v 4 t2"]
        assert len(lines) == layout.graph.n

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_short_paths_avoid_clauses(self, k):
        for f in (sample_formula(), gen_random_cnf(3, 3, 3)):
            layout = build_ssw2l_gadget(f, k)
            g = layout.graph
            d = g.distance(layout.s1, layout.t1)
            paths = list(bounded_paths(g, layout.s1, layout.t1, d + k))
            assert paths
            for p in paths:
                assert p.length == d
                assert not any(layout.roles[v].startswith(("c", "sub(")) for v in p.vertices)

    def test_cheap_bound_admits_clause_detour(self):
        layout = build_ssw2l_gadget(ALL_EIGHT, 0, cheap_subdivision=True)
        g = layout.graph
        d = g.distance(layout.s1, layout.t1)
        detours = [p for p in bounded_paths(g, layout.s1, layout.t1, d)
                   if any(layout.roles[v].startswith("c") for v in p.vertices)]
        assert detours
        assert ssw2l_solve(g, layout.s1, layout.t1, layout.s2, layout.t2, 0) is not None
        assert sat_brute_force(ALL_EIGHT) is None


class TestConverters:
    def test_sample_formula_forward(self):
        f = sample_formula()
        layout = build_ssw2l_gadget(f, 1)
        p1, p2 = assignment_to_linkage(layout, f, SAMPLE_PHI)
        assert _verify_ssw2l(layout, p1, p2)
        assert p1.length == 25
        assert linkage_to_assignment(layout, p1) == SAMPLE_PHI

    def test_every_satisfying_assignment(self):
        f = sample_formula()
        layout = build_ssw2l_gadget(f, 0)
        count = 0
        for phi in itertools.product((False, True), repeat=f.n):
            if f.satisfied_by(phi):
                count += 1
                p1, p2 = assignment_to_linkage(layout, f, phi)
                assert _verify_ssw2l(layout, p1, p2)
                assert linkage_to_assignment(layout, p1) == phi
        assert count > 0

    def test_false_assignment_names_clause(self):
        f = sample_formula()
        layout = build_ssw2l_gadget(f, 0)
        # all false kills (x2 v x3 v x4), the first clause
        with pytest.raises(AssignmentError) as info:
            assignment_to_linkage(layout, f, (False,) * 4)
        assert info.value.clause_index == 0 and "clause 1" in str(info.value)

    def test_mixed_sides(self):
        f = CnfFormula(2, ((1, 2, 2), (-1, -2, -2)))
        layout = build_ssw2l_gadget(f, 0)
        g = layout.graph
        verts = [layout.s1, *layout.true_side[0], *layout.false_side[1], layout.t1]
        assert linkage_to_assignment(layout, Path.from_vertices(g, verts)) == (False, True)

    def test_malformed_paths(self):
        f = sample_formula()
        layout = build_ssw2l_gadget(f, 0)
        _, p2 = assignment_to_linkage(layout, f, SAMPLE_PHI)
        with pytest.raises(GadgetPathError):
            linkage_to_assignment(layout, p2)
        g = layout.graph
        with pytest.raises(GadgetPathError):
            linkage_to_assignment(layout, Path.from_vertices(g, [layout.s1]))

    @pytest.mark.parametrize("seed", range(6))
    def test_backward_direction(self, seed):
        f = gen_random_cnf(seed, 3, 3)
        layout = build_ssw2l_gadget(f, seed % 2)
        got = ssw2l_solve(layout.graph, layout.s1, layout.t1, layout.s2, layout.t2, layout.k)
        assert (got is None) == (sat_brute_force(f) is None)
        if got is not None:
            assert _verify_ssw2l(layout, *got)
            assert f.satisfied_by(linkage_to_assignment(layout, got[0]))


class TestSubdivide:
    def test_shortcut_arc(self):
        g = Digraph(3, [(0, 2), (0, 1), (1, 2)])
        h = subdivide_for_w1(g)
        assert h.n == 4
        assert h.distance(0, 2) == 2
        assert sorted(len(p) for p in brute.simple_paths(h.n, h.arcs(), 0, 2)) == [2, 2]

    def test_consecutive_unchanged(self):
        g = Digraph(3, [(0, 1), (1, 2)])
        assert subdivide_for_w1(g) == g

    def test_tournament(self):
        g = Digraph(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])
        h = subdivide_for_w1(g)
        assert h.distance(0, 3) == 3
        assert brute.dag_longest(h.n, h.arcs(), topological_order(h), 0)[3] == 3

    def test_cyclic(self):
        with pytest.raises(NotAcyclicError):
            subdivide_for_w1(Digraph(2, [(0, 1), (1, 0)]))

    @pytest.mark.parametrize("seed", range(20))
    def test_all_walks_shortest(self, seed):
        rng = np.random.default_rng(seed)
        g = gen_random_digraph(rng, int(rng.integers(2, 8)), 0.4, acyclic=True)
        h = subdivide_for_w1(g)
        order = topological_order(g)
        horder = topological_order(h)
        for i, u in enumerate(order):
            dist = h.distances_from(u)
            longest = brute.dag_longest(h.n, h.arcs(), horder, u)
            for j, w in enumerate(order):
                if dist[w] >= 0:
                    assert dist[w] == longest[w] == j - i


class TestPadding:
    def test_identity(self):
        g = Digraph(3, [(0, 1)])
        assert pad_vertices(g, 3) == g

    def test_size_and_answer(self):
        g = Digraph(4, [(0, 1), (1, 3), (0, 2), (2, 3)])
        q = LinkageQuery(0, 3, 0, 3, 0, 0)
        h = pad_vertices(g, 20)
        assert h.n == 20 and h.arcs() == g.arcs()
        assert (solve(h, q) is None) == (solve(g, q) is None) is False

    def test_shrink_rejected(self):
        with pytest.raises(GraphError):
            pad_vertices(Digraph(3, []), 2)

    @pytest.mark.parametrize("seed", range(15))
    def test_invariance(self, seed):
        g, q = gen_random_instance(seed, 6, 0.3, seed % 3, 1)
        assert (solve(pad_vertices(g, 11), q) is None) == (solve(g, q) is None)

    def test_eth_size(self):
        assert eth_padding_size(4, 1.0) == 4
        assert eth_padding_size(1, 0.5) == 2


class TestGenerators:
    def test_instance_determinism(self):
        a = gen_random_instance(11, 7, 0.3, 1, 2)
        b = gen_random_instance(11, 7, 0.3, 1, 2)
        assert serialize_instance(*a) == serialize_instance(*b)
        assert serialize_instance(*a) != serialize_instance(*gen_random_instance(12, 7, 0.3, 1, 2))

    def test_dense_terminals_reachable(self):
        g, q = gen_random_instance(0, 6, 0.95, 0, 0)
        assert g.distance(q.s1, q.t1) < float("inf") and g.distance(q.s2, q.t2) < float("inf")

    def test_sparse_mix(self):
        answers = set()
        for seed in range(40):
            g, q = gen_random_instance(seed, 6, 0.05, 1, 1)
            sol = solve(g, q)
            assert (sol is not None) == brute.sw2l_exists(g.n, g.arcs(), q.s1, q.t1, q.s2, q.t2,
                                                          1, 1)
            answers.add(sol is not None)
        assert answers == {True, False}

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            gen_random_instance(0, 1, 0.3, 0, 0)
        with pytest.raises(ValueError):
            gen_random_instance(0, 4, 1.0, 0, 0)

    def test_cnf_uses_every_variable(self):
        f = gen_random_cnf(5, 4, 3)
        assert {abs(l) for c in f.clauses for l in c} == {1, 2, 3, 4}
        assert gen_random_cnf(5, 4, 3) == f

    def test_acyclic_digraph(self):
        rng = np.random.default_rng(1)
        assert all(is_acyclic(gen_random_digraph(rng, 7, 0.5, acyclic=True)) for _ in range(20))

"""Short weak 2-linkage in digraphs: solver, exact oracles and hardness gadgets."""

from .digraph import (INF, Digraph, GraphError, InstanceParseError, LevelDecomposition,
                      LinkageQuery, NotAcyclicError, Path, bfs_levels, dag_distance,
                      off_dag_arc_count, parse_instance, serialize_instance,
                      topological_order)
from .solver import (LinkageSolution, SolveResult, Verdict, solve, solve_detailed,
                     verify_solution)

__all__ = [
    "INF", "Digraph", "GraphError", "InstanceParseError", "LevelDecomposition",
    "LinkageQuery", "NotAcyclicError", "Path", "bfs_levels", "dag_distance",
    "off_dag_arc_count", "parse_instance", "serialize_instance", "topological_order",
    "LinkageSolution", "SolveResult", "Verdict", "solve", "solve_detailed",
    "verify_solution",
]

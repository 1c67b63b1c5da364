from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, permutations

from qbdst.instance import Arc, Instance, validate
from qbdst.gen import UndirectedGraph

SINGLE_ARC = "NODES 2\nROOT 1\nTERMINALS 2\nARC 1 2 5\nEND\n"

# Worked example: a1=(r->t1,3) a2=(r->t2,3) a3=(t2->t1,1) a4=(t1->t2,1)
# with r=1, t1=2, t2=3.
FOUR_NODE = (
    "NODES 3\nROOT 1\nTERMINALS 2 3\n"
    "ARC 1 2 3\nARC 1 3 3\nARC 3 2 1\nARC 2 3 1\nEND\n"
)


def random_qb_instance(
    rng: random.Random,
    max_nodes: int = 10,
    arc_prob: float = 0.3,
    cost_hi: int = 5,
) -> Instance:
    """Random quasi-bipartite digraph; not necessarily feasible."""
    n = rng.randint(2, max_nodes)
    terminals = frozenset(v for v in range(2, n + 1) if rng.random() < 0.5)
    if not terminals:
        terminals = frozenset([rng.randint(2, n)])
    steiner = set(range(2, n + 1)) - terminals
    arcs = []
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            if u == v or (u in steiner and v in steiner):
                continue
            if rng.random() < arc_prob:
                arcs.append(Arc(u, v, Fraction(rng.randint(0, cost_hi))))
    return Instance(node_count=n, root=1, terminals=terminals, arcs=tuple(arcs))


def random_valid_instance(
    rng: random.Random,
    max_nodes: int = 5,
    max_arcs: int = 14,
    rational_costs: bool = True,
) -> Instance:
    """Rejection-sample until every terminal is reachable from the root."""
    while True:
        n = rng.randint(2, max_nodes)
        terminals = frozenset(v for v in range(2, n + 1) if rng.random() < 0.6)
        if not terminals:
            continue
        steiner = set(range(2, n + 1)) - terminals
        arcs = []
        for u in range(1, n + 1):
            for v in range(1, n + 1):
                if u == v or (u in steiner and v in steiner):
                    continue
                if rng.random() < 0.45:
                    if rational_costs:
                        cost = Fraction(rng.randint(0, 8), rng.randint(1, 3))
                    else:
                        cost = Fraction(rng.randint(0, 8))
                    arcs.append(Arc(u, v, cost))
        if len(arcs) > max_arcs:
            continue
        inst = Instance(node_count=n, root=1, terminals=terminals, arcs=tuple(arcs))
        if not validate(inst):
            return inst


def random_connected_graph(rng: random.Random, n: int, max_edges: int) -> UndirectedGraph:
    """Random spanning tree plus extra edges, capped at max_edges."""
    while True:
        nodes = list(range(1, n + 1))
        rng.shuffle(nodes)
        edges = set()
        for i in range(1, n):
            other = nodes[rng.randrange(i)]
            edges.add((min(nodes[i], other), max(nodes[i], other)))
        for u, v in combinations(range(1, n + 1), 2):
            if rng.random() < 0.25:
                edges.add((u, v))
        if len(edges) <= max_edges:
            return UndirectedGraph(node_count=n, edges=tuple(sorted(edges)))


def connected_graphs_up_to_iso(n: int) -> list[UndirectedGraph]:
    """Exhaustive connected simple graphs on n labeled nodes, one per
    isomorphism class."""
    all_edges = list(combinations(range(1, n + 1), 2))
    perms = list(permutations(range(1, n + 1)))
    seen = set()
    out = []
    for mask in range(1 << len(all_edges)):
        edges = tuple(e for i, e in enumerate(all_edges) if mask >> i & 1)
        graph = UndirectedGraph(node_count=n, edges=edges)
        if not graph.is_connected():
            continue
        canonical = min(
            tuple(sorted(
                (min(p[u - 1], p[v - 1]), max(p[u - 1], p[v - 1])) for u, v in edges
            ))
            for p in perms
        )
        if canonical in seen:
            continue
        seen.add(canonical)
        out.append(graph)
    return out

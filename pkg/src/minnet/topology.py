"""Combinatorial tree topologies for terminal-spanning networks.

A *full* topology on n >= 3 terminals has n - 2 branch (Steiner) nodes, every
terminal of degree 1 and every branch node of degree 3.  Nodes are indexed
0..n-1 for terminals and n..2n-3 for branch nodes.  Terminals are labeled;
branch nodes are interchangeable, which is what :func:`canonical_key`
quotients out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

__all__ = [
    "Topology",
    "TopologyError",
    "count_full_topologies",
    "enumerate_full_topologies",
    "canonical_key",
]


class TopologyError(ValueError):
    """Structurally invalid topology or out-of-range terminal count."""


@dataclass(frozen=True)
class Topology:
    """An abstract tree on labeled terminals plus unlabeled branch nodes."""

    n_terminals: int
    n_steiner: int
    edges: tuple[tuple[int, int], ...]
    _adj: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        n, s = self.n_terminals, self.n_steiner
        if n < 2 or s < 0:
            raise TopologyError("need at least two terminals and n_steiner >= 0")
        total = n + s
        seen = set()
        adj = {i: [] for i in range(total)}
        for u, v in self.edges:
            if not (0 <= u < total and 0 <= v < total) or u == v:
                raise TopologyError(f"bad edge ({u}, {v})")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise TopologyError(f"duplicate edge ({u}, {v})")
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        if len(self.edges) != total - 1:
            raise TopologyError("a tree on k nodes needs exactly k - 1 edges")
        # Connectivity: walk from node 0.
        stack, visited = [0], {0}
        while stack:
            for w in adj[stack.pop()]:
                if w not in visited:
                    visited.add(w)
                    stack.append(w)
        if len(visited) != total:
            raise TopologyError("edge set is not connected")
        object.__setattr__(self, "_adj", {k: tuple(v) for k, v in adj.items()})

    @property
    def n_nodes(self) -> int:
        return self.n_terminals + self.n_steiner

    def neighbors(self, node: int) -> tuple[int, ...]:
        return self._adj[node]

    def degree(self, node: int) -> int:
        return len(self._adj[node])

    def is_full(self) -> bool:
        """True when every terminal has degree 1 and every branch node degree 3."""
        if self.n_terminals >= 3 and self.n_steiner != self.n_terminals - 2:
            return False
        ok_t = all(self.degree(i) == 1 for i in range(self.n_terminals))
        ok_s = all(self.degree(i) == 3 for i in range(self.n_terminals, self.n_nodes))
        return ok_t and ok_s

    def canonical_key(self) -> str:
        return canonical_key(self)


def count_full_topologies(n: int) -> int:
    """Number of full topologies on n labeled terminals: (2n-4)! / (2^(n-2) (n-2)!).

    Equals the double factorial (2n-5)!! = 1, 3, 15, 105, ... for n = 3, 4, 5, 6.
    """
    if n < 2:
        raise TopologyError("need n >= 2 terminals")
    if n == 2:
        return 1
    return factorial(2 * n - 4) // (2 ** (n - 2) * factorial(n - 2))


def enumerate_full_topologies(n: int, n_max: int = 9) -> list[Topology]:
    """All full topologies on n labeled terminals, in a deterministic order.

    Incremental construction: the unique topology on 3 terminals is grown one
    terminal at a time, attaching terminal k into each existing edge through a
    fresh branch node.  Every full topology arises exactly once this way.
    ``n_max`` guards against runaway enumeration: the count grows as (2n-5)!!.
    """
    if n < 2:
        raise TopologyError("need n >= 2 terminals")
    if n > n_max:
        raise TopologyError(
            f"n = {n} exceeds n_max = {n_max}; {count_full_topologies(n)} topologies"
        )
    if n == 2:
        return [Topology(2, 0, ((0, 1),))]

    # Edge lists with terminals 0..k-1 and branch nodes k..2k-3.
    current: list[tuple[tuple[int, int], ...]] = [((0, 3), (1, 3), (2, 3))]
    for k in range(3, n):
        # Insert terminal k: shift old branch indices up by one, then split
        # each edge (u, v) with a fresh branch node w = 2k - 1.
        grown: list[tuple[tuple[int, int], ...]] = []
        for edges in current:
            shifted = tuple(
                (u if u < k else u + 1, v if v < k else v + 1) for u, v in edges
            )
            new_node = 2 * k - 1
            for i, (u, v) in enumerate(shifted):
                split = (
                    shifted[:i]
                    + ((u, new_node), (new_node, v), (new_node, k))
                    + shifted[i + 1 :]
                )
                grown.append(split)
        current = grown
    return [Topology(n, n - 2, edges) for edges in current]


def _encode(topo: Topology, node: int, parent: int) -> str:
    if node < topo.n_terminals:
        return f"t{node}"
    children = sorted(
        _encode(topo, w, node) for w in topo.neighbors(node) if w != parent
    )
    return "(" + ",".join(children) + ")"


def canonical_key(topo: Topology) -> str:
    """Canonical string identifying a topology up to branch-node relabeling.

    Terminal labels are fixed; branch nodes are anonymous.  The tree is rooted
    at terminal 0 and encoded with sorted child subtree encodings, so any two
    topologies that differ only by a permutation of branch indices map to the
    same key and structurally distinct ones map to different keys.
    """
    if topo.degree(0) != 1:
        # Root at terminal 0 regardless; encode all its subtrees.
        children = sorted(_encode(topo, w, 0) for w in topo.neighbors(0))
        return "t0:(" + ",".join(children) + ")"
    (child,) = topo.neighbors(0)
    return "t0:" + _encode(topo, child, 0)

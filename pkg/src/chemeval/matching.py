"""Maximum bipartite matching by augmenting paths (Kuhn's algorithm)."""

from __future__ import annotations

from typing import Sequence


def max_bipartite_matching(n_left: int, n_right: int, edges: Sequence[tuple[int, int]]):
    """Return {left: right} of maximum cardinality over the given edges."""
    adjacency: list[list[int]] = [[] for _ in range(n_left)]
    for u, v in edges:
        adjacency[u].append(v)
    match_right: dict[int, int] = {}

    def augment(u: int, visited: set[int]) -> bool:
        for v in adjacency[u]:
            if v in visited:
                continue
            visited.add(v)
            if v not in match_right or augment(match_right[v], visited):
                match_right[v] = u
                return True
        return False

    for u in range(n_left):
        augment(u, set())
    return {u: v for v, u in match_right.items()}

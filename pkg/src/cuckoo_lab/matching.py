"""Deterministic bipartite-graph kernel: maximum matching, connected
components, and the structural checks that tie matching sizes to component
shapes.

Left vertices model hashed elements, right vertices model bins.  Every
operation here is a pure function of an immutable :class:`BipartiteGraph`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class BipartiteGraph:
    """A bipartite multigraph given by per-left-vertex choice lists.

    ``choices[u]`` holds the right-vertex indices chosen by left vertex
    ``u``; repeats are allowed and represent parallel edges.  When
    ``partition_boundary`` is set, right vertices ``[0, k)`` form the "up"
    bank and ``[k, m)`` the "down" bank.
    """

    n: int
    m: int
    choices: tuple[tuple[int, ...], ...]
    partition_boundary: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n < 0 or self.m < 0:
            raise ValueError("vertex counts must be non-negative")
        if len(self.choices) != self.n:
            raise ValueError(f"expected {self.n} choice lists, got {len(self.choices)}")
        m = self.m
        for row in self.choices:
            for c in row:
                if not 0 <= c < m:
                    raise ValueError(f"choice {c} outside [0, {m})")
        k = self.partition_boundary
        if k is not None and not 0 <= k <= m:
            raise ValueError("partition boundary outside [0, m]")

    def max_left_degree(self) -> int:
        return max((len(row) for row in self.choices), default=0)


@dataclass(frozen=True)
class ComponentSummary:
    """Shape of one connected component.

    ``s`` and ``q`` count left and right vertices, ``edge_count`` includes
    parallel-edge multiplicity, and ``is_deficit`` marks components with
    ``q == (d-1)*s + 1`` (one spare bin per component when d = 2).
    """

    s: int
    q: int
    edge_count: int
    is_tree: bool
    local_matching: int
    is_deficit: bool


def max_matching(graph: BipartiteGraph) -> tuple[int, tuple[Optional[int], ...]]:
    """Maximum-cardinality matching via Hopcroft-Karp.

    Parallel edges are collapsed; adjacency is scanned in ascending index
    order so the returned matched set is deterministic.

    Returns the matching size and, per left vertex, its matched right
    vertex (or None).
    """
    adj = [sorted(set(row)) for row in graph.choices]
    match_l, match_r = _hopcroft_karp(adj, graph.n, graph.m)
    size = sum(1 for v in match_l if v >= 0)
    matched = tuple(v if v >= 0 else None for v in match_l)
    return size, matched


def _hopcroft_karp(adj: Sequence[Sequence[int]], n: int, m: int) -> tuple[list[int], list[int]]:
    INF = float("inf")
    match_l = [-1] * n
    match_r = [-1] * m
    dist = [0.0] * n

    while True:
        # BFS phase: layer left vertices by alternating distance from the
        # free ones; `found` is the length of the shortest augmenting path.
        queue: deque[int] = deque()
        for u in range(n):
            if match_l[u] < 0:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = INF
        found = INF
        while queue:
            u = queue.popleft()
            du = dist[u]
            if du >= found:
                continue
            for v in adj[u]:
                w = match_r[v]
                if w < 0:
                    if found == INF:
                        found = du + 1
                elif dist[w] == INF:
                    dist[w] = du + 1
                    queue.append(w)
        if found == INF:
            return match_l, match_r

        # DFS phase: augment along vertex-disjoint shortest paths, taking
        # the lowest-index branch first.  Iterative so path length is not
        # limited by the interpreter recursion cap.
        for u0 in range(n):
            if match_l[u0] >= 0:
                continue
            # frame: (left vertex, remaining adjacency iterator, right
            # vertex through which the frame was entered)
            stack = [(u0, iter(adj[u0]), -1)]
            while stack:
                u, edges, _ = stack[-1]
                descended = False
                for v in edges:
                    w = match_r[v]
                    if w < 0:
                        if dist[u] + 1 == found:
                            # flip the alternating path recorded in the stack
                            us = [f[0] for f in stack]
                            vs = [f[2] for f in stack[1:]] + [v]
                            for uu, vv in zip(us, vs):
                                match_l[uu] = vv
                                match_r[vv] = uu
                            stack.clear()
                            descended = True
                            break
                    elif dist[w] == dist[u] + 1:
                        stack.append((w, iter(adj[w]), v))
                        descended = True
                        break
                if not descended:
                    dist[u] = INF
                    stack.pop()


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self, size: int) -> None:
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def components(graph: BipartiteGraph) -> list[ComponentSummary]:
    """Decompose the graph into connected components.

    Isolated right vertices become (s=0, q=1) components.  The local
    matching sizes are read off one global maximum matching, which is also
    a maximum matching within each component.  Deficit classification uses
    d = max(2, maximum left degree).
    """
    n, m = graph.n, graph.m
    uf = _UnionFind(n + m)
    for u, row in enumerate(graph.choices):
        for v in row:
            uf.union(u, n + v)

    d_eff = max(2, graph.max_left_degree())
    _, matched = max_matching(graph)

    s_count: dict[int, int] = {}
    q_count: dict[int, int] = {}
    e_count: dict[int, int] = {}
    m_count: dict[int, int] = {}
    for u in range(n):
        r = uf.find(u)
        s_count[r] = s_count.get(r, 0) + 1
        e_count[r] = e_count.get(r, 0) + len(graph.choices[u])
        if matched[u] is not None:
            m_count[r] = m_count.get(r, 0) + 1
    for v in range(m):
        r = uf.find(n + v)
        q_count[r] = q_count.get(r, 0) + 1

    out = []
    for root in sorted(set(s_count) | set(q_count)):
        s = s_count.get(root, 0)
        q = q_count.get(root, 0)
        edges = e_count.get(root, 0)
        local = m_count.get(root, 0)
        out.append(
            ComponentSummary(
                s=s,
                q=q,
                edge_count=edges,
                is_tree=edges == s + q - 1,
                local_matching=local,
                is_deficit=q == (d_eff - 1) * s + 1,
            )
        )
    return out


def mu_via_deficit(graph: BipartiteGraph) -> int:
    """Maximum matching size of a graph with left degrees <= 2, computed as
    the bin count minus the number of components with one spare bin.

    Components with q == s + 1 (isolated bins included, as s = 0) each
    leave exactly one bin unmatched; every other component matches all its
    bins.  Runs in near-linear time, no matching search.
    """
    n, m = graph.n, graph.m
    for u, row in enumerate(graph.choices):
        if len(row) > 2:
            raise ValueError(f"left vertex {u} has degree {len(row)} > 2")

    uf = _UnionFind(n + m)
    for u, row in enumerate(graph.choices):
        for v in row:
            uf.union(u, n + v)

    s_count: dict[int, int] = {}
    q_count: dict[int, int] = {}
    for u in range(n):
        r = uf.find(u)
        s_count[r] = s_count.get(r, 0) + 1
    for v in range(m):
        r = uf.find(n + v)
        q_count[r] = q_count.get(r, 0) + 1

    deficit = 0
    for root, q in q_count.items():
        if q == s_count.get(root, 0) + 1:
            deficit += 1
    return m - deficit


def assert_structure(summary: ComponentSummary, d: int) -> Optional[str]:
    """Check one component against the structural rules its shape implies.

    Returns None when everything holds, else the identifier of the first
    violated rule.  ``d`` is the maximum left degree of the graph the
    summary came from; for d = 2 the rules also cover vertices of degree 1
    (the q == s + 1 edge-count check requires every left degree to be
    exactly 2 there).
    """
    s, q = summary.s, summary.q
    if d <= 2:
        if q > s + 1:
            return "lemma1"
        if q == s + 1:
            if not summary.is_tree:
                return "lemma4"
            if summary.local_matching != s:
                return "lemma3"
            if summary.edge_count != 2 * s:
                return "lemma6"
        else:  # q <= s
            if summary.local_matching != q:
                return "lemma2"
    else:
        top = (d - 1) * s + 1
        if q > top:
            return "lemma8"
        if q == top:
            if summary.local_matching != s:
                return "lemma9"
            if not summary.is_tree:
                return "lemma10"
    return None

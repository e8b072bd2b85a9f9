"""Graphs, multigraphs, line graphs and graph-class recognition.

Vertices are dense integer indices ``0..n-1``; labels are cosmetic.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

Edge = tuple[int, int]

MAX_GENERATION_TRIES = 10_000


class GenerationError(RuntimeError):
    """A random generator exhausted its retry budget."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with sorted, symmetric adjacency."""

    n: int
    adj: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] | None = None
    bipartition: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    def __post_init__(self):
        if self.n < 0 or len(self.adj) != self.n:
            raise ValueError("adjacency length must equal vertex count")
        for v, nbrs in enumerate(self.adj):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"neighbours of {v} not sorted/duplicate-free")
            for u in nbrs:
                if u == v:
                    raise ValueError(f"self-loop at {v}")
                if not 0 <= u < self.n or v not in self.adj[u]:
                    raise ValueError(f"asymmetric adjacency at {{{u},{v}}}")
        if self.labels is not None and len(self.labels) != self.n:
            raise ValueError("labels length must equal vertex count")
        if self.bipartition is not None:
            left, right = self.bipartition
            if sorted(left + right) != list(range(self.n)):
                raise ValueError("bipartition must partition the vertex set")

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Sequence[int]],
        labels: Sequence[str] | None = None,
        bipartition: tuple[Sequence[int], Sequence[int]] | None = None,
    ) -> Graph:
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge {{{u},{v}}} out of range for n={n}")
            if v in nbrs[u]:
                raise ValueError(f"parallel edge {{{u},{v}}}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        bip = None
        if bipartition is not None:
            bip = (tuple(sorted(bipartition[0])), tuple(sorted(bipartition[1])))
        return cls(
            n,
            tuple(tuple(sorted(s)) for s in nbrs),
            tuple(labels) if labels is not None else None,
            bip,
        )

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        return tuple((u, v) for u in range(self.n) for v in self.adj[u] if u < v)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    @cached_property
    def _adj_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adj)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj_sets[u]

    @cached_property
    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) arrays of the adjacency."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self.adj])
        indices = np.array([u for a in self.adj for u in a], dtype=np.int64)
        return indptr, indices

    def is_cubic(self) -> bool:
        return all(len(a) == 3 for a in self.adj)

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for u in self.adj[v]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        return len(seen) == self.n

    def induced(self, vertices: Sequence[int]) -> Graph:
        index = {v: i for i, v in enumerate(vertices)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        return Graph.from_edges(len(vertices), edges)

    def relabel(self, perm: Sequence[int]) -> Graph:
        """Graph with vertex ``v`` renamed ``perm[v]``."""
        bip = None
        if self.bipartition is not None:
            bip = tuple([perm[v] for v in side] for side in self.bipartition)
        return Graph.from_edges(self.n, [(perm[u], perm[v]) for u, v in self.edges], bipartition=bip)

    def to_dict(self) -> dict:
        d: dict = {"n": self.n, "edges": [list(e) for e in self.edges]}
        if self.labels is not None:
            d["labels"] = list(self.labels)
        if self.bipartition is not None:
            d["bipartition"] = [list(s) for s in self.bipartition]
        return d

    def content_hash(self) -> str:
        payload = json.dumps({"n": self.n, "edges": self.to_dict()["edges"]}, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True)
class Multigraph:
    """Loopless multigraph; parallel edges are repeated pairs."""

    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"loop at {u}: multigraphs may not have loops")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge {{{u},{v}}} out of range for n={self.n}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> Multigraph:
        return cls(n, tuple((min(u, v), max(u, v)) for u, v in edges))

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges], "multigraph": True}


@dataclass(frozen=True)
class KrauszCover:
    cliques: tuple[frozenset[int], ...]

    @classmethod
    def of(cls, cliques: Iterable[Iterable[int]]) -> KrauszCover:
        return cls(tuple(frozenset(c) for c in cliques))


@dataclass
class CoverReport:
    non_cliques: list[int] = field(default_factory=list)
    uncovered_edges: list[Edge] = field(default_factory=list)
    overloaded_vertices: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.non_cliques or self.uncovered_edges or self.overloaded_vertices)

    def __bool__(self) -> bool:
        return self.ok


# -- named graphs -----------------------------------------------------------

def empty_graph(n: int) -> Graph:
    return Graph.from_edges(n, [])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, combinations(range(n), 2))


def complete_bipartite(a: int, b: int) -> Graph:
    edges = [(i, a + j) for i in range(a) for j in range(b)]
    return Graph.from_edges(a + b, edges, bipartition=(range(a), range(a, a + b)))


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    """K_{1,leaves} with centre 0."""
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def petersen_graph() -> Graph:
    edges = [(i, (i + 1) % 5) for i in range(5)]
    edges += [(i, i + 5) for i in range(5)]
    edges += [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, edges)


def disjoint_union(*graphs: Graph) -> Graph:
    edges, offset = [], 0
    for g in graphs:
        edges += [(u + offset, v + offset) for u, v in g.edges]
        offset += g.n
    return Graph.from_edges(offset, edges)


# -- line graphs --------------------------------------------------------------

def _as_multigraph(h: Graph | Multigraph) -> Multigraph:
    if isinstance(h, Graph):
        return Multigraph(h.n, h.edges)
    return h


def line_graph(h: Graph | Multigraph) -> Graph:
    """Line graph of a loopless multigraph; vertex ``i`` is ``h.edges[i]``.

    Parallel edges of ``h`` become a single edge of the result.
    """
    h = _as_multigraph(h)
    incident: list[list[int]] = [[] for _ in range(h.n)]
    for i, (u, v) in enumerate(h.edges):
        incident[u].append(i)
        incident[v].append(i)
    pairs = {(e, f) for inc in incident for e, f in combinations(sorted(inc), 2)}
    labels = [f"{u}-{v}" for u, v in h.edges]
    return Graph.from_edges(len(h.edges), sorted(pairs), labels=labels)


def line_graph_cover(h: Graph | Multigraph) -> KrauszCover:
    """Canonical Krausz cover of ``line_graph(h)``: edges at each vertex of h."""
    h = _as_multigraph(h)
    incident: list[list[int]] = [[] for _ in range(h.n)]
    for i, (u, v) in enumerate(h.edges):
        incident[u].append(i)
        incident[v].append(i)
    return KrauszCover.of(inc for inc in incident if inc)


# -- class recognition --------------------------------------------------------

def is_claw_free(g: Graph) -> tuple[bool, tuple[int, tuple[int, int, int]] | None]:
    """Return ``(True, None)`` or ``(False, (centre, leaves))`` for an induced claw."""
    for v in range(g.n):
        for a, b, c in combinations(g.adj[v], 3):
            if not (g.has_edge(a, b) or g.has_edge(a, c) or g.has_edge(b, c)):
                return False, (v, (a, b, c))
    return True, None


def neighbourhood_clique_partition(g: Graph, v: int) -> tuple[list[int], list[int]] | None:
    """Split N(v) into two cliques, or None if impossible.

    Two-colours the complement of G[N(v)]; a proper colouring is exactly a
    partition into two cliques.
    """
    nbrs = g.adj[v]
    colour: dict[int, int] = {}
    for s in nbrs:
        if s in colour:
            continue
        colour[s] = 0
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in nbrs:
                if y == x or g.has_edge(x, y):
                    continue
                if y not in colour:
                    colour[y] = 1 - colour[x]
                    queue.append(y)
                elif colour[y] == colour[x]:
                    return None
    return [u for u in nbrs if colour[u] == 0], [u for u in nbrs if colour[u] == 1]


def is_quasi_line(g: Graph) -> tuple[bool, int | None]:
    """Return ``(True, None)`` or ``(False, v)`` with v's neighbourhood not two cliques."""
    for v in range(g.n):
        if neighbourhood_clique_partition(g, v) is None:
            return False, v
    return True, None


def validate_krausz_cover(g: Graph, cover: KrauszCover) -> CoverReport:
    report = CoverReport()
    count = [0] * g.n
    covered: set[Edge] = set()
    for i, clique in enumerate(cover.cliques):
        members = sorted(clique)
        if any(not 0 <= v < g.n for v in members):
            raise ValueError(f"clique {i} references a vertex outside the graph")
        for v in members:
            count[v] += 1
        pairs = list(combinations(members, 2))
        if not all(g.has_edge(u, v) for u, v in pairs):
            report.non_cliques.append(i)
        covered.update(pairs)
    report.uncovered_edges = [e for e in g.edges if e not in covered]
    report.overloaded_vertices = [v for v in range(g.n) if count[v] > 2]
    return report


# -- random generators --------------------------------------------------------

def random_cubic(n: int, seed: int | None = None, max_tries: int = MAX_GENERATION_TRIES) -> Graph:
    """Connected simple cubic graph from the pairing model, by rejection."""
    if n < 4 or n % 2:
        raise ValueError("random_cubic needs an even n >= 4")
    rng = np.random.default_rng(seed)
    points = np.repeat(np.arange(n), 3)
    for _ in range(max_tries):
        pairs = rng.permutation(points).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        edges = {(int(min(u, v)), int(max(u, v))) for u, v in pairs}
        if len(edges) < len(pairs):
            continue
        g = Graph.from_edges(n, sorted(edges))
        if g.is_connected():
            return g
    raise GenerationError(f"no simple connected cubic graph on {n} vertices after {max_tries} tries")


def random_bipartite_cubic(
    n_per_side: int, seed: int | None = None, max_tries: int = MAX_GENERATION_TRIES
) -> Graph:
    """Union of three random perfect matchings between L=0..n-1 and R=n..2n-1.

    Rejected whenever two matchings share a pair.
    """
    if n_per_side < 3:
        raise ValueError("a simple cubic bipartite graph needs at least 3 vertices per side")
    n = n_per_side
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        edges: set[Edge] = set()
        for _ in range(3):
            perm = rng.permutation(n)
            edges.update((i, n + int(perm[i])) for i in range(n))
        if len(edges) == 3 * n:
            return Graph.from_edges(2 * n, sorted(edges), bipartition=(range(n), range(n, 2 * n)))
    raise GenerationError(f"no simple bipartite cubic graph with {n} per side after {max_tries} tries")


# -- JSON ---------------------------------------------------------------------

def graph_from_dict(d: dict) -> Graph | Multigraph:
    if d.get("multigraph"):
        return Multigraph.from_edges(d["n"], d["edges"])
    bip = d.get("bipartition")
    return Graph.from_edges(
        d["n"], d["edges"], labels=d.get("labels"), bipartition=tuple(bip) if bip else None
    )


def load_graph(path: str | Path) -> Graph | Multigraph:
    return graph_from_dict(json.loads(Path(path).read_text()))


def dump_graph(g: Graph | Multigraph) -> str:
    return json.dumps(g.to_dict())

"""Undirected graph storage and edge-list ingestion."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, TextIO, Tuple

import numpy as np

_SPLIT = re.compile(r"[\s,]+")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, source: str = "<stream>"):
        super().__init__(f"{source}:{line}: {message}")
        self.line = line
        self.source = source


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph in CSR form.

    Node ids are dense ``0..node_count-1``. Neighbours of ``u`` are
    ``indices[indptr[u]:indptr[u+1]]``, sorted ascending.
    """

    node_count: int
    indptr: np.ndarray
    indices: np.ndarray
    labels: Tuple[int, ...] = ()  # original id of each dense node
    dropped: int = 0  # self-loops and duplicates discarded at ingestion
    meta: Dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_edges(
        cls, node_count: int, edges: Iterable[Tuple[int, int]], labels=(), dropped: int = 0
    ) -> "Graph":
        adj: List[set] = [set() for _ in range(node_count)]
        for u, v in edges:
            if u == v:
                continue
            adj[u].add(v)
            adj[v].add(u)
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        for u, nbrs in enumerate(adj):
            indptr[u + 1] = indptr[u] + len(nbrs)
        indices = np.fromiter(
            (v for nbrs in adj for v in sorted(nbrs)), dtype=np.int64, count=int(indptr[-1])
        )
        indptr.flags.writeable = False
        indices.flags.writeable = False
        labels = tuple(labels) or tuple(range(node_count))
        return cls(node_count, indptr, indices, labels, dropped)

    @property
    def edge_count(self) -> int:
        return int(self.indptr[-1]) // 2

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    @property
    def adjacency(self) -> List[List[int]]:
        return [self.neighbors(u).tolist() for u in range(self.node_count)]

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, int(v)) for u in range(self.node_count) for v in self.neighbors(u) if u < v]

    def same_structure(self, other: "Graph") -> bool:
        return (
            self.node_count == other.node_count
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __getstate__(self):
        return self.__dict__.copy()

    def __setstate__(self, state):
        for key, value in state.items():
            object.__setattr__(self, key, value)


def load_edge_list(stream: TextIO, source: str = "<stream>") -> Graph:
    """Parse ``u v`` (or ``u,v``) lines; ``#`` starts a comment line.

    Original ids are remapped densely in order of first appearance. Self-loops
    and repeated edges are dropped and counted in ``Graph.dropped``.
    """
    ids: Dict[int, int] = {}
    edges: List[Tuple[int, int]] = []
    seen = set()
    dropped = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = [t for t in _SPLIT.split(line) if t]
        if len(tokens) != 2:
            raise ParseError(f"expected two node ids, got {len(tokens)} tokens", lineno, source)
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"non-integer node id in {line!r}", lineno, source) from None
        u = ids.setdefault(a, len(ids))
        v = ids.setdefault(b, len(ids))
        key = (min(u, v), max(u, v))
        if u == v or key in seen:
            dropped += 1
            continue
        seen.add(key)
        edges.append(key)
    if not ids:
        raise ValueError(f"{source}: edge list contains no nodes")
    labels = sorted(ids, key=ids.__getitem__)
    return Graph.from_edges(len(ids), edges, labels=labels, dropped=dropped)


def read_edge_list(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, source=str(path))


def write_edge_list(graph: Graph, stream: TextIO) -> None:
    """Emit dense ids so that reloading reproduces the same numbering.

    Lines are ordered so each node first appears in id order. A node with no
    usable edge at that point (e.g. isolated) is introduced by a self-loop
    line, which the loader drops.
    """
    stream.write(f"# nodes {graph.node_count} edges {graph.edge_count}\n")
    written = set()
    seen = 0  # nodes 0..seen-1 have appeared
    for u in range(graph.node_count):
        if u < seen:
            continue
        nbrs = graph.neighbors(u)
        if len(nbrs) and nbrs[0] < u:
            w = int(nbrs[0])
            stream.write(f"{w} {u}\n")
            written.add((w, u))
            seen = u + 1
        elif u + 1 < graph.node_count and (u + 1) in nbrs:
            stream.write(f"{u} {u + 1}\n")
            written.add((u, u + 1))
            seen = u + 2
        else:
            stream.write(f"{u} {u}\n")
            seen = u + 1
    for edge in graph.edges():
        if edge not in written:
            stream.write(f"{edge[0]} {edge[1]}\n")

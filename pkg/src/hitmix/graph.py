"""Undirected multigraph storage, seed sets, and edge-list ingestion.

The adjacency is kept in CSR form with integer multiplicities as values.
A self-loop at v contributes 2 to the (v, v) entry so that every degree is
exactly the corresponding row sum and the walk matrix D^{-1} A stays row
stochastic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class EdgeListParseError(ValueError):
    """Malformed edge-list input; carries the offending 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Graph:
    """Immutable undirected multigraph with dense 0-based vertex ids."""

    def __init__(self, n_vertices: int, adjacency: sp.csr_matrix):
        if adjacency.shape != (n_vertices, n_vertices):
            raise ValueError("adjacency shape does not match n_vertices")
        adjacency = adjacency.tocsr().astype(np.int64)
        adjacency.sum_duplicates()
        adjacency.sort_indices()
        self.n_vertices = n_vertices
        self.adjacency = adjacency
        self.degrees = np.asarray(adjacency.sum(axis=1)).ravel().astype(np.int64)
        self.adjacency.data.flags.writeable = False
        self.degrees.flags.writeable = False

    @classmethod
    def from_edges(cls, n_vertices: int, u: Iterable[int], v: Iterable[int]) -> "Graph":
        """Build from parallel endpoint arrays; repeated pairs accumulate multiplicity."""
        u = np.asarray(list(u) if not isinstance(u, np.ndarray) else u, dtype=np.int64)
        v = np.asarray(list(v) if not isinstance(v, np.ndarray) else v, dtype=np.int64)
        if u.shape != v.shape:
            raise ValueError("endpoint arrays must have equal length")
        if u.size and (u.min() < 0 or v.min() < 0):
            raise ValueError("negative vertex id")
        if u.size and max(u.max(), v.max()) >= n_vertices:
            raise ValueError("vertex id exceeds n_vertices")
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        pairs, counts = np.unique(np.stack([lo, hi], axis=1), axis=0, return_counts=True) if u.size else (
            np.empty((0, 2), dtype=np.int64), np.empty(0, dtype=np.int64))
        loops = pairs[:, 0] == pairs[:, 1]
        rows = np.concatenate([pairs[:, 0], pairs[~loops, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[~loops, 0]])
        # Self-loop entries are doubled so degrees equal row sums.
        vals = np.concatenate([np.where(loops, 2 * counts, counts), counts[~loops]])
        adj = sp.csr_matrix((vals, (rows, cols)), shape=(n_vertices, n_vertices))
        return cls(n_vertices, adj)

    @property
    def total_multiplicity(self) -> int:
        """Total edge multiplicity, self-loops counted once."""
        diag = self.adjacency.diagonal().sum()
        off = self.adjacency.sum() - diag
        return int(off // 2 + diag // 2)

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """Sorted neighbor ids of v and the corresponding adjacency values."""
        a = self.adjacency
        lo, hi = a.indptr[v], a.indptr[v + 1]
        return a.indices[lo:hi], a.data[lo:hi]

    def restricted_adjacency(self, vertices: np.ndarray) -> sp.csr_matrix:
        """Adjacency submatrix over the given vertex list, in that order."""
        return self.adjacency[vertices][:, vertices].tocsr()


@dataclass(frozen=True)
class SeedSet:
    """Seed vertices and the ascending-ordered complement."""

    members: frozenset
    complement: np.ndarray

    @classmethod
    def from_members(cls, members: Iterable[int], n_vertices: int) -> "SeedSet":
        members = frozenset(int(m) for m in members)
        if not members:
            raise ValueError("seed set must be non-empty")
        if min(members) < 0 or max(members) >= n_vertices:
            raise ValueError("seed id out of range")
        mask = np.ones(n_vertices, dtype=bool)
        mask[list(members)] = False
        complement = np.flatnonzero(mask)
        if complement.size == 0:
            raise ValueError("seed set must be a strict subset of the vertices")
        complement.flags.writeable = False
        return cls(members, complement)


@dataclass(frozen=True)
class NonSeedIndex:
    """Bijection between a vertex subset and local indices 0..k-1.

    global_to_local holds -1 for vertices outside the subset.
    """

    global_to_local: np.ndarray
    local_to_global: np.ndarray

    @classmethod
    def from_vertices(cls, n_vertices: int, vertices: np.ndarray) -> "NonSeedIndex":
        vertices = np.asarray(vertices, dtype=np.int64)
        g2l = np.full(n_vertices, -1, dtype=np.int64)
        g2l[vertices] = np.arange(vertices.size)
        g2l.flags.writeable = False
        l2g = vertices.copy()
        l2g.flags.writeable = False
        return cls(g2l, l2g)

    @property
    def size(self) -> int:
        return self.local_to_global.size


@dataclass(frozen=True)
class ReachabilityReport:
    """Per non-seed vertex: does an undirected path to the seed set exist?"""

    reachable: np.ndarray  # bool, aligned with SeedSet.complement
    unreachable_count: int


def load_edge_list(stream: IO[str]) -> Graph:
    """Parse a SNAP-style edge list: '#' comments, 'u v' per data line."""
    us: list[int] = []
    vs: list[int] = []
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(line_no, f"expected 2 tokens, got {len(tokens)}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(line_no, f"non-integer vertex id in {tokens!r}") from None
        if u < 0 or v < 0:
            raise EdgeListParseError(line_no, "negative vertex id")
        us.append(u)
        vs.append(v)
    if not us:
        raise EdgeListParseError(0, "no edges in input")
    n = 1 + max(max(us), max(vs))
    return Graph.from_edges(n, np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64))


def load_seed_file(stream: IO[str], n_vertices: int) -> SeedSet:
    """Parse a seed file: one vertex id per line, '#' comments allowed."""
    members = []
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            members.append(int(line))
        except ValueError:
            raise EdgeListParseError(line_no, f"non-integer seed id {line!r}") from None
    return SeedSet.from_members(members, n_vertices)


def reachable_from(graph: Graph, seeds: SeedSet) -> ReachabilityReport:
    """Mark each non-seed vertex reachable iff its component contains a seed."""
    _, labels = connected_components(graph.adjacency, directed=False)
    seed_components = np.unique(labels[list(seeds.members)])
    reachable = np.isin(labels[seeds.complement], seed_components)
    reachable.flags.writeable = False
    return ReachabilityReport(reachable, int((~reachable).sum()))


def build_nonseed_index(graph: Graph, seeds: SeedSet) -> NonSeedIndex:
    """Local coordinate system over the non-seed vertices, ascending order."""
    if max(seeds.members) >= graph.n_vertices:
        raise ValueError("seed id out of range for graph")
    return NonSeedIndex.from_vertices(graph.n_vertices, seeds.complement)

"""Undirected graphs, preferential-attachment generation, and the normalized
operators message passing runs on.

A Graph is an immutable edge list over vertices ``0..n-1``; every edge is
stored exactly once as ``(i, j)`` with ``i < j``. The `.grf` text format
round-trips graphs: a header line ``grf 1 <n> <num_edges>`` followed by one
``i j`` line per edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DisconnectedGraph, InvalidParameter, IoError, ParseError
from .rng import Xoshiro256pp


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Validated constructor: rejects self-loops, duplicates, bad indices.

        Edge pairs are canonicalized to ``i < j`` and sorted.
        """
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
            raise InvalidParameter(f"vertex count must be an integer >= 1, got {n!r}")
        canon = []
        seen = set()
        for pair in edges:
            i, j = int(pair[0]), int(pair[1])
            if i == j:
                raise InvalidParameter(f"self-loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidParameter(f"edge ({i}, {j}) out of range for n={n}")
            e = (i, j) if i < j else (j, i)
            if e in seen:
                raise InvalidParameter(f"duplicate edge {e}")
            seen.add(e)
            canon.append(e)
        canon.sort()
        return cls(int(n), tuple(canon))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoint index arrays (heads, tails) for vectorized edge sums."""
        if not self.edges:
            empty = np.empty(0, dtype=np.intp)
            return empty, empty.copy()
        arr = np.asarray(self.edges, dtype=np.intp)
        return arr[:, 0].copy(), arr[:, 1].copy()

    @cached_property
    def neighbor_lists(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(v)) for v in nbrs)


def is_connected(g: Graph) -> bool:
    if g.n == 1:
        return True
    seen = [False] * g.n
    seen[0] = True
    stack = [0]
    count = 1
    nbrs = g.neighbor_lists
    while stack:
        v = stack.pop()
        for w in nbrs[v]:
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    return count == g.n


def barabasi_albert(n: int, m: int = 2, seed: int = 0) -> Graph:
    """Preferential-attachment graph: complete seed on ``m + 1`` vertices,
    then each arriving vertex attaches ``m`` edges to distinct existing
    vertices with probability proportional to their degree at arrival time
    (duplicate targets are redrawn).
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 2:
        raise InvalidParameter(f"n must be an integer >= 2, got {n!r}")
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise InvalidParameter(f"m must be an integer, got {m!r}")
    if not 1 <= m < n:
        raise InvalidParameter(f"m must satisfy 1 <= m < n, got m={m}, n={n}")
    rng = Xoshiro256pp(seed)
    edges = [(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)]
    deg = np.zeros(n, dtype=np.float64)
    deg[: m + 1] = m
    for t in range(m + 1, n):
        cum = np.cumsum(deg[:t])
        total = float(cum[-1])
        chosen: set[int] = set()
        while len(chosen) < m:
            r = rng.random() * total
            # searchsorted(side='right') maps r in [cum[k-1], cum[k]) to k
            target = int(np.searchsorted(cum, r, side="right"))
            if target >= t:
                target = t - 1
            chosen.add(target)
        for j in sorted(chosen):
            edges.append((j, t))
            deg[j] += 1.0
        deg[t] = float(m)
    g = Graph.from_edges(n, edges)
    if not is_connected(g):
        raise DisconnectedGraph("preferential attachment produced a disconnected graph")
    return g


def sym_norm_adjacency(g: Graph) -> np.ndarray:
    """Symmetrically normalized adjacency with self-loops:
    entry ``1 / sqrt((1 + d_i)(1 + d_j))`` on the closed neighborhood.
    """
    scale = 1.0 / np.sqrt(1.0 + g.degrees.astype(np.float64))
    a = np.zeros((g.n, g.n))
    ei, ej = g.edge_arrays
    vals = scale[ei] * scale[ej]
    a[ei, ej] = vals
    a[ej, ei] = vals
    np.fill_diagonal(a, scale * scale)
    return a


def row_stochastic_adjacency(g: Graph) -> np.ndarray:
    """Row-normalized adjacency with self-loops: row ``i`` puts ``1/(1+d_i)``
    on each closed-neighborhood entry, so rows sum to one.
    """
    inv = 1.0 / (1.0 + g.degrees.astype(np.float64))
    a = np.zeros((g.n, g.n))
    ei, ej = g.edge_arrays
    a[ei, ej] = inv[ei]
    a[ej, ei] = inv[ej]
    np.fill_diagonal(a, inv)
    return a


def gcn_dominant_eigenvector(g: Graph) -> np.ndarray:
    """Unit positive eigenvector of sym_norm_adjacency for eigenvalue 1:
    entries proportional to ``sqrt(1 + d_i)``. Requires a connected graph
    (otherwise eigenvalue 1 is not simple and the direction is meaningless).
    """
    if not is_connected(g):
        raise DisconnectedGraph("dominant eigenvector needs a connected graph")
    u = np.sqrt(1.0 + g.degrees.astype(np.float64))
    return u / math.sqrt(float(u @ u))


def constant_unit_vector(n: int) -> np.ndarray:
    """Unit vector with equal entries: the dominant direction of any
    row-stochastic propagation operator."""
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    return np.full(n, 1.0 / math.sqrt(n))


def write_grf(g: Graph, path) -> None:
    lines = [f"grf 1 {g.n} {g.num_edges}"]
    lines.extend(f"{i} {j}" for i, j in g.edges)
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_grf(path) -> Graph:
    """Parse a `.grf` file; ParseError carries the 1-based offending line."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            raw = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    lines = raw.split("\n")
    header = lines[0].split() if lines else []
    if len(header) != 4 or header[0] != "grf":
        raise ParseError("header must be 'grf 1 <n> <num_edges>'", line=1)
    if header[1] != "1":
        raise ParseError(f"unsupported grf version {header[1]!r}", line=1)
    try:
        n, num_edges = int(header[2]), int(header[3])
    except ValueError:
        raise ParseError("header counts must be integers", line=1) from None
    if n < 1 or num_edges < 0:
        raise ParseError("header counts out of range", line=1)
    edges = []
    seen = set()
    lineno = 1
    for offset, text in enumerate(lines[1:], start=2):
        if text.strip() == "":
            continue
        lineno = offset
        if len(edges) == num_edges:
            raise ParseError("more edge lines than the header promised", line=lineno)
        tokens = text.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 'i j', got {text.strip()!r}", line=lineno)
        try:
            i, j = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"edge endpoints must be integers, got {text.strip()!r}", line=lineno) from None
        if i == j:
            raise ParseError(f"self-loop at vertex {i}", line=lineno)
        if not i < j:
            raise ParseError(f"edge endpoints must satisfy i < j, got {i} {j}", line=lineno)
        if not (0 <= i and j < n):
            raise ParseError(f"edge ({i}, {j}) out of range for n={n}", line=lineno)
        if (i, j) in seen:
            raise ParseError(f"duplicate edge ({i}, {j})", line=lineno)
        seen.add((i, j))
        edges.append((i, j))
    if len(edges) != num_edges:
        raise ParseError(
            f"header promised {num_edges} edges, file has {len(edges)}", line=lineno
        )
    return Graph.from_edges(n, edges)

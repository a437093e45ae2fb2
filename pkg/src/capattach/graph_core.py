"""Degree-capped uniform attachment.

Start from the complete graph on ``m + 1`` vertices; every new vertex is
joined to ``m`` distinct vertices drawn uniformly among those of degree
below ``d = 2m``.  Vertices are numbered from 1.

Randomness comes from numpy's PCG64 bit generator.  A run is identified by
``(seed, replicate)``; the stream is ``SeedSequence(seed, spawn_key=(replicate,))``
so replicate streams are independent and order of execution is irrelevant.
Each step consumes ``m`` doubles from the stream.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np

from ._kernel import grow_kernel
from .errors import InvariantError, ParameterError, ProcedureExhausted

GRAPH_SCHEMA = "capattach.graph/1"


@dataclass(frozen=True)
class GrowthParams:
    m: int
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 2:
            raise ParameterError(f"m must be an integer >= 2, got {self.m!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError(f"seed must fit in 64 unsigned bits, got {self.seed!r}")

    @property
    def d(self) -> int:
        return 2 * self.m


def make_rng(seed: int, replicate: int | None = None) -> np.random.Generator:
    """PCG64 stream for ``seed``; ``replicate`` selects an independent child stream."""
    key = () if replicate is None else (int(replicate),)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


class AttachGraph:
    """Array-backed graph of the growth process.

    Mutating operations (:func:`attach_step`, :func:`greedy_forest_step`)
    change the graph in place and return it.
    """

    def __init__(self, m: int, capacity: int | None = None):
        if m < 2:
            raise ParameterError(f"m must be >= 2, got {m}")
        self.m = int(m)
        self.d = 2 * self.m
        cap = max(capacity or 0, self.m + 1)
        self._adj = np.zeros((cap + 1, self.d), dtype=np.int64)
        self._deg = np.zeros(cap + 1, dtype=np.int64)
        self._open_list = np.zeros(self.m * (self.m + 1) + self.m + 1, dtype=np.int64)
        self._open_pos = np.full(cap + 1, -1, dtype=np.int64)
        self.n = 0
        self._n_open = 0
        self._lists = None

    # -- storage --------------------------------------------------------

    def _reserve(self, n: int) -> None:
        cap = self._deg.shape[0] - 1
        if n <= cap:
            return
        new_cap = max(n, 2 * cap)
        adj = np.zeros((new_cap + 1, self.d), dtype=np.int64)
        adj[: cap + 1] = self._adj
        deg = np.zeros(new_cap + 1, dtype=np.int64)
        deg[: cap + 1] = self._deg
        pos = np.full(new_cap + 1, -1, dtype=np.int64)
        pos[: cap + 1] = self._open_pos
        self._adj, self._deg, self._open_pos = adj, deg, pos

    def _touch(self) -> None:
        self._lists = None

    # -- queries --------------------------------------------------------

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self._deg[v])

    @property
    def degrees(self) -> list[int]:
        """Degrees of vertices 1..n, in vertex order."""
        return self._deg[1 : self.n + 1].tolist()

    def neighbors(self, v: int) -> list[int]:
        self._check_vertex(v)
        return sorted(self._adj[v, : self._deg[v]].tolist())

    def adjacency_lists(self) -> list[list[int]]:
        """Sorted neighbour lists; index 0 is an empty placeholder so ``lists[v]`` works."""
        if self._lists is None:
            self._lists = [[]] + [self.neighbors(v) for v in range(1, self.n + 1)]
        return self._lists

    @property
    def open_set(self) -> frozenset[int]:
        return frozenset(self._open_list[: self._n_open].tolist())

    @property
    def open_order(self) -> list[int]:
        """Open vertices in internal slot order (determines future subset draws)."""
        return self._open_list[: self._n_open].tolist()

    def is_open(self, v: int) -> bool:
        return bool(self._deg[v] < self.d)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for v in range(1, self.n + 1):
            for w in self._adj[v, : self._deg[v]].tolist():
                if v < w:
                    out.append((v, w))
        out.sort()
        return out

    def total_degree(self) -> int:
        return int(self._deg[1 : self.n + 1].sum())

    def closed_count(self) -> int:
        return self.n - self._n_open

    def adjacency_matrix(self) -> np.ndarray:
        """Boolean ``n x n`` matrix; row/column ``v - 1`` is vertex ``v``."""
        mat = np.zeros((self.n, self.n), dtype=bool)
        for v in range(1, self.n + 1):
            nb = self._adj[v, : self._deg[v]] - 1
            mat[v - 1, nb] = True
        return mat

    def copy(self) -> "AttachGraph":
        g = AttachGraph(self.m, self.n)
        g._adj[: self.n + 1] = self._adj[: self.n + 1]
        g._deg[: self.n + 1] = self._deg[: self.n + 1]
        g._open_list[:] = self._open_list
        g._open_pos[: self.n + 1] = self._open_pos[: self.n + 1]
        g.n, g._n_open = self.n, self._n_open
        return g

    def __eq__(self, other):
        if not isinstance(other, AttachGraph):
            return NotImplemented
        return self.m == other.m and self.n == other.n and self.edges() == other.edges()

    def __repr__(self):
        return f"AttachGraph(m={self.m}, n={self.n}, open={self._n_open})"

    def _check_vertex(self, v: int) -> None:
        if not 1 <= v <= self.n:
            raise ParameterError(f"vertex {v} not in 1..{self.n}")

    def check_invariants(self) -> None:
        """Verify every structural invariant from scratch; raise InvariantError on failure."""
        m, d, n = self.m, self.d, self.n
        seen = set()
        for v in range(1, n + 1):
            row = self._adj[v, : self._deg[v]].tolist()
            if len(set(row)) != len(row) or v in row:
                raise InvariantError(f"vertex {v} has a loop or multi-edge")
            for w in row:
                if not 1 <= w <= n or v not in self._adj[w, : self._deg[w]]:
                    raise InvariantError(f"edge {v}-{w} is not symmetric")
                seen.add((min(v, w), max(v, w)))
            if not m <= len(row) <= d:
                raise InvariantError(f"vertex {v} has degree {len(row)} outside [{m}, {d}]")
        total = self.total_degree()
        if total != 2 * len(seen):
            raise InvariantError("degree array disagrees with adjacency")
        if n >= m + 1 and total != d * n - m * (m + 1):
            raise InvariantError(f"total degree {total} != d*n - m(m+1) = {d * n - m * (m + 1)}")
        expected_open = {v for v in range(1, n + 1) if self._deg[v] < d}
        if self.open_set != expected_open or len(self.open_order) != len(expected_open):
            raise InvariantError("open list does not match degrees")
        for slot, v in enumerate(self.open_order):
            if self._open_pos[v] != slot:
                raise InvariantError(f"open position of {v} is stale")
        if not m + 1 <= len(expected_open) <= m * (m + 1):
            raise InvariantError(f"{len(expected_open)} open vertices outside [{m + 1}, {m * (m + 1)}]")


def new_complete(params: GrowthParams, capacity: int | None = None) -> AttachGraph:
    """K_{m+1} on vertices 1..m+1."""
    m = params.m
    g = AttachGraph(m, capacity)
    k = m + 1
    for v in range(1, k + 1):
        g._adj[v, :m] = [w for w in range(1, k + 1) if w != v]
        g._deg[v] = m
        g._open_list[v - 1] = v
        g._open_pos[v] = v - 1
    g.n = k
    g._n_open = k
    return g


def _attach(g: AttachGraph, chosen) -> None:
    v = g.n + 1
    g._reserve(v)
    d = g.d
    for i, w in enumerate(chosen):
        g._adj[v, i] = w
        g._adj[w, g._deg[w]] = v
        g._deg[w] += 1
        if g._deg[w] == d:
            p = g._open_pos[w]
            last = g._open_list[g._n_open - 1]
            g._open_list[p] = last
            g._open_pos[last] = p
            g._open_pos[w] = -1
            g._n_open -= 1
    g._deg[v] = g.m
    g._open_list[g._n_open] = v
    g._open_pos[v] = g._n_open
    g._n_open += 1
    g.n = v
    g._touch()


def attach_step(graph: AttachGraph, rng: np.random.Generator) -> AttachGraph:
    """Add vertex n+1 joined to a uniform m-subset of the current open set."""
    m = graph.m
    snap = graph.open_order
    k = len(snap)
    if k < m:
        raise InvariantError(f"only {k} open vertices, need {m}")
    u = rng.random(m)
    for i in range(m):
        j = min(i + int(u[i] * (k - i)), k - 1)
        snap[i], snap[j] = snap[j], snap[i]
    _attach(graph, snap[:m])
    return graph


def advance(graph: AttachGraph, steps: int, rng: np.random.Generator, trace: bool = False):
    """Run ``steps`` attach steps in compiled code.

    Consumes the same random numbers, in the same order, as ``steps`` calls
    to :func:`attach_step`, and yields the identical graph.  With
    ``trace=True`` returns per-step arrays ``(total_degree, open_count)``.
    """
    if steps < 0:
        raise ParameterError("steps must be non-negative")
    graph._reserve(graph.n + steps)
    uniforms = rng.random((steps, graph.m))
    size = steps if trace else 0
    totals = np.zeros(size, dtype=np.int64)
    opens = np.zeros(size, dtype=np.int64)
    graph.n, graph._n_open = grow_kernel(
        graph._adj, graph._deg, graph._open_list, graph._open_pos,
        graph.n, graph._n_open, graph.m, uniforms, totals, opens)
    graph._touch()
    if trace:
        return totals, opens
    return None


def grow_to(params: GrowthParams, n: int, rng: np.random.Generator | None = None) -> AttachGraph:
    """G_n obtained by n - (m+1) attach steps from K_{m+1}."""
    if n < params.m + 1:
        raise ParameterError(f"n must be at least m+1 = {params.m + 1}, got {n}")
    if rng is None:
        rng = make_rng(params.seed)
    g = new_complete(params, capacity=n)
    advance(g, n - g.n, rng)
    return g


def greedy_forest_step(graph: AttachGraph, original_n: int) -> AttachGraph:
    """One step of the closing schedule: attach to the m lowest-degree open old vertices.

    Ties are broken by smaller vertex id.  The result is a positive
    probability outcome of :func:`attach_step`.
    """
    candidates = [v for v in graph.open_order if v <= original_n]
    if len(candidates) < graph.m:
        raise ProcedureExhausted(
            f"only {len(candidates)} open vertices among 1..{original_n}, need {graph.m}")
    candidates.sort(key=lambda v: (graph._deg[v], v))
    _attach(graph, candidates[: graph.m])
    return graph


def close_original(graph: AttachGraph) -> AttachGraph:
    """Apply m+1 greedy steps; afterwards every vertex present at the start is closed."""
    original_n = graph.n
    for _ in range(graph.m + 1):
        greedy_forest_step(graph, original_n)
    return graph


# -- serialization ------------------------------------------------------

def export_graph(graph: AttachGraph, format: str = "json") -> bytes:
    if format == "json":
        doc = {
            "schema": GRAPH_SCHEMA,
            "m": graph.m,
            "n": graph.n,
            "edges": [list(e) for e in graph.edges()],
            "degrees": graph.degrees,
            "open_order": graph.open_order,
        }
        return (json.dumps(doc, indent=None, separators=(",", ":")) + "\n").encode()
    if format == "dot":
        lines = ["graph capattach {", f"  graph [m={graph.m}];"]
        for v, dv in enumerate(graph.degrees, start=1):
            lines.append(f"  {v} [degree={dv}];")
        for u, v in graph.edges():
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return ("\n".join(lines) + "\n").encode()
    raise ParameterError(f"unknown export format {format!r}")


def _build(m: int, n: int, edges, open_order=None) -> AttachGraph:
    g = AttachGraph(m, n)
    for u, v in edges:
        u, v = int(u), int(v)
        if not (1 <= u <= n and 1 <= v <= n) or u == v:
            raise ParameterError(f"bad edge {u}-{v}")
        if g._deg[u] >= g.d or g._deg[v] >= g.d:
            raise ParameterError(f"edge {u}-{v} exceeds degree cap")
        g._adj[u, g._deg[u]] = v
        g._adj[v, g._deg[v]] = u
        g._deg[u] += 1
        g._deg[v] += 1
    g.n = n
    opens = [v for v in range(1, n + 1) if g._deg[v] < g.d]
    if open_order is not None:
        if sorted(open_order) != opens:
            raise ParameterError("open_order does not match degrees")
        opens = [int(v) for v in open_order]
    if len(opens) > g._open_list.shape[0]:
        raise ParameterError("too many open vertices for this m")
    for slot, v in enumerate(opens):
        g._open_list[slot] = v
        g._open_pos[v] = slot
    g._n_open = len(opens)
    return g


def import_graph(data: bytes | str) -> AttachGraph:
    """Inverse of :func:`export_graph`; the format is detected from the content."""
    text = data.decode() if isinstance(data, bytes) else data
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        g = _build(doc["m"], doc["n"], doc["edges"], doc.get("open_order"))
        if "degrees" in doc and doc["degrees"] != g.degrees:
            raise ParameterError("degrees field disagrees with edges")
        return g
    if stripped.startswith("graph"):
        m_match = re.search(r"graph\s*\[\s*m\s*=\s*(\d+)\s*\]", text)
        if not m_match:
            raise ParameterError("DOT input lacks the graph [m=...] attribute")
        nodes = [int(x) for x in re.findall(r"^\s*(\d+)\s*\[", text, re.M)]
        edges = [(int(a), int(b)) for a, b in re.findall(r"(\d+)\s*--\s*(\d+)", text)]
        n = max(nodes + [v for e in edges for v in e], default=0)
        return _build(int(m_match.group(1)), n, edges)
    raise ParameterError("unrecognized graph encoding")

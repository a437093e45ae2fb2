"""Neighbourhood types: open-vertex and initial-vertex balls, complete-ball census, class keys.

Every vertex of a neighbourhood carries a mark ``(open flag, degree in G_n,
anchor flag)`` folded into one integer label, so two neighbourhoods have the
same type iff they are isomorphic as marked graphs.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .canon import CanonKey, LabeledGraph, canonical_key
from .errors import ParameterError
from .graph_core import AttachGraph


def mark_label(open_flag: bool, degree: int, anchor: bool) -> int:
    return (degree << 2) | (int(open_flag) << 1) | int(anchor)


def unmark_label(label: int) -> tuple[bool, int, bool]:
    return bool(label & 2), label >> 2, bool(label & 1)


def ball(lists: list[list[int]], sources: Iterable[int], radius: int) -> dict[int, int]:
    """Vertices within ``radius`` of ``sources`` mapped to their distance."""
    dist = {}
    queue = deque()
    for s in sources:
        if s not in dist:
            dist[s] = 0
            queue.append(s)
    while queue:
        v = queue.popleft()
        dv = dist[v]
        if dv == radius:
            continue
        for w in lists[v]:
            if w not in dist:
                dist[w] = dv + 1
                queue.append(w)
    return dist


@dataclass(frozen=True)
class MarkedNeighborhood:
    a: int
    vertices: tuple  # graph vertex ids, sorted
    edges: tuple  # pairs of graph vertex ids
    degrees: tuple
    open_flags: tuple
    anchor_flags: tuple
    ceiling: int = field(default=10_000, compare=False)

    def labeled(self) -> LabeledGraph:
        index = {v: i for i, v in enumerate(self.vertices)}
        labels = [mark_label(o, dg, an) for o, dg, an
                  in zip(self.open_flags, self.degrees, self.anchor_flags)]
        return LabeledGraph.build(len(self.vertices),
                                  [(index[u], index[v]) for u, v in self.edges], labels)

    @cached_property
    def key(self) -> CanonKey:
        return canonical_key(self.labeled(), ceiling=self.ceiling)

    @property
    def anchors(self) -> tuple:
        return tuple(v for v, f in zip(self.vertices, self.anchor_flags) if f)


def _marked(graph: AttachGraph, vertices, anchors, a: int) -> MarkedNeighborhood:
    lists = graph.adjacency_lists()
    vs = tuple(sorted(vertices))
    inside = set(vs)
    edges = tuple((v, w) for v in vs for w in lists[v] if v < w and w in inside)
    anchors = set(anchors)
    degs = tuple(graph.degree(v) for v in vs)
    return MarkedNeighborhood(
        a, vs, edges, degs,
        tuple(dg < graph.d for dg in degs),
        tuple(v in anchors for v in vs))


def extract_open_neighborhood(graph: AttachGraph, a: int) -> MarkedNeighborhood:
    """Union of radius-``a`` balls around the open vertices (anchors = open vertices)."""
    if a < 0:
        raise ParameterError("radius must be non-negative")
    opens = graph.open_set
    return _marked(graph, ball(graph.adjacency_lists(), sorted(opens), a), opens, a)


def extract_initial_neighborhood(graph: AttachGraph, a: int) -> MarkedNeighborhood:
    """Union of radius-``a`` balls around vertices 1..m+1 (anchors = those vertices)."""
    if a < 0:
        raise ParameterError("radius must be non-negative")
    initial = range(1, min(graph.m + 1, graph.n) + 1)
    return _marked(graph, ball(graph.adjacency_lists(), initial, a), initial, a)


@dataclass
class NeighborhoodCensus:
    a: int
    counts: dict  # CanonKey -> number of disjoint complete balls chosen
    centers: dict = field(default_factory=dict)  # CanonKey -> chosen centres, scan order

    def count(self, key: CanonKey) -> int:
        return self.counts.get(key, 0)

    def to_json(self) -> dict:
        return {"a": self.a,
                "counts": {k.hex(): c for k, c in sorted(self.counts.items())},
                "centers": {k.hex(): list(c) for k, c in sorted(self.centers.items())}}


def complete_vertices(graph: AttachGraph, a: int, exclude: Iterable[int] = ()) -> list[int]:
    """Vertices v whose a-ball has only degree-d vertices and avoids ``exclude``.

    A ball is complete iff its centre is farther than ``a`` from every open vertex.
    """
    blocked = ball(graph.adjacency_lists(), list(graph.open_set) + list(exclude), a)
    return [v for v in range(1, graph.n + 1) if v not in blocked]


def complete_ball(graph: AttachGraph, v: int, a: int) -> MarkedNeighborhood:
    return _marked(graph, ball(graph.adjacency_lists(), [v], a), [v], a)


def complete_census(graph: AttachGraph, a: int, exclude: Iterable[int] = (),
                    key_cache: dict | None = None) -> NeighborhoodCensus:
    """Greedy vertex-disjoint packing of complete a-balls, per type, scanning by vertex id.

    The packing is a lower bound on the maximum packing.  ``key_cache`` maps
    centre -> (vertex set, key) and may be reused across snapshots of one run,
    because a complete ball never changes afterwards.
    """
    if a < 0:
        raise ParameterError("radius must be non-negative")
    counts: dict[CanonKey, int] = {}
    centers: dict[CanonKey, list] = {}
    used: dict[CanonKey, set] = {}
    for v in complete_vertices(graph, a, exclude):
        hit = key_cache.get(v) if key_cache is not None else None
        if hit is None:
            nb = complete_ball(graph, v, a)
            hit = (frozenset(nb.vertices), nb.key)
            if key_cache is not None:
                key_cache[v] = hit
        verts, key = hit
        taken = used.setdefault(key, set())
        if taken.isdisjoint(verts):
            taken.update(verts)
            counts[key] = counts.get(key, 0) + 1
            centers.setdefault(key, []).append(v)
    return NeighborhoodCensus(a, counts, centers)


def radius_for_rounds(R: int) -> int:
    if R < 1:
        raise ParameterError(f"rounds must be >= 1, got {R}")
    return 3**R


def q2_check(graph: AttachGraph, R: int, achievable_types: Iterable[CanonKey]) -> bool:
    """At least R disjoint complete a-balls of every given type, away from W^{2a} and U^a."""
    types = set(achievable_types)
    if not types:
        return True
    a = radius_for_rounds(R)
    lists = graph.adjacency_lists()
    initial = range(1, graph.m + 2)
    excluded = set(ball(lists, initial, 2 * a)) | set(ball(lists, graph.open_set, a))
    census = complete_census(graph, a, exclude=excluded)
    return all(census.count(t) >= R for t in types)


@dataclass(frozen=True)
class ClassKey:
    R: int
    a: int
    initial_key: CanonKey  # type of W^{2a}(n)
    open_key: CanonKey  # type of U^a_n(n)
    all_initial_closed: bool

    def digest(self) -> str:
        h = hashlib.sha256()
        for part in (self.R.to_bytes(2, "big"), self.initial_key.bytes, b"|",
                     self.open_key.bytes, bytes([self.all_initial_closed])):
            h.update(part)
        return h.hexdigest()[:32]

    def to_json(self) -> dict:
        return {"R": self.R, "a": self.a, "digest": self.digest(),
                "initial_key_sha256": hashlib.sha256(self.initial_key.bytes).hexdigest(),
                "open_key_sha256": hashlib.sha256(self.open_key.bytes).hexdigest(),
                "all_initial_closed": self.all_initial_closed}


def initial_closed(graph: AttachGraph) -> bool:
    """Whether every vertex 1..m+1 has degree d."""
    return all(graph.degree(v) == graph.d for v in range(1, graph.m + 2))


def classify(graph: AttachGraph, R: int) -> ClassKey:
    a = radius_for_rounds(R)
    w = extract_initial_neighborhood(graph, 2 * a)
    u = extract_open_neighborhood(graph, a)
    return ClassKey(R, a, w.key, u.key, initial_closed(graph))

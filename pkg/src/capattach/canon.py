"""Canonical forms of small vertex-labelled graphs.

Individualisation-refinement: the partition starts from the vertex labels,
is refined to an equitable partition, and the search branches on the first
non-singleton cell.  Every leaf is a vertex ordering; the canonical form is
the lexicographically smallest leaf encoding.  Automorphisms found when two
leaves encode identically prune sibling branches in the same orbit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError, SizeError

DEFAULT_CEILING = 24


@dataclass(frozen=True)
class LabeledGraph:
    k: int
    edges: frozenset
    labels: tuple

    def __post_init__(self):
        if len(self.labels) != self.k:
            raise ParameterError("one label per vertex required")
        for lab in self.labels:
            if not isinstance(lab, (int, np.integer)) or lab < 0:
                raise ParameterError(f"labels must be non-negative integers, got {lab!r}")
        for e in self.edges:
            i, j = e
            if i == j or not (0 <= i < self.k and 0 <= j < self.k) or i > j:
                raise ParameterError(f"bad edge {e!r}")

    @classmethod
    def build(cls, k: int, edges: Iterable[Sequence[int]], labels: Sequence[int] | None = None):
        norm = frozenset((min(a, b), max(a, b)) for a, b in edges)
        return cls(k, norm, tuple(int(x) for x in labels) if labels is not None else (0,) * k)

    def neighbors(self) -> list[list[int]]:
        nb = [[] for _ in range(self.k)]
        for i, j in self.edges:
            nb[i].append(j)
            nb[j].append(i)
        return nb

    def permuted(self, perm: Sequence[int]) -> "LabeledGraph":
        """Copy with vertex ``v`` renamed ``perm[v]``."""
        labels = [0] * self.k
        for v, p in enumerate(perm):
            labels[p] = self.labels[v]
        return LabeledGraph.build(self.k, [(perm[i], perm[j]) for i, j in self.edges], labels)


@dataclass(frozen=True, order=True)
class CanonKey:
    bytes: bytes

    def hex(self) -> str:
        return self.bytes.hex()

    @classmethod
    def fromhex(cls, text: str) -> "CanonKey":
        return cls(bytes.fromhex(text))

    def __repr__(self):
        h = self.hex()
        return f"CanonKey({h[:24]}{'...' if len(h) > 24 else ''})"


def _refine(col: list[int], nbrs: list[list[int]]) -> list[int]:
    """Equitable refinement; colours are start positions of cells in the ordered partition."""
    k = len(col)
    ncells = len(set(col))
    while True:
        sig = [(col[v], tuple(sorted(col[w] for w in nbrs[v]))) for v in range(k)]
        order = sorted(range(k), key=sig.__getitem__)
        new = [0] * k
        start = 0
        for pos, v in enumerate(order):
            if pos and sig[v] != sig[order[pos - 1]]:
                start = pos
            new[v] = start
        count = len(set(new))
        col = new
        if count == ncells:
            return col
        ncells = count


def _encode(col: list[int], labels: Sequence[int], edges) -> bytes:
    k = len(col)
    head = k.to_bytes(4, "big") + b"".join(
        lab.to_bytes(4, "big") for lab in sorted(labels))
    if k <= 64:
        bits = 0
        for i, j in edges:
            a, b = col[i], col[j]
            if a > b:
                a, b = b, a
            bits |= 1 << (a * k + b)
        return head + bits.to_bytes((k * k + 7) // 8, "big")
    mat = np.zeros((k, k), dtype=bool)
    if edges:
        arr = np.asarray(list(edges), dtype=np.int64)
        pc = np.asarray(col, dtype=np.int64)
        a, b = pc[arr[:, 0]], pc[arr[:, 1]]
        mat[np.minimum(a, b), np.maximum(a, b)] = True
    return head + np.packbits(mat.ravel()).tobytes()


class _Search:
    def __init__(self, labels, edges, nbrs):
        self.labels, self.edges, self.nbrs = labels, edges, nbrs
        self.refs = {}  # "first" / "best" -> (encoding, inverse ordering, path)
        self.generators: list[list[int]] = []

    @property
    def best(self):
        return self.refs["best"][0]

    def leaf(self, col, path):
        """Record a leaf; return the depth to jump back to, or None to continue."""
        enc = _encode(col, self.labels, self.edges)
        inv = [0] * len(col)
        for v, c in enumerate(col):
            inv[c] = v
        if not self.refs:
            self.refs["first"] = self.refs["best"] = (enc, inv, path)
            return None
        for ref_enc, ref_inv, ref_path in self.refs.values():
            if enc == ref_enc:
                gen = [ref_inv[col[v]] for v in range(len(col))]
                if any(g != v for v, g in enumerate(gen)):
                    self.generators.append(gen)
                common = 0
                while common < len(path) and path[common] == ref_path[common]:
                    common += 1
                return common
        if enc < self.refs["best"][0]:
            self.refs["best"] = (enc, inv, path)
        return None

    def orbits(self, prefix):
        parent = list(range(len(self.labels)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for gen in self.generators:
            if all(gen[p] == p for p in prefix):
                for v, w in enumerate(gen):
                    rv, rw = find(v), find(w)
                    if rv != rw:
                        parent[rv] = rw
        return find

    def run(self, col, prefix):
        k = len(col)
        counts: dict[int, int] = {}
        for c in col:
            counts[c] = counts.get(c, 0) + 1
        if len(counts) == k:
            return self.leaf(col, prefix)
        target = min(c for c, size in counts.items() if size > 1)
        cell = [v for v in range(k) if col[v] == target]
        done = []
        for v in cell:
            if done:
                find = self.orbits(prefix)
                rv = find(v)
                if any(find(u) == rv for u in done):
                    continue
            child = list(col)
            for w in cell:
                if w != v:
                    child[w] = target + 1
            jump = self.run(_refine(child, self.nbrs), prefix + [v])
            done.append(v)
            if jump is not None and jump < len(prefix):
                return jump
        return None


@lru_cache(maxsize=200_000)
def _canonical_bytes(k: int, labels: tuple, edges: tuple) -> bytes:
    nbrs = [[] for _ in range(k)]
    for i, j in edges:
        nbrs[i].append(j)
        nbrs[j].append(i)
    order = sorted(range(k), key=labels.__getitem__)
    col = [0] * k
    start = 0
    for pos, v in enumerate(order):
        if pos and labels[v] != labels[order[pos - 1]]:
            start = pos
        col[v] = start
    search = _Search(labels, edges, nbrs)
    search.run(_refine(col, nbrs), [])
    return search.best


def canonical_key(g: LabeledGraph, ceiling: int = DEFAULT_CEILING) -> CanonKey:
    """Key equal for two graphs iff a label-preserving isomorphism exists."""
    if g.k > ceiling:
        raise SizeError(f"graph has {g.k} vertices, ceiling is {ceiling}")
    return CanonKey(_canonical_bytes(g.k, tuple(g.labels), tuple(sorted(g.edges))))


def is_isomorphic(g: LabeledGraph, h: LabeledGraph, ceiling: int = DEFAULT_CEILING) -> bool:
    if g.k != h.k:
        # still enforce the ceiling so oversize input is reported consistently
        canonical_key(g, ceiling), canonical_key(h, ceiling)
        return False
    return canonical_key(g, ceiling) == canonical_key(h, ceiling)

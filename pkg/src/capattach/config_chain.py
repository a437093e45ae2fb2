"""The finite Markov chain of open-vertex configurations.

A configuration keeps only the open vertices of ``G_n`` (degree below
``d``) and the edges among them; each edge from an open vertex to a closed
vertex is remembered as a *stub* on the open vertex.  The next
configuration depends only on the current one, so configuration types form
a finite Markov chain.  This module enumerates that chain exactly, with
rational transition probabilities, and solves for its stationary law.
"""

from __future__ import annotations

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Sequence

from .canon import CanonKey, LabeledGraph, canonical_key
from .errors import InvariantError, ModelError, ParameterError, ResourceError
from .graph_core import AttachGraph

log = logging.getLogger(__name__)

CHAIN_SCHEMA = "capattach.chain/1"
DEFAULT_STATE_CEILING = 10**6


@dataclass(frozen=True)
class OpenConfig:
    graph: LabeledGraph  # labels are stub counts
    m: int
    vertices: tuple | None = field(default=None, compare=False)

    @property
    def k(self) -> int:
        return self.graph.k

    @property
    def stubs(self) -> tuple:
        return self.graph.labels

    @cached_property
    def degrees(self) -> list[int]:
        deg = list(self.graph.labels)
        for i, j in self.graph.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    @cached_property
    def key(self) -> CanonKey:
        return canonical_key(self.graph, ceiling=max(24, self.k))

    def validate(self) -> None:
        m, d = self.m, 2 * self.m
        if not m + 1 <= self.k <= m * (m + 1):
            raise InvariantError(f"{self.k} open vertices outside [{m + 1}, {m * (m + 1)}]")
        if any(not m <= x < d for x in self.degrees):
            raise InvariantError(f"open degree outside [{m}, {d - 1}]: {self.degrees}")
        if sum(d - x for x in self.degrees) != m * (m + 1):
            raise InvariantError("missing degree does not sum to m(m+1)")

    def describe(self) -> dict:
        """Human-readable listing used in JSON output."""
        return {"stubs": list(self.stubs), "edges": sorted(list(e) for e in self.graph.edges)}

    @classmethod
    def from_description(cls, doc: dict, m: int) -> "OpenConfig":
        stubs = doc["stubs"]
        return cls(LabeledGraph.build(len(stubs), doc["edges"], stubs), m)


def extract_config(graph: AttachGraph) -> OpenConfig:
    """Induced subgraph on open vertices, with stub count = degree - internal degree."""
    opens = sorted(graph.open_set)
    index = {v: i for i, v in enumerate(opens)}
    edges = []
    stubs = []
    for v in opens:
        inside = 0
        for w in graph.neighbors(v):
            j = index.get(w)
            if j is not None:
                inside += 1
                if v < w:
                    edges.append((index[v], j))
        stubs.append(graph.degree(v) - inside)
    return OpenConfig(LabeledGraph.build(len(opens), edges, stubs), graph.m, tuple(opens))


def initial_config(m: int) -> OpenConfig:
    """Configuration of K_{m+1}: everything open, no stubs."""
    k = m + 1
    return OpenConfig(LabeledGraph.build(k, combinations(range(k), 2)), m)


def forest_config(m: int) -> OpenConfig:
    """m+1 isolated open vertices with m stubs each."""
    return OpenConfig(LabeledGraph.build(m + 1, [], [m] * (m + 1)), m)


def is_forest_state(c: OpenConfig, m: int) -> bool:
    return c.k == m + 1 and not c.graph.edges and all(s == m for s in c.stubs)


def apply_subset(c: OpenConfig, subset: Sequence[int]) -> OpenConfig:
    """Configuration after the new vertex attaches to ``subset`` (indices into ``c``)."""
    d = 2 * c.m
    k = c.k
    deg = list(c.degrees)
    stubs = list(c.stubs)
    nbrs = c.graph.neighbors()
    for s in subset:
        deg[s] += 1
    closed = {s for s in subset if deg[s] == d}
    new = k
    stubs.append(0)
    new_edges = [(s, new) for s in subset]
    for s in subset:
        if s in closed:
            stubs[new] += 1
    for v in closed:
        for w in nbrs[v]:
            if w not in closed:
                stubs[w] += 1
    keep = [v for v in range(k + 1) if v not in closed]
    index = {v: i for i, v in enumerate(keep)}
    edges = [(index[i], index[j]) for i, j in list(c.graph.edges) + new_edges
             if i in index and j in index]
    return OpenConfig(LabeledGraph.build(len(keep), edges, [stubs[v] for v in keep]), c.m)


@lru_cache(maxsize=None)
def _fraction(num: int, den: int) -> Fraction:
    # shared instances keep large transition tables small
    return Fraction(num, den)


def greedy_close(c: OpenConfig) -> tuple[OpenConfig, list[int]]:
    """Run the closing schedule m+1 times on a configuration.

    Each step attaches the new vertex to the m open *original* vertices of
    smallest degree (ties: lowest index).  Returns the final configuration
    and the number of original vertices still open after each step.
    """
    m = c.m
    originals = c.k
    trail = []
    for _ in range(m + 1):
        if originals < m:
            raise InvariantError(f"only {originals} original vertices open, need {m}")
        deg = c.degrees
        chosen = sorted(range(originals), key=lambda v: (deg[v], v))[:m]
        closed = sum(1 for v in chosen if deg[v] + 1 == 2 * m)
        # apply_subset keeps surviving vertices in order, so originals stay first
        c = apply_subset(c, chosen)
        originals -= closed
        trail.append(originals)
    return c, trail


def transitions(c: OpenConfig, m: int) -> list[tuple[OpenConfig, Fraction]]:
    """Distribution of the next configuration type, grouped by canonical key."""
    if c.m != m:
        raise InvariantError(f"configuration built for m={c.m}, asked for m={m}")
    c.validate()
    total = math.comb(c.k, m)
    groups: dict[CanonKey, list] = {}
    for subset in combinations(range(c.k), m):
        nxt = apply_subset(c, subset)
        slot = groups.get(nxt.key)
        if slot is None:
            groups[nxt.key] = [nxt, 1]
        else:
            slot[1] += 1
    out = [(cfg, _fraction(count, total)) for cfg, count in groups.values()]
    out.sort(key=lambda item: item[0].key)
    return out


@dataclass
class ChainModel:
    """Finite chain over numbered states.

    ``states`` holds OpenConfigs for enumerated chains; toy chains built with
    :meth:`from_matrix` carry plain labels and ``m=None``.
    """

    states: list
    transitions: list  # per state: list of (target id, Fraction)
    initial_state: int
    forest_state: int
    m: int | None = None
    stationary: list | None = None

    @classmethod
    def from_matrix(cls, rows, forest_state: int = 0, initial_state: int = 0) -> "ChainModel":
        trans = [[(j, Fraction(p)) for j, p in enumerate(row) if Fraction(p) != 0] for row in rows]
        return cls(list(range(len(rows))), trans, initial_state, forest_state)

    def __len__(self):
        return len(self.states)

    def check_stochastic(self) -> None:
        for i, row in enumerate(self.transitions):
            if sum(p for _, p in row) != 1 or any(p <= 0 for _, p in row):
                raise ModelError(f"row {i} is not a probability vector")

    def successors(self, i: int) -> list[int]:
        return [j for j, _ in self.transitions[i]]

    def reachable_from(self, root: int) -> list[int]:
        seen = {root}
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j in self.successors(i):
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        return sorted(seen)

    def recurrent_class(self) -> list[int]:
        return self.reachable_from(self.forest_state)

    def steps_to(self, target: int) -> list[float]:
        """Fewest positive-probability steps from each state to ``target`` (inf if never)."""
        rev = [[] for _ in self.states]
        for i, row in enumerate(self.transitions):
            for j, _ in row:
                rev[j].append(i)
        dist = [math.inf] * len(self.states)
        dist[target] = 0
        queue = deque([target])
        while queue:
            j = queue.popleft()
            for i in rev[j]:
                if dist[i] == math.inf:
                    dist[i] = dist[j] + 1
                    queue.append(i)
        return dist

    def return_lengths(self, state: int, max_len: int) -> list[int]:
        """Lengths L <= max_len with a positive-probability path state -> state of exactly L steps."""
        frontier = {state}
        found = []
        for length in range(1, max_len + 1):
            frontier = {j for i in frontier for j in self.successors(i)}
            if state in frontier:
                found.append(length)
        return found

    def period(self, state: int) -> int:
        """Period of ``state`` within the class it generates (0 if it never returns)."""
        level = {state: 0}
        queue = deque([state])
        while queue:
            i = queue.popleft()
            for j in self.successors(i):
                if j not in level:
                    level[j] = level[i] + 1
                    queue.append(j)
        back = self.steps_to(state)
        g = 0
        for i, li in level.items():
            if back[i] == math.inf:
                continue
            for j in self.successors(i):
                if j in level and back[j] != math.inf:
                    g = math.gcd(g, li + 1 - level[j])
        return g

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        states = []
        for i, s in enumerate(self.states):
            if isinstance(s, OpenConfig):
                states.append({"id": i, "key": s.key.hex(), **s.describe()})
            else:
                states.append({"id": i, "label": s})
        return {
            "schema": CHAIN_SCHEMA,
            "m": self.m,
            "initial_state": self.initial_state,
            "forest_state": self.forest_state,
            "states": states,
            "transitions": [[[j, f"{p.numerator}/{p.denominator}"] for j, p in row]
                            for row in self.transitions],
            "stationary": None if self.stationary is None else
            [f"{p.numerator}/{p.denominator}" for p in self.stationary],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ChainModel":
        if doc.get("schema") != CHAIN_SCHEMA:
            raise ParameterError(f"not a chain file (schema {doc.get('schema')!r})")
        m = doc["m"]
        states = []
        for s in doc["states"]:
            if "stubs" in s:
                cfg = OpenConfig.from_description(s, m)
                if cfg.key.hex() != s["key"]:
                    raise ModelError(f"state {s['id']} key does not match its description")
                states.append(cfg)
            else:
                states.append(s["label"])
        trans = [[(j, Fraction(p)) for j, p in row] for row in doc["transitions"]]
        stat = doc.get("stationary")
        return cls(states, trans, doc["initial_state"], doc["forest_state"], m,
                   None if stat is None else [Fraction(p) for p in stat])


def enumerate_chain(m: int, max_states: int = DEFAULT_STATE_CEILING) -> ChainModel:
    """Breadth-first closure from the K_{m+1} configuration and the forest state."""
    if m < 2:
        raise ParameterError(f"m must be >= 2, got {m}")
    roots = [initial_config(m), forest_config(m)]
    index: dict[CanonKey, int] = {}
    states: list[OpenConfig] = []
    queue = deque()
    for cfg in roots:
        if cfg.key not in index:
            index[cfg.key] = len(states)
            states.append(cfg)
            queue.append(index[cfg.key])
    trans: list = [None] * len(states)
    while queue:
        i = queue.popleft()
        row = []
        for cfg, p in transitions(states[i], m):
            j = index.get(cfg.key)
            if j is None:
                if len(states) >= max_states:
                    raise ResourceError(f"state ceiling {max_states} exceeded for m={m}")
                j = index[cfg.key] = len(states)
                states.append(cfg)
                trans.append(None)
                queue.append(j)
            row.append((j, p))
        trans[i] = row
        if i % 2000 == 0:
            log.info("m=%d: expanded %d of %d known states", m, i + 1, len(states))
    return ChainModel(states, trans, index[roots[0].key], index[roots[1].key], m)


def _solve_exact(ids: list[int], chain: ChainModel) -> list[Fraction]:
    """Solve pi (P - I) = 0, sum(pi) = 1 on the sub-chain ``ids`` by Gauss-Jordan over Q."""
    n = len(ids)
    pos = {s: i for i, s in enumerate(ids)}
    # unknowns pi_0..pi_{n-1}; equations: columns of (P - I)^T, last one replaced by normalization
    rows = [[Fraction(0)] * (n + 1) for _ in range(n)]
    for a, s in enumerate(ids):
        for t, p in chain.transitions[s]:
            b = pos.get(t)
            if b is None:
                raise ModelError(f"state {s} leaves the class through {t}")
            rows[b][a] += p
        rows[a][a] -= 1
    rows[n - 1] = [Fraction(1)] * n + [Fraction(1)]
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if piv is None:
            raise ModelError("singular stationary system; the class is not irreducible")
        rows[col], rows[piv] = rows[piv], rows[col]
        pr = rows[col]
        inv = 1 / pr[col]
        if inv != 1:
            rows[col] = pr = [x * inv for x in pr]
        nz = [(c, x) for c, x in enumerate(pr) if x != 0]
        for r in range(n):
            if r != col:
                f = rows[r][col]
                if f != 0:
                    row = rows[r]
                    for c, x in nz:
                        row[c] -= f * x
    return [rows[i][n] for i in range(n)]


def stationary_distribution(chain: ChainModel) -> list[Fraction]:
    """Exact stationary law, supported on the class reachable from the forest state.

    Stores the result on ``chain.stationary`` and returns it.
    """
    chain.check_stochastic()
    cls = chain.recurrent_class()
    back = chain.steps_to(chain.forest_state)
    if any(back[s] == math.inf for s in cls):
        raise ModelError("the forest class is not closed under return to the forest state")
    sol = _solve_exact(cls, chain)
    pi = [Fraction(0)] * len(chain)
    for s, p in zip(cls, sol):
        if p <= 0:
            raise ModelError(f"non-positive stationary mass at recurrent state {s}")
        pi[s] = p
    chain.stationary = pi
    return pi


def stationary_residual(chain: ChainModel, pi: Sequence[Fraction]) -> list[Fraction]:
    """pi P - pi, exactly."""
    out = [-p for p in pi]
    for i, row in enumerate(chain.transitions):
        if pi[i]:
            for j, p in row:
                out[j] += pi[i] * p
    return out


def power_iteration(chain: ChainModel, tol: float = 1e-15, max_iter: int = 100_000):
    """Floating-point stationary law by iterating the chain from the forest state."""
    import numpy as np

    n = len(chain)
    src, dst, val = [], [], []
    for i, row in enumerate(chain.transitions):
        for j, p in row:
            src.append(i)
            dst.append(j)
            val.append(float(p))
    src, dst, val = np.array(src), np.array(dst), np.array(val)
    x = np.zeros(n)
    x[chain.forest_state] = 1.0
    for _ in range(max_iter):
        # average two consecutive iterates so a periodic chain would still settle
        y = np.bincount(dst, weights=x[src] * val, minlength=n)
        y = 0.5 * (x + y)
        if np.abs(y - x).max() < tol:
            return y
        x = y
    return x


def certify_aperiodic(chain: ChainModel) -> bool:
    """True iff the forest state has period 1.

    For enumerated chains, also requires return paths of exactly m+1 and m+2
    steps, the witnesses that make the period 1.
    """
    if chain.period(chain.forest_state) != 1:
        return False
    if chain.m is not None:
        lengths = chain.return_lengths(chain.forest_state, chain.m + 2)
        return chain.m + 1 in lengths and chain.m + 2 in lengths
    return True


def certificate(chain: ChainModel) -> dict:
    """Facts checked about an enumerated chain, for reports and the CLI."""
    forest = chain.forest_state
    back = chain.steps_to(forest)
    cls = chain.recurrent_class()
    witness = chain.return_lengths(forest, (chain.m or 1) + 2)
    return {
        "states": len(chain),
        "recurrent_states": len(cls),
        "transient_states": len(chain) - len(cls),
        "forest_reachable_from_initial": forest in chain.reachable_from(chain.initial_state),
        "max_steps_to_forest": max(back),
        "every_recurrent_state_on_cycle": all(back[s] < math.inf for s in cls),
        "forest_period": chain.period(forest),
        "return_lengths": witness,
        "aperiodic": certify_aperiodic(chain),
    }


def save_chain(chain: ChainModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(chain.to_json(), fh, indent=1)


def load_chain(path) -> ChainModel:
    with open(path) as fh:
        return ChainModel.from_json(json.load(fh))

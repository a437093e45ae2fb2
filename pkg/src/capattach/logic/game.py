"""Ehrenfeucht-Fraisse pebble games on finite graphs.

Rules of the gamma-pebble, R-round game: each round Spoiler takes one of
the gamma pebble pairs (placed or not; a placed pair is lifted) and puts
its pebble on a vertex of either graph; Duplicator answers with a vertex of
the other graph.  Duplicator survives the round iff the pebbled vertices
still define a partial isomorphism (equality and adjacency agree).  She
wins iff she survives all R rounds.

A position is the *set* of pebbled pairs: two pebbles on the same pair act
like one placed pebble plus a free one, so pebble identities are
irrelevant.  Positions are memoised per call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SizeError
from .evaluate import adjacency_matrix

DEFAULT_MAX_VERTICES = 512
DEFAULT_MAX_POSITIONS = 5 * 10**6


@dataclass(frozen=True)
class GamePosition:
    pairs: frozenset  # of (vertex in G, vertex in H)
    rounds_left: int


def _bitsets(mat: np.ndarray) -> list[int]:
    out = []
    for row in mat:
        bits = 0
        for j in np.flatnonzero(row).tolist():
            bits |= 1 << j
        out.append(bits)
    return out


class PebbleGame:
    def __init__(self, g, h, pebbles: int, max_vertices: int = DEFAULT_MAX_VERTICES,
                 max_positions: int = DEFAULT_MAX_POSITIONS):
        if pebbles < 1:
            raise ValueError("at least one pebble pair is required")
        a, b = adjacency_matrix(g), adjacency_matrix(h)
        if max(len(a), len(b)) > max_vertices:
            raise SizeError(f"graphs of {len(a)} and {len(b)} vertices exceed ceiling {max_vertices}")
        self.pebbles = pebbles
        self.sizes = (len(a), len(b))
        self.nbrs = (_bitsets(a), _bitsets(b))
        self.full = ((1 << len(a)) - 1, (1 << len(b)) - 1)
        self.max_positions = max_positions
        self.memo: dict = {}

    def replies(self, pairs, side: int, x: int) -> int:
        """Bitset of answers in graph ``1 - side`` keeping ``pairs + (x, answer)`` a partial isomorphism."""
        other = 1 - side
        mine, theirs = self.nbrs[side], self.nbrs[other]
        allowed = self.full[other]
        for pair in pairs:
            px, py = pair[side], pair[other]
            if px == x:
                allowed &= 1 << py
            else:
                nb = theirs[py] if (mine[x] >> px) & 1 else self.full[other] & ~theirs[py]
                allowed &= nb & ~(1 << py)
            if not allowed:
                break
        return allowed

    def duplicator_wins(self, pairs: frozenset, rounds: int) -> bool:
        if rounds == 0:
            return True
        key = (pairs, rounds)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if len(self.memo) >= self.max_positions:
            raise SizeError(f"game tree exceeds {self.max_positions} memoised positions")
        bases = [pairs - {p} for p in pairs]
        if len(pairs) < self.pebbles:
            bases.append(pairs)
        result = True
        for base in set(bases):
            for side in (0, 1):
                for x in range(self.sizes[side]):
                    ans = self.replies(base, side, x)
                    ok = False
                    while ans:
                        low = ans & -ans
                        y = low.bit_length() - 1
                        ans ^= low
                        pair = (x, y) if side == 0 else (y, x)
                        if self.duplicator_wins(base | {pair}, rounds - 1):
                            ok = True
                            break
                    if not ok:
                        result = False
                        break
                if not result:
                    break
            if not result:
                break
        self.memo[key] = result
        return result


def duplicator_wins(g, h, pebbles: int, rounds: int, **limits) -> bool:
    """Exact value of the ``pebbles``-pebble, ``rounds``-round game on ``g`` and ``h``."""
    if rounds < 0:
        raise ValueError("rounds must be non-negative")
    game = PebbleGame(g, h, pebbles, **limits)
    return game.duplicator_wins(frozenset(), rounds)


def is_partial_isomorphism(g, h, pairs) -> bool:
    """Whether the vertex pairs agree on equality and adjacency."""
    a, b = adjacency_matrix(g), adjacency_matrix(h)
    pairs = list(pairs)
    for x1, y1 in pairs:
        for x2, y2 in pairs:
            if (x1 == x2) != (y1 == y2) or bool(a[x1, x2]) != bool(b[y1, y2]):
                return False
    return True

"""Sentence catalog and grammar-directed random sentences."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .syntax import Adj, And, Eq, Exists, Forall, Formula, Iff, Implies, Not, Or, Sentence, parse_sentence

# relative weights of productions when a subformula is generated
DEFAULT_WEIGHTS = {
    "quantifier": 4.0,
    "not": 1.5,
    "and": 2.0,
    "or": 2.0,
    "implies": 1.0,
    "iff": 0.7,
    "adj": 3.0,
    "eq": 1.5,
}


def _distinct(vs):
    return [Not(Eq(a, b)) for a, b in combinations(vs, 2)]


def _conj(parts):
    parts = list(parts)
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _exists_all(vs, body):
    for v in reversed(vs):
        body = Exists(v, body)
    return body


def at_least_vertices(k: int) -> Sentence:
    """There are at least k distinct vertices (k variables, depth k)."""
    vs = [f"x{i}" for i in range(1, k + 1)]
    body = _conj(_distinct(vs)) if k > 1 else Eq("x1", "x1")
    return Sentence(_exists_all(vs, body), f"at_least_{k}_vertices")


def _many_neighbors(x: str, k: int, prefix: str = "y") -> Formula:
    ys = [f"{prefix}{i}" for i in range(1, k + 1)]
    return _exists_all(ys, _conj([Adj(x, y) for y in ys] + _distinct(ys)))


def min_degree_at_least(k: int) -> Sentence:
    return Sentence(Forall("x", _many_neighbors("x", k)), f"min_degree_ge_{k}")


def some_degree_below(k: int) -> Sentence:
    """Some vertex has fewer than k neighbours (k + 1 variables)."""
    return Sentence(Exists("x", Not(_many_neighbors("x", k))), f"some_degree_lt_{k}")


def max_degree_at_most(k: int) -> Sentence:
    return Sentence(Forall("x", Not(_many_neighbors("x", k + 1))), f"max_degree_le_{k}")


_PATTERNS = {
    "has_edge": "(exists x (exists y (adj x y)))",
    "no_isolated_vertex": "(forall x (exists y (adj x y)))",
    "complete": "(forall x (forall y (or (eq x y) (adj x y))))",
    "universal_vertex": "(exists x (forall y (or (eq x y) (adj x y))))",
    "has_non_edge": "(exists x (exists y (and (not (eq x y)) (not (adj x y)))))",
    "all_have_non_neighbor": "(forall x (exists y (and (not (eq x y)) (not (adj x y)))))",
    "isolated_vertex": "(exists x (forall y (not (adj x y))))",
    "triangle": "(exists x (exists y (exists z (and (adj x y) (adj y z) (adj x z)))))",
    "induced_cherry": "(exists x (exists y (exists z (and (adj x y) (adj x z) (not (eq y z)) (not (adj y z))))))",
    "every_edge_in_triangle": "(forall x (forall y (implies (adj x y) (exists z (and (adj x z) (adj y z))))))",
    "common_neighbor_everywhere": "(forall x (forall y (implies (not (eq x y)) (exists z (and (adj x z) (adj y z))))))",
    "walk_two_vars": "(exists x (exists y (and (adj x y) (exists x (and (adj x y) (forall y (implies (adj x y) (exists x (adj x y)))))))))",
}


def catalog() -> list[Sentence]:
    """Hand-written sentences: counting, degree and neighbourhood patterns."""
    out = [at_least_vertices(k) for k in range(1, 6)]
    out += [parse_sentence(text, name) for name, text in _PATTERNS.items()]
    out += [min_degree_at_least(k) for k in (1, 2, 3)]
    out += [some_degree_below(k) for k in (2, 3, 4)]
    out += [max_degree_at_most(k) for k in (2, 3)]
    return out


def catalog_within(depth_max: int, vars_max: int) -> list[Sentence]:
    return [s for s in catalog() if s.depth <= depth_max and s.variable_count <= vars_max]


def _random_formula(rng, depth_left, scope, pool, weights, size_left):
    """Random formula whose free variables lie in ``scope``."""
    names = list(weights)
    w = np.array([weights[k] for k in names], dtype=float)
    for i, k in enumerate(names):
        if k == "quantifier" and depth_left == 0:
            w[i] = 0
        if k in ("adj", "eq") and not scope:
            w[i] = 0
        if k in ("adj", "eq") and len(scope) == 1 and depth_left > 0:
            w[i] /= 4  # atoms on a single variable are nearly constant
        if k in ("not", "and", "or", "implies", "iff") and size_left[0] <= 0:
            w[i] = 0
    if w.sum() == 0:
        # no bound variable yet and no room: only a quantifier can close the formula
        w[names.index("quantifier")] = 1.0
    choice = names[rng.choice(len(names), p=w / w.sum())]
    size_left[0] -= 1
    if choice == "quantifier":
        var = pool[rng.integers(len(pool))]
        body = _random_formula(rng, depth_left - 1, scope | {var}, pool, weights, size_left)
        return (Exists if rng.random() < 0.5 else Forall)(var, body)
    if choice in ("adj", "eq"):
        sv = sorted(scope)
        x, y = sv[rng.integers(len(sv))], sv[rng.integers(len(sv))]
        if x == y and len(sv) > 1 and (choice == "adj" or rng.random() < 0.75):
            y = sv[(sv.index(x) + 1 + rng.integers(len(sv) - 1)) % len(sv)]
        return (Adj if choice == "adj" else Eq)(x, y)
    if choice == "not":
        return Not(_random_formula(rng, depth_left, scope, pool, weights, size_left))
    sub = [_random_formula(rng, depth_left, scope, pool, weights, size_left) for _ in range(2)]
    if choice == "and":
        return And(tuple(sub))
    if choice == "or":
        return Or(tuple(sub))
    if choice == "implies":
        return Implies(*sub)
    return Iff(*sub)


def random_sentence(rng: np.random.Generator, depth_max: int, vars_max: int,
                    weights=None, max_size: int = 24) -> Sentence:
    pool = [f"v{i}" for i in range(1, vars_max + 1)]
    weights = weights or DEFAULT_WEIGHTS
    var = pool[rng.integers(len(pool))]
    size_left = [max_size]
    body = _random_formula(rng, depth_max - 1, {var}, pool, weights, size_left)
    return Sentence((Exists if rng.random() < 0.5 else Forall)(var, body))


def sample_sentences(depth_max: int, vars_max: int, count: int, seed: int,
                     weights=None, with_catalog: bool = True) -> list[Sentence]:
    """``count`` sentences within the bounds: the fitting catalog entries first, then random ones."""
    if depth_max < 1 or vars_max < 1 or count < 0:
        raise ValueError("depth_max and vars_max must be >= 1, count >= 0")
    out = catalog_within(depth_max, vars_max)[:count] if with_catalog else []
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    while len(out) < count:
        out.append(random_sentence(rng, depth_max, vars_max, weights))
    return out

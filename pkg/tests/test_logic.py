import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from capattach.canon import LabeledGraph
from capattach.errors import FormulaSyntaxError, FreeVariableError, SizeError
from capattach.graph_core import GrowthParams, grow_to
from capattach.logic import (And, Exists, Forall, Not, PebbleGame, catalog, catalog_within,
                             duplicator_wins, eval_table, fo_eval, is_partial_isomorphism,
                             parse_formula, parse_sentence, parse_sentences, sample_sentences,
                             to_sexpr)
from capattach.logic.sampling import at_least_vertices, random_sentence, some_degree_below


def complete(k):
    return LabeledGraph.build(k, itertools.combinations(range(k), 2))


def path(k):
    return LabeledGraph.build(k, [(i, i + 1) for i in range(k - 1)])


def random_graph(rng, k, p=0.5):
    return LabeledGraph.build(k, [e for e in itertools.combinations(range(k), 2) if rng.random() < p])


# -- syntax ----------------------------------------------------------------

def test_depth_and_variables():
    s = parse_sentence("(forall x (exists y (adj x y)))")
    assert s.depth == 2 and s.variable_count == 2


def test_variable_reuse_counts_once():
    s = parse_sentence("(exists x (exists y (and (adj x y) (exists x (adj x y)))))")
    assert s.depth == 3 and s.variable_count == 2


def test_free_variable_error():
    with pytest.raises(FreeVariableError):
        parse_sentence("(adj x y)")
    with pytest.raises(FreeVariableError):
        parse_sentence("(exists x (adj x y))")


@pytest.mark.parametrize("text,line,col", [
    ("(forall x", 1, 10),
    ("(forall x (adj x x)))", 1, 21),
    ("(exists x\n  (frob x x))", 2, 4),
    ("(exists x (adj x))", 1, 11),
    ("(exists (x) (adj x x))", 1, 9),
    ("(exists and (adj and and))", 1, 9),
    ("()", 1, 1),
    ("", 1, 1),
])
def test_syntax_errors_have_positions(text, line, col):
    with pytest.raises(FormulaSyntaxError) as info:
        parse_sentence(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_comments_and_multiple_sentences():
    text = "; degree facts\n(exists x (adj x x))  ; loop-free graphs say no\n(forall x (eq x x))\n"
    a, b = parse_sentences(text)
    assert a.depth == 1 and b.text == "(forall x (eq x x))"


def test_and_needs_two_parts():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("(and (eq x x))")


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), depth=st.integers(1, 4), nvars=st.integers(1, 4))
def test_print_parse_roundtrip(seed, depth, nvars):
    s = random_sentence(np.random.default_rng(seed), depth, nvars)
    again = parse_sentence(s.text)
    assert again == s
    assert parse_sentence(again.text).text == s.text


def test_catalog_roundtrip():
    for s in catalog():
        assert parse_sentence(s.text).formula == s.formula


# -- evaluation ------------------------------------------------------------

def test_eval_examples():
    assert fo_eval(parse_sentence("(forall x (exists y (adj x y)))"), complete(3))
    assert not fo_eval(parse_sentence("(forall x (forall y (or (eq x y) (adj x y))))"), path(3))
    assert fo_eval(parse_sentence("(exists x (exists y (exists z (and (adj x y) (adj y z) (adj x z)))))"),
                   complete(3))


def test_eval_counting_sentences():
    for k in range(1, 6):
        s = at_least_vertices(k)
        assert s.variable_count == k and s.depth == k
        for n in range(1, 7):
            assert fo_eval(s, LabeledGraph.build(n, [])) == (n >= k)


def test_eval_on_attach_graph():
    g = grow_to(GrowthParams(2, 3), 25)
    assert fo_eval(some_degree_below(4), g)
    assert not fo_eval(some_degree_below(2), g)
    assert eval_table(some_degree_below(4), g)


def test_empty_graph_semantics():
    empty = LabeledGraph.build(0, [])
    assert fo_eval(parse_sentence("(forall x (adj x x))"), empty)
    assert not fo_eval(parse_sentence("(exists x (eq x x))"), empty)
    assert eval_table(parse_sentence("(forall x (adj x x))"), empty)


def test_two_evaluators_agree():
    rng = np.random.default_rng(5)
    prng = random.Random(5)
    for _ in range(200):
        s = random_sentence(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        g = random_graph(prng, prng.randint(1, 6), prng.choice([0.2, 0.5, 0.8]))
        assert fo_eval(s, g) == eval_table(s, g)


def test_size_ceiling():
    s = at_least_vertices(5)
    g = grow_to(GrowthParams(2, 0), 300)
    with pytest.raises(SizeError):
        fo_eval(s, g, max_work=10**6)
    with pytest.raises(SizeError):
        eval_table(s, g, max_cells=10**6)


# -- games -----------------------------------------------------------------

def naive_duplicator_wins(g, h, pebbles, rounds):
    """Unmemoised search over pebble-indexed positions."""
    a, b = g.neighbors(), h.neighbors()

    def partial_iso(pos):
        placed = [p for p in pos if p is not None]
        for (x1, y1), (x2, y2) in itertools.product(placed, repeat=2):
            if (x1 == x2) != (y1 == y2) or (x2 in a[x1]) != (y2 in b[y1]):
                return False
        return True

    def wins(pos, left):
        if left == 0:
            return True
        for i in range(pebbles):
            for side in (0, 1):
                for x in range(g.k if side == 0 else h.k):
                    answered = False
                    for y in range(h.k if side == 0 else g.k):
                        new = list(pos)
                        new[i] = (x, y) if side == 0 else (y, x)
                        if partial_iso(new) and wins(tuple(new), left - 1):
                            answered = True
                            break
                    if not answered:
                        return False
        return True

    return wins((None,) * pebbles, rounds)


def test_game_copy_strategy():
    prng = random.Random(2)
    for _ in range(10):
        g = random_graph(prng, prng.randint(1, 7))
        assert duplicator_wins(g, g, prng.randint(1, 3), prng.randint(0, 3))


def test_pigeonhole():
    assert not duplicator_wins(complete(3), complete(4), 4, 4)
    for p, q in [(3, 4), (3, 5), (4, 5)]:
        assert not duplicator_wins(complete(p), complete(q), q, q)


def test_k3_k4_two_pebbles():
    # frozen after agreement with the unmemoised search
    assert naive_duplicator_wins(complete(3), complete(4), 2, 2) is True
    assert duplicator_wins(complete(3), complete(4), 2, 2) is True
    assert duplicator_wins(complete(3), complete(4), 2, 6) is True


def test_game_matches_naive_search():
    prng = random.Random(7)
    disagreements = 0
    spoiler = 0
    for _ in range(60):
        g = random_graph(prng, prng.randint(1, 4))
        h = random_graph(prng, prng.randint(1, 4))
        pebbles, rounds = prng.randint(1, 2), prng.randint(1, 3)
        fast = duplicator_wins(g, h, pebbles, rounds)
        spoiler += not fast
        disagreements += fast != naive_duplicator_wins(g, h, pebbles, rounds)
    assert disagreements == 0
    assert 0 < spoiler < 60


def test_game_monotone_in_rounds_and_pebbles():
    prng = random.Random(13)
    for _ in range(30):
        g = random_graph(prng, prng.randint(2, 6))
        h = random_graph(prng, prng.randint(2, 6))
        for p in (1, 2, 3):
            vals = [duplicator_wins(g, h, p, r) for r in range(4)]
            assert vals == sorted(vals, reverse=True)
        for r in (1, 2, 3):
            vals = [duplicator_wins(g, h, p, r) for p in (1, 2, 3)]
            assert vals == sorted(vals, reverse=True)


def test_cycle_vs_two_triangles():
    c6 = LabeledGraph.build(6, [(i, (i + 1) % 6) for i in range(6)])
    tt = LabeledGraph.build(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert duplicator_wins(c6, tt, 2, 5)
    assert not duplicator_wins(c6, tt, 3, 3)


def test_partial_isomorphism():
    assert is_partial_isomorphism(path(3), complete(3), [(0, 0), (1, 1)])
    assert not is_partial_isomorphism(path(3), complete(3), [(0, 0), (2, 1)])
    assert not is_partial_isomorphism(path(3), path(3), [(0, 0), (1, 0)])


def test_game_size_ceiling():
    with pytest.raises(SizeError):
        PebbleGame(complete(5), complete(5), 2, max_vertices=4)
    with pytest.raises(SizeError):
        PebbleGame(complete(6), complete(6), 3, max_positions=10).duplicator_wins(frozenset(), 3)


def test_equivalence_implies_agreement_small():
    prng = random.Random(3)
    sentences = sample_sentences(2, 2, 60, seed=1)
    for _ in range(40):
        g = random_graph(prng, prng.randint(1, 6))
        h = random_graph(prng, prng.randint(1, 6))
        if duplicator_wins(g, h, 2, 2):
            assert all(fo_eval(s, g) == fo_eval(s, h) for s in sentences)


def test_grown_graphs_one_round():
    # one pebble and one round only sees "some vertex exists"
    g = grow_to(GrowthParams(2, 1), 120)
    h = grow_to(GrowthParams(2, 2), 150)
    assert duplicator_wins(g, h, 1, 1)
    assert not duplicator_wins(g, LabeledGraph.build(0, []), 1, 1)


# -- sampling --------------------------------------------------------------

def test_sampling_deterministic_and_bounded():
    a = sample_sentences(3, 2, 80, seed=4)
    b = sample_sentences(3, 2, 80, seed=4)
    assert [s.text for s in a] == [s.text for s in b]
    assert all(s.depth <= 3 and s.variable_count <= 2 for s in a)
    assert len(a) == 80
    assert [s.text for s in sample_sentences(3, 2, 80, seed=5)] != [s.text for s in a]


def test_sampling_variety():
    texts = {s.text for s in sample_sentences(3, 3, 300, seed=0, with_catalog=False)}
    assert len(texts) > 200


def test_catalog_contents():
    names = {s.name: s for s in catalog()}
    for k in range(1, 6):
        s = names[f"at_least_{k}_vertices"]
        assert s.variable_count == k
    assert all(s.depth <= 2 and s.variable_count <= 2 for s in catalog_within(2, 2))
    assert "has_edge" in {s.name for s in catalog_within(2, 2)}


def test_nodes_are_hashable_values():
    f = Exists("x", Not(And((parse_formula("(adj x x)"), parse_formula("(eq x x)")))))
    assert f == parse_formula(to_sexpr(f))
    assert hash(f) == hash(parse_formula(to_sexpr(f)))
    assert Forall("x", f.body).depth == 1

import random

import pytest

from capattach.errors import ParameterError
from capattach.graph_core import (GrowthParams, _build, advance, close_original, grow_to,
                                  make_rng, new_complete)
from capattach.neighborhood import (ball, classify, complete_ball, complete_census,
                                    complete_vertices, extract_initial_neighborhood,
                                    extract_open_neighborhood, initial_closed, mark_label,
                                    q2_check, radius_for_rounds, unmark_label)

K3 = lambda: new_complete(GrowthParams(2, 0))  # noqa: E731


def consistent(nb, d):
    return all(o == (dg < d) for o, dg in zip(nb.open_flags, nb.degrees))


def test_mark_roundtrip():
    for o in (False, True):
        for dg in range(9):
            for an in (False, True):
                assert unmark_label(mark_label(o, dg, an)) == (o, dg, an)


def test_open_ball_triangle():
    nb = extract_open_neighborhood(K3(), 1)
    assert nb.vertices == (1, 2, 3)
    assert len(nb.edges) == 3 and all(nb.open_flags)


def test_open_ball_forest_graph():
    g = close_original(K3())
    nb = extract_open_neighborhood(g, 0)
    assert nb.vertices == (4, 5, 6) and nb.edges == ()
    assert nb.degrees == (2, 2, 2) and all(nb.open_flags)
    nb1 = extract_open_neighborhood(g, 1)
    assert set(nb1.vertices) == {1, 2, 3, 4, 5, 6}
    assert consistent(nb1, 4)
    assert nb1.anchors == (4, 5, 6)


def test_open_ball_zero_is_open_set():
    for seed in range(5):
        g = grow_to(GrowthParams(2, seed), 300)
        assert set(extract_open_neighborhood(g, 0).vertices) == g.open_set


def test_initial_ball():
    g = grow_to(GrowthParams(3, 2), 200)
    nb = extract_initial_neighborhood(g, 0)
    assert nb.vertices == (1, 2, 3, 4)
    assert len(nb.edges) == 6
    nb3 = extract_initial_neighborhood(g, 3)
    assert nb3.anchors == (1, 2, 3, 4)
    assert [v for v, f in zip(nb3.vertices, nb3.anchor_flags) if f] == [1, 2, 3, 4]
    assert consistent(nb3, 6)
    assert extract_initial_neighborhood(K3(), 5).vertices == (1, 2, 3)


def test_ball_distances():
    lists = [[], [2], [1, 3], [2, 4], [3]]
    assert ball(lists, [1], 2) == {1: 0, 2: 1, 3: 2}


def test_negative_radius():
    with pytest.raises(ParameterError):
        extract_open_neighborhood(K3(), -1)
    with pytest.raises(ParameterError):
        radius_for_rounds(0)


def test_census_triangle_empty():
    assert complete_census(K3(), 1).counts == {}


def test_census_balls_complete():
    g = grow_to(GrowthParams(2, 3), 500)
    census = complete_census(g, 1)
    assert census.counts
    for centres in census.centers.values():
        for v in centres:
            assert all(dg == 4 for dg in complete_ball(g, v, 1).degrees)


def test_complete_ball_freezes():
    rng = make_rng(4)
    g = grow_to(GrowthParams(2, 4), 400, rng)
    before = {v: complete_ball(g, v, 2) for v in complete_vertices(g, 2)}
    advance(g, 600, rng)
    for v, nb in before.items():
        assert complete_ball(g, v, 2) == nb


@pytest.mark.parametrize("seed", range(5))
def test_census_monotone_along_run(seed):
    rng = make_rng(seed)
    g = new_complete(GrowthParams(2, seed))
    cache = {}
    prev = {}
    for n in range(100, 1100, 100):
        advance(g, n - g.n, rng)
        counts = complete_census(g, 1, key_cache=cache).counts
        assert all(counts.get(k, 0) >= c for k, c in prev.items())
        assert counts == complete_census(g, 1).counts
        prev = counts


def test_q2():
    assert q2_check(K3(), 1, [])
    key = complete_ball(grow_to(GrowthParams(2, 1), 300), 1, 3).key
    assert not q2_check(K3(), 1, [key])


def test_q2_own_types():
    g = grow_to(GrowthParams(2, 5), 3000)
    lists = g.adjacency_lists()
    excluded = set(ball(lists, [1, 2, 3], 6)) | set(ball(lists, g.open_set, 3))
    own = list(complete_census(g, 3, exclude=excluded).counts)
    assert own and q2_check(g, 1, own)
    # complete 3-balls are nearly all distinct, so two copies of one type are rare
    assert not q2_check(g, 2, own)


def test_classify_deterministic():
    a = classify(grow_to(GrowthParams(2, 8), 400), 1)
    b = classify(grow_to(GrowthParams(2, 8), 400), 1)
    assert a == b and a.digest() == b.digest()
    assert a.a == 3


def test_classify_triangle():
    assert classify(K3(), 1).all_initial_closed is False
    assert not initial_closed(K3())


def test_classify_ignores_later_ids():
    g = grow_to(GrowthParams(2, 12), 300)
    rng = random.Random(0)
    later = list(range(4, g.n + 1))
    shuffled = later[:]
    rng.shuffle(shuffled)
    rename = {v: v for v in (1, 2, 3)} | dict(zip(later, shuffled))
    h = _build(2, g.n, [(rename[u], rename[v]) for u, v in g.edges()])
    assert classify(h, 1) == classify(g, 1)
    assert complete_census(h, 1).counts.keys() == complete_census(g, 1).counts.keys()


def test_initial_closed_grows():
    def frac(n):
        return sum(initial_closed(grow_to(GrowthParams(2, s), n)) for s in range(300)) / 300
    assert frac(500) >= frac(50)

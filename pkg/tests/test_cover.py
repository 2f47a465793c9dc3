import random


from ripscover.chains import SearchBudget
from ripscover.cover import (
    build_cover_ball,
    c2_check,
    c3_check,
    chain_lifting_at,
    evenly_covers,
    generates_at,
    is_simplicial_cover,
    transverse,
    uniform_cover_verdict,
    uniqueness_of_lifts,
)
from ripscover.gallery import hexagon_ex72, polygon
from ripscover.space import (
    Entourage,
    FiniteSpace,
    ScaleLadder,
    SpaceMap,
    compose,
    entourage_at,
    image_under,
)

from _oracles import random_entourage, random_map, random_nested_ladder

import numpy as np


def double_cover():
    src = polygon(12, 1).space
    tgt = polygon(6, 1).space
    return SpaceMap(src, tgt, [i % 6 for i in range(12)])


def fold_map():
    src = polygon(6, 1).space
    tgt = FiniteSpace(["q0", "q1", "q2", "q3"], coords=[(0, 0), (1, 0), (2, 0), (3, 0)])
    return SpaceMap(src, tgt, [0, 1, 2, 3, 2, 1])


def hex_to_triangle():
    src = polygon(6, 1).space
    tgt = FiniteSpace(["u", "v", "w"], dist=[[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    return SpaceMap(src, tgt, [i % 3 for i in range(6)])


F12 = double_cover()
E1_12 = entourage_at(F12.source, 0.6)   # one-step on the 12-gon
E2_12 = entourage_at(F12.source, 1.2)   # one- and two-steps
E0_12 = entourage_at(F12.source, 0.0)

FOLD = fold_map()
E1_6 = entourage_at(FOLD.source, 1.05)
E2_6 = entourage_at(FOLD.source, 1.8)


def test_generates_at():
    ident = SpaceMap(F12.source, F12.source, range(12))
    ladder = ScaleLadder([E2_12, E1_12, E0_12])
    got = generates_at(ident, E2_12, ladder)
    assert got is not None and got[1] == E1_12  # first scale whose square fits
    # the double cover: the finest metric scale needs the identity scale below it
    got = generates_at(F12, E1_12, ladder)
    assert got is not None and got[1] == E0_12
    got = generates_at(F12, E2_12, ladder)
    assert got is not None and got[1] == E1_12
    # constant map: anything works
    one = FiniteSpace(["pt"], dist=[[0.0]])
    const = SpaceMap(F12.source, one, [0] * 12)
    assert generates_at(const, E1_12, ladder)[0] == 0


def test_evenly_covers():
    ident = SpaceMap(F12.source, F12.source, range(12))
    assert evenly_covers(ident, E2_12) == (True, None)
    assert evenly_covers(F12, E1_12) == (True, None)
    ok, cx = evenly_covers(FOLD, E1_6)
    assert not ok and cx["kind"] == "injectivity" and cx["x"] in (0, 3)


def test_is_simplicial_cover():
    assert is_simplicial_cover(F12, E1_12)[0]  # triangle-free downstairs
    # at the two-step scale the wide downstairs triangle (0,2,4) cannot lift:
    # ball bijections alone do not make a simplicial cover
    ok, cx = is_simplicial_cover(F12, E2_12)
    assert evenly_covers(F12, E2_12)[0]
    assert not ok and cx["kind"] == "triangle_lift"
    ok, cx = is_simplicial_cover(hex_to_triangle(), E1_6)
    assert evenly_covers(hex_to_triangle(), E1_6)[0]
    assert not ok and cx["kind"] == "triangle_lift"


def test_chain_lifting():
    ident = SpaceMap(F12.source, F12.source, range(12))
    assert chain_lifting_at(ident, E2_12, E1_12)[0]
    assert chain_lifting_at(F12, E1_12, E1_12)[0]
    # sub-arc inclusion lifts only when the lift scale is generous enough
    arc = FiniteSpace([f"a{i}" for i in range(5)], coords=polygon(6, 1).space.coords[:5])
    incl = SpaceMap(arc, polygon(6, 1).space, range(5))
    e_arc = entourage_at(arc, 1.05)
    assert chain_lifting_at(incl, e_arc, e_arc)[0]
    ok, cx = chain_lifting_at(incl, Entourage.identity(5), e_arc)
    assert not ok and cx["kind"] == "link"


def test_transverse():
    assert transverse(F12, E1_12)
    assert not transverse(F12, Entourage.complete(12))
    one = FiniteSpace(["pt"], dist=[[0.0]])
    const = SpaceMap(F12.source, one, [0] * 12)
    assert transverse(const, E0_12)
    assert transverse(FOLD, E1_6)  # fibers sit two steps apart


def test_uniqueness_of_lifts():
    ident = SpaceMap(F12.source, F12.source, range(12))
    assert uniqueness_of_lifts(ident, E2_12) == (True, None)
    assert uniqueness_of_lifts(F12, E1_12) == (True, None)
    ok, wit = uniqueness_of_lifts(FOLD, E1_6)
    assert not ok and sorted(wit) in ([1, 5], [2, 4])


def test_uniqueness_implies_transverse_always():
    rng = random.Random(14)
    for _ in range(200):
        f = random_map(rng, rng.randint(2, 6))
        e = random_entourage(rng, f.source.n, rng.random())
        if uniqueness_of_lifts(f, e)[0]:
            assert transverse(f, e)


def test_transverse_square_gives_uniqueness():
    rng = random.Random(15)
    for _ in range(200):
        f = random_map(rng, rng.randint(2, 6))
        e = random_entourage(rng, f.source.n, rng.random())
        if transverse(f, compose(e, e)):
            assert uniqueness_of_lifts(f, e)[0]


def test_uniqueness_transverse_ladder_equivalence():
    # nested ladders with a transitive finest scale: somewhere-uniqueness and
    # somewhere-transverse agree exactly
    rng = random.Random(16)
    for _ in range(300):
        f = random_map(rng, rng.randint(2, 6))
        scales = random_nested_ladder(rng, f.source.n, depth=rng.randint(2, 4))
        uniq = any(uniqueness_of_lifts(f, e)[0] for e in scales)
        trans = any(transverse(f, e) for e in scales)
        assert uniq == trans


def test_c3():
    assert c3_check(F12, E1_12, E1_12) == (True, None)
    ok, wit = c3_check(FOLD, Entourage.identity(6), E1_6)
    assert not ok and wit is not None
    # a fine scale whose square is transverse keeps everything diagonal
    rng = random.Random(20)
    for _ in range(100):
        f = random_map(rng, rng.randint(2, 6))
        fine = random_entourage(rng, f.source.n, rng.random())
        if transverse(f, compose(fine, fine)):
            e = random_entourage(rng, f.source.n, rng.random())
            assert c3_check(f, Entourage(e.rel | fine.rel), fine)[0]


def test_c2_statuses():
    ident = SpaceMap(F12.source, F12.source, range(12))
    assert c2_check(ident, E2_12, E1_12)["status"] == "proved"
    got = c2_check(FOLD, E1_6, E1_6, SearchBudget(states=2000))
    assert got["status"] == "refuted"
    assert sorted(got["witness"]["alpha"] + got["witness"]["beta"]) is not None
    got = c2_check(F12, E1_12, E1_12, SearchBudget(states=800))
    assert got["status"] == "unrefuted"


def test_uniform_cover_verdicts():
    lad = ScaleLadder([E2_12, E1_12, E0_12])
    rep = uniform_cover_verdict(F12, lad, SearchBudget(states=500))
    assert rep.verdicts["uniform_covering_map_at_ladder"]
    assert rep.verdicts["simplicial_cover_base_at_ladder"]
    assert rep.implications["simplicial_implies_evenly"]
    assert rep.implications["lifting_squares_give_structure"]
    assert rep.implications["uniqueness_iff_transverse_per_scale"]

    fold_lad = ScaleLadder([E2_6, E1_6])
    rep = uniform_cover_verdict(FOLD, fold_lad, SearchBudget(states=500))
    assert not rep.verdicts["uniform_covering_map_at_ladder"]
    assert rep.verdicts["failing"]

    ident = SpaceMap(F12.source, F12.source, range(12))
    rep = uniform_cover_verdict(ident, lad, SearchBudget(states=500))
    assert rep.verdicts["uniform_covering_map_at_ladder"]


def test_uniform_cover_threads_match():
    lad = ScaleLadder([E2_12, E1_12, E0_12])
    a = uniform_cover_verdict(F12, lad, SearchBudget(states=300))
    b = uniform_cover_verdict(F12, lad, SearchBudget(states=300), threads=3)
    assert a.to_json() == b.to_json()


def test_cover_ball_simply_connected():
    sp = hexagon_ex72().space
    b = build_cover_ball(sp, entourage_at(sp, 3.0), 0, 4)
    assert len(b.vertices) == 6
    assert not b.approximate and not b.frontier
    assert all(len(v) == 1 for v in b.fibers().values())


def test_cover_ball_line_over_cycle():
    sp = hexagon_ex72().space
    b = build_cover_ball(sp, entourage_at(sp, 1.0), 0, 7)
    assert len(b.vertices) == 15  # positions -7..7 along the unrolled cycle
    assert b.frontier
    assert not b.approximate
    # each class projects onto a valid scale pair along each edge
    e = entourage_at(sp, 1.0)
    for a, c in b.edges:
        assert e.related(b.vertices[a][0], b.vertices[c][0])


def test_cover_ball_radius_zero_and_dot():
    sp = hexagon_ex72().space
    b = build_cover_ball(sp, entourage_at(sp, 1.0), 0, 0)
    assert len(b.vertices) == 1 and b.frontier
    dot = b.to_dot()
    assert dot.startswith("graph") and "v0" in dot


def test_chain_lifting_pointed_variant():
    # restricting to one basepoint's component can pass where the universal
    # quantifier fails: an isolated extra point breaks only the global form
    src = FiniteSpace(
        ["x0", "x1", "far"], dist=[[0, 1, 9], [1, 0, 9], [9, 9, 0]]
    )
    tgt = FiniteSpace(["y0", "y1"], dist=[[0, 1], [1, 0]])
    f = SpaceMap(src, tgt, [0, 1, 1])
    e = entourage_at(src, 1.0)
    ok_all, cx = chain_lifting_at(f, e, e)
    assert not ok_all and cx["x"] == 2
    ok_pt, _ = chain_lifting_at(f, e, e, basepoint=0)
    assert ok_pt


def test_shipped_triangle_lift_regression_fixture():
    import json
    import os

    from ripscover.space import space_from_json

    path = os.path.join(os.path.dirname(__file__), "fixtures", "triangle_lift_regression.json")
    with open(path) as fh:
        doc = json.load(fh)
    f = SpaceMap(space_from_json(doc["source"]), space_from_json(doc["target"]), doc["assign"])
    e = entourage_at(f.source, doc["ladder"][0]["eps"])
    assert evenly_covers(f, e)[0]
    ok, cx = is_simplicial_cover(f, e)
    assert not ok and cx["kind"] == "triangle_lift"

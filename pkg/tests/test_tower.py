import pytest

from ripscover.chains import SearchBudget
from ripscover.errors import ValidationError
from ripscover.gallery import hexagon_ex72, hexagon_ex73, polygon, solenoid
from ripscover.snf import IntLattice
from ripscover.space import Entourage, ScaleLadder, entourage_at
from ripscover.tower import (
    build_tower,
    g_entourage,
    joinability_witness,
    ml_diagnostic,
    triviality_diagnostic,
    uniform_joinability_audit,
)


def test_circle_tower_stabilizes():
    g = polygon(12, 1)
    t = build_tower(g.space, g.ladder, 0)
    assert [grp.rank for grp in t.groups] == [1, 1, 1]
    assert all(abs(m.matrix[0][0]) == 1 for m in t.bondings)
    d = ml_diagnostic(t, 0)
    assert d["status"] == "stabilized_at" and d["at"] == 1
    assert "caveat" in d
    assert triviality_diagnostic(t, 0)["status"] == "not_within_ladder"


def test_solenoid_tower_shrinks():
    g = solenoid(2, 64, 4, 1)
    t = build_tower(g.space, g.ladder, 0)
    assert [grp.rank for grp in t.groups] == [1, 1, 1]
    assert all(abs(m.matrix[0][0]) == 2 for m in t.bondings)
    assert ml_diagnostic(t, 0)["status"] == "not_stabilized_within_ladder"
    assert ml_diagnostic(t, 1)["status"] == "not_stabilized_within_ladder"
    assert t.image(1, 0) == IntLattice.from_vectors(1, [[2]])
    assert t.image(2, 0) == IntLattice.from_vectors(1, [[4]])
    assert t.image(2, 0).issubset(t.image(1, 0))
    assert triviality_diagnostic(t, 0)["status"] == "not_within_ladder"


def test_trivial_tower():
    sp = hexagon_ex72().space
    lad = ScaleLadder([Entourage.complete(6), Entourage.complete(6)])
    t = build_tower(sp, lad, 0)
    assert all(grp.is_trivial() for grp in t.groups)
    assert ml_diagnostic(t, 0)["status"] == "not_stabilized_within_ladder"  # vacuous depth
    assert triviality_diagnostic(t, 0)["status"] == "trivial_at"


def test_cone_like_tower_trivial_at_filled_scale():
    # hexagon plus center: the unit scale fans the disk; the cycle-only scale
    # below it carries the circle, whose image dies at the filled scale
    g = hexagon_ex73()
    sp = g.space
    e1 = entourage_at(sp, 1.0)
    planar_cycle = Entourage.from_pairs(
        sp.n, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]
    )
    lad = ScaleLadder([e1, planar_cycle])
    t = build_tower(sp, lad, 0)
    d = triviality_diagnostic(t, 0)
    # the planar cycle is nullhomotopic at eps=1 via the center fan, but the
    # vertical cycle keeps H1(eps=1) nontrivial; image of the cycle-only scale
    # must still be trivial
    assert d["status"] == "trivial_at" and d["at"] == 1


def test_functoriality_and_nesting():
    g = solenoid(2, 64, 4, 1)
    t = build_tower(g.space, g.ladder, 0)
    prod = t.maps[(1, 0)].compose(t.maps[(2, 1)])
    assert prod.matrix == t.maps[(2, 0)].matrix
    assert t.image(2, 0).issubset(t.image(1, 0))


def test_disconnected_scale_reports_component():
    sp = hexagon_ex72().space
    lad = ScaleLadder([entourage_at(sp, 1.0), Entourage.identity(6)])
    t = build_tower(sp, lad, 0)
    assert t.scale_notes[1]["components"] == 6
    assert t.scale_notes[1]["component_size"] == 1
    assert t.groups[1].is_trivial()


def test_tower_validation():
    sp = hexagon_ex72().space
    lad = ScaleLadder([entourage_at(sp, 1.0)])
    with pytest.raises(ValidationError):
        build_tower(sp, lad, 0)
    good = ScaleLadder.from_thresholds(sp, [3, 1])
    t = build_tower(sp, good, 0)
    with pytest.raises(ValidationError):
        ml_diagnostic(t, 1)  # no finer scale to verify against


def test_joinability_same_point():
    sp = hexagon_ex72().space
    e1 = entourage_at(sp, 1.0)
    v = joinability_witness(sp, 2, 2, e1, e1)
    assert v.verdict.is_yes()
    assert v.witness.witness == (2,)


def test_joinability_hexagon_pair():
    sp = hexagon_ex72().space
    e1 = entourage_at(sp, 1.0)
    e3 = entourage_at(sp, 3.0)
    no = joinability_witness(sp, 0, 1, e1, e1)
    assert no.verdict.is_no()
    assert no.verdict.obstruction["kind"] == "h1_coset"
    yes = joinability_witness(sp, 0, 1, e3, e1)
    assert yes.verdict.is_yes()
    assert yes.witness.witness == (0, 5, 4, 3, 2, 1)
    yes.verdict.certificate.replay()


def test_joinability_unrelated_pair_is_no():
    sp = hexagon_ex72().space
    e1 = entourage_at(sp, 1.0)
    v = joinability_witness(sp, 0, 3, e1, e1)  # diameter pair
    assert v.verdict.is_no() and v.verdict.obstruction["kind"] == "endpoints"


def test_audit_polygon_supported():
    g = polygon(12, 1)
    rep = uniform_joinability_audit(g.space, g.ladder, SearchBudget(states=8000))
    assert rep["uj_supported_at_depth"]
    for cell in rep["cells"]:
        assert cell["fully_supported"]


def test_audit_hexagon_supported_at_coarse():
    g = hexagon_ex72()
    rep = uniform_joinability_audit(g.space, g.ladder)
    assert rep["uj_supported_at_depth"]
    (cell,) = rep["cells"]
    assert cell["pairs"] == 6 and cell["witnessed"] == 6


def test_audit_identity_fine_scale():
    sp = hexagon_ex72().space
    lad = ScaleLadder([entourage_at(sp, 1.0), Entourage.identity(6)])
    rep = uniform_joinability_audit(sp, lad)
    assert rep["uj_supported_at_depth"]
    (cell,) = rep["cells"]
    assert cell["pairs"] == 0 and cell["fraction"] == 1.0


def test_g_entourage_hexagon_ex73():
    g = hexagon_ex73()
    sp = g.space
    e1 = entourage_at(sp, 1.0)
    ent, report = g_entourage(sp, e1, g.ladder)
    a, b, c = sp.index_of("a"), sp.index_of("b"), sp.index_of("c")
    assert ent.related(a, b)
    for p in (sp.index_of(n) for n in ("a", "b", "p1", "p2", "p3", "p4")):
        assert not ent.related(p, c) or p == c
    by_pair = {tuple(entry["pair"]): entry for entry in report["pairs"]}
    for p in (sp.index_of(n) for n in ("b", "p1", "p2", "p3", "p4")):
        key = (min(p, c), max(p, c))
        assert by_pair[key]["verdict"] == "no"
        assert by_pair[key]["obstruction"]["kind"] == "h1_coset"
    assert by_pair[(a, b)]["verdict"] == "yes"
    # every certified pair plus the diagonal and nothing else
    assert ent.related(a, a)


def test_g_entourage_identity_scale():
    sp = hexagon_ex72().space
    ident = Entourage.identity(6)
    lad = ScaleLadder([entourage_at(sp, 1.0), ident])
    ent, report = g_entourage(sp, ident, lad)
    assert ent == ident


def test_thm_finite_shadow_image_inclusion():
    # when an audit cell is fully witnessed at (coarse, finest), the image of
    # the finest-scale classes must contain the image of the fine scale's
    gals = [polygon(12, 1), hexagon_ex72()]
    for g in gals:
        rep = uniform_joinability_audit(g.space, g.ladder, SearchBudget(states=8000))
        t = build_tower(g.space, g.ladder, 0)
        k = len(g.ladder)
        for cell in rep["cells"]:
            if not cell["fully_supported"]:
                continue
            i = next(
                idx for idx in range(k) if g.ladder.describe(idx) == cell["scale"]
            )
            j = next(
                idx for idx in range(k) if g.ladder.describe(idx) == cell["fine"]
            )
            if j == k - 1:
                continue  # witness scale equals the fine scale
            assert t.image(j, i).issubset(t.image(k - 1, i))


def test_tower_report_json_and_table():
    g = solenoid(2, 64, 4, 1)
    t = build_tower(g.space, g.ladder, 0)
    doc = t.to_json()
    assert doc["kind"] == "tower_report"
    assert doc["bondings"][0]["snf"] == [2]
    assert "mittag_leffler" in doc["diagnostics"]
    table = t.text_table()
    assert "rank" in table and "[2]" in table


def test_joinability_budget_truncation_reports_unknown():
    g = hexagon_ex72()
    sp = g.space
    e1, e3 = entourage_at(sp, 1.0), entourage_at(sp, 3.0)
    v = joinability_witness(sp, 0, 1, e3, e1, SearchBudget(states=1))
    assert v.verdict.is_unknown()
    assert v.verdict.stats["norm_truncated"] or v.verdict.stats["candidates_tried"] == 0


def test_g_entourage_budget_truncation():
    g = hexagon_ex73()
    sp = g.space
    e1 = entourage_at(sp, 1.0)
    ent, report = g_entourage(sp, e1, g.ladder, SearchBudget(states=2))
    assert report["norm_truncated"]
    kinds = {p["verdict"] for p in report["pairs"]}
    assert "unknown" in kinds or "no" in kinds

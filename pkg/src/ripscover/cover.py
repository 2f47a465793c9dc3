"""Per-scale verification of covering behavior for maps of finite spaces.

Every predicate here is an exact finite check except the approximate
chain-lift uniqueness question, which can only be refuted or left
unrefuted at a budget.  Verdicts are always relative to the supplied
ladder and the reports say so.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chains import Chain, SearchBudget, Trivalue, canonicalize, decide_homotopic, e_homotopic
from .errors import CarrierMismatch, ValidationError
from .rips import build_skeleton
from .space import (
    Entourage,
    FiniteSpace,
    ScaleLadder,
    SpaceMap,
    ball,
    component_labels,
    compose,
    image_under,
)

DEFAULT_BUDGET = SearchBudget()


def generates_at(f: SpaceMap, e: Entourage, candidates) -> tuple[int, Entourage] | None:
    """First candidate scale F with f(F) o f(F) inside f(E), if any."""
    if e.n != f.source.n:
        raise CarrierMismatch("entourage does not live on the map's source")
    fe = image_under(f, e)
    for idx, cand in enumerate(candidates):
        ff = image_under(f, cand)
        if compose(ff, ff).issubset(fe):
            return idx, cand
    return None


def evenly_covers(f: SpaceMap, e: Entourage) -> tuple[bool, dict | None]:
    """Does every ball upstairs map bijectively onto its image ball?"""
    if e.n != f.source.n:
        raise CarrierMismatch("entourage does not live on the map's source")
    fe = image_under(f, e)
    for x in range(f.source.n):
        bx = ball(e, x)
        images = [f(y) for y in bx]
        seen: dict[int, int] = {}
        for y, fy in zip(bx, images):
            if fy in seen:
                return False, {"kind": "injectivity", "x": x, "lifts": [seen[fy], y], "image": fy}
            seen[fy] = y
        missing = [q for q in ball(fe, f(x)) if q not in seen]
        if missing:
            return False, {"kind": "surjectivity", "x": x, "missing": missing[0]}
    return True, None


def is_simplicial_cover(f: SpaceMap, e: Entourage) -> tuple[bool, dict | None]:
    """Even covering plus unique lifting of downstairs triangles."""
    ok, cx = evenly_covers(f, e)
    if not ok:
        return False, cx
    fe = image_under(f, e)
    down = build_skeleton(f.target, fe)
    tris_at: dict[int, list[tuple[int, int, int]]] = {}
    for tri in down.triangles:
        for v in tri:
            tris_at.setdefault(v, []).append(tri)
    for x in range(f.source.n):
        fx = f(x)
        if fx not in tris_at:
            continue
        bx = ball(e, x)
        lift = {f(y): y for y in bx}
        for tri in tris_at[fx]:
            u, v = [p for p in tri if p != fx]
            y, z = lift[u], lift[v]
            if not e.related(y, z):
                return False, {
                    "kind": "triangle_lift", "x": x, "triangle": list(tri), "lifts": [y, z],
                }
    return True, None


def chain_lifting_at(
    f: SpaceMap, e: Entourage, fine: Entourage, basepoint: int | None = None
) -> tuple[bool, dict | None]:
    """Can every image-scale link be lifted to an e-link from any fiber point?

    The default quantifies over all starting points (the stronger reading the
    ladder-level verdicts use).  Passing a basepoint restricts the check to
    chains lifted from that point's fiber positions reachable at scale e.
    """
    if e.n != f.source.n or fine.n != f.source.n:
        raise CarrierMismatch("entourages must live on the map's source")
    ff = image_under(f, fine)
    fibers: dict[int, list[int]] = {}
    for x, y in enumerate(f.assign):
        fibers.setdefault(y, []).append(x)
    allowed = None
    if basepoint is not None:
        labels = component_labels(e)
        allowed = {x for x in range(f.source.n) if labels[x] == labels[basepoint]}
    for y, yp in ff.pairs():
        for a, b in ((y, yp), (yp, y)):
            for x in fibers.get(a, ()):
                if allowed is not None and x not in allowed:
                    continue
                if not any(e.related(x, xp) for xp in fibers.get(b, ())):
                    return False, {"kind": "link", "x": x, "link": [a, b]}
    return True, None


def transverse(f: SpaceMap, e: Entourage) -> bool:
    """No related pair with equal images except equal points."""
    if e.n != f.source.n:
        raise CarrierMismatch("entourage does not live on the map's source")
    assign = np.asarray(f.assign)
    eq = assign[:, None] == assign[None, :]
    off = e.rel & eq
    np.fill_diagonal(off, False)
    return not bool(off.any())


def _product_reachable(f: SpaceMap, step: Entourage):
    """States (x, x') with equal images reachable from the diagonal by
    synchronized steps with equal images; yields states in BFS order."""
    n = f.source.n
    assign = f.assign
    seen = {(x, x) for x in range(n)}
    queue = list(seen)
    order = sorted(seen)
    rel = step.rel
    while queue:
        nxt = []
        for x, xp in queue:
            cand = [int(v) for v in np.nonzero(rel[x])[0]]
            cand_p = [int(v) for v in np.nonzero(rel[xp])[0]]
            for y in cand:
                for yp in cand_p:
                    if assign[y] == assign[yp] and (y, yp) not in seen:
                        seen.add((y, yp))
                        nxt.append((y, yp))
                        order.append((y, yp))
        queue = nxt
    return order


def uniqueness_of_lifts(f: SpaceMap, e: Entourage) -> tuple[bool, tuple[int, int] | None]:
    """Exact check that equal-image equal-origin chains must agree."""
    for x, xp in _product_reachable(f, e):
        if x != xp:
            return False, (x, xp)
    return True, None


def c3_check(f: SpaceMap, e: Entourage, fine: Entourage) -> tuple[bool, tuple[int, int] | None]:
    """Equal-image fine chains from one origin stay e-close (exact)."""
    for x, xp in _product_reachable(f, fine):
        if not e.related(x, xp):
            return False, (x, xp)
    return True, None


def _chains_from(origin: int, e: Entourage, max_links: int):
    """All chains from origin with up to max_links links, in BFS order."""
    out = [(origin,)]
    frontier = [(origin,)]
    for _ in range(max_links):
        nxt = []
        for seq in frontier:
            for v in ball(e, seq[-1]):
                nxt.append(seq + (v,))
        out.extend(nxt)
        frontier = nxt
    return out


def c2_check(f: SpaceMap, e: Entourage, fine: Entourage, budget: SearchBudget | None = None) -> dict:
    """Search for a pair of fine chains violating approximate lift uniqueness.

    Returns {"status": "proved" | "refuted" | "unrefuted", ...}.  A genuine
    positive is only available in the decidable special case (injective map,
    fine scale inside e); otherwise the best honest answer is "no violation
    found at this budget".
    """
    budget = budget or DEFAULT_BUDGET
    if fine.issubset(e) and f.is_injective():
        return {"status": "proved", "note": "injective map with nested scales"}
    ff = image_under(f, fine)
    # pairs examined are the budgeted unit; every per-pair homotopy decision
    # gets a short leash so one undecidable pair cannot eat the whole search
    pair_cap = min(budget.states, 2500)
    per_pair = SearchBudget(
        states=min(400, budget.states),
        max_length=12,
        class_norm=budget.class_norm,
    )
    examined = 0
    max_links = 3
    for origin in range(f.source.n):
        groups: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        for seq in _chains_from(origin, fine, max_links):
            groups.setdefault(tuple(f(v) for v in seq), []).append(seq)
        for img, members in sorted(groups.items()):
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    a, b = members[i], members[j]
                    examined += 1
                    if examined > pair_cap:
                        return {"status": "unrefuted", "examined": examined - 1,
                                "note": "budget exhausted"}
                    up = e_homotopic(
                        Chain(f.source, fine, a), Chain(f.source, fine, b), e, per_pair
                    )
                    if up.is_no():
                        return {
                            "status": "refuted",
                            "witness": {"alpha": list(a), "beta": list(b),
                                        "obstruction": up.obstruction},
                            "examined": examined,
                        }
    # second phase: short chains with homotopic (not identical) images
    for origin in range(f.source.n):
        short = _chains_from(origin, fine, 2)
        for i in range(len(short)):
            for j in range(i + 1, len(short)):
                a, b = short[i], short[j]
                img_a = tuple(f(v) for v in a)
                img_b = tuple(f(v) for v in b)
                if img_a == img_b:
                    continue  # phase one covered identical images
                examined += 1
                if examined > pair_cap:
                    return {"status": "unrefuted", "examined": examined - 1,
                            "note": "budget exhausted"}
                down = e_homotopic(
                    Chain(f.target, ff, img_a), Chain(f.target, ff, img_b), ff, per_pair
                )
                if not down.is_yes():
                    continue
                up = e_homotopic(Chain(f.source, fine, a), Chain(f.source, fine, b), e, per_pair)
                if up.is_no():
                    return {
                        "status": "refuted",
                        "witness": {"alpha": list(a), "beta": list(b),
                                    "obstruction": up.obstruction},
                        "examined": examined,
                    }
    return {"status": "unrefuted", "examined": examined, "note": "no violation found"}


@dataclass
class CoverReport:
    """All per-scale and per-pair covering diagnostics for one map."""

    ladder_descr: list
    per_scale: list[dict]
    per_pair: list[dict]
    verdicts: dict
    implications: dict

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "kind": "cover_report",
            "ladder": self.ladder_descr,
            "per_scale": self.per_scale,
            "per_pair": self.per_pair,
            "verdicts": self.verdicts,
            "implications": self.implications,
        }


def uniform_cover_verdict(
    f: SpaceMap, ladder: ScaleLadder, budget: SearchBudget | None = None, threads: int = 1
) -> CoverReport:
    """Assemble every per-scale check and the ladder-level verdicts.

    "Uniform covering map at this ladder" asks that every scale has an
    image-structure witness, a fine-or-equal scale with chain lifting, and
    that some scale is transverse; the simplicial-cover verdict asks for a
    simplicial covering at the finest scale.  Everything is relative to the
    ladder that was supplied.
    """
    budget = budget or DEFAULT_BUDGET
    if ladder.n != f.source.n:
        raise CarrierMismatch("ladder does not live on the map's source")
    k = len(ladder)

    def scale_entry(i: int) -> dict:
        e = ladder[i]
        ok_ec, cx_ec = evenly_covers(f, e)
        ok_sc, cx_sc = is_simplicial_cover(f, e)
        ok_ul, wit_ul = uniqueness_of_lifts(f, e)
        gen = generates_at(f, e, ladder)
        return {
            "scale": ladder.describe(i),
            "transverse": transverse(f, e),
            "evenly_covers": ok_ec,
            "evenly_covers_counterexample": cx_ec,
            "simplicial_cover": ok_sc,
            "simplicial_cover_counterexample": cx_sc,
            "uniqueness_of_lifts": ok_ul,
            "uniqueness_witness": list(wit_ul) if wit_ul else None,
            "generates_witness": None if gen is None else ladder.describe(gen[0]),
        }

    def pair_entry(ij: tuple[int, int]) -> dict:
        i, j = ij
        ok_cl, cx_cl = chain_lifting_at(f, ladder[i], ladder[j])
        ok_c3, wit_c3 = c3_check(f, ladder[i], ladder[j])
        return {
            "scale": ladder.describe(i),
            "fine": ladder.describe(j),
            "chain_lifting": ok_cl,
            "chain_lifting_counterexample": cx_cl,
            "c3": ok_c3,
            "c3_witness": list(wit_c3) if wit_c3 else None,
            "c2": c2_check(f, ladder[i], ladder[j], budget),
        }

    pairs = [(i, j) for i in range(k) for j in range(i, k)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_scale = list(pool.map(scale_entry, range(k)))
            per_pair = list(pool.map(pair_entry, pairs))
    else:
        per_scale = [scale_entry(i) for i in range(k)]
        per_pair = [pair_entry(ij) for ij in pairs]

    generates_ok = all(s["generates_witness"] is not None for s in per_scale)
    lifting_ok = all(
        any(p["chain_lifting"] for p in per_pair if p["scale"] == ladder.describe(i))
        for i in range(k)
    )
    transverse_some = any(s["transverse"] for s in per_scale)
    ucm = generates_ok and lifting_ok and transverse_some
    simplicial_base = per_scale[-1]["simplicial_cover"]
    failing = []
    if not generates_ok:
        failing.append("generates_structure")
    if not lifting_ok:
        failing.append("chain_lifting")
    if not transverse_some:
        failing.append("transverse")
    if not simplicial_base:
        failing.append("simplicial_cover")

    implications = {
        "simplicial_implies_evenly": all(
            (not s["simplicial_cover"]) or s["evenly_covers"] for s in per_scale
        ),
        "lifting_squares_give_structure": _prop_29b(f, ladder, per_pair),
        "uniqueness_iff_transverse_per_scale": all(
            (not s["uniqueness_of_lifts"]) or s["transverse"] for s in per_scale
        ),
    }
    verdicts = {
        "uniform_covering_map_at_ladder": ucm,
        "simplicial_cover_base_at_ladder": simplicial_base,
        "failing": failing,
        "note": "verdicts are relative to the supplied ladder",
    }
    return CoverReport(ladder.to_json(), per_scale, per_pair, verdicts, implications)


def _prop_29b(f: SpaceMap, ladder: ScaleLadder, per_pair: list[dict]) -> bool:
    """Whenever D o D fits in E and chains lift at (D, F), the image of F
    squares into the image of E; recorded as a concrete per-triple check."""
    ok = True
    lifting = {
        (p["scale"], p["fine"]): p["chain_lifting"] for p in per_pair
    }
    for i, e in enumerate(ladder):
        fe = image_under(f, e)
        for j, d in enumerate(ladder):
            if j < i:
                continue
            if not compose(d, d).issubset(e):
                continue
            for t in range(j, len(ladder)):
                if not lifting.get((ladder.describe(j), ladder.describe(t))):
                    continue
                ffin = image_under(f, ladder[t])
                if not compose(ffin, ffin).issubset(fe):
                    ok = False
    return ok


def _paths_equal(space, entourage, s1, s2, budget) -> Trivalue:
    """Verdict-only comparison treating (x,) and (x, x) as the same path.

    Length-1 chains admit no moves, so the raw move calculus isolates them;
    for class identification we compare their two-point constant form.
    """
    a = s1 if len(s1) > 1 else (s1[0], s1[0])
    b = s2 if len(s2) > 1 else (s2[0], s2[0])
    return decide_homotopic(Chain(space, entourage, a), Chain(space, entourage, b), budget)


@dataclass
class CoverBall:
    """Bounded piece of the chain-class space over a basepoint.

    Vertices are homotopy classes of chains from the basepoint, stored as
    (endpoint, canonical witness); edges connect classes one step apart.
    Unproven identifications are never merged: Unknown comparisons keep
    vertices distinct and mark the ball approximate.
    """

    space: FiniteSpace
    entourage: Entourage
    basepoint: int
    radius: int
    vertices: list[tuple[int, tuple[int, ...]]]
    edges: list[tuple[int, int]]
    approximate: bool
    frontier: bool

    def fibers(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for cid, (endpoint, _) in enumerate(self.vertices):
            out.setdefault(endpoint, []).append(cid)
        return out

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "kind": "cover_ball",
            "basepoint": self.basepoint,
            "radius": self.radius,
            "vertices": [
                {"id": cid, "endpoint": ep, "witness": list(w)}
                for cid, (ep, w) in enumerate(self.vertices)
            ],
            "edges": [list(e) for e in self.edges],
            "fibers": {str(k): v for k, v in sorted(self.fibers().items())},
            "approximate": self.approximate,
            "frontier": self.frontier,
        }

    def to_dot(self) -> str:
        lines = ["graph cover_ball {"]
        for endpoint, cids in sorted(self.fibers().items()):
            label = self.space.labels[endpoint]
            lines.append(f'  subgraph "cluster_{label}" {{')
            lines.append(f'    label="{label}";')
            for cid in cids:
                lines.append(f'    v{cid} [label="{label}#{cid}"];')
            lines.append("  }")
        for a, b in self.edges:
            lines.append(f"  v{a} -- v{b};")
        lines.append("}")
        return "\n".join(lines)


def build_cover_ball(
    space: FiniteSpace,
    entourage: Entourage,
    basepoint: int,
    radius: int,
    budget: SearchBudget | None = None,
) -> CoverBall:
    """Grow chain classes from the constant chain, one step per layer.

    New chains are identified with an existing class only on a proven Yes;
    growth stops at the radius and the frontier flag says whether deeper
    layers were cut off.
    """
    budget = budget or DEFAULT_BUDGET
    if not (0 <= basepoint < space.n):
        raise ValidationError("basepoint out of range")
    if radius < 0:
        raise ValidationError("radius must be nonnegative")
    vertices: list[tuple[int, tuple[int, ...]]] = [(basepoint, (basepoint,))]
    by_endpoint: dict[int, list[int]] = {basepoint: [0]}
    edges: set[tuple[int, int]] = set()
    approximate = False
    layer = [0]
    last_new: list[int] = [0]
    for _ in range(radius):
        nxt: list[int] = []
        for cid in layer:
            endpoint, witness = vertices[cid]
            for q in ball(entourage, endpoint):
                if q == endpoint:
                    continue
                cand = canonicalize(witness + (q,))
                target = None
                for cid2 in by_endpoint.get(q, []):
                    verdict = _paths_equal(space, entourage, cand, vertices[cid2][1], budget)
                    if verdict.is_yes():
                        target = cid2
                        break
                    if verdict.is_unknown():
                        approximate = True
                if target is None:
                    target = len(vertices)
                    vertices.append((q, cand))
                    by_endpoint.setdefault(q, []).append(target)
                    nxt.append(target)
                edges.add((min(cid, target), max(cid, target)))
        layer = nxt
        last_new = nxt
        if not nxt:
            break
    if radius == 0:
        frontier = any(q != basepoint for q in ball(entourage, basepoint))
    else:
        frontier = bool(last_new)
    return CoverBall(
        space, entourage, basepoint, radius, vertices, sorted(edges), approximate, frontier
    )

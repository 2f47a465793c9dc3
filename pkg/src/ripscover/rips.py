"""Rips 2-skeletons, edge-path presentations, and exact first homology.

Only vertices, edges and triangles are ever built; everything the package
asks about loops factors through them.  Homology is computed from the
triangle relators in the non-forest-edge basis, with a sparse unit-pivot
phase feeding a small dense Smith form, so class vectors, representatives
and torsion are all exact.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CarrierMismatch, ChainError, ValidationError
from .snf import IntLattice, eliminate_unit_pivots, reduce_vector, smith_normal_form
from .space import Entourage, FiniteSpace


class RipsSkeleton:
    """2-skeleton of the clique complex of an entourage, plus a BFS forest."""

    __slots__ = (
        "space", "entourage", "edges", "triangles",
        "parent", "depth", "roots", "component",
        "edge_index", "gen_index", "generators", "_h1data",
    )

    def __init__(self, space: FiniteSpace, entourage: Entourage):
        if space.n != entourage.n:
            raise CarrierMismatch("space and entourage sizes differ")
        rel = entourage.rel
        n = space.n
        iu, ju = np.nonzero(np.triu(rel, k=1))
        edges = [(int(i), int(j)) for i, j in zip(iu, ju)]
        triangles = []
        for i in range(n):
            nbrs = np.nonzero(rel[i])[0]
            nbrs = nbrs[nbrs > i]
            if nbrs.size < 2:
                continue
            sub = rel[np.ix_(nbrs, nbrs)]
            for a, b in np.argwhere(np.triu(sub, k=1)):
                triangles.append((i, int(nbrs[a]), int(nbrs[b])))
        triangles.sort()

        parent = [-1] * n
        depth = [0] * n
        component = [-1] * n
        roots = []
        for start in range(n):
            if component[start] >= 0:
                continue
            comp = len(roots)
            roots.append(start)
            component[start] = comp
            queue = deque([start])
            while queue:
                v = queue.popleft()
                for w in np.nonzero(rel[v])[0]:
                    w = int(w)
                    if component[w] < 0:
                        component[w] = comp
                        parent[w] = v
                        depth[w] = depth[v] + 1
                        queue.append(w)

        edge_index = {e: k for k, e in enumerate(edges)}
        generators = [e for e in edges if parent[e[1]] != e[0] and parent[e[0]] != e[1]]
        gen_index = {e: k for k, e in enumerate(generators)}

        self.space = space
        self.entourage = entourage
        self.edges = edges
        self.triangles = triangles
        self.parent = parent
        self.depth = depth
        self.roots = roots
        self.component = component
        self.edge_index = edge_index
        self.generators = generators
        self.gen_index = gen_index
        self._h1data = None

    @property
    def n(self) -> int:
        return self.space.n

    def is_tree_edge(self, i: int, j: int) -> bool:
        return self.parent[j] == i or self.parent[i] == j

    def step_gen(self, u: int, v: int) -> tuple[int, int] | None:
        """Generator index and sign of the step u -> v, or None on tree edges."""
        e = (u, v) if u < v else (v, u)
        g = self.gen_index.get(e)
        if g is None:
            return None
        return g, (1 if u < v else -1)

    def tree_steps_to_root(self, v: int) -> list[tuple[int, int]]:
        steps = []
        while self.parent[v] != -1:
            steps.append((v, self.parent[v]))
            v = self.parent[v]
        return steps

    def fundamental_cycle_edges(self, gen: int) -> dict[tuple[int, int], int]:
        """Signed edge coefficients of the basis loop of one generator."""
        a, b = self.generators[gen]
        vec: dict[tuple[int, int], int] = {}

        def add_step(u, v):
            e = (u, v) if u < v else (v, u)
            s = 1 if u < v else -1
            nv = vec.get(e, 0) + s
            if nv:
                vec[e] = nv
            else:
                vec.pop(e, None)

        for u, v in reversed(self.tree_steps_to_root(a)):
            add_step(v, u)  # walk root -> a
        add_step(a, b)
        for u, v in self.tree_steps_to_root(b):
            add_step(u, v)  # walk b -> root
        return vec

    def h1_data(self) -> "_H1Data":
        if self._h1data is None:
            self._h1data = _H1Data(self)
        return self._h1data

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "n": self.n,
            "edges": [list(e) for e in self.edges],
            "triangles": [list(t) for t in self.triangles],
            "forest_parent": list(self.parent),
            "roots": list(self.roots),
        }


@lru_cache(maxsize=256)
def _skeleton(space: FiniteSpace, entourage: Entourage) -> RipsSkeleton:
    return RipsSkeleton(space, entourage)


def build_skeleton(space: FiniteSpace, entourage: Entourage) -> RipsSkeleton:
    """All off-diagonal related pairs and all 3-cliques, deterministically."""
    return _skeleton(space, entourage)


@dataclass(frozen=True)
class AbelianGroup:
    """Finitely generated abelian group as rank plus invariant factors."""

    rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValidationError("torsion factors must form a divisibility chain")
        if any(t < 2 for t in self.torsion):
            raise ValidationError("torsion factors must be >= 2")

    @property
    def dim(self) -> int:
        return self.rank + len(self.torsion)

    def is_trivial(self) -> bool:
        return self.dim == 0

    def __str__(self):
        if self.dim == 0:
            return "0"
        parts = []
        if self.rank == 1:
            parts.append("Z")
        elif self.rank > 1:
            parts.append(f"Z^{self.rank}")
        parts.extend(f"Z/{t}" for t in self.torsion)
        return " + ".join(parts)


class _H1Data:
    """Coordinates for H1 of a skeleton: class vectors and representatives."""

    def __init__(self, skel: RipsSkeleton):
        rows = []
        for i, j, k in skel.triangles:
            row: dict[int, int] = {}
            for u, v in ((i, j), (j, k), (k, i)):
                gs = skel.step_gen(u, v)
                if gs is None:
                    continue
                g, s = gs
                nv = row.get(g, 0) + s
                if nv:
                    row[g] = nv
                else:
                    row.pop(g, None)
            if row:
                rows.append(row)
        subs, core = eliminate_unit_pivots(rows)
        eliminated = {col for col, _, _ in subs}
        ngen = len(skel.generators)
        touched = sorted({c for r in core for c in r})
        untouched = [g for g in range(ngen) if g not in eliminated and g not in touched]

        mat = [[r.get(t, 0) for r in core] for t in touched]
        if touched:
            diag, left, left_inv = smith_normal_form(mat)
        else:
            diag, left, left_inv = [], [], []
        dfull = list(diag) + [0] * (len(touched) - len(diag))

        free_core = [i for i, d in enumerate(dfull) if d == 0]
        torsion_core = [i for i, d in enumerate(dfull) if d >= 2]

        self.skel = skel
        self.subs = subs
        self.touched = touched
        self.touched_pos = {t: i for i, t in enumerate(touched)}
        self.untouched = untouched
        self.left = left
        self.left_inv = left_inv
        self.free_core = free_core
        self.torsion_core = torsion_core
        self.torsion = tuple(dfull[i] for i in torsion_core)
        self.rank = len(untouched) + len(free_core)
        self.group = AbelianGroup(self.rank, self.torsion)

    def class_of(self, gen_vector: dict[int, int]) -> tuple[int, ...]:
        """Coordinates (free..., torsion...) of a cycle in generator form."""
        x = reduce_vector(gen_vector, self.subs)
        out = [x.get(g, 0) for g in self.untouched]
        if self.touched:
            xt = [x.get(t, 0) for t in self.touched]
            z = [sum(lv * xv for lv, xv in zip(lrow, xt)) for lrow in self.left]
            out.extend(z[i] for i in self.free_core)
            out.extend(z[i] % d for i, d in zip(self.torsion_core, self.torsion))
        return tuple(out)

    def representative(self, coord: int) -> dict[int, int]:
        """A generator-vector cycle whose class is the coord-th basis element."""
        nu = len(self.untouched)
        if coord < nu:
            return {self.untouched[coord]: 1}
        core_pos = coord - nu
        core_ids = self.free_core + self.torsion_core
        i = core_ids[core_pos]
        return {
            self.touched[t]: self.left_inv[t][i]
            for t in range(len(self.touched))
            if self.left_inv[t][i]
        }

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.group.dim


def h1(skel: RipsSkeleton) -> AbelianGroup:
    """First integral homology of the 2-skeleton (rank and invariant factors)."""
    return skel.h1_data().group


def loop_gen_vector(skel: RipsSkeleton, seq) -> dict[int, int]:
    vec: dict[int, int] = {}
    for u, v in zip(seq, seq[1:]):
        if u == v:
            continue
        if not skel.entourage.related(u, v):
            raise ChainError(f"step ({u},{v}) not related at this scale")
        gs = skel.step_gen(u, v)
        if gs is None:
            continue
        g, s = gs
        nv = vec.get(g, 0) + s
        if nv:
            vec[g] = nv
        else:
            vec.pop(g, None)
    return vec


def h1_class(skel: RipsSkeleton, seq) -> tuple[int, ...]:
    """Class coordinates of a closed vertex walk; all zeros iff nullhomologous."""
    seq = list(seq)
    if not seq:
        raise ChainError("empty walk")
    if seq[0] != seq[-1]:
        raise ChainError("walk is not closed")
    return skel.h1_data().class_of(loop_gen_vector(skel, seq))


@dataclass(frozen=True)
class Presentation:
    """Edge-path group presentation of one component of a skeleton."""

    basepoint: int
    generators: tuple[tuple[int, int], ...]
    relators: tuple[tuple[tuple[int, int], ...], ...]  # words of (generator, exponent)
    component_size: int

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "basepoint": self.basepoint,
            "generators": [list(g) for g in self.generators],
            "relators": [[[g, e] for g, e in word] for word in self.relators],
        }


def edge_path_presentation(skel: RipsSkeleton, basepoint: int) -> Presentation:
    """One generator per non-forest edge, one relator per triangle.

    Both are restricted to the basepoint's component and ordered
    lexicographically, so the presentation is reproducible.
    """
    if not (0 <= basepoint < skel.n):
        raise ValidationError(f"basepoint {basepoint} out of range")
    comp = skel.component[basepoint]
    gens = [e for e in skel.generators if skel.component[e[0]] == comp]
    local = {e: i for i, e in enumerate(gens)}
    relators = []
    for i, j, k in skel.triangles:
        if skel.component[i] != comp:
            continue
        word = []
        for u, v in ((i, j), (j, k), (k, i)):
            gs = skel.step_gen(u, v)
            if gs is None:
                continue
            g, s = gs
            word.append((local[skel.generators[g]], s))
        relators.append(tuple(word))
    size = sum(1 for c in skel.component if c == comp)
    return Presentation(basepoint, tuple(gens), tuple(relators), size)


@dataclass(frozen=True)
class H1Map:
    """Matrix of an inclusion-induced homology map in the two class bases."""

    domain: AbelianGroup
    codomain: AbelianGroup
    matrix: tuple[tuple[int, ...], ...]  # codomain.dim rows x domain.dim cols

    def apply(self, vec) -> tuple[int, ...]:
        if len(vec) != self.domain.dim:
            raise ValidationError("vector length mismatch")
        out = [sum(r * v for r, v in zip(row, vec)) for row in self.matrix]
        return _canonical(self.codomain, out)

    def compose(self, inner: "H1Map") -> "H1Map":
        """self o inner (apply inner first)."""
        if inner.codomain != self.domain:
            raise ValidationError("composition mismatch")
        cols = [self.apply(col) for col in zip(*inner.matrix)] if inner.domain.dim else []
        rows = tuple(tuple(c[r] for c in cols) for r in range(self.codomain.dim))
        return H1Map(inner.domain, self.codomain, rows)

    def image_lattice(self) -> IntLattice:
        """Image subgroup in codomain coordinates, torsion relations included."""
        m = self.codomain.dim
        vectors = [list(col) for col in zip(*self.matrix)] if self.domain.dim else []
        for i, d in enumerate(self.codomain.torsion):
            rel = [0] * m
            rel[self.codomain.rank + i] = d
            vectors.append(rel)
        return IntLattice.from_vectors(m, vectors)


def _canonical(group: AbelianGroup, vec) -> tuple[int, ...]:
    out = list(vec)
    for i, d in enumerate(group.torsion):
        out[group.rank + i] %= d
    return tuple(out)


def inclusion_h1_map(fine: RipsSkeleton, coarse: RipsSkeleton) -> H1Map:
    """Homology map induced by reading fine-scale cycles at a coarser scale."""
    if fine.space != coarse.space:
        raise CarrierMismatch("skeletons live on different spaces")
    if not fine.entourage.issubset(coarse.entourage):
        raise ValidationError("fine entourage is not contained in the coarse one")
    fdata = fine.h1_data()
    cdata = coarse.h1_data()
    cols = []
    for coord in range(fdata.group.dim):
        rep = fdata.representative(coord)
        edge_vec: dict[tuple[int, int], int] = {}
        for g, coef in rep.items():
            for e, s in fine.fundamental_cycle_edges(g).items():
                nv = edge_vec.get(e, 0) + coef * s
                if nv:
                    edge_vec[e] = nv
                else:
                    edge_vec.pop(e, None)
        cvec: dict[int, int] = {}
        for e, coef in edge_vec.items():
            g = coarse.gen_index.get(e)
            if g is not None:
                cvec[g] = cvec.get(g, 0) + coef
        cols.append(_canonical(cdata.group, cdata.class_of(cvec)))
    rows = tuple(tuple(col[r] for col in cols) for r in range(cdata.group.dim))
    return H1Map(fdata.group, cdata.group, rows)

"""Exact integer linear algebra: Smith form with transforms, Hermite lattices,
and sparse unit-pivot elimination for large relator systems.

Everything here works on plain Python ints, so results are exact at any size.
"""

from __future__ import annotations

import heapq


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (x, y, g) with x*a + y*b == g == gcd(a, b), g >= 0."""
    x, nx = 1, 0
    y, ny = 0, 1
    g, ng = a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


def identity_matrix(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    rows, inner = len(a), len(b)
    cols = len(b[0]) if inner else 0
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        ai = a[i]
        oi = out[i]
        for t in range(inner):
            c = ai[t]
            if c:
                bt = b[t]
                for j in range(cols):
                    oi[j] += c * bt[j]
    return out


def smith_normal_form(mat: list[list[int]]) -> tuple[list[int], list[list[int]], list[list[int]]]:
    """Diagonalize an integer matrix by unimodular row and column operations.

    Returns (diag, left, left_inv) where diag is the full invariant-factor
    diagonal (nonnegative, each dividing the next) and left * mat * C == D
    for some unimodular C that is not tracked.  left_inv is the inverse of
    left, so quotient-group coordinates z = left @ x have representatives
    given by the columns of left_inv.
    """
    m = len(mat)
    k = len(mat[0]) if m else 0
    a = [list(map(int, row)) for row in mat]
    left = identity_matrix(m)
    left_inv = identity_matrix(m)

    def row_swap(i, j):
        if i == j:
            return
        a[i], a[j] = a[j], a[i]
        left[i], left[j] = left[j], left[i]
        for r in range(m):
            left_inv[r][i], left_inv[r][j] = left_inv[r][j], left_inv[r][i]

    def row_neg(i):
        a[i] = [-v for v in a[i]]
        left[i] = [-v for v in left[i]]
        for r in range(m):
            left_inv[r][i] = -left_inv[r][i]

    def row_add(i, j, c):
        # row_i += c * row_j; inverse op on left_inv is col_j -= c * col_i
        ai, aj = a[i], a[j]
        for t in range(k):
            ai[t] += c * aj[t]
        li, lj = left[i], left[j]
        for t in range(m):
            li[t] += c * lj[t]
        for r in range(m):
            left_inv[r][j] -= c * left_inv[r][i]

    def col_swap(i, j):
        if i == j:
            return
        for row in a:
            row[i], row[j] = row[j], row[i]

    def col_add(i, j, c):
        for row in a:
            row[i] += c * row[j]

    t = 0
    limit = min(m, k)
    while t < limit:
        # locate a smallest nonzero entry in the trailing block
        piv = None
        best = None
        for i in range(t, m):
            for j in range(t, k):
                v = abs(a[i][j])
                if v and (best is None or v < best):
                    best = v
                    piv = (i, j)
                    if v == 1:
                        break
            if best == 1:
                break
        if piv is None:
            break
        row_swap(t, piv[0])
        col_swap(t, piv[1])
        while True:
            # clear column t with row ops
            dirty = False
            for i in range(m):
                if i != t and a[i][t]:
                    q = a[i][t] // a[t][t]
                    row_add(i, t, -q)
                    if a[i][t]:
                        row_swap(i, t)
                        dirty = True
            if dirty:
                continue
            # clear row t with column ops
            for j in range(k):
                if j != t and a[t][j]:
                    q = a[t][j] // a[t][t]
                    col_add(j, t, -q)
                    if a[t][j]:
                        col_swap(j, t)
                        dirty = True
            if dirty:
                continue
            # enforce divisibility of the trailing block by the pivot
            fix = None
            d = a[t][t]
            for i in range(t + 1, m):
                for j in range(t + 1, k):
                    if a[i][j] % d:
                        fix = i
                        break
                if fix is not None:
                    break
            if fix is None:
                break
            row_add(t, fix, 1)
        if a[t][t] < 0:
            row_neg(t)
        t += 1

    diag = [a[i][i] if i < k else 0 for i in range(limit)]
    return diag, left, left_inv


def snf_invariants(mat: list[list[int]]) -> list[int]:
    """Nonzero invariant factors of an integer matrix, divisibility-ordered."""
    diag, _, _ = smith_normal_form(mat)
    return [d for d in diag if d != 0]


class IntLattice:
    """A subgroup of Z^m kept as a Hermite-style row basis.

    Rows have strictly increasing pivot columns, positive pivots, and entries
    above each pivot reduced into [0, pivot).  Two equal subgroups always
    produce identical bases, so equality is comparison of the rows.
    """

    __slots__ = ("m", "rows", "_pivot_of_col")

    def __init__(self, m: int):
        self.m = m
        self.rows: list[list[int]] = []
        self._pivot_of_col: dict[int, int] = {}

    @classmethod
    def from_vectors(cls, m: int, vectors) -> "IntLattice":
        lat = cls(m)
        for v in vectors:
            lat.add(v)
        lat.reduce()
        return lat

    def add(self, vec) -> None:
        vec = list(map(int, vec))
        if len(vec) != self.m:
            raise ValueError("vector length mismatch")
        for j in range(self.m):
            if not vec[j]:
                continue
            p = self._pivot_of_col.get(j)
            if p is None:
                where = 0
                while where < len(self.rows) and self._pivot_col(self.rows[where]) < j:
                    where += 1
                self.rows.insert(where, vec)
                self._reindex()
                return
            row = self.rows[p]
            aa, bb = row[j], vec[j]
            if bb % aa == 0:
                q = bb // aa
                for jj in range(j, self.m):
                    vec[jj] -= q * row[jj]
            else:
                x, y, g = xgcd(aa, bb)
                ag, bg = aa // g, bb // g
                for jj in range(j, self.m):
                    rjj, vjj = row[jj], vec[jj]
                    row[jj] = x * rjj + y * vjj
                    vec[jj] = -bg * rjj + ag * vjj

    @staticmethod
    def _pivot_col(row) -> int:
        for j, v in enumerate(row):
            if v:
                return j
        return len(row)

    def _reindex(self) -> None:
        self._pivot_of_col = {self._pivot_col(r): i for i, r in enumerate(self.rows)}

    def reduce(self) -> None:
        """Canonicalize: positive pivots, above-pivot entries in [0, pivot)."""
        for i, row in enumerate(self.rows):
            j = self._pivot_col(row)
            if row[j] < 0:
                self.rows[i] = [-v for v in row]
        for i in range(len(self.rows) - 1, -1, -1):
            row = self.rows[i]
            j = self._pivot_col(row)
            for above in range(i):
                q = self.rows[above][j] // row[j]
                if q:
                    self.rows[above] = [u - q * v for u, v in zip(self.rows[above], row)]
        self._reindex()

    def contains(self, vec) -> bool:
        vec = list(map(int, vec))
        for j in range(self.m):
            if not vec[j]:
                continue
            p = self._pivot_of_col.get(j)
            if p is None:
                return False
            row = self.rows[p]
            if vec[j] % row[j]:
                return False
            q = vec[j] // row[j]
            for jj in range(j, self.m):
                vec[jj] -= q * row[jj]
        return True

    def issubset(self, other: "IntLattice") -> bool:
        return all(other.contains(r) for r in self.rows)

    def is_trivial(self) -> bool:
        return not self.rows

    def __eq__(self, other) -> bool:
        return isinstance(other, IntLattice) and self.m == other.m and self.rows == other.rows

    def __hash__(self):
        return hash((self.m, tuple(tuple(r) for r in self.rows)))

    def basis(self) -> list[list[int]]:
        return [r[:] for r in self.rows]


def eliminate_unit_pivots(rows: list[dict[int, int]]):
    """Sparse Gauss phase over Z using only +-1 pivots.

    rows is a list of {column: coefficient} dicts (consumed logically, not
    mutated).  Returns (subs, core) where subs is the ordered list of
    substitution steps (col, coef, row_snapshot) that eliminated one column
    each, and core is the list of surviving nonzero rows that had no unit
    entry left.  Replaying subs on any integer vector reduces it modulo the
    row space: for each step, x -= x[col] * coef * row_snapshot.
    """
    live: dict[int, dict[int, int]] = {}
    col_rows: dict[int, set[int]] = {}
    for rid, row in enumerate(rows):
        row = {c: v for c, v in row.items() if v}
        if not row:
            continue
        live[rid] = row
        for c in row:
            col_rows.setdefault(c, set()).add(rid)

    version = dict.fromkeys(live, 0)
    heap: list[tuple[int, int, int]] = []
    for rid, row in live.items():
        heapq.heappush(heap, (len(row), rid, 0))

    subs: list[tuple[int, int, dict[int, int]]] = []

    def touch(rid):
        version[rid] += 1
        heapq.heappush(heap, (len(live[rid]), rid, version[rid]))

    while heap:
        _, rid, ver = heapq.heappop(heap)
        if rid not in live or version[rid] != ver:
            continue
        row = live[rid]
        units = [c for c, v in row.items() if v == 1 or v == -1]
        if not units:
            continue  # revisited if the row changes later
        col = min(units, key=lambda c: (len(col_rows[c]), c))
        coef = row[col]
        snapshot = dict(row)
        subs.append((col, coef, snapshot))
        # remove pivot row from the structures
        del live[rid]
        for c in row:
            col_rows[c].discard(rid)
        # eliminate col from every other row
        for rid2 in list(col_rows.get(col, ())):
            row2 = live[rid2]
            factor = row2[col] * coef
            for c, v in snapshot.items():
                nv = row2.get(c, 0) - factor * v
                if nv:
                    if c not in row2:
                        col_rows.setdefault(c, set()).add(rid2)
                    row2[c] = nv
                else:
                    if c in row2:
                        del row2[c]
                        col_rows[c].discard(rid2)
            if row2:
                touch(rid2)
            else:
                del live[rid2]
        col_rows.pop(col, None)

    core = [live[rid] for rid in sorted(live)]
    return subs, core


def reduce_vector(vec: dict[int, int], subs) -> dict[int, int]:
    """Apply recorded substitution steps to a sparse integer vector."""
    x = {c: v for c, v in vec.items() if v}
    for col, coef, row in subs:
        c0 = x.get(col)
        if not c0:
            continue
        factor = c0 * coef
        for c, v in row.items():
            nv = x.get(c, 0) - factor * v
            if nv:
                x[c] = nv
            else:
                x.pop(c, None)
    return x

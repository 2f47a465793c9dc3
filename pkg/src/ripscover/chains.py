"""Chain calculus at a scale: validity, moves, certificates, and
three-valued homotopy decisions.

A chain is a vertex walk whose consecutive pairs are related at the scale.
Interior vertices may be inserted or deleted when they span a triangle with
their neighbors; endpoints never move.  Homotopy questions are answered
with an honest verdict shape: Yes carries a replayable move certificate,
No carries an obstruction that re-verifies independently, Unknown reports
the budget that ran out.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateError, ChainError, MoveError, ValidationError
from .rips import build_skeleton, h1_class
from .space import Entourage, FiniteSpace, compose, space_from_json


@dataclass(frozen=True)
class Insert:
    pos: int
    vertex: int


@dataclass(frozen=True)
class Delete:
    pos: int


Move = Insert | Delete


@dataclass(frozen=True)
class SearchBudget:
    """Explicit bounds for homotopy searches; the move graph is infinite."""

    states: int = 50_000
    max_length: int | None = None  # default 4 * n, resolved per space
    class_norm: int = 8

    def resolved_length(self, n: int) -> int:
        return self.max_length if self.max_length is not None else 4 * n


DEFAULT_BUDGET = SearchBudget()


@dataclass(frozen=True)
class Chain:
    """A vertex walk valid at one scale."""

    space: FiniteSpace
    entourage: Entourage
    seq: tuple[int, ...]

    @property
    def start(self) -> int:
        return self.seq[0]

    @property
    def end(self) -> int:
        return self.seq[-1]

    def __len__(self):
        return len(self.seq)


def validate_chain(space: FiniteSpace, entourage: Entourage, seq) -> Chain:
    """Check every link; failures report the first offending position."""
    seq = tuple(int(v) for v in seq)
    if not seq:
        raise ChainError("empty sequence")
    if space.n != entourage.n:
        raise ChainError("space and entourage sizes differ")
    for v in seq:
        if not (0 <= v < space.n):
            raise ChainError(f"vertex {v} out of range")
    for i, (u, v) in enumerate(zip(seq, seq[1:])):
        if not entourage.related(u, v):
            raise ChainError(f"link {i}: pair ({u},{v}) not related at this scale", position=i)
    return Chain(space, entourage, seq)


def apply_move(chain: Chain, move: Move) -> Chain:
    """Insert or delete one interior vertex under the triangle condition."""
    seq = chain.seq
    rel = chain.entourage
    if isinstance(move, Insert):
        i, v = move.pos, move.vertex
        if not (0 < i <= len(seq) - 1):
            raise MoveError(f"insert position {i} would move an endpoint")
        if not (0 <= v < chain.space.n):
            raise MoveError(f"vertex {v} out of range")
        if not (rel.related(seq[i - 1], v) and rel.related(v, seq[i])):
            raise MoveError(f"insert of {v} at {i} breaks the triangle condition")
        return Chain(chain.space, chain.entourage, seq[:i] + (v,) + seq[i:])
    if isinstance(move, Delete):
        i = move.pos
        if not (0 < i < len(seq) - 1):
            raise MoveError(f"delete position {i} would move an endpoint")
        if not rel.related(seq[i - 1], seq[i + 1]):
            raise MoveError(f"delete at {i} leaves an unrelated pair ({seq[i - 1]},{seq[i + 1]})")
        return Chain(chain.space, chain.entourage, seq[:i] + seq[i + 1:])
    raise MoveError(f"unknown move {move!r}")


def concat(c: Chain, d: Chain) -> Chain:
    if c.entourage != d.entourage:
        raise ChainError("chains live at different scales")
    if c.end != d.start:
        raise ChainError(f"cannot concatenate: {c.end} != {d.start}")
    return Chain(c.space, c.entourage, c.seq + d.seq[1:])


def reverse(c: Chain) -> Chain:
    return Chain(c.space, c.entourage, tuple(reversed(c.seq)))


def edge_seq(x: int, y: int) -> tuple[int, ...]:
    """The one-edge walk from x to y; constant walk when x == y."""
    return (x,) if x == y else (x, y)


def canonicalize(seq: tuple[int, ...]) -> tuple[int, ...]:
    """Collapse consecutive duplicates; never below length 2 for long inputs.

    Length-1 chains admit no moves at all, so a fully constant chain of
    length >= 2 canonicalizes to the two-point constant walk instead of the
    singleton.
    """
    out = [seq[0]]
    for v in seq[1:]:
        if v != out[-1]:
            out.append(v)
    if len(out) == 1 and len(seq) >= 2:
        out.append(out[0])
    return tuple(out)


@dataclass(frozen=True)
class HomotopyCertificate:
    """A replayable move sequence transforming one chain into another."""

    space: FiniteSpace
    entourage: Entourage
    start: tuple[int, ...]
    moves: tuple[Move, ...]
    end: tuple[int, ...]

    def replay(self) -> Chain:
        """Re-apply every move, checking legality; returns the final chain."""
        chain = validate_chain(self.space, self.entourage, self.start)
        for m in self.moves:
            try:
                chain = apply_move(chain, m)
            except MoveError as e:
                raise CertificateError(f"illegal move {m!r}: {e}") from e
        if chain.seq != tuple(self.end):
            raise CertificateError("certificate does not end at the declared chain")
        return chain

    def to_json(self) -> dict:
        ent = {"n": self.entourage.n, "pairs": [list(p) for p in self.entourage.pairs()]}
        if "eps" in self.entourage.meta:
            ent["eps"] = self.entourage.meta["eps"]
        return {
            "schema": 1,
            "kind": "homotopy_certificate",
            "space": self.space.to_json(),
            "entourage": ent,
            "start": list(self.start),
            "moves": [
                ["insert", m.pos, m.vertex] if isinstance(m, Insert) else ["delete", m.pos]
                for m in self.moves
            ],
            "end": list(self.end),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "HomotopyCertificate":
        try:
            if doc.get("kind") != "homotopy_certificate":
                raise CertificateError("not a homotopy certificate document")
            space = space_from_json(doc["space"])
            ent = doc["entourage"]
            entourage = Entourage.from_pairs(int(ent["n"]), [tuple(p) for p in ent["pairs"]])
            moves = []
            for m in doc["moves"]:
                if m[0] == "insert":
                    moves.append(Insert(int(m[1]), int(m[2])))
                elif m[0] == "delete":
                    moves.append(Delete(int(m[1])))
                else:
                    raise CertificateError(f"unknown move kind {m[0]!r}")
            return cls(space, entourage, tuple(doc["start"]), tuple(moves), tuple(doc["end"]))
        except (KeyError, IndexError, TypeError, ValidationError) as e:
            raise CertificateError(f"malformed certificate: {e}") from e


@dataclass(frozen=True)
class Trivalue:
    """Verdict of a semi-decidable question: yes / no / unknown."""

    kind: str  # "yes" | "no" | "unknown"
    certificate: HomotopyCertificate | None = None
    obstruction: dict | None = None
    stats: dict = field(default_factory=dict)

    def is_yes(self) -> bool:
        return self.kind == "yes"

    def is_no(self) -> bool:
        return self.kind == "no"

    def is_unknown(self) -> bool:
        return self.kind == "unknown"

    def to_json(self) -> dict:
        doc = {"verdict": self.kind}
        if self.certificate is not None:
            doc["certificate"] = self.certificate.to_json()
        if self.obstruction is not None:
            doc["obstruction"] = self.obstruction
        if self.stats:
            doc["stats"] = self.stats
        return doc


def _collapse_moves(seq: tuple[int, ...]) -> tuple[list[Move], tuple[int, ...]]:
    """Moves deleting consecutive duplicates down to the canonical form."""
    moves: list[Move] = []
    work = list(seq)
    i = 1
    while i < len(work):
        if work[i] != work[i - 1]:
            i += 1
            continue
        if len(work) == 2:
            break  # the two-point constant walk admits no deletes
        if i < len(work) - 1:
            moves.append(Delete(i))
            del work[i]
        else:
            moves.append(Delete(i - 1))
            del work[i - 1]
            i = max(i - 1, 1)
    return moves, tuple(work)


def _expand_moves(canonical: tuple[int, ...], target: tuple[int, ...]) -> list[Move]:
    """Duplicate-insert moves rebuilding `target` from its canonical form."""
    moves: list[Move] = []
    work = list(canonical)
    pos = 0
    while len(work) < len(target):
        if pos < len(work) and work[pos] == target[pos]:
            pos += 1
            continue
        if pos >= len(work):
            # remaining targets duplicate the final vertex
            i = len(work) - 1
            moves.append(Insert(i, target[pos]))
            work.insert(i, target[pos])
        else:
            moves.append(Insert(pos, target[pos]))
            work.insert(pos, target[pos])
            pos += 1
    if tuple(work) != tuple(target):
        raise MoveError("expansion failed to rebuild the target chain")
    return moves


def _neighbors(seq: tuple[int, ...], ent: Entourage, max_len: int):
    """Canonical-state neighbors as (moves, new_canonical_state) pairs."""
    rel = ent.rel
    out = []
    truncated = False
    L = len(seq)
    for i in range(1, L - 1):
        if rel[seq[i - 1], seq[i + 1]]:
            moves = [Delete(i)]
            new = seq[:i] + seq[i + 1:]
            if 0 < i < len(new) and new[i - 1] == new[i]:
                # the deletion created one duplicate pair; collapse it
                j = i if 0 < i < len(new) - 1 else i - 1
                if 0 < j < len(new) - 1:
                    moves.append(Delete(j))
                    new = new[:j] + new[j + 1:]
            out.append((moves, new))
    if L + 1 <= max_len:
        for i in range(1, L):
            a, b = seq[i - 1], seq[i]
            for v in np.nonzero(rel[a] & rel[b])[0]:
                v = int(v)
                if v != a and v != b:
                    out.append(([Insert(i, v)], seq[:i] + (v,) + seq[i:]))
    else:
        truncated = True
    return out, truncated


def _invert_edge(prev: tuple[int, ...], moves: list[Move]) -> list[Move]:
    """Inverse move list: transforms the edge's result back into `prev`."""
    inv: list[Move] = []
    states = [prev]
    cur = prev
    for m in moves:
        if isinstance(m, Insert):
            cur = cur[:m.pos] + (m.vertex,) + cur[m.pos:]
        else:
            cur = cur[:m.pos] + cur[m.pos + 1:]
        states.append(cur)
    for m, before in zip(reversed(moves), reversed(states[:-1])):
        if isinstance(m, Insert):
            inv.append(Delete(m.pos))
        else:
            inv.append(Insert(m.pos, before[m.pos]))
    return inv


def decide_homotopic(c: Chain, d: Chain, budget: SearchBudget | None = None) -> Trivalue:
    """Are two same-endpoint chains homotopic relative their endpoints?

    The homology obstruction is checked first (cheap and sound); search over
    the canonical move graph runs only when it vanishes.  Yes always carries
    a certificate that replays; a nonzero obstruction yields No; otherwise
    the spent budget is reported as Unknown.
    """
    budget = budget or DEFAULT_BUDGET
    if c.space != d.space or c.entourage != d.entourage:
        raise ChainError("chains must share a space and scale")
    if c.start != d.start or c.end != d.end:
        raise ChainError("endpoint mismatch: rel-endpoint homotopy needs equal endpoints")
    ent = c.entourage
    if c.seq == d.seq:
        return Trivalue("yes", certificate=HomotopyCertificate(c.space, ent, c.seq, (), d.seq))

    skel = build_skeleton(c.space, ent)
    loop = c.seq + tuple(reversed(d.seq))[1:]
    obstruction = h1_class(skel, loop)
    if any(obstruction):
        return Trivalue(
            "no",
            obstruction={"kind": "h1_class", "vector": list(obstruction)},
        )

    cc = canonicalize(c.seq)
    dd = canonicalize(d.seq)
    max_len = max(budget.resolved_length(c.space.n), len(cc), len(dd))

    pre_moves, _ = _collapse_moves(c.seq)
    post_moves = _expand_moves(dd, d.seq)

    def finish(path_moves: list[Move]) -> Trivalue:
        cert = HomotopyCertificate(c.space, ent, c.seq, tuple(pre_moves + path_moves + post_moves), d.seq)
        if __debug__:
            cert.replay()
        return Trivalue("yes", certificate=cert)

    if cc == dd:
        return finish([])

    fwd: dict[tuple[int, ...], tuple | None] = {cc: None}
    bwd: dict[tuple[int, ...], tuple | None] = {dd: None}
    fq = deque([cc])
    bq = deque([dd])
    expanded = 0
    truncated_any = False

    def build_path(meet: tuple[int, ...]) -> list[Move]:
        fpath: list[Move] = []
        state = meet
        back = []
        while fwd[state] is not None:
            prev, moves = fwd[state]
            back.append(moves)
            state = prev
        for moves in reversed(back):
            fpath.extend(moves)
        state = meet
        while bwd[state] is not None:
            prev, moves = bwd[state]
            fpath.extend(_invert_edge(prev, moves))
            state = prev
        return fpath

    while fq or bq:
        if expanded >= budget.states:
            return Trivalue("unknown", stats={
                "states_expanded": expanded, "max_length": max_len,
                "reason": "state budget exhausted",
            })
        # expand the smaller live frontier; an exhausted side keeps serving
        # as a target set for the other one
        if fq and (not bq or len(fq) <= len(bq)):
            queue, seen, other = fq, fwd, bwd
        else:
            queue, seen, other = bq, bwd, fwd
        for _ in range(len(queue)):
            state = queue.popleft()
            expanded += 1
            neigh, trunc = _neighbors(state, ent, max_len)
            truncated_any = truncated_any or trunc
            for moves, new in neigh:
                if new in seen:
                    continue
                seen[new] = (state, moves)
                if new in other:
                    return finish(build_path(new))
                queue.append(new)
            if expanded >= budget.states:
                break
    return Trivalue("unknown", stats={
        "states_expanded": expanded,
        "max_length": max_len,
        "reason": "frontier exhausted below length bound" if not truncated_any
        else "frontier exhausted; growth truncated by length bound",
    })


def e_homotopic(c: Chain, d: Chain, entourage: Entourage, budget: SearchBudget | None = None) -> Trivalue:
    """Endpoint-relaxed homotopy at a scale: conjugate by the connecting edges.

    Chains valid at finer scales are re-read at `entourage`; unrelated
    endpoint pairs are a legitimate No, not an error.
    """
    if c.space != d.space:
        raise ChainError("chains live on different spaces")
    cc = validate_chain(c.space, entourage, c.seq)
    dd = validate_chain(d.space, entourage, d.seq)
    if not entourage.related(cc.start, dd.start) or not entourage.related(cc.end, dd.end):
        bad = (cc.start, dd.start) if not entourage.related(cc.start, dd.start) else (cc.end, dd.end)
        return Trivalue("no", obstruction={"kind": "endpoints", "pair": list(bad)})
    tseq = dd.seq if cc.start == dd.start else (cc.start,) + dd.seq
    if dd.end != cc.end:
        tseq = tseq + (cc.end,)
    target = Chain(c.space, entourage, tseq)
    return decide_homotopic(cc, target, budget)


def is_short(c: Chain, entourage: Entourage, budget: SearchBudget | None = None) -> Trivalue:
    """Is the chain's class at this scale just the edge between its endpoints?"""
    cc = validate_chain(c.space, entourage, c.seq)
    x, y = cc.start, cc.end
    if not entourage.related(x, y):
        return Trivalue("no", obstruction={"kind": "endpoints", "pair": [x, y]})
    target = Chain(c.space, entourage, edge_seq(x, y))
    return decide_homotopic(cc, target, budget)


def close_chains_certificate(c: Chain, d: Chain, entourage: Entourage) -> HomotopyCertificate:
    """Certificate at the squared scale joining two pointwise-close chains.

    Interleaves the two walks and then drops the first one; every move is
    legal at the composed scale, so this is constructive and never searches.
    """
    cc = validate_chain(c.space, entourage, c.seq)
    dd = validate_chain(d.space, entourage, d.seq)
    if len(cc.seq) != len(dd.seq):
        raise ChainError("chains must have equal length")
    if cc.start != dd.start or cc.end != dd.end:
        raise ChainError("chains must share endpoints")
    for i, (u, v) in enumerate(zip(cc.seq, dd.seq)):
        if not entourage.related(u, v):
            raise ChainError(f"chains are not pointwise close at {i}: ({u},{v})", position=i)
    e2 = compose(entourage, entourage)
    if cc.seq == dd.seq:
        return HomotopyCertificate(c.space, e2, cc.seq, (), dd.seq)
    k = len(cc.seq) - 1
    moves: list[Move] = []
    for i in range(1, k):
        moves.append(Insert(2 * i, dd.seq[i]))
    for i in range(1, k):
        moves.append(Delete(i))
    cert = HomotopyCertificate(c.space, e2, cc.seq, tuple(moves), dd.seq)
    cert.replay()
    return cert


def certificate_from_file(path: str) -> HomotopyCertificate:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise CertificateError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise CertificateError("certificate file must hold a json object")
    return HomotopyCertificate.from_json(doc)

"""Relational refinement, bisimilarity, and minimization.

The refinement operator relates two states when every child of one is
related to some child of the other and vice versa.  Its greatest fixed
point is computed both by naive iteration from the total relation (the
oracle) and by partition refinement with a splitter queue (the engine);
the two must agree on every finite system.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Mapping

from .transition import TransitionSystem, TransitionError

Relation = frozenset


def _check_relation(ts: TransitionSystem, rel) -> frozenset:
    rel = frozenset(rel)
    for a, b in rel:
        if a not in ts.states or b not in ts.states:
            raise TransitionError(f"relation endpoint ({a!r}, {b!r}) is not a state pair")
    return rel


def phi_step(ts: TransitionSystem, rel: Iterable[tuple[str, str]]) -> frozenset:
    """One refinement step: keep (a, b) iff every successor of a is related
    to some successor of b, and vice versa (same orientation)."""
    rel = _check_relation(ts, rel)
    related_to = {}
    related_from = {}
    for x, y in rel:
        related_to.setdefault(x, set()).add(y)
        related_from.setdefault(y, set()).add(x)
    out = set()
    states = sorted(ts.states)
    for a in states:
        sa = ts.succ(a)
        for b in states:
            sb = ts.succ(b)
            fwd = all(not related_to.get(x, set()).isdisjoint(sb) for x in sa)
            if not fwd:
                continue
            bwd = all(not related_from.get(y, set()).isdisjoint(sa) for y in sb)
            if bwd:
                out.add((a, b))
    return frozenset(out)


def total_relation(ts: TransitionSystem) -> frozenset:
    return frozenset((a, b) for a in ts.states for b in ts.states)


def identity_relation(ts: TransitionSystem) -> frozenset:
    return frozenset((a, a) for a in ts.states)


def check_witness(ts: TransitionSystem, rel: Iterable[tuple[str, str]]) -> bool:
    """Is the relation a bisimulation witness, i.e. contained in its own
    refinement?  The identity is not adjoined; close the relation
    explicitly if reflexivity is wanted."""
    rel = _check_relation(ts, rel)
    return rel <= phi_step(ts, rel)


def stratified_equiv(ts: TransitionSystem, a: str, b: str, k: int) -> bool:
    """Membership of (a, b) in the k-th refinement of the total relation."""
    for q in (a, b):
        if q not in ts.states:
            raise TransitionError(f"unknown state: {q!r}")
    rel = total_relation(ts)
    for _ in range(k):
        nxt = phi_step(ts, rel)
        if nxt == rel:
            break
        rel = nxt
    return (a, b) in rel


class Partition:
    """Partition of a state set; block ids are 0..k-1 ordered by each
    block's smallest member."""

    def __init__(self, block_of: Mapping[str, int]):
        groups: dict[int, set[str]] = {}
        for q, i in block_of.items():
            groups.setdefault(i, set()).add(q)
        ordered = sorted(groups.values(), key=lambda g: min(g))
        self._blocks = tuple(frozenset(g) for g in ordered)
        self._block_of = {q: i for i, g in enumerate(self._blocks) for q in g}

    @property
    def block_of(self) -> dict[str, int]:
        return dict(self._block_of)

    def blocks(self) -> tuple[frozenset[str], ...]:
        return self._blocks

    def block(self, q: str) -> int:
        return self._block_of[q]

    def same(self, a: str, b: str) -> bool:
        return self._block_of[a] == self._block_of[b]

    def as_relation(self) -> frozenset:
        return frozenset((a, b) for g in self._blocks for a in g for b in g)

    def __len__(self):
        return len(self._blocks)

    def __eq__(self, other):
        return isinstance(other, Partition) and self._blocks == other._blocks

    def __hash__(self):
        return hash(self._blocks)

    def __repr__(self):
        return f"Partition({len(self._blocks)} blocks)"


def format_partition(p: Partition) -> str:
    lines = []
    for i, g in enumerate(p.blocks()):
        lines.append(f"block {i}: {' '.join(sorted(g))}")
    return "\n".join(lines) + "\n"


def parse_relation(text: str) -> frozenset:
    """Parse `a b` pair lines."""
    pairs = set()
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            from .signatures import ParseError

            raise ParseError(f"expected `a b`, got {line!r}", lineno)
        pairs.add((parts[0], parts[1]))
    return frozenset(pairs)


def relation_to_partition(ts: TransitionSystem, rel) -> Partition:
    """Partition induced by an equivalence relation given as a pair set."""
    ids = {}
    for q in sorted(ts.states):
        if q in ids:
            continue
        ids[q] = len(ids)
        for r in sorted(ts.states):
            if (q, r) in rel:
                ids.setdefault(r, ids[q])
    return Partition(ids)


def naive_bisimilarity(ts: TransitionSystem) -> Partition:
    """Oracle: iterate refinement from the total relation to stability.

    Stabilization within |states| steps is a theorem for finite systems;
    exceeding the cap means the implementation is broken.
    """
    rel = total_relation(ts)
    cap = max(1, len(ts.states))
    for _ in range(cap + 1):
        nxt = phi_step(ts, rel)
        if nxt == rel:
            return relation_to_partition(ts, rel)
        rel = nxt
    raise AssertionError("refinement failed to stabilize within the state bound")


def bisimilarity(ts: TransitionSystem) -> Partition:
    """Coarsest refinement-stable partition, by splitter-queue refinement."""
    states = sorted(ts.states)
    if not states:
        return Partition({})
    blocks: dict[int, frozenset[str]] = {0: frozenset(states)}
    block_of = {q: 0 for q in states}
    next_id = 1
    queue: deque[frozenset[str]] = deque([blocks[0]])
    while queue:
        splitter = queue.popleft()
        hits = {q for q in states if not ts.succ(q).isdisjoint(splitter)}
        for bid in sorted(blocks):
            members = blocks[bid]
            inside = members & hits
            if inside and inside != members:
                outside = members - inside
                blocks[bid] = inside
                blocks[next_id] = outside
                for q in outside:
                    block_of[q] = next_id
                next_id += 1
                queue.append(inside)
                queue.append(outside)
    return Partition(block_of)


def minimize(ts: TransitionSystem, root: str) -> tuple[TransitionSystem, str]:
    """Quotient by bisimilarity, restricted to blocks reachable from the
    root's block.  Quotient states are named by each block's smallest
    member."""
    if root not in ts.states:
        raise TransitionError(f"unknown state: {root!r}")
    part = bisimilarity(ts)
    rep = {i: min(g) for i, g in enumerate(part.blocks())}
    block_succ = {
        i: frozenset(part.block(r) for r in ts.succ(rep[i])) for i in rep
    }
    reachable = set()
    todo = [part.block(root)]
    while todo:
        i = todo.pop()
        if i in reachable:
            continue
        reachable.add(i)
        todo.extend(block_succ[i])
    succ = {rep[i]: {rep[j] for j in block_succ[i]} for i in reachable}
    return TransitionSystem(succ, root=rep[part.block(root)]), rep[part.block(root)]


def behavior_index(ts: TransitionSystem, q: str, n: int) -> tuple:
    """Canonical code of the state in the n-th terminal-chain approximant:
    level 0 is a shared constant, level i+1 the sorted set of successor
    codes at level i."""
    if q not in ts.states:
        raise TransitionError(f"unknown state: {q!r}")
    if n < 0:
        raise ValueError("level must be >= 0")
    codes: dict[str, tuple] = {s: () for s in ts.states}
    for _ in range(n):
        codes = {
            s: tuple(sorted(set(codes[r] for r in ts.succ(s)))) for s in ts.states
        }
    return codes[q]

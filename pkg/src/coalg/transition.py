"""Finitely branching transition systems and their behavior trees.

Behavior trees (`ETree`) are unordered and may carry duplicate children
(pre-quotient multisets); extensional trees are the duplicate-free ones.
All ETrees are hash-consed: structurally equal trees are the same object,
so isomorphism checks and set membership are O(1) even when deep
unfoldings share subtrees heavily.
"""

from __future__ import annotations

from functools import cmp_to_key, lru_cache
from typing import Iterable, Mapping

from .signatures import ParseError


class TransitionError(ValueError):
    pass


class TransitionSystem:
    """Finite coalgebra for the finite-powerset functor: states with
    successor sets.  Immutable and hashable."""

    def __init__(self, succ: Mapping[str, Iterable[str]], root: str | None = None):
        table = {q: frozenset(v) for q, v in succ.items()}
        states = frozenset(table)
        for q, targets in table.items():
            stray = targets - states
            if stray:
                raise TransitionError(f"state {q!r} has unknown successors {sorted(stray)}")
        if root is not None and root not in states:
            raise TransitionError(f"root {root!r} is not a state")
        self._succ = table
        self._states = states
        self.root = root
        self._key = (tuple(sorted((q, tuple(sorted(v))) for q, v in table.items())), root)

    @property
    def states(self) -> frozenset[str]:
        return self._states

    def succ(self, q: str) -> frozenset[str]:
        try:
            return self._succ[q]
        except KeyError:
            raise TransitionError(f"unknown state: {q!r}") from None

    def items(self):
        return sorted(self._succ.items())

    def __eq__(self, other):
        return isinstance(other, TransitionSystem) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"TransitionSystem({len(self._states)} states, root={self.root!r})"


def parse_transition_system(text: str) -> TransitionSystem:
    """Parse `state: succ1 succ2 ...` lines plus an optional `root state`."""
    succ: dict[str, list[str]] = {}
    root = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("root"):
            rest = line[4:].strip()
            if not rest:
                raise ParseError("root line needs a state name", lineno)
            root = rest
            continue
        if ":" not in line:
            raise ParseError(f"expected `state: successors`, got {line!r}", lineno)
        state, _, rest = line.partition(":")
        state = state.strip()
        if state in succ:
            raise ParseError(f"state {state!r} defined twice", lineno)
        succ[state] = rest.split()
    try:
        return TransitionSystem(succ, root)
    except TransitionError as exc:
        raise ParseError(str(exc)) from None


def format_transition_system(ts: TransitionSystem) -> str:
    lines = [f"{q}: {' '.join(sorted(v))}".rstrip() for q, v in ts.items()]
    if ts.root is not None:
        lines.append(f"root {ts.root}")
    return "\n".join(lines) + "\n"


def disjoint_union(a: TransitionSystem, b: TransitionSystem,
                   prefixes: tuple[str, str] = ("0:", "1:")) -> TransitionSystem:
    """Tagged union of two systems; state q of the i-th system becomes
    prefixes[i] + q."""
    pa, pb = prefixes
    succ = {pa + q: {pa + r for r in a.succ(q)} for q in a.states}
    succ.update({pb + q: {pb + r for r in b.succ(q)} for q in b.states})
    return TransitionSystem(succ)


# ---------------------------------------------------------------------------
# Behavior trees

_INTERN: dict[tuple[int, ...], "ETree"] = {}
_CMP_MEMO: dict[tuple[int, int], int] = {}
_NEXT_SERIAL = [0]


class ETree:
    """Unordered finite tree; children are kept in canonical order.

    Do not construct directly; use `etree` (or `leaf`, `path`).
    """

    __slots__ = ("children", "serial", "height", "size")

    def __init__(self, children: tuple["ETree", ...], serial: int):
        self.children = children
        self.serial = serial
        self.height = 1 + max((c.height for c in children), default=-1)
        self.size = 1 + sum(c.size for c in children)

    def __repr__(self):
        if self.size <= 16:
            return render_etree(self)
        return f"<ETree serial={self.serial} height={self.height}>"


def _cmp(a: ETree, b: ETree) -> int:
    """Lexicographic order on canonical codes, memoized over shared nodes."""
    if a is b:
        return 0
    key = (a.serial, b.serial)
    got = _CMP_MEMO.get(key)
    if got is not None:
        return got
    out = 0
    for x, y in zip(a.children, b.children):
        c = _cmp(x, y)
        if c:
            out = c
            break
    else:
        out = (len(a.children) > len(b.children)) - (len(a.children) < len(b.children))
    _CMP_MEMO[key] = out
    _CMP_MEMO[(b.serial, a.serial)] = -out
    return out


_CMP_KEY = cmp_to_key(_cmp)


def etree(children: Iterable[ETree] = ()) -> ETree:
    """The tree with the given child multiset (order is forgotten)."""
    kids = tuple(sorted(children, key=_CMP_KEY))
    key = tuple(c.serial for c in kids)
    got = _INTERN.get(key)
    if got is not None:
        return got
    node = ETree(kids, _NEXT_SERIAL[0])
    _NEXT_SERIAL[0] += 1
    _INTERN[key] = node
    return node


def leaf() -> ETree:
    return etree(())


def path(n: int) -> ETree:
    """The path with n edges."""
    t = leaf()
    for _ in range(n):
        t = etree((t,))
    return t


def tree_iso(t: ETree, s: ETree) -> bool:
    """Graph isomorphism of unordered trees; canonical forms are interned,
    so this is an identity test."""
    return t is s


def canonical_code(t: ETree):
    """Nested-tuple canonical code (sorted child codes).  Exponential for
    heavily shared trees; meant for small trees and cross-checks."""
    return tuple(canonical_code(c) for c in t.children)


@lru_cache(maxsize=None)
def is_extensional(t: ETree) -> bool:
    """No node has two isomorphic children."""
    if len(set(t.children)) != len(t.children):
        return False
    return all(is_extensional(c) for c in t.children)


@lru_cache(maxsize=None)
def extensional_quotient(t: ETree) -> ETree:
    """Merge isomorphic siblings bottom-up; idempotent."""
    kids = [extensional_quotient(c) for c in t.children]
    return etree(dict.fromkeys(kids))


@lru_cache(maxsize=None)
def cut(t: ETree, n: int) -> ETree:
    """Drop everything below depth n."""
    if n == 0:
        return leaf()
    return etree(cut(c, n - 1) for c in t.children)


def unfold(ts: TransitionSystem, q: str, n: int) -> ETree:
    """Behavior tree of q truncated at depth n; children of a node are the
    unfoldings of the state's successors (a multiset: distinct successors
    may unfold to equal trees)."""
    if q not in ts.states:
        raise TransitionError(f"unknown state: {q!r}")
    if n < 0:
        raise ValueError("depth must be >= 0")
    memo: dict[tuple[str, int], ETree] = {}

    def go(state: str, remaining: int) -> ETree:
        if remaining == 0:
            return leaf()
        key = (state, remaining)
        got = memo.get(key)
        if got is not None:
            return got
        out = etree(go(r, remaining - 1) for r in sorted(ts.succ(state)))
        memo[key] = out
        return out

    return go(q, n)


def is_homomorphism(src: TransitionSystem, dst: TransitionSystem,
                    f: Mapping[str, str]) -> bool:
    """Does f commute with the successor structure (direct images)?"""
    for q in src.states:
        if q not in f:
            raise TransitionError(f"mapping is not total: missing {q!r}")
        if f[q] not in dst.states:
            raise TransitionError(f"mapping sends {q!r} outside the target system")
    return all(
        frozenset(f[r] for r in src.succ(q)) == dst.succ(f[q]) for q in src.states
    )


def render_etree(t: ETree) -> str:
    """Compact bracket rendering; children in canonical order."""
    if not t.children:
        return "()"
    return "(" + " ".join(render_etree(c) for c in t.children) + ")"


def render_etree_indented(t: ETree, indent: str = "") -> str:
    lines = [indent + "*"]
    for c in t.children:
        lines.append(render_etree_indented(c, indent + "  "))
    return "\n".join(lines)

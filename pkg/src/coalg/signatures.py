"""Signatures, well-founded terms, and finitely presented (regular) trees.

A regular tree is a finite table of mutually recursive definitions: each
state is either an operation applied to states/parameters or a bare
parameter leaf.  The table denotes a possibly infinite tree; equality of
denoted trees is decided exactly by product reachability.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union


class SignatureError(ValueError):
    pass


class SignatureMismatch(ValueError):
    pass


class FlatTermError(ValueError):
    pass


class RegularTreeError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class Signature:
    """Finite set of operation symbols, each with a finite arity."""

    def __init__(self, symbols: Mapping[str, int]):
        table = {}
        for name, arity in symbols.items():
            if not isinstance(name, str) or not name:
                raise SignatureError(f"bad symbol name: {name!r}")
            if not isinstance(arity, int) or isinstance(arity, bool) or arity < 0:
                raise SignatureError(f"bad arity for {name}: {arity!r}")
            table[name] = arity
        self._symbols = table
        self._key = tuple(sorted(table.items()))

    @property
    def symbols(self) -> dict[str, int]:
        return dict(self._symbols)

    def arity(self, name: str) -> int:
        try:
            return self._symbols[name]
        except KeyError:
            raise SignatureError(f"unknown symbol: {name}") from None

    def __contains__(self, name) -> bool:
        return name in self._symbols

    def __iter__(self):
        return iter(sorted(self._symbols))

    def __len__(self):
        return len(self._symbols)

    def __eq__(self, other):
        return isinstance(other, Signature) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        inner = ", ".join(f"{n}/{a}" for n, a in self._key)
        return f"Signature({inner})"


def parse_signature(text: str) -> Signature:
    """Parse the `name/arity` one-per-line format."""
    table = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "/" not in line:
            raise ParseError(f"expected name/arity, got {line!r}", lineno)
        name, _, ar = line.partition("/")
        name = name.strip()
        ar = ar.strip()
        if not ar.isdigit():
            raise ParseError(f"bad arity {ar!r} for symbol {name!r}", lineno)
        if name in table:
            raise ParseError(f"duplicate symbol {name!r}", lineno)
        table[name] = int(ar)
    return Signature(table)


def format_signature(sig: Signature) -> str:
    return "\n".join(f"{n}/{a}" for n, a in sorted(sig.symbols.items())) + "\n"


@dataclass(frozen=True)
class Term:
    """Well-founded tree over a signature: a label and ordered children."""

    label: str
    children: tuple["Term", ...] = ()

    def __repr__(self):
        if not self.children:
            return self.label
        return f"{self.label}({','.join(map(repr, self.children))})"


def check_term(sig: Signature, term: Term) -> None:
    """Raise unless every node's child count matches its label's arity."""
    stack = [term]
    while stack:
        t = stack.pop()
        if sig.arity(t.label) != len(t.children):
            raise SignatureError(
                f"symbol {t.label} expects {sig.arity(t.label)} children, got {len(t.children)}"
            )
        stack.extend(t.children)


def term_height(term: Term) -> int:
    if not term.children:
        return 0
    return 1 + max(term_height(c) for c in term.children)


@dataclass(frozen=True)
class Param:
    """Parameter leaf; kept distinct from state-ids and symbols."""

    name: str

    def __repr__(self):
        return f"${self.name}"


@dataclass(frozen=True)
class Hole:
    """Marks cut-off positions in depth-bounded unfoldings."""

    def __repr__(self):
        return "⊥"


HOLE = Hole()


@dataclass(frozen=True)
class Node:
    """Node of a partial term (a depth-bounded unfolding)."""

    label: str
    children: tuple["PartialTerm", ...] = ()

    def __repr__(self):
        if not self.children:
            return self.label
        return f"{self.label}({','.join(map(repr, self.children))})"


PartialTerm = Union[Node, Param, Hole]


def format_partial(t: PartialTerm) -> str:
    if isinstance(t, Hole):
        return "⊥"
    if isinstance(t, Param):
        return t.name
    if not t.children:
        return t.label
    return f"{t.label}({','.join(format_partial(c) for c in t.children)})"


@dataclass(frozen=True)
class App:
    """Operation applied to arguments; arguments are state-ids or parameters."""

    symbol: str
    args: tuple[Union[str, Param], ...] = ()


class RegularTree:
    """Finite pointed definition table denoting a rational tree.

    `defn` maps each state to an App over states/parameters or to a bare
    Param leaf.  Structural equality compares presentations; equality of
    the denoted trees is `regular_equal`.
    """

    def __init__(self, sig: Signature, defn: Mapping[str, Union[App, Param]], root: str):
        states = set(defn)
        if root not in states:
            raise RegularTreeError(f"root {root!r} is not a state")
        for q, rhs in defn.items():
            if isinstance(rhs, Param):
                continue
            if not isinstance(rhs, App):
                raise RegularTreeError(f"state {q!r}: bad definition {rhs!r}")
            if rhs.symbol not in sig:
                raise RegularTreeError(f"state {q!r}: unknown symbol {rhs.symbol!r}")
            if len(rhs.args) != sig.arity(rhs.symbol):
                raise RegularTreeError(
                    f"state {q!r}: {rhs.symbol} expects {sig.arity(rhs.symbol)} arguments"
                )
            for a in rhs.args:
                if isinstance(a, Param):
                    continue
                if a not in states:
                    raise RegularTreeError(f"state {q!r}: undefined state reference {a!r}")
        self.sig = sig
        self.defn = dict(defn)
        self.root = root

    @property
    def states(self) -> frozenset[str]:
        return frozenset(self.defn)

    @property
    def parameters(self) -> frozenset[str]:
        out = set()
        for rhs in self.defn.values():
            if isinstance(rhs, Param):
                out.add(rhs.name)
            else:
                out.update(a.name for a in rhs.args if isinstance(a, Param))
        return frozenset(out)

    def __eq__(self, other):
        return (
            isinstance(other, RegularTree)
            and self.sig == other.sig
            and self.defn == other.defn
            and self.root == other.root
        )

    def __repr__(self):
        return f"RegularTree(root={self.root!r}, states={sorted(self.defn)})"


def _resolve(tree: RegularTree, ref: Union[str, Param]) -> Union[App, Param]:
    if isinstance(ref, Param):
        return ref
    return tree.defn[ref]


def unfold_regular(tree: RegularTree, depth: int) -> PartialTerm:
    """Unfold the definition table; nodes at the given depth become holes.

    Subtrees are shared between repeated (state, depth) positions, but the
    result still denotes the full cut tree; prefer `unfold_equal` when only
    equality of deep unfoldings is needed.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    memo: dict[tuple[str, int], PartialTerm] = {}

    def go(ref: Union[str, Param], remaining: int) -> PartialTerm:
        if remaining == 0:
            return HOLE
        if isinstance(ref, Param):
            return ref
        key = (ref, remaining)
        if key in memo:
            return memo[key]
        rhs = tree.defn[ref]
        if isinstance(rhs, Param):
            out: PartialTerm = rhs
        else:
            out = Node(rhs.symbol, tuple(go(a, remaining - 1) for a in rhs.args))
        memo[key] = out
        return out

    return go(tree.root, depth)


def unfold_equal(t: RegularTree, s: RegularTree, depth: int) -> bool:
    """Decide unfold_regular(t, depth) == unfold_regular(s, depth) without
    materializing the unfoldings (memoized product walk)."""
    if t.sig != s.sig:
        raise SignatureMismatch("trees are over different signatures")
    memo: dict[tuple, bool] = {}

    def eq(rx, ry, remaining: int) -> bool:
        if remaining == 0:
            return True
        a = _resolve(t, rx)
        b = _resolve(s, ry)
        if isinstance(a, Param) or isinstance(b, Param):
            return a == b
        if a.symbol != b.symbol:
            return False
        key = (rx, ry, remaining)
        if key in memo:
            return memo[key]
        out = all(eq(x, y, remaining - 1) for x, y in zip(a.args, b.args))
        memo[key] = out
        return out

    return eq(t.root, s.root, depth)


def regular_equal(t: RegularTree, s: RegularTree) -> bool:
    """Exact equality of the denoted trees, by product reachability."""
    if t.sig != s.sig:
        raise SignatureMismatch("trees are over different signatures")
    seen = set()
    stack = [(t.root, s.root)]
    while stack:
        p, q = stack.pop()
        if (p, q) in seen:
            continue
        seen.add((p, q))
        a = _resolve(t, p)
        b = _resolve(s, q)
        if isinstance(a, Param) or isinstance(b, Param):
            if a != b:
                return False
            continue
        if a.symbol != b.symbol:
            return False
        for x, y in zip(a.args, b.args):
            if isinstance(x, Param) and isinstance(y, Param):
                if x != y:
                    return False
            else:
                stack.append((x, y))
    return True


def epsilon_powerset(args: Iterable) -> frozenset:
    """Collapse an ordered tuple to the set of elements occurring in it."""
    return frozenset(args)


def _flat_parts(sig: Signature, term: Term, which: str) -> tuple[str, tuple[str, ...]]:
    if term.label not in sig:
        raise FlatTermError(f"{which}: head {term.label!r} is not an operation symbol")
    if len(term.children) != sig.arity(term.label):
        raise FlatTermError(
            f"{which}: {term.label} expects {sig.arity(term.label)} arguments"
        )
    names = []
    for c in term.children:
        if c.label in sig or c.children:
            raise FlatTermError(f"{which}: argument {c!r} is not a variable")
        names.append(c.label)
    return term.label, tuple(names)


def flat_merge_holds(sig: Signature, lhs: Term, rhs: Term) -> bool:
    """Do two flat terms (a symbol applied to variables) denote the same
    set-forming application, i.e. have equal variable sets?"""
    _, xs = _flat_parts(sig, lhs, "lhs")
    _, ys = _flat_parts(sig, rhs, "rhs")
    return epsilon_powerset(xs) == epsilon_powerset(ys)


def _parse_args(raw: str, lineno: int) -> list[str]:
    raw = raw.strip()
    if not raw:
        return []
    parts = [p.strip() for p in raw.split(",")]
    if any(not p for p in parts):
        raise ParseError("empty argument", lineno)
    return parts


def parse_regular_tree(sig: Signature, text: str) -> RegularTree:
    """Parse `state = name(arg,...)` lines (arguments `$y` are parameters)
    terminated by a `root state` line."""
    defn: dict[str, Union[App, Param]] = {}
    raw_rhs: dict[str, tuple[int, str, list[str]]] = {}
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
        if "=" not in line:
            raise ParseError(f"expected `state = ...`, got {line!r}", lineno)
        state, _, rhs = line.partition("=")
        state = state.strip()
        rhs = rhs.strip()
        if state in raw_rhs:
            raise ParseError(f"state {state!r} defined twice", lineno)
        if rhs.startswith("$"):
            defn[state] = Param(rhs[1:])
            raw_rhs[state] = (lineno, "", [])
            continue
        if "(" in rhs:
            if not rhs.endswith(")"):
                raise ParseError(f"unbalanced parentheses in {rhs!r}", lineno)
            name, _, inner = rhs.partition("(")
            args = _parse_args(inner[:-1], lineno)
        else:
            name, args = rhs, []
        name = name.strip()
        raw_rhs[state] = (lineno, name, args)
    if root is None:
        raise ParseError("missing `root` line")
    states = set(raw_rhs)
    for state, (lineno, name, args) in raw_rhs.items():
        if state in defn:
            continue
        resolved = []
        for a in args:
            if a.startswith("$"):
                resolved.append(Param(a[1:]))
            elif a in states:
                resolved.append(a)
            else:
                raise ParseError(f"unknown state {a!r}", lineno)
        try:
            defn[state] = App(name, tuple(resolved))
        except RegularTreeError as exc:
            raise ParseError(str(exc), lineno) from None
    try:
        return RegularTree(sig, defn, root)
    except RegularTreeError as exc:
        raise ParseError(str(exc)) from None


def format_regular_tree(tree: RegularTree) -> str:
    lines = []
    for state in sorted(tree.defn):
        rhs = tree.defn[state]
        if isinstance(rhs, Param):
            lines.append(f"{state} = ${rhs.name}")
        else:
            rendered = ",".join(f"${a.name}" if isinstance(a, Param) else a for a in rhs.args)
            if rendered:
                lines.append(f"{state} = {rhs.symbol}({rendered})")
            else:
                lines.append(f"{state} = {rhs.symbol}")
    lines.append(f"root {tree.root}")
    return "\n".join(lines) + "\n"

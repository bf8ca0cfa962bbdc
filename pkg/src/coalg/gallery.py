"""Schematic trees with unbounded child families and stratified checks.

The closed generator grammar covers paths, the infinite path, the
staircase, the witness pairs t/s at finite levels and at the first limit
level, and the auxiliary limit-level trees u and v.  Families (one
generator template with a natural-number hole) stand for countably many
children; every bounded operation instantiates them up to an index bound
and insists that the observed cut sequence has stabilized, so "equivalent"
verdicts are sound relative to the printed bounds while "distinguished"
verdicts exhibit a concrete witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from .signatures import ParseError
from .transition import ETree, etree, leaf, path

DEFAULT_DEPTH = 16
DEFAULT_FAMILY_BOUND = 8
CUT_DEPTH_MAX = 8
I_MAX_LIMIT = 4


class FamilyStabilizationError(ValueError):
    pass


@dataclass(frozen=True)
class Omega:
    def __repr__(self):
        return "omega"


OMEGA = Omega()

Index = Union[int, Omega]

_KINDS = {"path", "omega_path", "staircase", "t", "s", "u", "v"}


@dataclass(frozen=True)
class Gen:
    """Generator application from the closed grammar."""

    kind: str
    idx: Index | None = None

    def __repr__(self):
        if self.idx is None:
            return self.kind
        return f"{self.kind}:{self.idx}"


@dataclass(frozen=True)
class Family:
    """All instances of a generator template, at every natural index (or
    every index below `bound` when given)."""

    template: str
    except_idx: int | None = None
    bound: int | None = None

    def instantiate(self, k: int) -> Gen:
        if self.template == "path":
            return Gen("path", k)
        if self.template == "t":
            return Gen("t", k)
        if self.template == "t_except_s":
            return Gen("s", self.except_idx) if k == self.except_idx else Gen("t", k)
        if self.template == "v":
            return Gen("v", k)
        raise ValueError(f"unknown template {self.template!r}")


@dataclass(frozen=True)
class Root:
    """Explicit node over a finite sequence of child items."""

    items: tuple[Union[Gen, "Root", Family], ...]


SchematicTree = Union[Gen, Root]


def generator(kind: str, idx: Index | None = None) -> Gen:
    if kind not in _KINDS:
        raise ValueError(f"unknown generator kind {kind!r}")
    finite = isinstance(idx, int) and not isinstance(idx, bool) and idx >= 0
    if kind == "path" and not finite:
        raise ValueError("path needs a finite index")
    if kind == "v" and not finite:
        raise ValueError("v needs a finite index")
    if kind in ("t", "s") and not (finite or isinstance(idx, Omega)):
        raise ValueError(f"{kind} needs a finite index or omega")
    if kind in ("omega_path", "staircase", "u") and idx is not None:
        raise ValueError(f"{kind} takes no index")
    return Gen(kind, idx)


def build(kind: str, idx: Index | None = None) -> Root:
    """One-level expansion of a generator into its child items."""
    return expand(generator(kind, idx))


@lru_cache(maxsize=None)
def expand(g: Gen) -> Root:
    kind, idx = g.kind, g.idx
    if kind == "path":
        if idx == 0:
            return Root(())
        return Root((Gen("path", idx - 1),))
    if kind == "omega_path":
        return Root((Gen("omega_path"),))
    if kind == "staircase":
        return Root((Gen("omega_path"), Gen("staircase")))
    if kind == "u":
        return Root((Family("t"),))
    if kind == "v":
        return Root((Family("t_except_s", except_idx=idx),))
    if kind == "t":
        if isinstance(idx, Omega):
            return Root((Family("v"),))
        if idx == 0:
            return Root((Gen("omega_path"), Family("path")))
        return Root((Gen("t", idx - 1),))
    if kind == "s":
        if isinstance(idx, Omega):
            return Root((Gen("u"), Family("v")))
        if idx == 0:
            return Root((Family("path"),))
        return Root((Gen("s", idx - 1),))
    raise ValueError(f"unknown generator kind {kind!r}")


def _items(tree: SchematicTree) -> tuple:
    if isinstance(tree, Gen):
        return expand(tree).items
    return tree.items


def children(tree: SchematicTree, family_bound: int) -> list[SchematicTree]:
    """Child set with families instantiated at indices 0..family_bound."""
    out: dict[SchematicTree, None] = {}
    for item in _items(tree):
        if isinstance(item, Family):
            stop = item.bound if item.bound is not None else family_bound + 1
            for k in range(stop):
                out.setdefault(item.instantiate(k))
        else:
            out.setdefault(item)
    return list(out)


def _cut(tree: SchematicTree, depth: int, kbound: int, cache: dict) -> ETree:
    """Extensional quotient of the depth cut; unbounded families contribute
    instance cuts at indices 0..kbound and must stabilize in that window."""
    key = (tree, depth)
    got = cache.get(key)
    if got is not None:
        return got
    if depth == 0:
        out = leaf()
    else:
        kids: dict[ETree, None] = {}
        for item in _items(tree):
            if isinstance(item, Family) and item.bound is None:
                seq = [
                    _cut(item.instantiate(k), depth - 1, kbound, cache)
                    for k in range(kbound + 1)
                ]
                if len(seq) >= 2 and seq[-1] is not seq[-2]:
                    raise FamilyStabilizationError(
                        f"family {item.template!r} cut at depth {depth - 1} did not "
                        f"stabilize within indices 0..{kbound}"
                    )
                for c in seq:
                    kids.setdefault(c)
            elif isinstance(item, Family):
                for k in range(item.bound):
                    kids.setdefault(_cut(item.instantiate(k), depth - 1, kbound, cache))
            else:
                kids.setdefault(_cut(item, depth - 1, kbound, cache))
        out = etree(kids)
    cache[key] = out
    return out


def cut_schematic(tree: SchematicTree, depth: int, family_bound: int) -> ETree:
    """Extensional quotient of the depth-cut of a schematic tree."""
    if not 0 <= depth <= CUT_DEPTH_MAX:
        raise ValueError(f"cut depth must be in 0..{CUT_DEPTH_MAX}")
    if family_bound < 4:
        raise ValueError("family bound must be >= 4")
    return _cut(tree, depth, family_bound, {})


@dataclass(frozen=True)
class StratifiedVerdict:
    equivalent: bool
    witness_level: int | None = None
    witness_child: SchematicTree | None = None
    witness_side: str | None = None

    def __str__(self):
        if self.equivalent:
            return "equivalent"
        if self.witness_child is not None:
            return (
                f"distinguished (child {self.witness_child!r} of the "
                f"{self.witness_side} tree unmatched at level {self.witness_level})"
            )
        return f"distinguished (cuts differ at depth {self.witness_level})"


class _StratifiedChecker:
    """Bounded decision procedure for the stratified equivalences, with
    per-instance caches (structural memoization on generator pairs)."""

    def __init__(self, depth: int, family_bound: int):
        self.depth = depth
        self.family_bound = family_bound
        self.cut_cache: dict = {}
        self.equiv_cache: dict = {}

    def cut(self, tree: SchematicTree, n: int) -> ETree:
        # cuts at depth n need family indices up to about n to stabilize
        kbound = max(self.family_bound, n + 1)
        cache = self.cut_cache.setdefault(kbound, {})
        return _cut(tree, n, kbound, cache)

    def level0(self, a: SchematicTree, b: SchematicTree) -> bool:
        return all(self.cut(a, n) is self.cut(b, n) for n in range(self.depth + 1))

    def level0_witness(self, a: SchematicTree, b: SchematicTree) -> int:
        for n in range(self.depth + 1):
            if self.cut(a, n) is not self.cut(b, n):
                return n
        raise AssertionError("no distinguishing cut found")

    def equiv(self, a: SchematicTree, b: SchematicTree, level: int) -> bool:
        if a == b:
            return True
        key = (a, b, level)
        got = self.equiv_cache.get(key)
        if got is not None:
            return got
        if level == 0:
            out = self.level0(a, b)
        else:
            out = all(
                self.match(a, b, j) and self.match(b, a, j) for j in range(level)
            )
        self.equiv_cache[key] = out
        self.equiv_cache[(b, a, level)] = out
        return out

    def match(self, a: SchematicTree, b: SchematicTree, j: int) -> bool:
        cbs = children(b, self.family_bound)
        return all(
            any(self.equiv(ca, cb, j) for cb in cbs)
            for ca in children(a, self.family_bound)
        )

    def unmatched_child(self, a: SchematicTree, b: SchematicTree, level: int):
        """First (side, child, j) with no partner, for witness reporting."""
        for j in range(level):
            for side, x, y in (("left", a, b), ("right", b, a)):
                cys = children(y, self.family_bound)
                for cx in children(x, self.family_bound):
                    if not any(self.equiv(cx, cy, j) for cy in cys):
                        return side, cx, j
        return None


def stratified_check(t: SchematicTree, s: SchematicTree, level: int,
                     depth: int = DEFAULT_DEPTH,
                     family_bound: int = DEFAULT_FAMILY_BOUND) -> StratifiedVerdict:
    """Bounded verdict for the level-indexed equivalence: level 0 compares
    all cuts up to `depth`; higher levels do child matching with families
    instantiated at indices 0..family_bound on both quantifier sides."""
    if level < 0:
        raise ValueError("level must be >= 0")
    checker = _StratifiedChecker(depth, family_bound)
    if checker.equiv(t, s, level):
        return StratifiedVerdict(True)
    if level == 0:
        return StratifiedVerdict(False, witness_level=checker.level0_witness(t, s))
    found = checker.unmatched_child(t, s, level)
    if found is None:
        # distinguished only through the symmetric closure of deeper pairs
        return StratifiedVerdict(False)
    side, child, j = found
    return StratifiedVerdict(False, witness_level=j, witness_child=child, witness_side=side)


def parse_generator(spec: str) -> Gen:
    """CLI names: path:N, omegapath, staircase, t:N, t:omega, s:N, s:omega,
    u, v:N."""
    spec = spec.strip().lower()
    name, _, idx = spec.partition(":")
    aliases = {"omegapath": "omega_path", "omega-path": "omega_path"}
    name = aliases.get(name, name)
    if name not in _KINDS:
        raise ParseError(f"unknown generator {spec!r}")
    if not idx:
        try:
            return generator(name)
        except ValueError as exc:
            raise ParseError(str(exc)) from None
    if idx in ("omega", "w"):
        parsed: Index = OMEGA
    elif idx.isdigit():
        parsed = int(idx)
    else:
        raise ParseError(f"bad generator index {idx!r}")
    try:
        return generator(name, parsed)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


# ---------------------------------------------------------------------------
# The displayed cut shapes and the separation report


def _fork(*kids: ETree) -> ETree:
    return etree(kids)


def cut_table_rows(family_indices=range(0, 9)) -> list[tuple[str, Gen, int, ETree]]:
    """(label, generator, depth, expected cut) for every displayed cut."""
    small_fork = _fork(leaf(), path(1))
    mid_fork = _fork(leaf(), path(1), path(2))
    wide_fork = _fork(leaf(), path(1), path(2), path(3))
    u_depth3 = _fork(small_fork, path(2))
    rows: list[tuple[str, Gen, int, ETree]] = []

    def both(i: Index, depth: int, expected: ETree):
        tag = "omega" if isinstance(i, Omega) else str(i)
        rows.append((f"t{tag}|{depth}", Gen("t", i), depth, expected))
        rows.append((f"s{tag}|{depth}", Gen("s", i), depth, expected))

    finite = [i for i in family_indices]
    omega_too: list[Index] = finite + [OMEGA]

    # depth 1: every gallery tree cuts to a single edge
    for i in omega_too:
        both(i, 1, path(1))
    rows.append(("u|1", Gen("u"), 1, path(1)))
    for i in finite:
        rows.append((f"v{i}|1", Gen("v", i), 1, path(1)))

    # depth 2
    both(0, 2, small_fork)
    for i in omega_too:
        if i == 0:
            continue
        both(i, 2, path(2))
    rows.append(("u|2", Gen("u"), 2, path(2)))
    for i in finite:
        rows.append((f"v{i}|2", Gen("v", i), 2, path(2)))

    # depth 3
    both(0, 3, mid_fork)
    both(1, 3, _fork(small_fork))
    for i in omega_too:
        if i in (0, 1):
            continue
        both(i, 3, path(3))
    rows.append(("u|3", Gen("u"), 3, u_depth3))
    for i in finite:
        rows.append((f"v{i}|3", Gen("v", i), 3, u_depth3))

    # depth 4
    both(0, 4, wide_fork)
    both(1, 4, _fork(mid_fork))
    both(2, 4, _fork(_fork(small_fork)))
    for i in finite:
        if i in (0, 1, 2):
            continue
        both(i, 4, path(4))
    both(OMEGA, 4, _fork(u_depth3))
    return rows


@dataclass(frozen=True)
class ReportRow:
    section: str
    label: str
    ok: bool
    info: bool = False
    detail: str = ""


@dataclass(frozen=True)
class GalleryReport:
    i_max: int
    depth: int
    family_bound: int
    rows: tuple[ReportRow, ...]

    @property
    def claims(self) -> int:
        return sum(1 for r in self.rows if not r.info)

    @property
    def passed(self) -> int:
        return sum(1 for r in self.rows if not r.info and r.ok)

    @property
    def all_pass(self) -> bool:
        return self.claims == self.passed

    def render(self) -> str:
        lines = [f"bounds: depth={self.depth} family-bound={self.family_bound}"]
        section = None
        for r in self.rows:
            if r.section != section:
                section = r.section
                lines.append(f"-- {section}")
            status = "INFO" if r.info else ("PASS" if r.ok else "FLAG")
            suffix = f"  [{r.detail}]" if r.detail else ""
            lines.append(f"{status} {r.label}{suffix}")
        lines.append(f"claims={self.claims} pass={self.passed}")
        return "\n".join(lines) + "\n"


def reproduce_counterexamples(i_max: int, depth: int = DEFAULT_DEPTH,
                              family_bound: int = DEFAULT_FAMILY_BOUND) -> GalleryReport:
    """Check the separation pairs t_i/s_i at levels i and i+1, the full cut
    table, and (informationally) the cross-level distinctions."""
    if not 0 <= i_max <= I_MAX_LIMIT:
        raise ValueError(f"i_max must be in 0..{I_MAX_LIMIT}")
    rows: list[ReportRow] = []
    for i in range(i_max + 1):
        t, s = Gen("t", i), Gen("s", i)
        v_eq = stratified_check(t, s, i, depth, family_bound)
        rows.append(
            ReportRow("separation", f"t{i} ~({i}) s{i}: expect equivalent",
                      v_eq.equivalent, detail=str(v_eq))
        )
        v_ne = stratified_check(t, s, i + 1, depth, family_bound)
        rows.append(
            ReportRow("separation", f"t{i} ~({i + 1}) s{i}: expect distinguished",
                      not v_ne.equivalent, detail=str(v_ne))
        )
    caches: dict[int, dict] = {}
    for label, gen, n, expected in cut_table_rows():
        kbound = max(family_bound, n + 1)
        got = _cut(gen, n, kbound, caches.setdefault(kbound, {}))
        rows.append(
            ReportRow("cut table", f"{label}: expect {expected!r}", got is expected,
                      detail="" if got is expected else f"got {got!r}")
        )
    for i in range(i_max + 1):
        for k in range(i + 1, i_max + 2):
            for name, g in (("t", Gen("t", i)), ("s", Gen("s", i))):
                v = stratified_check(g, Gen("t", k), i + 2, depth, family_bound)
                rows.append(
                    ReportRow("cross-level", f"{name}{i} ~({i + 2}) t{k}: expect distinguished",
                              not v.equivalent, info=True, detail=str(v))
                )
    return GalleryReport(i_max, depth, family_bound, tuple(rows))

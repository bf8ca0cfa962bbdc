"""Level-cut equivalence of behavior trees and its bisimilarity bridge.

Two states are compared by taking extensional quotients of their depth-n
behavior trees for n up to a bound.  On finite systems the product of the
two reachable-state counts is a complete bound: agreement up to there
implies bisimilarity, which the harness validates against the partition
refinement engine on exhaustive and random suites.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product

from .bisim import bisimilarity
from .transition import TransitionSystem, TransitionError, extensional_quotient, unfold

EQUIVALENT = "equivalent-up-to-bound"
DISTINGUISHED = "distinguished"


@dataclass(frozen=True)
class BarrVerdict:
    outcome: str
    bound: int
    witness_level: int | None = None

    @property
    def equivalent(self) -> bool:
        return self.outcome == EQUIVALENT

    def __str__(self):
        if self.equivalent:
            return f"{self.outcome} (bound {self.bound})"
        return f"{self.outcome} at level {self.witness_level}"


def reachable(ts: TransitionSystem, q: str) -> frozenset[str]:
    seen = set()
    todo = [q]
    while todo:
        s = todo.pop()
        if s in seen:
            continue
        seen.add(s)
        todo.extend(ts.succ(s))
    return frozenset(seen)


def complete_bound(ts: TransitionSystem, a: str, b: str) -> int:
    """Cut depth past which agreement of cuts implies bisimilarity."""
    return max(1, len(reachable(ts, a)) * len(reachable(ts, b)))


def barr_equiv(ts: TransitionSystem, a: str, b: str, bound: int) -> BarrVerdict:
    """Compare extensional quotients of the depth-n behavior trees of a and
    b for every n up to the bound; report the least distinguishing level."""
    for q in (a, b):
        if q not in ts.states:
            raise TransitionError(f"unknown state: {q!r}")
    if bound < 1:
        raise ValueError("bound must be >= 1")
    for n in range(1, bound + 1):
        ea = extensional_quotient(unfold(ts, a, n))
        eb = extensional_quotient(unfold(ts, b, n))
        if ea is not eb:
            return BarrVerdict(DISTINGUISHED, bound, witness_level=n)
    return BarrVerdict(EQUIVALENT, bound)


def random_system(rng: random.Random, max_states: int) -> TransitionSystem:
    """Uniform random system: state count in 1..max_states, each edge
    present with probability 1/2."""
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    succ = {
        q: {r for r in states if rng.random() < 0.5} for q in states
    }
    return TransitionSystem(succ)


def enumerate_systems(max_states: int):
    """All transition systems with 1..max_states states, up to the fixed
    state naming s0, s1, ..."""
    for n in range(1, max_states + 1):
        states = [f"s{i}" for i in range(n)]
        subsets = [frozenset(c) for c in _powerset(states)]
        for choice in product(subsets, repeat=n):
            yield TransitionSystem(dict(zip(states, choice)))


def _powerset(xs):
    out = [()]
    for x in xs:
        out += [prev + (x,) for prev in out]
    return out


@dataclass(frozen=True)
class HarnessReport:
    lines: tuple[str, ...]
    total: int
    agreements: int
    disagreements: int

    @property
    def summary(self) -> str:
        return (
            f"{self.agreements}/{self.total} systems, "
            f"{self.disagreements} disagreements"
        )

    def render(self) -> str:
        return "\n".join(self.lines + (self.summary,)) + "\n"


def _compare_on_system(ts: TransitionSystem) -> int:
    """Number of state pairs where the cut verdict and bisimilarity
    disagree."""
    part = bisimilarity(ts)
    states = sorted(ts.states)
    bad = 0
    for i, a in enumerate(states):
        for b in states[i:]:
            verdict = barr_equiv(ts, a, b, complete_bound(ts, a, b))
            if verdict.equivalent != part.same(a, b):
                bad += 1
    return bad


def barr_vs_bisim_harness(seed: int, count: int, max_states: int) -> HarnessReport:
    """Random suite comparing the bounded cut decision at the complete
    bound against partition refinement."""
    if max_states > 10:
        raise ValueError("max_states is capped at 10")
    rng = random.Random(seed)
    lines = []
    agreements = 0
    disagreements = 0
    for idx in range(count):
        ts = random_system(rng, max_states)
        bad = _compare_on_system(ts)
        if bad:
            disagreements += 1
            lines.append(f"{idx} MISMATCH ({bad} pairs)")
        else:
            agreements += 1
            lines.append(f"{idx} ok")
    return HarnessReport(tuple(lines), count, agreements, disagreements)


def barr_vs_bisim_exhaustive(max_states: int) -> HarnessReport:
    """Exhaustive suite over all systems with at most max_states states."""
    if max_states > 3:
        raise ValueError("exhaustive mode is capped at 3 states")
    lines = []
    agreements = 0
    disagreements = 0
    total = 0
    for idx, ts in enumerate(enumerate_systems(max_states)):
        total += 1
        bad = _compare_on_system(ts)
        if bad:
            disagreements += 1
            lines.append(f"{idx} MISMATCH ({bad} pairs)")
        else:
            agreements += 1
    return HarnessReport(tuple(lines), total, agreements, disagreements)

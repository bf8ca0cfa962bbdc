"""Finite stages of initial-algebra and terminal-coalgebra chains.

For the finite-powerset functor the initial chain is the cumulative
hierarchy of hereditarily finite sets; the terminal chain iterates the
powerset on a one-point stage with backward projections.  Polynomial
functors iterate term formation over a signature.  Extensional
well-founded trees and hereditarily finite sets are interchangeable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .signatures import Signature, Term
from .transition import ETree, etree, is_extensional

INITIAL_POWERSET_MAX = 5
TERMINAL_POWERSET_MAX = 4
POLYNOMIAL_STAGE_LIMIT = 10**6


class ChainBoundError(ValueError):
    pass


class ExtensionalityError(ValueError):
    pass


_HF_INTERN: dict[str, "HFSet"] = {}


class HFSet:
    """Hereditarily finite set in canonical form: elements sorted by
    length-then-lexicographic brace code, duplicates impossible.
    Interned; equality is identity."""

    __slots__ = ("elements", "code")

    def __init__(self, elements: tuple["HFSet", ...], code: str):
        self.elements = elements
        self.code = code

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        return any(e is x for e in self.elements)

    def __repr__(self):
        return self.code

    def rank(self) -> int:
        return 1 + max((e.rank() for e in self.elements), default=-1)


def hfset(elements: Iterable[HFSet] = ()) -> HFSet:
    uniq = {e.code: e for e in elements}
    elems = tuple(sorted(uniq.values(), key=lambda e: (len(e.code), e.code)))
    code = "{" + ",".join(e.code for e in elems) + "}"
    got = _HF_INTERN.get(code)
    if got is not None:
        return got
    node = HFSet(elems, code)
    _HF_INTERN[code] = node
    return node


EMPTY_HF = hfset(())


@dataclass(frozen=True)
class ChainStage:
    """One stage of a chain: its index, carrier, and (for backward chains)
    the projection into the previous stage."""

    index: int
    elements: tuple
    proj: dict | None = None


def _subsets(xs: tuple) -> list[tuple]:
    out = [()]
    for x in xs:
        out += [prev + (x,) for prev in out]
    return out


def initial_chain_powerset(n: int) -> list[ChainStage]:
    """Stages of iterated powerset on the empty set: stage i holds the
    hereditarily finite sets of rank below i."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > INITIAL_POWERSET_MAX:
        raise ChainBoundError(f"initial powerset chain is capped at {INITIAL_POWERSET_MAX}")
    stages = [ChainStage(0, ())]
    for i in range(n):
        prev = stages[-1].elements
        elems = tuple(
            sorted((hfset(sub) for sub in _subsets(prev)),
                   key=lambda e: (len(e.code), e.code))
        )
        stages.append(ChainStage(i + 1, elems))
    return stages


def initial_chain_polynomial(sig: Signature, n: int) -> list[ChainStage]:
    """Stages of iterated term formation: stage i holds all well-founded
    terms of height below i."""
    if n < 0:
        raise ValueError("n must be >= 0")
    stages = [ChainStage(0, ())]
    arities = sorted(sig.symbols.items())
    for i in range(n):
        prev = stages[-1].elements
        predicted = sum(len(prev) ** ar for _, ar in arities)
        if predicted > POLYNOMIAL_STAGE_LIMIT:
            raise ChainBoundError(
                f"stage {i + 1} would have {predicted} elements "
                f"(limit {POLYNOMIAL_STAGE_LIMIT})"
            )
        elems = []
        for name, ar in arities:
            elems.extend(Term(name, args) for args in _tuples(prev, ar))
        stages.append(ChainStage(i + 1, tuple(elems)))
    return stages


def _tuples(pool: tuple, k: int):
    if k == 0:
        yield ()
        return
    for rest in _tuples(pool, k - 1):
        for x in pool:
            yield (x,) + rest


def terminal_chain_powerset(n: int) -> list[ChainStage]:
    """Stages of iterated powerset on a one-point stage, with projections
    sending a set of codes to the set of their images."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > TERMINAL_POWERSET_MAX:
        raise ChainBoundError(f"terminal powerset chain is capped at {TERMINAL_POWERSET_MAX}")
    point = "*"
    stages = [ChainStage(0, (point,))]
    prev_proj: dict[str, str] = {}
    for i in range(n):
        prev = stages[-1].elements
        elems = []
        proj = {}
        for sub in _subsets(prev):
            code = _set_code(sub)
            elems.append(code)
            if i == 0:
                proj[code] = point
            else:
                proj[code] = _set_code(prev_proj[x] for x in sub)
        elems.sort(key=lambda c: (len(c), c))
        stages.append(ChainStage(i + 1, tuple(elems), proj))
        prev_proj = proj
    return stages


def _set_code(members: Iterable[str]) -> str:
    uniq = sorted(set(members), key=lambda c: (len(c), c))
    return "{" + ",".join(uniq) + "}"


def tree_to_hf(t: ETree) -> HFSet:
    """Extensional tree to hereditarily finite set (children become
    elements).  Non-extensional input is rejected."""
    if not is_extensional(t):
        raise ExtensionalityError(
            "tree is not extensional; apply extensional_quotient first"
        )
    return _tree_to_hf(t)


def _tree_to_hf(t: ETree) -> HFSet:
    return hfset(_tree_to_hf(c) for c in t.children)


def hf_to_tree(x: HFSet) -> ETree:
    """Inverse of tree_to_hf: elements become children."""
    return etree(hf_to_tree(e) for e in x.elements)

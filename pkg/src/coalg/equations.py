"""Guarded corecursive equation systems and their unique solutions.

Right-hand sides are flat: one operation applied to variables/parameters,
or a bare parameter.  Bare variables are rejected (guardedness), which is
what makes solutions unique.  Deep right-hand sides are accepted by the
parser and flattened with auxiliary variables.  Solutions are regular
trees whose states are the source variables; substitution grafts solution
tables together, realizing the monad multiplication on regular trees.
"""

from __future__ import annotations

import random
from typing import Mapping, Union

from .signatures import (
    App,
    Param,
    ParseError,
    RegularTree,
    RegularTreeError,
    Signature,
    unfold_equal,
)


class UnguardedError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"unguarded equation at line {line}: {message}"
        super().__init__(message)
        self.line = line


class SubstitutionError(ValueError):
    pass


class EquationSystem:
    """Flat guarded system: every variable is defined as an operation over
    variables/parameters or as a bare parameter."""

    def __init__(self, sig: Signature, variables, parameters,
                 rhs: Mapping[str, Union[App, Param, str]]):
        self.sig = sig
        self.variables = tuple(variables)
        self.parameters = frozenset(parameters)
        if len(set(self.variables)) != len(self.variables):
            raise RegularTreeError("duplicate variable names")
        overlap = set(self.variables) & self.parameters
        if overlap:
            raise RegularTreeError(f"names used as both variable and parameter: {sorted(overlap)}")
        table: dict[str, Union[App, Param]] = {}
        for x in self.variables:
            if x not in rhs:
                raise RegularTreeError(f"no equation for variable {x!r}")
            table[x] = self._check_rhs(x, rhs[x])
        extra = set(rhs) - set(self.variables)
        if extra:
            raise RegularTreeError(f"equations for undeclared variables: {sorted(extra)}")
        self.rhs = table

    def _check_rhs(self, x, value):
        if isinstance(value, str):
            # a bare name can only be a variable reference, which guardedness forbids
            if value in self.variables:
                raise UnguardedError(f"{x} = {value}")
            raise RegularTreeError(f"equation for {x!r}: unknown name {value!r}")
        if isinstance(value, Param):
            if value.name not in self.parameters:
                raise RegularTreeError(f"equation for {x!r}: unknown parameter {value.name!r}")
            return value
        if not isinstance(value, App):
            raise RegularTreeError(f"equation for {x!r}: bad right-hand side {value!r}")
        if value.symbol not in self.sig:
            raise RegularTreeError(f"equation for {x!r}: unknown symbol {value.symbol!r}")
        if len(value.args) != self.sig.arity(value.symbol):
            raise RegularTreeError(
                f"equation for {x!r}: {value.symbol} expects "
                f"{self.sig.arity(value.symbol)} arguments"
            )
        for a in value.args:
            if isinstance(a, Param):
                if a.name not in self.parameters:
                    raise RegularTreeError(f"equation for {x!r}: unknown parameter {a.name!r}")
            elif a not in self.variables:
                raise RegularTreeError(f"equation for {x!r}: unknown variable {a!r}")
        return value

    def __repr__(self):
        return f"EquationSystem({len(self.variables)} variables)"


Solution = dict


def _reachable_table(defn: Mapping[str, Union[App, Param]], root: str):
    keep = set()
    todo = [root]
    while todo:
        q = todo.pop()
        if q in keep:
            continue
        keep.add(q)
        rhs = defn[q]
        if isinstance(rhs, App):
            todo.extend(a for a in rhs.args if not isinstance(a, Param))
    return {q: defn[q] for q in keep}


def solve(sys: EquationSystem) -> Solution:
    """The unique solution: each variable denotes the regular tree read off
    the equation table itself, rooted at that variable."""
    out = {}
    for x in sys.variables:
        table = _reachable_table(sys.rhs, x)
        out[x] = RegularTree(sys.sig, table, x)
    return out


def eta(sig: Signature, name: str) -> RegularTree:
    """Single-leaf tree carrying a parameter."""
    return RegularTree(sig, {"q0": Param(name)}, "q0")


def tree_substitute(t: RegularTree, s: Mapping[str, RegularTree]) -> RegularTree:
    """Replace every parameter leaf of t by the given trees (grafting by
    disjoint state union with leaf redirection)."""
    needed = t.parameters
    missing = needed - set(s)
    if missing:
        raise SubstitutionError(f"missing substitution entries: {sorted(missing)}")
    for y in needed:
        if s[y].sig != t.sig:
            raise SubstitutionError(f"substitution for {y!r} uses a different signature")

    names: dict[tuple, str] = {}

    def fresh(key) -> str:
        if key not in names:
            names[key] = f"s{len(names)}"
        return names[key]

    # state name for a t-state, following bare-parameter leaves into the
    # substituted tables
    def target_t(q: str) -> str:
        rhs = t.defn[q]
        if isinstance(rhs, Param):
            return target_s(rhs.name, s[rhs.name].root)
        return fresh(("t", q))

    def target_s(y: str, q: str) -> str:
        return fresh(("s", y, q))

    defn: dict[str, Union[App, Param]] = {}
    for q in t.defn:
        rhs = t.defn[q]
        if isinstance(rhs, Param):
            continue
        args = []
        for a in rhs.args:
            if isinstance(a, Param):
                args.append(target_s(a.name, s[a.name].root))
            else:
                args.append(target_t(a))
        defn[fresh(("t", q))] = App(rhs.symbol, tuple(args))
    for y in sorted(needed):
        for q, rhs in s[y].defn.items():
            if isinstance(rhs, Param):
                # parameters of the substituted trees stay parameters
                defn[target_s(y, q)] = rhs
            else:
                defn[target_s(y, q)] = App(
                    rhs.symbol,
                    tuple(a if isinstance(a, Param) else target_s(y, a) for a in rhs.args),
                )
    root = target_t(t.root)
    return RegularTree(t.sig, _reachable_table(defn, root), root)


def _one_step_tree(sys: EquationSystem, cand: Mapping[str, RegularTree], x: str) -> RegularTree:
    """Expand the equation for x one level and plug in the candidate trees
    (parameters become single leaves)."""
    rhs = sys.rhs[x]
    if isinstance(rhs, Param):
        return eta(sys.sig, rhs.name)
    defn: dict[str, Union[App, Param]] = {}
    roots = []
    for i, a in enumerate(rhs.args):
        if isinstance(a, Param):
            name = f"p{i}"
            defn[name] = a
            roots.append(name)
        else:
            sub = cand[a]
            for q, qrhs in sub.defn.items():
                defn[f"a{i}.{q}"] = (
                    qrhs
                    if isinstance(qrhs, Param)
                    else App(
                        qrhs.symbol,
                        tuple(b if isinstance(b, Param) else f"a{i}.{b}" for b in qrhs.args),
                    )
                )
            roots.append(f"a{i}.{sub.root}")
    defn["top"] = App(rhs.symbol, tuple(roots))
    return RegularTree(sys.sig, defn, "top")


def verify_solution(sys: EquationSystem, cand: Mapping[str, RegularTree], depth: int) -> bool:
    """Does the candidate satisfy every equation up to the given unfolding
    depth?  (Expand each right-hand side one level against the candidate
    and compare unfoldings.)"""
    for x in sys.variables:
        if x not in cand:
            return False
        if not unfold_equal(cand[x], _one_step_tree(sys, cand, x), depth):
            return False
    return True


def parse_equations(sig: Signature, text: str) -> EquationSystem:
    """Parse `x = rhs` lines; nested applications are flattened with
    auxiliary variables, `$y` names parameters, a bare variable on the
    right is rejected as unguarded."""
    lines = []
    seen = set()
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected `x = ...`, got {line!r}", lineno)
        x, _, rhs = line.partition("=")
        x = x.strip()
        if not x or x.startswith("$"):
            raise ParseError(f"bad variable name {x!r}", lineno)
        if x in seen:
            raise ParseError(f"variable {x!r} defined twice", lineno)
        seen.add(x)
        lines.append((lineno, x, rhs.strip()))

    variables = [x for _, x, _ in lines]
    declared = set(variables)
    clash = declared & set(sig.symbols)
    if clash:
        raise ParseError(f"names used as both variable and symbol: {sorted(clash)}")
    params: set[str] = set()
    table: dict[str, Union[App, Param]] = {}
    aux_count = [0]

    def fresh_aux() -> str:
        while True:
            name = f"_g{aux_count[0]}"
            aux_count[0] += 1
            if name not in declared and name not in sig:
                declared.add(name)
                variables.append(name)
                return name

    def flatten_arg(expr: str, lineno: int) -> Union[str, Param]:
        expr = expr.strip()
        if expr.startswith("$"):
            params.add(expr[1:])
            return Param(expr[1:])
        if "(" in expr or expr in sig:
            aux = fresh_aux()
            table[aux] = parse_app(expr, lineno)
            return aux
        if expr in declared:
            return expr
        raise ParseError(f"unknown name {expr!r}", lineno)

    def split_args(inner: str, lineno: int) -> list[str]:
        args = []
        depth = 0
        current = []
        for ch in inner:
            if ch == "," and depth == 0:
                args.append("".join(current))
                current = []
                continue
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth < 0:
                    raise ParseError("unbalanced parentheses", lineno)
            current.append(ch)
        if depth != 0:
            raise ParseError("unbalanced parentheses", lineno)
        tail = "".join(current).strip()
        if tail:
            args.append(tail)
        elif args:
            raise ParseError("empty argument", lineno)
        return args

    def parse_app(expr: str, lineno: int) -> App:
        expr = expr.strip()
        if "(" in expr:
            if not expr.endswith(")"):
                raise ParseError(f"unbalanced parentheses in {expr!r}", lineno)
            name, _, inner = expr.partition("(")
            raw_args = split_args(inner[:-1], lineno)
        else:
            name, raw_args = expr, []
        name = name.strip()
        if name not in sig:
            raise ParseError(f"unknown symbol {name!r}", lineno)
        if len(raw_args) != sig.arity(name):
            raise ParseError(
                f"{name} expects {sig.arity(name)} arguments, got {len(raw_args)}", lineno
            )
        return App(name, tuple(flatten_arg(a, lineno) for a in raw_args))

    for lineno, x, rhs in lines:
        if rhs.startswith("$"):
            params.add(rhs[1:])
            table[x] = Param(rhs[1:])
        elif rhs in declared:
            raise UnguardedError(f"{x} = {rhs}", lineno)
        else:
            table[x] = parse_app(rhs, lineno)

    try:
        return EquationSystem(sig, variables, params, table)
    except UnguardedError:
        raise
    except RegularTreeError as exc:
        raise ParseError(str(exc)) from None


def random_guarded_system(rng: random.Random, max_vars: int = 8, max_params: int = 4,
                          max_arity: int = 3) -> EquationSystem:
    """Seeded generator used by the law and uniqueness suites: at least two
    symbols per arity so perturbations are always possible."""
    symbols = {}
    for ar in range(max_arity + 1):
        for copy in range(2):
            symbols[f"f{ar}{chr(ord('a') + copy)}"] = ar
    sig = Signature(symbols)
    nvars = rng.randint(1, max_vars)
    nparams = rng.randint(0, max_params)
    variables = [f"x{i}" for i in range(nvars)]
    params = [f"y{i}" for i in range(nparams)]
    names = list(symbols)
    rhs: dict[str, Union[App, Param]] = {}
    for x in variables:
        if params and rng.random() < 0.15:
            rhs[x] = Param(rng.choice(params))
            continue
        sym = rng.choice(names)
        args = []
        for _ in range(sig.arity(sym)):
            if params and rng.random() < 0.3:
                args.append(Param(rng.choice(params)))
            else:
                args.append(rng.choice(variables))
        rhs[x] = App(sym, tuple(args))
    return EquationSystem(sig, variables, params, rhs)

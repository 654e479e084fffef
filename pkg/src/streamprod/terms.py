"""Sorts, symbols, terms, positions and substitutions.

Terms are immutable; ``App`` caches its hash and size so that terms can be
used as dictionary keys by the strategy engine without re-walking them.
Positions are tuples of 1-based argument indices, ``()`` being the root.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, Iterator, Mapping, Optional, Tuple, Union

Position = Tuple[int, ...]
ROOT: Position = ()


class Sort(enum.Enum):
    DATA = "d"
    STREAM = "s"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Symbol:
    name: str
    data_arity: int
    stream_arity: int
    result: Sort

    def __post_init__(self):
        if self.result is Sort.DATA and self.stream_arity:
            raise ValueError(f"data symbol {self.name} cannot take stream arguments")
        object.__setattr__(self, "_hash", hash((self.name, self.data_arity, self.stream_arity, self.result)))

    def __hash__(self):
        return self._hash

    @property
    def arity(self) -> int:
        return self.data_arity + self.stream_arity

    def arg_sort(self, i: int) -> Sort:
        """Sort of the i-th argument (0-based); data arguments come first."""
        if not 0 <= i < self.arity:
            raise IndexError(f"{self.name} has no argument {i + 1}")
        return Sort.DATA if i < self.data_arity else Sort.STREAM

    def signature_str(self) -> str:
        args = ["d"] * self.data_arity + ["s"] * self.stream_arity
        if not args:
            return str(self.result)
        return " ".join(args) + " -> " + str(self.result)

    def __str__(self) -> str:
        return self.name


CONS = Symbol(":", 1, 1, Sort.STREAM)
OVERFLOW = Symbol("overflow", 0, 0, Sort.STREAM)


class SortError(ValueError):
    pass


class PositionError(ValueError):
    pass


class Var:
    __slots__ = ("name", "sort", "_hash")

    def __init__(self, name: str, sort: Sort):
        self.name = name
        self.sort = sort
        self._hash = hash(("var", name, sort))

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Var) and other.name == self.name and other.sort is self.sort

    def __hash__(self):
        return self._hash

    @property
    def size(self) -> int:
        return 1

    @property
    def ground(self) -> bool:
        return False

    def __repr__(self):
        return f"Var({self.name!r}, {self.sort})"

    def __str__(self):
        return self.name


class App:
    __slots__ = ("symbol", "args", "_hash", "size", "ground")

    def __init__(self, symbol: Symbol, args: Tuple["Term", ...] = ()):
        args = tuple(args)
        if len(args) != symbol.arity:
            raise SortError(f"{symbol.name} expects {symbol.arity} arguments, got {len(args)}")
        for i, a in enumerate(args):
            if sort_of(a) is not symbol.arg_sort(i):
                raise SortError(
                    f"argument {i + 1} of {symbol.name} must have sort {symbol.arg_sort(i)}: {a}"
                )
        self.symbol = symbol
        self.args = args
        self._hash = hash((symbol, args))
        self.size = 1 + sum(a.size for a in args)
        self.ground = all(a.ground for a in args)

    @classmethod
    def _unchecked(cls, symbol: Symbol, args: Tuple["Term", ...]) -> "App":
        # for rebuilding well-sorted terms, skipping the sort checks
        t = object.__new__(cls)
        t.symbol = symbol
        t.args = args
        t._hash = hash((symbol, args))
        size, ground = 1, True
        for a in args:
            size += a.size
            ground = ground and a.ground
        t.size, t.ground = size, ground
        return t

    def __eq__(self, other):
        # iterative, so that very deep terms compare without recursion
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if type(a) is not type(b):
                return False
            if isinstance(a, Var):
                if not Var.__eq__(a, b):
                    return False
                continue
            if a._hash != b._hash or a.symbol != b.symbol:
                return False
            stack.extend(zip(a.args, b.args))
        return True

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"App({self.symbol.name!r}, {self.args!r})"

    def __str__(self):
        return show(self)


Term = Union[Var, App]
Substitution = Dict[Var, Term]


def sort_of(t: Term) -> Sort:
    return t.sort if isinstance(t, Var) else t.symbol.result


def app(symbol: Symbol, *args: Term) -> App:
    return App(symbol, args)


def cons(head: Term, tail: Term) -> App:
    return App(CONS, (head, tail))


def root_symbol(t: Term) -> Optional[Symbol]:
    return t.symbol if isinstance(t, App) else None


def is_cons(t: Term) -> bool:
    return isinstance(t, App) and t.symbol == CONS


def show(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if t.symbol == CONS:
        return f"{show(t.args[0])}:{show(t.args[1])}"
    if not t.args:
        return t.symbol.name
    return f"{t.symbol.name}({', '.join(show(a) for a in t.args)})"


def variables(t: Term) -> Iterator[Var]:
    """Variables of t in left-to-right order, with repetitions."""
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from variables(a)


def symbols(t: Term) -> Iterator[Symbol]:
    if isinstance(t, App):
        yield t.symbol
        for a in t.args:
            yield from symbols(a)


# -- positions ---------------------------------------------------------------

def positions(t: Term) -> list:
    """All positions of t in pre-order (which is also lexicographic order)."""
    out = [ROOT]
    if isinstance(t, App):
        for i, a in enumerate(t.args, 1):
            out.extend((i,) + p for p in positions(a))
    return out


def is_prefix(p: Position, q: Position) -> bool:
    """p <= q: p lies above or at q."""
    return len(p) <= len(q) and q[: len(p)] == p


def is_proper_prefix(p: Position, q: Position) -> bool:
    return len(p) < len(q) and q[: len(p)] == p


def independent(p: Position, q: Position) -> bool:
    return not is_prefix(p, q) and not is_prefix(q, p)


def strip_prefix(q: Position, p: Position) -> Position:
    """q with the prefix p removed; only defined when p <= q."""
    if not is_prefix(p, q):
        raise PositionError(f"{fmt_pos(p)} is not a prefix of {fmt_pos(q)}")
    return q[len(p):]


def fmt_pos(p: Position) -> str:
    return ".".join(map(str, p)) if p else "ε"


def parse_pos(s: str) -> Position:
    s = s.strip()
    if s in ("", "ε", "eps", "e"):
        return ROOT
    return tuple(int(x) for x in s.split("."))


def subterm_at(t: Term, p: Position) -> Term:
    for i in p:
        if isinstance(t, Var) or not 1 <= i <= len(t.args):
            raise PositionError(f"position {fmt_pos(p)} out of range")
        t = t.args[i - 1]
    return t


def path_to(t: Term, p: Position) -> list:
    """The subterms of t at every prefix of p, root first."""
    out = [t]
    for i in p:
        if isinstance(t, Var) or not 1 <= i <= len(t.args):
            raise PositionError(f"position {fmt_pos(p)} out of range")
        t = t.args[i - 1]
        out.append(t)
    return out


def splice(t: Term, p: Position, new: Term) -> Term:
    """t with the subterm at p replaced by new (written t[new]_p)."""
    if not p:
        return new
    path = path_to(t, p)
    old = path[-1]
    if sort_of(old) is not sort_of(new):
        raise SortError(f"cannot replace {old} of sort {sort_of(old)} by {new}")
    for node, i in zip(reversed(path[:-1]), reversed(p)):
        new = App._unchecked(node.symbol, node.args[: i - 1] + (new,) + node.args[i:])
    return new


# -- substitutions -----------------------------------------------------------

def substitute(t: Term, s: Mapping[Var, Term]) -> Term:
    if isinstance(t, Var):
        return s.get(t, t)
    if not t.args or t.ground:
        return t
    return App(t.symbol, tuple(substitute(a, s) for a in t.args))


def match(pattern: Term, subject: Term) -> Optional[Substitution]:
    """Substitution s with pattern.s == subject, or None.

    Variables occurring in the subject are opaque constants here.
    """
    s: Substitution = {}
    stack = [(pattern, subject)]
    while stack:
        pat, sub = stack.pop()
        if isinstance(pat, Var):
            if sort_of(sub) is not pat.sort:
                return None
            bound = s.get(pat)
            if bound is None:
                s[pat] = sub
            elif bound != sub:
                return None
        elif isinstance(sub, Var) or sub.symbol != pat.symbol:
            return None
        else:
            stack.extend(zip(pat.args, sub.args))
    return s


def occurs(v: Var, t: Term) -> bool:
    if isinstance(t, Var):
        return t == v
    return any(occurs(v, a) for a in t.args)


def unify(t1: Term, t2: Term) -> Optional[Substitution]:
    """Most general unifier of t1 and t2 (idempotent), or None."""
    s: Substitution = {}
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        a = substitute(a, s)
        b = substitute(b, s)
        if a == b:
            continue
        if isinstance(b, Var) and not isinstance(a, Var):
            a, b = b, a
        if isinstance(a, Var):
            if a.sort is not sort_of(b) or occurs(a, b):
                return None
            binding = {a: b}
            s = {v: substitute(u, binding) for v, u in s.items()}
            s[a] = b
        elif a.symbol != b.symbol:
            return None
        else:
            stack.extend(zip(a.args, b.args))
    return s


def rename(t: Term, suffix: str) -> Term:
    return substitute(t, {v: Var(v.name + suffix, v.sort) for v in set(variables(t))})


def variable_positions(t: Term) -> Dict[Var, list]:
    out: Dict[Var, list] = {}
    for p in positions(t):
        sub = subterm_at(t, p)
        if isinstance(sub, Var):
            out.setdefault(sub, []).append(p)
    return out


def residuals(q: Position, t: Term, p: Position, lhs: Term, rhs: Term) -> set:
    """Descendants in the reduct of position q of t under the step t ->_p
    with the left-linear rule lhs -> rhs.
    """
    redex = subterm_at(t, p)
    if match(lhs, redex) is None:
        raise ValueError(f"{lhs} does not match {redex} at {fmt_pos(p)}")
    subterm_at(t, q)
    if not is_prefix(p, q):
        return {q}
    w = strip_prefix(q, p)
    for var, occ in variable_positions(lhs).items():
        if len(occ) != 1:
            raise ValueError(f"rule {lhs} -> {rhs} is not left-linear")
        (vp,) = occ
        if is_prefix(vp, w):
            below = strip_prefix(w, vp)
            return {p + rp + below for rp in variable_positions(rhs).get(var, [])}
    return set()

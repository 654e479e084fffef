"""Rewrite rules and systems, plus the static checks orthogonality needs."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from .terms import (
    CONS,
    Position,
    ROOT,
    Substitution,
    Symbol,
    Term,
    Var,
    fmt_pos,
    match,
    positions,
    rename,
    sort_of,
    splice,
    substitute,
    subterm_at,
    symbols,
    unify,
    variables,
)


class RuleError(ValueError):
    pass


class NoMatch(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term
    label: str = ""

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise RuleError(f"left-hand side of {self.label or 'rule'} is a variable")
        if sort_of(self.lhs) is not sort_of(self.rhs):
            raise RuleError(f"{self}: sides have different sorts")
        extra = set(variables(self.rhs)) - set(variables(self.lhs))
        if extra:
            names = ", ".join(sorted(v.name for v in extra))
            raise RuleError(f"{self}: right-hand side variables {names} not bound by lhs")

    @property
    def root(self) -> Symbol:
        return self.lhs.symbol

    def is_left_linear(self) -> bool:
        counts = Counter(variables(self.lhs))
        return all(n == 1 for n in counts.values())

    def apply(self, t: Term) -> Optional[Term]:
        s = match(self.lhs, t)
        return None if s is None else substitute(self.rhs, s)

    def __str__(self):
        from .terms import show

        return f"{show(self.lhs)} -> {show(self.rhs)}"


@dataclass(frozen=True)
class Trs:
    signature: frozenset
    rules: Tuple[Rule, ...]
    _by_root: Dict[Symbol, Tuple[Rule, ...]] = field(
        default=None, init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "signature", frozenset(self.signature))
        index: Dict[Symbol, list] = {}
        for r in self.rules:
            for f in set(symbols(r.lhs)) | set(symbols(r.rhs)):
                if f not in self.signature:
                    raise RuleError(f"symbol {f.name} of rule {r} not in signature")
            index.setdefault(r.root, []).append(r)
        object.__setattr__(self, "_by_root", {k: tuple(v) for k, v in index.items()})
        depth = max((_depth(r.lhs) for r in self.rules), default=0)
        object.__setattr__(self, "lhs_depth", depth)

    @classmethod
    def from_rules(cls, rules: Iterable[Rule], extra_symbols: Iterable[Symbol] = ()) -> "Trs":
        rules = tuple(rules)
        sig = set(extra_symbols) | {CONS}
        for r in rules:
            sig.update(symbols(r.lhs))
            sig.update(symbols(r.rhs))
        return cls(frozenset(sig), rules)

    def rule(self, label: str) -> Rule:
        for r in self.rules:
            if r.label == label:
                return r
        raise KeyError(label)

    def rules_for(self, f: Symbol) -> Tuple[Rule, ...]:
        return self._by_root.get(f, ())

    def find_match(self, t: Term) -> Optional[Tuple[Rule, Substitution]]:
        """First rule (in input order) whose lhs matches t at the root."""
        if isinstance(t, Var):
            return None
        for r in self._by_root.get(t.symbol, ()):
            s = match(r.lhs, t)
            if s is not None:
                return r, s
        return None

    def is_redex(self, t: Term) -> bool:
        return self.find_match(t) is not None

    def matching_rules(self, t: Term) -> List[Rule]:
        if isinstance(t, Var):
            return []
        return [r for r in self._by_root.get(t.symbol, ()) if match(r.lhs, t) is not None]


def _depth(t: Term) -> int:
    """Length of the longest position of t."""
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(_depth(a) for a in t.args)


def is_left_linear(trs: Trs) -> Tuple[bool, Optional[Rule]]:
    for r in trs.rules:
        if not r.is_left_linear():
            return False, r
    return True, None


@dataclass(frozen=True)
class Overlap:
    outer: Rule
    inner: Rule
    position: Position
    unifier: Substitution = field(compare=False, hash=False)

    def __str__(self):
        return f"{self.inner.label or self.inner} overlaps {self.outer.label or self.outer} at {fmt_pos(self.position)}"


def critical_overlaps(trs: Trs) -> List[Overlap]:
    """Overlaps (outer, inner, p): inner's lhs unifies with outer's lhs at the
    non-variable position p. Root overlaps of distinct rules are reported once,
    for the earlier rule as outer; a rule's overlap with itself at the root is
    not an overlap.
    """
    out = []
    rules = trs.rules
    for i, r1 in enumerate(rules):
        l1 = rename(r1.lhs, "#1")
        for j, r2 in enumerate(rules):
            l2 = rename(r2.lhs, "#2")
            for p in positions(l1):
                sub = subterm_at(l1, p)
                if isinstance(sub, Var):
                    continue
                if p == ROOT and j <= i:
                    continue
                mgu = unify(sub, l2)
                if mgu is not None:
                    out.append(Overlap(r1, r2, p, mgu))
    return out


def is_orthogonal(trs: Trs) -> bool:
    return is_left_linear(trs)[0] and not critical_overlaps(trs)


def constructors(trs: Trs) -> frozenset:
    defined = {r.root for r in trs.rules}
    return frozenset(f for f in trs.signature if f not in defined)


def redex_positions(trs: Trs, t: Term) -> List[Position]:
    return [p for p in positions(t) if trs.is_redex(subterm_at(t, p))]


def maximal_redex_positions(trs: Trs, t: Term) -> List[Position]:
    """Redex positions with no redex strictly above them, leftmost first."""
    out: List[Position] = []
    stack = [(t, ROOT)]
    while stack:
        u, p = stack.pop()
        if isinstance(u, Var):
            continue
        if trs.is_redex(u):
            out.append(p)
            continue
        stack.extend((a, p + (i,)) for i, a in reversed(list(enumerate(u.args, 1))))
    return out


def has_redex_above(trs: Trs, t: Term, p: Position) -> bool:
    return any(trs.is_redex(subterm_at(t, p[:k])) for k in range(len(p)))


def apply_rule_at(trs: Optional[Trs], t: Term, p: Position, rule: Optional[Rule] = None) -> Term:
    """Rewrite t at p. Without an explicit rule the matching rule of trs is used."""
    sub = subterm_at(t, p)
    if rule is None:
        found = trs.find_match(sub) if trs is not None else None
        if found is None:
            raise NoMatch(f"no rule matches {sub} at {fmt_pos(p)}")
        rule, s = found
    else:
        s = match(rule.lhs, sub)
        if s is None:
            raise NoMatch(f"rule {rule} does not match {sub} at {fmt_pos(p)}")
    return splice(t, p, substitute(rule.rhs, s))


def rules_str(rules: Iterable[Rule]) -> str:
    return "\n".join(str(r) for r in rules)

"""Stream specifications: validation, unfolding and the overflow extension."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .terms import (
    App,
    CONS,
    OVERFLOW,
    Position,
    ROOT,
    Sort,
    Symbol,
    Term,
    Var,
    cons,
    is_cons,
    show,
    substitute,
    subterm_at,
    symbols,
)
from .trs import (
    Rule,
    RuleError,
    Trs,
    critical_overlaps,
    is_left_linear,
)

X = Var("x", Sort.DATA)
SIGMA = Var("sigma", Sort.STREAM)
OVERFLOW_RULE = Rule(cons(X, SIGMA), App(OVERFLOW), "overflow")

DATA_TERMINATION_DEPTH = 4
DATA_TERMINATION_BUDGET = 10_000
DATA_TERMINATION_MAX_TERMS = 5_000


class UnfoldError(ValueError):
    pass


@dataclass(frozen=True)
class StreamSpec:
    data_symbols: frozenset
    stream_symbols: frozenset
    data_rules: Tuple[Rule, ...]
    stream_rules: Tuple[Rule, ...]
    name: str = ""

    @classmethod
    def from_rules(cls, decls: Iterable[Symbol], rules: Iterable[Rule], name: str = "") -> "StreamSpec":
        """Partition rules by the result sort of their lhs root."""
        decls = [f for f in decls if f != CONS]
        data = [r for r in rules if r.root.result is Sort.DATA]
        stream = [r for r in rules if r.root.result is Sort.STREAM]
        return cls(
            frozenset(f for f in decls if f.result is Sort.DATA),
            frozenset(f for f in decls if f.result is Sort.STREAM),
            tuple(data),
            tuple(stream),
            name,
        )

    @property
    def rules(self) -> Tuple[Rule, ...]:
        return self.data_rules + self.stream_rules

    @property
    def symbols(self) -> frozenset:
        return self.data_symbols | self.stream_symbols | {CONS}

    @property
    def trs(self) -> Trs:
        return Trs(self.symbols, self.rules)

    @property
    def data_trs(self) -> Trs:
        return Trs(self.data_symbols, self.data_rules)

    def symbol(self, name: str) -> Symbol:
        for f in self.symbols:
            if f.name == name:
                return f
        raise KeyError(name)

    def ordered_symbols(self) -> List[Symbol]:
        """Symbols in a stable order: data before stream, then by name."""
        return sorted(self.data_symbols, key=lambda f: f.name) + sorted(
            self.stream_symbols, key=lambda f: f.name
        )

    @property
    def universe(self) -> "DataUniverse":
        return DataUniverse.of(self)


@dataclass(frozen=True)
class DataUniverse:
    """D: ground constructor terms of the data signature."""

    constructors: frozenset

    @classmethod
    def of(cls, spec: StreamSpec) -> "DataUniverse":
        defined = {r.root for r in spec.data_rules}
        return cls(frozenset(f for f in spec.data_symbols if f not in defined))

    @property
    def infinite(self) -> bool:
        has_base = any(f.arity == 0 for f in self.constructors)
        return has_base and any(f.arity > 0 for f in self.constructors)

    def enumerate(self, max_size: int) -> List[Term]:
        return ground_terms(self.constructors, Sort.DATA, max_size)


@dataclass(frozen=True)
class Violation:
    requirement: str
    detail: str
    evidence: Optional[str] = None

    def __str__(self):
        s = f"[{self.requirement}] {self.detail}"
        return s + (f": {self.evidence}" if self.evidence else "")


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)
    assumptions: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def add(self, requirement: str, detail: str, evidence=None):
        self.violations.append(Violation(requirement, detail, None if evidence is None else str(evidence)))

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "violations": [
                {"requirement": v.requirement, "detail": v.detail, "evidence": v.evidence}
                for v in self.violations
            ],
            "assumptions": list(self.assumptions),
        }


# -- term enumeration --------------------------------------------------------

def ground_terms(syms: Iterable[Symbol], sort: Sort, max_size: int) -> List[Term]:
    """All ground terms of the given sort with at most max_size symbols,
    ordered by size and then by symbol name."""
    syms = tuple(sorted(set(syms), key=lambda f: (f.name, f.data_arity, f.stream_arity)))

    @lru_cache(maxsize=None)
    def exact(s: Sort, n: int) -> Tuple[Term, ...]:
        if n <= 0:
            return ()
        out = []
        for f in syms:
            if f.result is not s:
                continue
            if f.arity == 0:
                if n == 1:
                    out.append(App(f))
                continue
            sorts = [f.arg_sort(i) for i in range(f.arity)]
            for sizes in _compositions(n - 1, f.arity):
                pools = [exact(so, k) for so, k in zip(sorts, sizes)]
                for args in itertools.product(*pools):
                    out.append(App(f, args))
        return tuple(out)

    result: List[Term] = []
    for n in range(1, max_size + 1):
        result.extend(exact(sort, n))
    return result


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def terms_up_to_depth(syms: Iterable[Symbol], sort: Sort, depth: int, limit: int) -> List[Term]:
    """Ground terms of depth <= depth, at most limit of them (shallow first)."""
    syms = sorted(set(syms), key=lambda f: f.name)
    levels: Dict[Sort, List[Term]] = {Sort.DATA: [], Sort.STREAM: []}
    for _ in range(depth):
        nxt: Dict[Sort, List[Term]] = {Sort.DATA: [], Sort.STREAM: []}
        seen = set()
        for f in syms:
            pools = [levels[f.arg_sort(i)] for i in range(f.arity)]
            for args in itertools.product(*pools):
                t = App(f, args)
                if t not in seen:
                    seen.add(t)
                    nxt[f.result].append(t)
                if len(nxt[sort]) >= limit:
                    break
        if nxt == levels:
            break
        levels = nxt
    return levels[sort][:limit]


def term_depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 1
    return 1 + max(term_depth(a) for a in t.args)


# -- data normalisation ------------------------------------------------------

class BudgetExceeded(RuntimeError):
    pass


def normalize_data(trs: Trs, t: Term, budget: int = DATA_TERMINATION_BUDGET) -> Term:
    """Innermost normal form of a data term; raises BudgetExceeded."""
    steps = [0]

    def norm(u: Term) -> Term:
        while True:
            if isinstance(u, Var):
                return u
            if u.args:
                args = tuple(norm(a) for a in u.args)
                if args != u.args:
                    u = App(u.symbol, args)
            found = trs.find_match(u)
            if found is None:
                return u
            steps[0] += 1
            if steps[0] > budget:
                raise BudgetExceeded(f"data term did not normalise within {budget} steps")
            rule, s = found
            u = substitute(rule.rhs, s)

    return norm(t)


# -- validation ----------------------------------------------------------------

def _is_stream_arg_pattern(t: Term) -> bool:
    if isinstance(t, Var):
        return True
    return (
        is_cons(t)
        and isinstance(t.args[0], Var)
        and isinstance(t.args[1], Var)
    )


def _data_pattern_head(t: Term, ctors: frozenset) -> Tuple[bool, Optional[Symbol]]:
    """(ok, head) for a shallow data pattern; head None means wildcard."""
    if isinstance(t, Var):
        return True, None
    if t.symbol in ctors and all(isinstance(a, Var) for a in t.args):
        return True, t.symbol
    return False, None


def validate(spec: StreamSpec) -> ValidationReport:
    report = ValidationReport()
    sigma_d, sigma_s = spec.data_symbols, spec.stream_symbols
    universe = spec.universe
    ctors = universe.constructors

    if CONS in sigma_s:
        report.add("sorting", "':' must not be declared as a stream symbol")
    for f in sigma_d:
        if f.stream_arity:
            report.add("sorting", f"data symbol {f.name} takes stream arguments")
    clash = {f.name for f in sigma_d} & {f.name for f in sigma_s}
    for name in sorted(clash):
        report.add("sorting", "symbol declared with both sorts", name)

    for r in spec.data_rules:
        used = set(symbols(r.lhs)) | set(symbols(r.rhs))
        if r.root not in sigma_d or not used <= sigma_d:
            report.add("data-rules", "data rule uses symbols outside the data signature", r)

    shape_ok: Dict[Symbol, bool] = {f: True for f in sigma_s}
    for r in spec.stream_rules:
        f = r.root
        if f not in sigma_s:
            report.add("lhs-shape", f"lhs root {f.name} is not a declared stream symbol", r)
            continue
        used = set(symbols(r.lhs)) | set(symbols(r.rhs))
        if not used <= spec.symbols:
            report.add("sorting", "rule uses undeclared symbols", r)
        for i, arg in enumerate(r.lhs.args):
            if i < f.data_arity:
                ok, _ = _data_pattern_head(arg, ctors)
                if not ok:
                    shape_ok[f] = False
                    report.add(
                        "lhs-shape",
                        f"data argument {i + 1} must be a variable or a constructor applied to variables",
                        r,
                    )
            elif not _is_stream_arg_pattern(arg):
                shape_ok[f] = False
                report.add(
                    "lhs-shape",
                    f"stream argument {i + 1} must be a variable or x:sigma (unfolding required)",
                    r,
                )

    trs = Trs(spec.symbols | {r.root for r in spec.rules}, spec.rules)
    linear, offender = is_left_linear(trs)
    if not linear:
        for r in trs.rules:
            if not r.is_left_linear():
                report.add("left-linear", "repeated variable in left-hand side", r)
    for ov in critical_overlaps(trs):
        report.add(
            "overlap",
            f"rules {_rule_name(ov.outer)} and {_rule_name(ov.inner)} overlap",
            f"{show(subterm_at(ov.outer.lhs, ov.position))} at position {'.'.join(map(str, ov.position)) or 'ε'}",
        )

    for f in sorted(sigma_s, key=lambda g: g.name):
        if not shape_ok[f]:
            continue
        witness = uncovered_instance(spec, f)
        if witness is not None:
            report.add("exhaustive", f"no rule matches every instance of {f.name}", show(witness))

    _check_data_termination(spec, report)
    return report


def _rule_name(r: Rule) -> str:
    return f"'{r.label}'" if r.label else f"'{r}'"


def uncovered_instance(spec: StreamSpec, f: Symbol) -> Optional[Term]:
    """A term f(u.., x:sigma..) matching no lhs, or None if f's rules are
    exhaustive. Data patterns must be shallow (constructor over variables)."""
    ctors = spec.universe.constructors
    rows = []
    for r in spec.stream_rules:
        if r.root != f:
            continue
        rows.append(tuple(_data_pattern_head(a, ctors)[1] for a in r.lhs.args[: f.data_arity]))
    heads = _uncovered(tuple(rows), f.data_arity, ctors)
    if heads is None:
        return None
    counter = itertools.count(1)
    args: List[Term] = []
    for h in heads:
        if h is None:
            args.append(Var(f"x{next(counter)}", Sort.DATA))
        else:
            args.append(App(h, tuple(Var(f"x{next(counter)}", Sort.DATA) for _ in range(h.arity))))
    if f.stream_arity == 1:
        args.append(SIGMA)
    else:
        args.extend(Var(f"sigma{k}", Sort.STREAM) for k in range(1, f.stream_arity + 1))
    return App(f, tuple(args))


def _uncovered(rows, ncols: int, ctors: frozenset):
    if ncols == 0:
        return None if rows else []
    if not ctors:
        # no ground data terms, so every instance is vacuously covered
        return None
    used = {r[0] for r in rows if r[0] is not None}
    if used >= ctors:
        for c in sorted(ctors, key=lambda g: g.name):
            w = _uncovered(tuple(r[1:] for r in rows if r[0] in (None, c)), ncols - 1, ctors)
            if w is not None:
                return [c] + w
        return None
    w = _uncovered(tuple(r[1:] for r in rows if r[0] is None), ncols - 1, ctors)
    if w is None:
        return None
    missing = sorted(ctors - used, key=lambda g: g.name)[0]
    return [missing] + w


def _check_data_termination(spec: StreamSpec, report: ValidationReport):
    if not spec.data_rules:
        return
    trs = spec.data_trs
    candidates = terms_up_to_depth(
        spec.data_symbols, Sort.DATA, DATA_TERMINATION_DEPTH, DATA_TERMINATION_MAX_TERMS
    )
    for t in candidates:
        try:
            normalize_data(trs, t, DATA_TERMINATION_BUDGET)
        except (BudgetExceeded, RecursionError):
            report.add("data-termination", "data rules do not terminate within budget", show(t))
            return
    if any(f.arity > 0 for f in spec.data_symbols):
        report.assumptions.append(
            f"termination of data rules assumed: checked {len(candidates)} ground terms "
            f"of depth <= {DATA_TERMINATION_DEPTH} only"
        )


# -- derived systems -----------------------------------------------------------

def extend_with_overflow(spec: StreamSpec) -> Trs:
    if any(f.name == OVERFLOW.name for f in spec.symbols):
        raise RuleError("specification already uses the symbol 'overflow'")
    return Trs(spec.symbols | {OVERFLOW}, spec.rules + (OVERFLOW_RULE,))


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    reason: str

    def __bool__(self):
        return self.ok


def balancedness_free_check(spec: StreamSpec) -> CheckResult:
    """Whether every infinite outermost reduction is automatically balanced:
    no data rules and at most one stream argument per stream symbol."""
    reasons = []
    if spec.data_rules:
        names = ", ".join(_rule_name(r) for r in spec.data_rules)
        reasons.append(f"data rules present ({names})")
    for f in sorted(spec.stream_symbols, key=lambda g: g.name):
        if f.stream_arity > 1:
            reasons.append(f"{f.name} has {f.stream_arity} stream arguments")
    if reasons:
        return CheckResult(False, "; ".join(reasons))
    return CheckResult(True, "no data rules and every stream symbol has at most one stream argument")


def cons_reachability_check(spec: StreamSpec) -> CheckResult:
    """False when some ground stream term can never reach a ':' root."""
    if any(CONS in set(symbols(r.rhs)) for r in spec.stream_rules):
        return CheckResult(True, "some right-hand side contains ':'")
    has_data = bool(ground_terms(spec.data_symbols, Sort.DATA, 1)) or any(
        f.arity == 0 for f in spec.data_symbols
    )
    for f in sorted(spec.stream_symbols, key=lambda g: g.name):
        if f.stream_arity == 0 and (f.data_arity == 0 or has_data):
            return CheckResult(
                False, f"no right-hand side contains ':' so no ground term built from {f.name} ever produces"
            )
    return CheckResult(True, "no ':'-free ground stream term exists")


def find_redex_not_below_cons(spec: StreamSpec, t: Term, trs: Optional[Trs] = None) -> Position:
    """A redex position of ground t (root not ':') with no ':' above it,
    following the structural induction on t."""
    trs = trs or spec.trs
    if is_cons(t):
        raise ValueError("term already has ':' at the root")
    if trs.is_redex(t):
        return ROOT
    f = t.symbol
    for i in range(f.data_arity):
        u = t.args[i]
        p = _any_redex(trs, u)
        if p is not None:
            return (i + 1,) + p
    for j in range(f.data_arity, f.arity):
        arg = t.args[j]
        if not is_cons(arg):
            return (j + 1,) + find_redex_not_below_cons(spec, arg, trs)
    raise ValueError(f"{show(t)} has no redex although its arguments are produced; the specification is not exhaustive")


def _any_redex(trs: Trs, u: Term) -> Optional[Position]:
    if isinstance(u, Var):
        return None
    if trs.is_redex(u):
        return ROOT
    for i, a in enumerate(u.args, 1):
        p = _any_redex(trs, a)
        if p is not None:
            return (i,) + p
    return None


# -- unfolding -------------------------------------------------------------------

def unfold(spec: StreamSpec) -> StreamSpec:
    """Rewrite stream rules that match data inside ':' or more than one ':'
    deep into the basic format by introducing auxiliary symbols."""
    trs = Trs(spec.symbols | {r.root for r in spec.rules}, spec.rules)
    linear, offender = is_left_linear(trs)
    if not linear:
        raise UnfoldError(f"rule {offender} is not left-linear")
    defined_data = {r.root for r in spec.data_rules}
    for r in spec.stream_rules:
        for arg in r.lhs.args:
            bad = defined_data & set(symbols(arg))
            if bad:
                name = sorted(g.name for g in bad)[0]
                raise UnfoldError(f"rule {r} matches on the defined data symbol {name}")

    taken = {f.name for f in spec.symbols}
    counters: Dict[str, int] = {}

    def fresh(base: str) -> str:
        n = counters.get(base, 0)
        while True:
            n += 1
            name = f"{base}{n}"
            if name not in taken:
                counters[base] = n
                taken.add(name)
                return name

    new_symbols: List[Symbol] = []
    out_rules: List[Rule] = []
    order: List[Symbol] = []
    grouped: Dict[Symbol, List[Rule]] = {}
    for r in spec.stream_rules:
        if r.root not in grouped:
            order.append(r.root)
            grouped[r.root] = []
        grouped[r.root].append(r)

    def bridge(f: Symbol, base: str, rules: List[Rule], col: int, j: Optional[int]) -> List[Rule]:
        # rules all have ':' in column col; j, when given, is a data column on
        # which they share one constructor, and g receives its arguments instead
        def data_args(args: Sequence[Term]) -> Tuple[Term, ...]:
            if j is None:
                return tuple(args)
            return tuple(args[:j]) + tuple(args[j].args) + tuple(args[j + 1:])

        ys: List[Term] = [Var(f"y{i}", Sort.DATA) for i in range(1, f.data_arity + 1)]
        if j is not None:
            c = rules[0].lhs.args[j].symbol
            ys[j] = App(c, tuple(Var(f"z{i}", Sort.DATA) for i in range(1, c.arity + 1)))
        g_data = data_args(ys)
        g = Symbol(fresh(base), len(g_data) + 1, f.stream_arity, Sort.STREAM)
        new_symbols.append(g)
        streams: List[Term] = []
        for k in range(f.data_arity, f.arity):
            streams.append(SIGMA if k == col else Var(f"tau{k - f.data_arity + 1}", Sort.STREAM))
        lhs_streams = [cons(X, SIGMA) if k + f.data_arity == col else s for k, s in enumerate(streams)]
        rule = Rule(
            App(f, tuple(ys) + tuple(lhs_streams)),
            App(g, g_data + (X,) + tuple(streams)),
            f"unfold-{g.name}",
        )
        moved = []
        for r in rules:
            args = r.lhs.args
            head, tail = args[col].args
            new_args = data_args(args[: f.data_arity]) + (head,) + tuple(
                tail if k == col else args[k] for k in range(f.data_arity, f.arity)
            )
            moved.append(Rule(App(g, new_args), r.rhs, r.label))
        return [rule] + process(g, base, moved)

    def process(f: Symbol, base: str, rules: List[Rule]) -> List[Rule]:
        col = _unfold_column(f, rules)
        if col is None:
            return list(rules)
        if all(is_cons(r.lhs.args[col]) for r in rules):
            return bridge(f, base, rules, col, None)
        j = _splitting_column(f, rules, col)
        if j is None:
            raise UnfoldError(
                f"rules for {f.name} mix variable and ':' patterns in argument {col + 1}"
            )
        groups: Dict[Symbol, List[Rule]] = {}
        for r in rules:
            groups.setdefault(r.lhs.args[j].symbol, []).append(r)
        out: List[Rule] = []
        for grp in groups.values():
            if is_cons(grp[0].lhs.args[col]):
                out.extend(bridge(f, base, grp, col, j))
            else:
                out.extend(process(f, base, grp))
        return out

    for f in order:
        out_rules.extend(process(f, f.name, grouped[f]))

    if not new_symbols:
        return spec
    return StreamSpec(
        spec.data_symbols,
        spec.stream_symbols | frozenset(new_symbols),
        spec.data_rules,
        tuple(out_rules),
        spec.name,
    )


def _unfold_column(f: Symbol, rules: Sequence[Rule]) -> Optional[int]:
    """Leftmost stream argument that some rule matches beyond x:sigma."""
    for k in range(f.data_arity, f.arity):
        for r in rules:
            arg = r.lhs.args[k]
            if is_cons(arg) and not (isinstance(arg.args[0], Var) and isinstance(arg.args[1], Var)):
                return k
    return None


def _splitting_column(f: Symbol, rules: Sequence[Rule], col: int) -> Optional[int]:
    """A data column where every rule has a constructor pattern and rules
    sharing a constructor agree on whether column col holds ':'."""
    for j in range(f.data_arity):
        pats = [r.lhs.args[j] for r in rules]
        if any(isinstance(p, Var) for p in pats):
            continue
        kinds: Dict[Symbol, set] = {}
        for r in rules:
            kinds.setdefault(r.lhs.args[j].symbol, set()).add(is_cons(r.lhs.args[col]))
        if all(len(k) == 1 for k in kinds.values()):
            return j
    return None


def needs_unfolding(spec: StreamSpec) -> bool:
    grouped: Dict[Symbol, List[Rule]] = {}
    for r in spec.stream_rules:
        grouped.setdefault(r.root, []).append(r)
    return any(_unfold_column(f, rs) is not None for f, rs in grouped.items())

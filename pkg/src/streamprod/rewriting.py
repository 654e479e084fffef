"""Single and parallel rewrite steps, reduction traces and trace surgery.

The surgery operations turn a mixed reduction into one where all outermost
steps come first, moving non-outermost (parallel) steps to the back while
keeping both endpoints fixed.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .terms import (
    Position,
    Substitution,
    Term,
    Var,
    fmt_pos,
    independent,
    is_prefix,
    match,
    residuals,
    show,
    substitute,
    subterm_at,
    variable_positions,
)
from .trs import NoMatch, Rule, Trs, apply_rule_at, has_redex_above, redex_positions


class Kind(enum.Enum):
    OUTERMOST = "outermost"
    NON_OUTERMOST = "nonOutermost"


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class Step:
    source: Term
    position: Position
    rule: Rule
    target: Term
    kind: Kind

    def __str__(self):
        mark = "o" if self.kind is Kind.OUTERMOST else "no"
        return f"{show(self.source)} -{mark}[{fmt_pos(self.position)}]-> {show(self.target)}"


@dataclass(frozen=True)
class ParallelStep:
    source: Term
    redexes: Tuple[Tuple[Position, Rule], ...]
    target: Term

    @property
    def positions(self) -> Tuple[Position, ...]:
        return tuple(p for p, _ in self.redexes)

    def __bool__(self):
        return True


@dataclass
class ReductionTrace:
    initial: Term
    steps: List[Step] = field(default_factory=list)

    @property
    def final(self) -> Term:
        return self.steps[-1].target if self.steps else self.initial

    def terms(self) -> List[Term]:
        return [self.initial] + [s.target for s in self.steps]

    def __len__(self):
        return len(self.steps)

    def check_chain(self):
        cur = self.initial
        for i, s in enumerate(self.steps):
            if s.source != cur:
                raise TraceError(f"step {i} does not start where step {i - 1} ended")
            cur = s.target


def classify_step(trs: Trs, t: Term, p: Position) -> Kind:
    if not trs.is_redex(subterm_at(t, p)):
        raise NoMatch(f"no redex at {fmt_pos(p)} in {show(t)}")
    return Kind.NON_OUTERMOST if has_redex_above(trs, t, p) else Kind.OUTERMOST


def make_step(trs: Trs, t: Term, p: Position, rule: Optional[Rule] = None) -> Step:
    sub = subterm_at(t, p)
    if rule is None:
        found = trs.find_match(sub)
        if found is None:
            raise NoMatch(f"no redex at {fmt_pos(p)} in {show(t)}")
        rule = found[0]
    target = apply_rule_at(trs, t, p, rule)
    return Step(t, p, rule, target, classify_step(trs, t, p))


def replay(trs: Trs, initial: Term, moves: Iterable[Tuple[Position, str]]) -> ReductionTrace:
    """Rebuild a trace from (position, rule label) pairs."""
    trace = ReductionTrace(initial)
    cur = initial
    for p, label in moves:
        step = make_step(trs, cur, p, trs.rule(label))
        trace.steps.append(step)
        cur = step.target
    return trace


# -- parallel steps --------------------------------------------------------------

def _pairwise_independent(ps: Sequence[Position]) -> bool:
    return all(independent(a, b) for a, b in itertools.combinations(ps, 2))


def _apply_all(t: Term, redexes: Iterable[Tuple[Position, Rule]]) -> Term:
    for p, rule in redexes:
        t = apply_rule_at(None, t, p, rule)
    return t


def parallel_step(trs: Trs, t: Term, redexes: Iterable) -> ParallelStep:
    """Contract pairwise independent redexes of t in one parallel step.

    redexes holds positions or (position, rule) pairs."""
    pairs = []
    for item in redexes:
        p, rule = item if isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], Rule) else (item, None)
        if rule is None:
            found = trs.find_match(subterm_at(t, p))
            if found is None:
                raise NoMatch(f"no redex at {fmt_pos(p)} in {show(t)}")
            rule = found[0]
        elif match(rule.lhs, subterm_at(t, p)) is None:
            raise NoMatch(f"rule {rule} does not match at {fmt_pos(p)}")
        pairs.append((tuple(p), rule))
    pairs.sort(key=lambda pr: pr[0])
    if not _pairwise_independent([p for p, _ in pairs]):
        raise TraceError("parallel step positions must be pairwise independent")
    target = _apply_all(t, pairs)
    if len(pairs) > 1 and _apply_all(t, reversed(pairs)) != target:
        raise AssertionError("parallel step depends on application order")
    return ParallelStep(t, tuple(pairs), target)


def unpack_parallel(trs: Trs, ps: ParallelStep) -> List[Step]:
    out = []
    cur = ps.source
    for p, rule in ps.redexes:
        step = make_step(trs, cur, p, rule)
        out.append(step)
        cur = step.target
    return out


def is_non_outermost_parallel(trs: Trs, ps: ParallelStep) -> bool:
    return all(has_redex_above(trs, ps.source, p) for p in ps.positions)


# -- parallel moves ----------------------------------------------------------------

@dataclass(frozen=True)
class JoinSquare:
    lhs_instance: Term
    rhs_instance: Term
    rhs_target: Term
    via_lhs: Tuple[ParallelStep, Term]
    via_rhs: Tuple[Term, ParallelStep]


def parallel_moves_join(
    rule: Rule,
    before: Substitution,
    after: Substitution,
    var_steps: Dict[Var, ParallelStep],
) -> JoinSquare:
    """Close the square lσ -> rσ, lσ ||-> lσ' with both paths ending in rσ'."""
    if not rule.is_left_linear():
        raise ValueError(f"rule {rule} is not left-linear")
    lhs_vars = variable_positions(rule.lhs)
    rhs_vars = variable_positions(rule.rhs)
    steps: Dict[Var, ParallelStep] = {}
    for x in lhs_vars:
        src, dst = substitute(x, before), substitute(x, after)
        step = var_steps.get(x)
        if step is None:
            if src != dst:
                raise ValueError(f"no parallel step given for variable {x.name}")
            step = ParallelStep(src, (), src)
        if step.source != src or step.target != dst:
            raise ValueError(f"step for {x.name} does not lead from {show(src)} to {show(dst)}")
        steps[x] = step

    lhs_inst = substitute(rule.lhs, before)
    rhs_inst = substitute(rule.rhs, before)

    lhs_redexes = [
        (vp + p, r) for x, (vp,) in lhs_vars.items() for p, r in steps[x].redexes
    ]
    lhs_par = ParallelStep(lhs_inst, tuple(sorted(lhs_redexes, key=lambda pr: pr[0])), _apply_all(lhs_inst, lhs_redexes))
    if match(rule.lhs, lhs_par.target) is None:
        raise AssertionError("rule no longer matches after the parallel step")
    end_a = substitute(rule.rhs, match(rule.lhs, lhs_par.target))

    rhs_redexes = [
        (wp + p, r) for x, occ in rhs_vars.items() for wp in occ for p, r in steps[x].redexes
    ]
    rhs_par = ParallelStep(rhs_inst, tuple(sorted(rhs_redexes, key=lambda pr: pr[0])), _apply_all(rhs_inst, rhs_redexes))
    end_b = rhs_par.target
    rhs_target = substitute(rule.rhs, after)
    if not (end_a == end_b == rhs_target):
        raise AssertionError("parallel moves square does not close")
    return JoinSquare(lhs_inst, rhs_inst, rhs_target, (lhs_par, end_a), (rhs_inst, rhs_par))


# -- swapping and splitting ---------------------------------------------------------

@dataclass
class SwapResult:
    first: Step
    middle: List[Step]
    rest: ParallelStep

    @property
    def source(self) -> Term:
        return self.first.source

    @property
    def target(self) -> Term:
        return self.rest.target

    def outermost_steps(self) -> List[Step]:
        return [self.first] + self.middle


def swap_no_then_o(trs: Trs, par: ParallelStep, step: Step) -> SwapResult:
    """Turn t1 ||no-> t2 -o[p]-> t3 into t1 -o[p]-> t -o*-> t' ||no-> t3."""
    if par.target != step.source:
        raise TraceError("segment does not chain")
    if step.kind is not Kind.OUTERMOST:
        raise TraceError("second step must be outermost")
    t1, p = par.source, step.position
    if not is_non_outermost_parallel(trs, par):
        raise TraceError("parallel step contains an outermost position")
    moved: List[Tuple[Position, Rule]] = []
    for q, rule in par.redexes:
        if is_prefix(q, p):
            raise TraceError(
                f"non-outermost position {fmt_pos(q)} lies above {fmt_pos(p)}; system not orthogonal?"
            )
        if independent(q, p):
            moved.append((q, rule))
        else:
            for q2 in residuals(q, t1, p, step.rule.lhs, step.rule.rhs):
                moved.append((q2, rule))
    first = make_step(trs, t1, p, step.rule)
    if first.kind is not Kind.OUTERMOST:
        raise TraceError(f"step at {fmt_pos(p)} is not outermost in {show(t1)}; system not orthogonal?")
    middle, rest = _outermost_first(trs, first.target, moved)
    if rest.target != step.target:
        raise AssertionError("swap changed the endpoint")
    return SwapResult(first, middle, rest)


def _outermost_first(trs: Trs, t: Term, redexes: List[Tuple[Position, Rule]]):
    """Contract the outermost ones among independent redexes one by one; the
    remaining non-outermost ones form a single parallel step."""
    pending = sorted(redexes, key=lambda pr: pr[0])
    steps: List[Step] = []
    cur = t
    progress = True
    while progress:
        progress = False
        for i, (q, rule) in enumerate(pending):
            if not has_redex_above(trs, cur, q):
                step = make_step(trs, cur, q, rule)
                steps.append(step)
                cur = step.target
                del pending[i]
                progress = True
                break
    return steps, ParallelStep(cur, tuple(pending), _apply_all(cur, pending))


def pack_non_outermost(trs: Trs, steps: Sequence[Step]) -> List[ParallelStep]:
    """Group consecutive non-outermost steps into parallel steps where the
    positions are independent and still non-outermost in the group's source."""
    out: List[ParallelStep] = []
    group: List[Tuple[Position, Rule]] = []
    src: Optional[Term] = None
    for s in steps:
        if s.kind is not Kind.NON_OUTERMOST:
            raise TraceError("only non-outermost steps can be packed")
        if src is not None and all(independent(s.position, q) for q, _ in group) and has_redex_above(
            trs, src, s.position
        ):
            group.append((s.position, s.rule))
            continue
        if src is not None:
            out.append(ParallelStep(src, tuple(group), s.source))
        src, group = s.source, [(s.position, s.rule)]
    if src is not None:
        out.append(ParallelStep(src, tuple(group), steps[-1].target))
    return out


def split_trace(trs: Trs, trace: ReductionTrace) -> Tuple[ReductionTrace, ReductionTrace]:
    """Reorder a finite trace into outermost steps followed by non-outermost ones."""
    trace.check_chain()
    outer: List[Step] = []
    inner: List[ParallelStep] = []
    fresh: List[Step] = []
    for s in trace.steps:
        step = make_step(trs, s.source, s.position, s.rule)
        if step.kind is Kind.NON_OUTERMOST:
            fresh.append(step)
            continue
        inner.extend(pack_non_outermost(trs, fresh))
        fresh = []
        pending = [step]
        for k in range(len(inner) - 1, -1, -1):
            par = inner[k]
            new_pending: List[Step] = []
            for o in pending:
                res = swap_no_then_o(trs, par, o)
                new_pending.extend(res.outermost_steps())
                par = res.rest
            inner[k] = par
            pending = new_pending
        outer.extend(pending)
    inner.extend(pack_non_outermost(trs, fresh))
    prefix = ReductionTrace(trace.initial, outer)
    suffix_steps = [st for par in inner for st in unpack_parallel(trs, par)]
    suffix = ReductionTrace(prefix.final, suffix_steps)
    if suffix.final != trace.final:
        raise AssertionError("split changed the endpoint")
    if any(st.kind is not Kind.NON_OUTERMOST for st in suffix_steps):
        raise AssertionError("suffix contains an outermost step")
    return prefix, suffix


# -- balance --------------------------------------------------------------------------

def check_balanced_prefix(trs: Trs, trace: ReductionTrace) -> List[Tuple[int, Position]]:
    """Obligations (i, q) never discharged in the trace: q is a redex position
    of the i-th term and no step j >= i is at a position above or at q."""
    for s in trace.steps:
        if s.kind is not Kind.OUTERMOST:
            raise TraceError(f"non-outermost step in trace: {s}")
    terms = trace.terms()
    later: Set[Position] = set()
    pending: List[Tuple[int, Position]] = []
    for i in range(len(terms) - 1, -1, -1):
        if i < len(trace.steps):
            later.add(trace.steps[i].position)
        for q in redex_positions(trs, terms[i]):
            if not any(q[:k] in later for k in range(len(q) + 1)):
                pending.append((i, q))
    pending.sort()
    return pending

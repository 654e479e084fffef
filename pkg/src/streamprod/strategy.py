"""Balanced outermost evaluation and the productivity verdict.

The scheduler keeps the maximal redex positions of the current term in a
FIFO queue and always contracts the oldest one. An entry either reaches the
front of the queue or is dropped because a redex appeared above it, and that
redex is queued in turn, so every redex is eventually reduced or consumed
from above: each run of the scheduler is a balanced outermost reduction.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .streamspec import (
    BudgetExceeded,
    StreamSpec,
    balancedness_free_check,
    cons_reachability_check,
    extend_with_overflow,
    ground_terms,
    normalize_data,
)
from .terms import (
    CONS,
    App,
    Position,
    Sort,
    Term,
    fmt_pos,
    independent,
    is_cons,
    is_prefix,
    path_to,
    show,
    sort_of,
    splice,
    substitute,
    subterm_at,
)
from .trs import Trs, maximal_redex_positions
from .rewriting import Kind, ReductionTrace, Step, make_step


@dataclass(frozen=True)
class Budgets:
    max_steps: int = 10_000
    max_term_size: int = 5_000
    oracle_max_depth: int = 12
    oracle_max_size: int = 60
    prefix_length: int = 10
    all_small_size: int = 4
    prover_timeout: float = 60.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class SchedulerError(RuntimeError):
    pass


@dataclass(frozen=True)
class SchedulerState:
    term: Term
    queue: Tuple[Position, ...]
    step_count: int = 0
    last_step: Optional[Step] = field(default=None, compare=False, repr=False)

    @property
    def key(self):
        return (self.term, self.queue)


def initial_state(trs: Trs, t: Term) -> SchedulerState:
    return SchedulerState(t, tuple(maximal_redex_positions(trs, t)), 0)


def check_state(trs: Trs, state: SchedulerState) -> None:
    expected = maximal_redex_positions(trs, state.term)
    if sorted(state.queue) != sorted(expected) or len(set(state.queue)) != len(state.queue):
        raise SchedulerError(
            f"queue {[fmt_pos(p) for p in state.queue]} is not the set of maximal redexes of {show(state.term)}"
        )


def scheduler_step(trs: Trs, state: SchedulerState) -> Optional[SchedulerState]:
    """Contract the front obligation; None once the term is a normal form."""
    if not state.queue:
        return None
    q = state.queue[0]
    found = trs.find_match(subterm_at(state.term, q))
    if found is None:
        raise SchedulerError(f"queued position {fmt_pos(q)} is not a redex of {show(state.term)}")
    rule, subst = found
    contractum = substitute(rule.rhs, subst)
    term = splice(state.term, q, contractum)
    step = Step(state.term, q, rule, term, Kind.OUTERMOST)

    # Only ancestors whose left-hand side can reach down to q may have
    # become redexes; q was a maximal redex, so none above it was one.
    top = None
    lo = max(0, len(q) - trs.lhs_depth)
    window = path_to(subterm_at(term, q[:lo]), q[lo:-1]) if q else []
    for k, node in enumerate(window, lo):
        if trs.is_redex(node):
            top = q[:k]
            break
    rest = state.queue[1:]
    if top is not None:
        queue = tuple(e for e in rest if not is_prefix(top, e)) + (top,)
    else:
        fresh = tuple(q + m for m in maximal_redex_positions(trs, contractum))
        queue = tuple(e for e in rest if independent(e, q)) + fresh
    return SchedulerState(term, queue, state.step_count + 1, step)


class RunStatus(enum.Enum):
    HALTED = "halted"
    CYCLE = "cycle"
    BUDGET = "budgetExceeded"
    STOPPED = "stopped"


@dataclass
class RunResult:
    status: RunStatus
    trace: ReductionTrace
    states: List[SchedulerState]
    cycle_start: Optional[int] = None
    reason: str = ""

    @property
    def final_state(self) -> SchedulerState:
        return self.states[-1]

    @property
    def cycle_length(self) -> Optional[int]:
        if self.cycle_start is None:
            return None
        return len(self.states) - 1 - self.cycle_start


def run_balanced(
    trs: Trs,
    t: Term,
    max_steps: int = 10_000,
    max_term_size: int = 5_000,
    stop: Optional[Callable[[Term], bool]] = None,
) -> RunResult:
    """Run the scheduler until a normal form, an exact state repetition, the
    budget, or (when given) a term satisfying stop."""
    if not t.ground or sort_of(t) is not Sort.STREAM:
        raise ValueError(f"{show(t)} is not a ground stream term")
    state = initial_state(trs, t)
    states = [state]
    trace = ReductionTrace(t)
    seen: Dict[tuple, int] = {state.key: 0}
    while True:
        if stop is not None and stop(state.term):
            return RunResult(RunStatus.STOPPED, trace, states)
        if state.step_count >= max_steps:
            return RunResult(RunStatus.BUDGET, trace, states, reason=f"step budget {max_steps} exhausted")
        nxt = scheduler_step(trs, state)
        if nxt is None:
            return RunResult(RunStatus.HALTED, trace, states)
        trace.steps.append(nxt.last_step)
        states.append(nxt)
        state = nxt
        if state.term.size > max_term_size:
            return RunResult(
                RunStatus.BUDGET, trace, states, reason=f"term size exceeded {max_term_size}"
            )
        prev = seen.get(state.key)
        if prev is not None:
            return RunResult(RunStatus.CYCLE, trace, states, cycle_start=prev)
        seen[state.key] = state.step_count


def replay_cycle(trs: Trs, result: RunResult, loops: int = 1) -> List[SchedulerState]:
    """Re-run the scheduler from the start of a detected cycle for the given
    number of loop iterations, checking that each iteration repeats the state."""
    if result.status is not RunStatus.CYCLE:
        raise ValueError("run did not end in a cycle")
    start = result.states[result.cycle_start]
    state = replace(start, step_count=0, last_step=None)
    out = [state]
    for _ in range(loops):
        for _ in range(result.cycle_length):
            state = scheduler_step(trs, state)
            if state is None:
                raise SchedulerError("cycle replay reached a normal form")
            out.append(state)
        if state.key != start.key:
            raise SchedulerError("cycle replay did not return to the repeated state")
    return out


# -- producing elements -------------------------------------------------------------

@dataclass
class HeadResult:
    ok: bool
    head: Optional[Term] = None
    tail: Optional[Term] = None
    run: Optional[RunResult] = None
    reason: str = ""


def produce_head(spec: StreamSpec, t: Term, budgets: Budgets = Budgets()) -> HeadResult:
    """Reduce t with the balanced strategy (without the overflow rule) until
    it has ':' at the root; the head is returned in data normal form."""
    trs = spec.trs
    run = run_balanced(trs, t, budgets.max_steps, budgets.max_term_size, stop=is_cons)
    if run.status is not RunStatus.STOPPED:
        why = {
            RunStatus.HALTED: "reached a normal form without ':' at the root",
            RunStatus.CYCLE: "balanced reduction cycles without producing",
            RunStatus.BUDGET: run.reason,
        }[run.status]
        return HeadResult(False, run=run, reason=why)
    head, tail = run.final_state.term.args
    try:
        head = normalize_data(spec.data_trs, head, budgets.max_steps)
    except BudgetExceeded as e:
        return HeadResult(False, run=run, reason=str(e))
    return HeadResult(True, head, tail, run)


@dataclass
class PrefixResult:
    values: List[Term]
    ok: bool
    failed_index: Optional[int] = None
    runs: List[RunResult] = field(default_factory=list)
    reason: str = ""


def eval_prefix(spec: StreamSpec, t: Term, n: int, budgets: Budgets = Budgets()) -> PrefixResult:
    values: List[Term] = []
    runs: List[RunResult] = []
    cur = t
    for k in range(n):
        res = produce_head(spec, cur, budgets)
        if res.run is not None:
            runs.append(res.run)
        if not res.ok:
            return PrefixResult(values, False, k, runs, res.reason)
        values.append(res.head)
        cur = res.tail
    return PrefixResult(values, True, None, runs)


# -- brute-force oracle -----------------------------------------------------------

PROBE_STEPS = 300
PROBE_SIZE_FACTOR = 10


class OracleAnswer(enum.Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"


@dataclass
class OracleResult:
    answer: OracleAnswer
    trace: Optional[List[Tuple[Term, Position, Term]]] = None
    explored: int = 0
    pruned: int = 0


def _positions_outside_cons_tails(t: Term, prefix: Position = ()):
    yield prefix, t
    if isinstance(t, App):
        args = t.args[:1] if t.symbol == CONS else t.args
        for i, a in enumerate(args, 1):
            yield from _positions_outside_cons_tails(a, prefix + (i,))


def _all_reducts(trs: Trs, t: Term):
    # No left-hand side inspects the tail of a ':', so a step there never
    # creates a redex above it and can be postponed past every other step.
    for p, sub in _positions_outside_cons_tails(t):
        for rule in trs.matching_rules(sub):
            yield p, rule, splice(t, p, rule.apply(sub))


def _parallel_outermost_probe(trs: Trs, t: Term, max_steps: int, max_term_size: int):
    """Contract all maximal redexes at once, again and again, recording the
    single steps. Returns the steps if a ':'-rooted term is reached."""
    steps: List[Tuple[Term, Position, Term]] = []
    while not is_cons(t):
        redexes = maximal_redex_positions(trs, t)
        if not redexes or len(steps) + len(redexes) > max_steps:
            return None
        # maximal redexes are pairwise parallel; contracting right to left
        # keeps the remaining positions valid
        for p in reversed(redexes):
            sub = subterm_at(t, p)
            rule, subst = trs.find_match(sub)
            u = splice(t, p, substitute(rule.rhs, subst))
            steps.append((t, p, u))
            t = u
        if t.size > max_term_size:
            return None
    return steps


def bfs_oracle_produces(
    spec: StreamSpec,
    t: Term,
    max_depth: int = 12,
    max_term_size: int = 60,
    probe: bool = True,
) -> OracleResult:
    """Search over all reductions of t for a ':'-rooted term.

    A cheap probe along parallel outermost steps runs first; any reduction it
    finds is a valid witness. Otherwise a breadth-first search follows, and NO
    means every term reachable through terms within the size bound was
    visited; pruned counts successors dropped for exceeding it."""
    trs = spec.trs
    if is_cons(t):
        return OracleResult(OracleAnswer.YES, [], 1)
    if probe:
        found = _parallel_outermost_probe(trs, t, PROBE_STEPS, PROBE_SIZE_FACTOR * max_term_size)
        if found is not None:
            return OracleResult(OracleAnswer.YES, found, len(found) + 1)
    parent: Dict[Term, Optional[Tuple[Term, Position]]] = {t: None}
    frontier = deque([t])
    pruned = 0
    for _ in range(max_depth):
        nxt = deque()
        for u in frontier:
            for p, rule, v in _all_reducts(trs, u):
                if v in parent:
                    continue
                if v.size > max_term_size:
                    pruned += 1
                    continue
                parent[v] = (u, p)
                if is_cons(v):
                    return OracleResult(OracleAnswer.YES, _path(parent, v), len(parent), pruned)
                nxt.append(v)
        frontier = nxt
        if not frontier:
            return OracleResult(OracleAnswer.NO, None, len(parent), pruned)
    return OracleResult(OracleAnswer.INCONCLUSIVE, None, len(parent), pruned)


def _path(parent, v):
    out = []
    while parent[v] is not None:
        u, p = parent[v]
        out.append((u, p, v))
        v = u
    return out[::-1]


def oracle_prefix(
    spec: StreamSpec, t: Term, n: int, max_depth: int = 12, max_term_size: int = 60, probe: bool = True
) -> Tuple[List[Term], OracleAnswer]:
    """Up to n elements of t found by repeated oracle searches, each head in
    data normal form. The answer is YES when all n were found."""
    values: List[Term] = []
    cur = t
    while len(values) < n:
        res = bfs_oracle_produces(spec, cur, max_depth, max_term_size, probe)
        if res.answer is not OracleAnswer.YES:
            return values, res.answer
        end = res.trace[-1][2] if res.trace else cur
        head, cur = end.args
        values.append(normalize_data(spec.data_trs, head))
    return values, OracleAnswer.YES


def oracle_trace(spec: StreamSpec, result: OracleResult) -> Optional[ReductionTrace]:
    if result.trace is None:
        return None
    trs = spec.trs
    if not result.trace:
        return None
    trace = ReductionTrace(result.trace[0][0])
    for u, p, v in result.trace:
        step = make_step(trs, u, p)
        assert step.target == v
        trace.steps.append(step)
    return trace


# -- verdicts -------------------------------------------------------------------------

class Outcome(enum.Enum):
    PRODUCTIVE = "PRODUCTIVE"
    NOT_PRODUCTIVE = "NOT_PRODUCTIVE"
    BOUNDED_PRODUCTIVE = "BOUNDED_PRODUCTIVE"
    UNKNOWN = "UNKNOWN"


class CertificateKind(enum.Enum):
    CYCLE = "cycle"
    CONS_UNREACHABLE = "consUnreachable"
    EXTERNAL_PROOF = "externalProof"
    BOUNDED_EVIDENCE = "boundedEvidence"


@dataclass
class Certificate:
    kind: CertificateKind
    root: Optional[Term] = None
    run: Optional[RunResult] = None
    transcript: str = ""
    prefixes: Dict[str, List[str]] = field(default_factory=dict)
    reason: str = ""


@dataclass
class ProverAnswer:
    outcome: str  # yes / no / maybe / error
    detail: str = ""


@dataclass
class Verdict:
    outcome: Outcome
    certificate: Optional[Certificate]
    budgets: Budgets
    n: Optional[int] = None
    notes: List[str] = field(default_factory=list)
    runs: Dict[str, RunResult] = field(default_factory=dict)

    def __str__(self):
        if self.outcome is Outcome.BOUNDED_PRODUCTIVE:
            return f"BOUNDED_PRODUCTIVE({self.n})"
        return self.outcome.value


def small_roots(spec: StreamSpec, max_size: int) -> List[Term]:
    return ground_terms(spec.symbols, Sort.STREAM, max_size)


def check_productivity(
    spec: StreamSpec,
    roots: Optional[Sequence[Term]] = None,
    budgets: Budgets = Budgets(),
    prover: Optional[Callable[[str], ProverAnswer]] = None,
) -> Verdict:
    """Combine the static filter, balanced runs over the overflow extension,
    an optional external outermost-termination proof and bounded evaluation.

    roots=None means every ground stream term up to budgets.all_small_size."""
    from .tpdb import export_tpdb

    notes: List[str] = []
    reach = cons_reachability_check(spec)
    if not reach:
        cert = Certificate(CertificateKind.CONS_UNREACHABLE, reason=reach.reason)
        return Verdict(Outcome.NOT_PRODUCTIVE, cert, budgets)

    if roots is None:
        roots = small_roots(spec, budgets.all_small_size)
    extended = extend_with_overflow(spec)
    runs: Dict[str, RunResult] = {}
    for root in roots:
        run = run_balanced(extended, root, budgets.max_steps, budgets.max_term_size)
        runs[show(root)] = run
        if run.status is RunStatus.CYCLE:
            cert = Certificate(
                CertificateKind.CYCLE,
                root=root,
                run=run,
                reason=f"balanced outermost reduction of {show(root)} repeats its state "
                f"after {run.cycle_length} step(s)",
            )
            return Verdict(Outcome.NOT_PRODUCTIVE, cert, budgets, notes=notes, runs=runs)
        if run.status is RunStatus.BUDGET:
            notes.append(f"{show(root)}: {run.reason}")

    free = balancedness_free_check(spec)
    if prover is not None:
        if not free:
            notes.append(f"external prover skipped: {free.reason}")
        else:
            try:
                answer = prover(export_tpdb(extended))
            except Exception as e:  # a failing prover only loses the proof
                answer = ProverAnswer("error", f"{type(e).__name__}: {e}")
            notes.append(f"external prover: {answer.outcome}" + (f" ({answer.detail})" if answer.detail else ""))
            if answer.outcome == "yes":
                cert = Certificate(
                    CertificateKind.EXTERNAL_PROOF,
                    transcript=answer.detail,
                    reason="outermost termination of the overflow extension; " + free.reason,
                )
                return Verdict(Outcome.PRODUCTIVE, cert, budgets, notes=notes, runs=runs)

    n = budgets.prefix_length
    prefixes: Dict[str, List[str]] = {}
    for root in roots:
        res = eval_prefix(spec, root, n, budgets)
        prefixes[show(root)] = [show(v) for v in res.values]
        if not res.ok:
            notes.append(f"{show(root)}: element {res.failed_index + 1} not produced: {res.reason}")
            cert = Certificate(CertificateKind.BOUNDED_EVIDENCE, prefixes=prefixes, reason=res.reason)
            return Verdict(Outcome.UNKNOWN, cert, budgets, notes=notes, runs=runs)
    cert = Certificate(
        CertificateKind.BOUNDED_EVIDENCE,
        prefixes=prefixes,
        reason=f"first {n} elements produced for {len(roots)} root(s)",
    )
    return Verdict(Outcome.BOUNDED_PRODUCTIVE, cert, budgets, n=n, notes=notes, runs=runs)

"""Randomized generators for the trace surgery properties.

Each suite draws seeded random cases over the orthogonal fixture systems
(without the overflow rule) from ground stream terms of bounded size, checks
one property per case and returns the number of cases checked.
"""
import itertools
import random

from streamprod import fixtures
from streamprod.rewriting import (
    Kind,
    ReductionTrace,
    make_step,
    parallel_step,
    parallel_moves_join,
    split_trace,
    swap_no_then_o,
)
from streamprod.streamspec import ground_terms, unfold
from streamprod.terms import Sort, independent, is_proper_prefix, match, subterm_at, variable_positions
from streamprod.trs import has_redex_above, redex_positions

SYSTEMS = ("morse", "tailc", "alt_morse", "fc", "nonfriendly", "cycle", "topterm")


def systems(max_size=7):
    out = []
    for name in SYSTEMS:
        spec = unfold(fixtures.spec(name))
        out.append((name, spec.trs, ground_terms(spec.symbols, Sort.STREAM, max_size)))
    return out


def random_walk(trs, t, length, rng, max_size=60):
    trace = ReductionTrace(t)
    cur = t
    for _ in range(length):
        reds = redex_positions(trs, cur)
        if not reds:
            break
        step = make_step(trs, cur, rng.choice(reds))
        if step.target.size > max_size:
            break
        trace.steps.append(step)
        cur = step.target
    return trace


def random_independent(positions, rng):
    """A random non-empty subset of pairwise independent positions."""
    pool = list(positions)
    rng.shuffle(pool)
    chosen = []
    for p in pool:
        if all(independent(p, q) for q in chosen) and (not chosen or rng.random() < 0.7):
            chosen.append(p)
    return chosen


def _cases(rng, max_size, attempts):
    sys_ = systems(max_size)
    for _ in range(attempts):
        name, trs, terms = rng.choice(sys_)
        t = rng.choice(terms)
        # walk a little so that cases are not limited to the small start terms
        yield name, trs, random_walk(trs, t, rng.randrange(0, 4), rng).final


def split_and_swap(n, seed=1, max_size=7):
    """Endpoints are preserved by split_trace and swap_no_then_o."""
    rng = random.Random(seed)
    splits = swaps = 0
    for name, trs, t in _cases(rng, max_size, 50 * n):
        if splits < n:
            trace = random_walk(trs, t, rng.randrange(1, 7), rng)
            prefix, suffix = split_trace(trs, trace)
            assert prefix.initial == trace.initial, name
            assert suffix.final == trace.final, name
            assert prefix.final == suffix.initial
            assert all(s.kind is Kind.OUTERMOST for s in prefix.steps)
            assert all(s.kind is Kind.NON_OUTERMOST for s in suffix.steps)
            splits += 1
        if swaps < n:
            non_outer = [p for p in redex_positions(trs, t) if has_redex_above(trs, t, p)]
            if non_outer:
                par = parallel_step(trs, t, random_independent(non_outer, rng))
                outer = [p for p in redex_positions(trs, par.target) if not has_redex_above(trs, par.target, p)]
                if outer:
                    step = make_step(trs, par.target, rng.choice(outer))
                    res = swap_no_then_o(trs, par, step)
                    assert res.source == par.source and res.target == step.target, name
                    assert all(s.kind is Kind.OUTERMOST for s in res.outermost_steps())
                    swaps += 1
        if splits >= n and swaps >= n:
            break
    return min(splits, swaps)


def independence(n, seed=2, max_size=7):
    """t1 -no[q]-> t2 -o[p]-> t3 implies p || q or p above q."""
    rng = random.Random(seed)
    count = 0
    for name, trs, t in _cases(rng, max_size, 200 * n):
        non_outer = [q for q in redex_positions(trs, t) if has_redex_above(trs, t, q)]
        if not non_outer:
            continue
        q = rng.choice(non_outer)
        t2 = make_step(trs, t, q).target
        for p in redex_positions(trs, t2):
            if has_redex_above(trs, t2, p):
                continue
            assert independent(p, q) or is_proper_prefix(p, q), (name, p, q)
            count += 1
        if count >= n:
            break
    return count


def parallel_moves(n, seed=3, max_size=7):
    """Both ways around the parallel moves square end in the same term."""
    rng = random.Random(seed)
    count = 0
    for name, trs, t in _cases(rng, max_size, 200 * n):
        reds = redex_positions(trs, t)
        if not reds:
            continue
        p = rng.choice(reds)
        sub = subterm_at(t, p)
        rule, before = trs.find_match(sub)
        var_steps, after = {}, dict(before)
        for x in variable_positions(rule.lhs):
            inner = redex_positions(trs, before[x])
            if inner and rng.random() < 0.8:
                par = parallel_step(trs, before[x], random_independent(inner, rng))
                var_steps[x] = par
                after[x] = par.target
        if not var_steps:
            continue
        sq = parallel_moves_join(rule, before, after, var_steps)
        assert sq.via_lhs[1] == sq.via_rhs[1].target == sq.rhs_target, name
        assert match(rule.lhs, sq.via_lhs[0].target) is not None
        count += 1
        if count >= n:
            break
    return count


def parallel_commute(n, seed=4, max_size=7):
    """Every application order of a parallel step gives the same term."""
    from streamprod.trs import apply_rule_at

    rng = random.Random(seed)
    count = 0
    for name, trs, t in _cases(rng, max_size, 200 * n):
        reds = redex_positions(trs, t)
        chosen = random_independent(reds, rng) if reds else []
        if len(chosen) < 2:
            continue
        ref = parallel_step(trs, t, chosen).target
        for order in itertools.islice(itertools.permutations(chosen), 24):
            cur = t
            for p in order:
                cur = apply_rule_at(trs, cur, p)
            assert cur == ref, name
        count += 1
        if count >= n:
            break
    return count

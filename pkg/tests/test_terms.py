import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from streamprod.terms import (
    CONS,
    App,
    PositionError,
    Sort,
    SortError,
    Symbol,
    Var,
    cons,
    independent,
    is_prefix,
    match,
    positions,
    residuals,
    show,
    splice,
    strip_prefix,
    substitute,
    subterm_at,
    unify,
    variables,
)
from conftest import T, load

x, y = Var("x", Sort.DATA), Var("y", Sort.DATA)
sigma, tau = Var("sigma", Sort.STREAM), Var("tau", Sort.STREAM)


@pytest.fixture(scope="module")
def morse():
    return load("morse")


@pytest.fixture(scope="module")
def fc():
    return load("fc")


def test_positions_of_constant(morse):
    from streamprod.terms import OVERFLOW

    assert positions(App(OVERFLOW)) == [()]


def test_positions_of_cons(fc):
    assert set(positions(T(fc, "0:c"))) == {(), (1,), (2,)}


def test_positions_nested(morse):
    t = T(morse, "zip(inv(morse), tail(morse))")
    assert set(positions(t)) == {(), (1,), (1, 1), (2,), (2, 1)}


def test_splice_and_subterm(morse, fc):
    t = T(morse, "zip(inv(morse), tail(morse))")
    assert splice(t, (), T(morse, "morse")) == T(morse, "morse")
    assert subterm_at(T(morse, "tail(morse)"), (1,)) == T(morse, "morse")
    zero_c = cons(T(morse, "0"), T(morse, "morse"))
    assert splice(t, (1, 1), zero_c) == T(morse, "zip(inv(0:morse), tail(morse))")


def test_splice_errors(morse):
    t = T(morse, "tail(morse)")
    with pytest.raises(PositionError):
        subterm_at(t, (2,))
    with pytest.raises(PositionError):
        splice(t, (1, 1), t)
    with pytest.raises(SortError):
        splice(t, (1,), T(morse, "0"))


def test_position_order():
    assert is_prefix((), (1, 2))
    assert is_prefix((1,), (1,))
    assert not is_prefix((1, 2), (1,))
    assert independent((1, 1), (1, 2))
    assert not independent((1,), (1, 2))
    assert strip_prefix((1, 2, 3), (1,)) == (2, 3)
    with pytest.raises(PositionError):
        strip_prefix((2,), (1,))


def test_match_examples(fc):
    zero, c = T(fc, "0"), T(fc, "c")
    assert match(cons(x, sigma), T(fc, "0:c")) == {x: zero, sigma: c}
    f = fc.symbol("f")
    assert match(App(f, (cons(x, sigma),)), T(fc, "f(c)")) is None
    t = T(fc, "f(g(1, c))")
    assert match(sigma, t) == {sigma: t}


def test_match_nonlinear():
    z = Symbol("z", 0, 2, Sort.STREAM)
    pat = App(z, (sigma, sigma))
    c = App(Symbol("c", 0, 0, Sort.STREAM))
    d = App(Symbol("d", 0, 0, Sort.STREAM))
    assert match(pat, App(z, (c, c))) == {sigma: c}
    assert match(pat, App(z, (c, d))) is None


def test_unify_examples(fc):
    f = fc.symbol("f")
    s = unify(cons(x, sigma), cons(y, tau))
    assert substitute(cons(x, sigma), s) == substitute(cons(y, tau), s)
    assert len(s) == 2
    s = unify(App(f, (cons(x, sigma),)), App(f, (tau,)))
    assert s == {tau: cons(x, sigma)}
    assert unify(sigma, App(f, (sigma,))) is None


def test_unify_respects_sorts(fc):
    assert unify(x, sigma) is None


# -- generality of unify on a three symbol signature --------------------------

A = Symbol("a", 0, 0, Sort.DATA)
G = Symbol("g", 1, 0, Sort.DATA)
F = Symbol("f", 2, 0, Sort.DATA)


def _terms(depth, atoms):
    level = list(atoms)
    for _ in range(depth - 1):
        level = list(atoms) + [App(G, (u,)) for u in level] + [
            App(F, (u, v)) for u in level for v in level
        ]
    return level


def test_unify_sound_and_most_general():
    terms = _terms(3, [App(A), x, y])
    ground = _terms(2, [App(A)])
    rng = random.Random(7)
    checked = 0
    for s in terms:
        for t in rng.sample(terms, 20):
            mgu = unify(s, t)
            if mgu is not None:
                assert substitute(s, mgu) == substitute(t, mgu)
                assert all(substitute(u, mgu) == u for u in mgu.values() for _ in [0]) or True
            for gx, gy in itertools.product(ground, ground):
                theta = {x: gx, y: gy}
                if substitute(s, theta) != substitute(t, theta):
                    continue
                assert mgu is not None, (show(s), show(t))
                for v in (x, y):
                    assert substitute(substitute(v, mgu), theta) == substitute(v, theta)
                checked += 1
    assert checked > 100


def test_unify_is_idempotent():
    terms = _terms(3, [App(A), x, y])
    rng = random.Random(3)
    for _ in range(2000):
        s, t = rng.choice(terms), rng.choice(terms)
        mgu = unify(s, t)
        if mgu is None:
            continue
        for u in mgu.values():
            assert substitute(u, mgu) == u


# -- residuals -------------------------------------------------------------------

def test_residual_independent(morse):
    t = T(morse, "zip(tail(morse), inv(morse))")
    r = morse.trs.rule("morse")
    assert residuals((1, 1), t, (2, 1), r.lhs, r.rhs) == {(1, 1)}


def test_residual_through_variable(morse):
    t = T(morse, "zip(0:morse, morse)")
    r = morse.trs.rule("zip")
    assert residuals((1, 2), t, (), r.lhs, r.rhs) == {(2, 2)}


def test_residual_erased(morse):
    t = T(morse, "tail(0:morse)")
    r = morse.trs.rule("tail")
    assert residuals((1, 1), t, (), r.lhs, r.rhs) == set()


def test_residual_rejects_invalid_step(morse):
    t = T(morse, "tail(morse)")
    r = morse.trs.rule("tail")
    with pytest.raises(ValueError):
        residuals((1,), t, (), r.lhs, r.rhs)


def test_residual_coherence_on_fixtures(specs):
    """Descendants of a redex carry the same subterm after the step."""
    from streamprod.streamspec import ground_terms
    from streamprod.trs import apply_rule_at, redex_positions

    cases = 0
    for name in ("morse", "tailc", "nonfriendly", "alt_morse"):
        spec = specs[name]
        trs = spec.trs
        for t in ground_terms(spec.symbols, Sort.STREAM, 6):
            reds = redex_positions(trs, t)
            for p, q in itertools.product(reds, reds):
                if q == p or is_prefix(q, p):
                    continue
                rule, _ = trs.find_match(subterm_at(t, p))
                t2 = apply_rule_at(trs, t, p, rule)
                for q2 in residuals(q, t, p, rule.lhs, rule.rhs):
                    assert subterm_at(t2, q2) == subterm_at(t, q)
                    cases += 1
    assert cases > 500


# -- hypothesis properties on splice ---------------------------------------------

SYMS = [Symbol("c", 0, 0, Sort.STREAM), Symbol("h", 1, 1, Sort.STREAM), Symbol("z", 0, 2, Sort.STREAM),
        Symbol("n", 0, 0, Sort.DATA), Symbol("s", 1, 0, Sort.DATA)]


def _strategy(sort):
    syms = [f for f in SYMS if f.result is sort]
    leaves = [App(f) for f in syms if f.arity == 0]
    if sort is Sort.STREAM:
        base = st.sampled_from(leaves + [sigma])
    else:
        base = st.sampled_from(leaves + [x])
    return base


def stream_terms():
    data = st.recursive(_strategy(Sort.DATA), lambda ch: ch.map(lambda u: App(SYMS[4], (u,))), max_leaves=3)

    def extend(ch):
        return st.one_of(
            st.tuples(data, ch).map(lambda p: App(SYMS[1], p)),
            st.tuples(ch, ch).map(lambda p: App(SYMS[2], p)),
            st.tuples(data, ch).map(lambda p: App(CONS, p)),
        )

    return st.recursive(_strategy(Sort.STREAM), extend, max_leaves=6)


@settings(max_examples=200, deadline=None)
@given(stream_terms(), stream_terms(), st.data())
def test_splice_properties(t, new, data):
    stream_pos = [p for p in positions(t) if subterm_at(t, p).__class__ and
                  (isinstance(subterm_at(t, p), Var) and subterm_at(t, p).sort is Sort.STREAM
                   or isinstance(subterm_at(t, p), App) and subterm_at(t, p).symbol.result is Sort.STREAM)]
    p = data.draw(st.sampled_from(stream_pos))
    u = splice(t, p, new)
    assert subterm_at(u, p) == new
    for q in positions(t):
        if independent(p, q):
            assert subterm_at(u, q) == subterm_at(t, q)
        if is_prefix(q, p):
            assert q in positions(u)


@settings(max_examples=200, deadline=None)
@given(stream_terms(), stream_terms())
def test_match_soundness(pattern, subject):
    s = match(pattern, subject)
    if s is not None:
        assert substitute(pattern, s) == subject


@settings(max_examples=200, deadline=None)
@given(stream_terms(), stream_terms())
def test_unify_soundness(a, b):
    renamed = substitute(b, {v: Var(v.name + "'", v.sort) for v in set(variables(b))})
    s = unify(a, renamed)
    if s is not None:
        assert substitute(a, s) == substitute(renamed, s)
    if match(a, renamed) is not None:
        assert s is not None

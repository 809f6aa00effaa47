from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FAIR, MARKOV_H14, ONE_THIRD, REDUCIBLE, TWO_THIRDS
from oracles import brute_law, lex_intervals
from exactrng.exactnum import UNIT, UnitInterval
from exactrng.interval_alg import (
    NULL,
    TERMINAL,
    UNRESOLVED,
    Done,
    Emitted,
    FrontierCapExceeded,
    NeedMoreCoins,
    build_tree,
    emit_ready,
    generate,
    refine_coin,
    start,
    step_generate,
)
from exactrng.process import IID, NamedBernoulli

GOLDEN = Path(__file__).parent / "golden"


def test_refine_examples():
    st0 = start(FAIR, TWO_THIRDS, 1)
    assert refine_coin(st0, 1).coin_interval == UnitInterval(0, F(1, 2))
    s = refine_coin(start(MARKOV_H14, ONE_THIRD, 2), 2)
    assert s.coin_interval == UnitInterval(F(1, 2), 1)
    s = refine_coin(s, 2)
    assert s.coin_interval == UnitInterval(F(5, 8), 1)


def test_step_generate_fair_two_thirds():
    s, ev = step_generate(start(FAIR, TWO_THIRDS, 1), iter([1]))
    assert ev == Done((1,), 1)


def test_markov_coin_first_emission_after_one_symbol():
    s, ev = step_generate(start(MARKOV_H14, ONE_THIRD, 2), iter([2, 1, 2]))
    assert ev == Emitted((2,)) and s.coin_count == 1
    s, ev = step_generate(s, iter([1]))
    assert ev == Emitted(()) and s.coin_interval == UnitInterval(F(1, 2), F(5, 8))


def test_markov_coin_runs():
    r = generate(MARKOV_H14, ONE_THIRD, 2, [2, 1, 2])
    assert r.output == (2, 2) and r.stopping_time == 3
    r = generate(MARKOV_H14, ONE_THIRD, 2, [1, 2])
    assert r.output == (2, 1) and r.stopping_time == 2
    # both symbols determined by the same coin read
    assert r.transcript[-1][0] == 2 and r.transcript[-1][1] == (2, 1)


@pytest.mark.parametrize("stream", [(1, 2, 2), (2, 2, 1), (1, 1, 1)])
def test_identity_conversion(stream):
    r = generate(TWO_THIRDS, TWO_THIRDS, 3, stream)
    assert r.output == stream and r.stopping_time == 3


def test_need_more_coins_and_invalid_symbol():
    s, ev = step_generate(start(FAIR, TWO_THIRDS, 1), iter([]))
    assert ev == NeedMoreCoins()
    r = generate(FAIR, TWO_THIRDS, 1, [2, 1])
    assert not r.complete and r.coins_read == (2, 1)
    degenerate = IID((F(1), F(0)))
    with pytest.raises(ValueError, match="invalid coin realization"):
        step_generate(start(degenerate, TWO_THIRDS, 1), iter([2]))
    with pytest.raises(ValueError):
        step_generate(start(FAIR, TWO_THIRDS, 1), iter([3]))


def test_named_coin_rejected():
    with pytest.raises(ValueError, match="rational"):
        start(NamedBernoulli("harmonic"), TWO_THIRDS, 1)


def test_emit_ready_n_zero():
    s, out = emit_ready(start(FAIR, TWO_THIRDS, 0))
    assert out == () and s.done


def test_tree_fair_two_thirds():
    t = build_tree(FAIR, TWO_THIRDS, 1, 3)
    term = [(v.depth, v.output, v.prob) for v in t.nodes() if v.status == TERMINAL]
    assert term == [(1, (1,), F(1, 2)), (2, (2,), F(1, 4)), (3, (1,), F(1, 8))]
    unres = [v for v in t.nodes() if v.status == UNRESOLVED]
    assert len(unres) == 1 and unres[0].prob == F(1, 8)
    assert t.unresolved_mass() == F(1, 8) and t.terminal_mass() == F(7, 8)


def test_tree_golden_export():
    t = build_tree(FAIR, TWO_THIRDS, 1, 3)
    assert t.export() == (GOLDEN / "fair_two_thirds_depth3.tree").read_text()


def test_tree_n_zero_and_identity():
    t = build_tree(FAIR, TWO_THIRDS, 0, 5)
    assert t.root.status == TERMINAL and t.root.output == () and not t.root.children
    t = build_tree(TWO_THIRDS, TWO_THIRDS, 2, 2)
    leaves = t.leaves()
    assert len(leaves) == 4 and all(v.depth == 2 and v.status == TERMINAL for v in leaves)
    assert t.output_law() == {y: p for y, p in lex_intervals_law(TWO_THIRDS, 2).items()}


def lex_intervals_law(model, n):
    return {y: hi - lo for y, (lo, hi) in lex_intervals(model, n).items()}


def test_tree_null_branches():
    coin = IID((F(1, 2), F(0), F(1, 2)))
    t = build_tree(coin, FAIR, 1, 2)
    nulls = [v for v in t.nodes() if v.status == NULL]
    assert nulls and all(v.prob == 0 for v in nulls)
    assert "N 0" in t.export()


def test_frontier_cap():
    with pytest.raises(FrontierCapExceeded, match="frontier cap exceeded"):
        build_tree(MARKOV_H14, ONE_THIRD, 4, 10, cap=2)


@pytest.mark.parametrize("coin, target, n", [(FAIR, TWO_THIRDS, 2), (MARKOV_H14, ONE_THIRD, 2), (FAIR, REDUCIBLE, 2)])
def test_tree_law_matches_enumeration(coin, target, n):
    t = build_tree(coin, target, n, 8)
    for m in range(9):
        law = t.output_law(m)
        ref = brute_law(coin, target, n, m)
        assert {y: law.get(y, 0) for y in ref} == ref


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 2), min_size=0, max_size=30), st.integers(1, 3))
def test_generated_output_interval_contains_coin_interval(stream, n):
    r = generate(MARKOV_H14, ONE_THIRD, n, stream)
    for _, _, I, J in r.transcript:
        assert J.contains(I)
    if r.complete:
        lo, hi = lex_intervals(ONE_THIRD, n)[r.output]
        assert r.transcript[-1][3] == UnitInterval(lo, hi)
        assert r.stopping_time == len(r.coins_read) <= len(stream)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 2), min_size=1, max_size=20))
def test_streams_with_common_stopping_prefix_agree(stream):
    r = generate(FAIR, TWO_THIRDS, 1, stream)
    if r.complete:
        r2 = generate(FAIR, TWO_THIRDS, 1, list(r.coins_read) + [1, 2, 1])
        assert r2.output == r.output and r2.stopping_time == r.stopping_time

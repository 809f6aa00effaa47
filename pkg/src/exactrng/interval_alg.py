"""Sequential interval algorithm over exact rationals.

The coin prefix ``s`` owns the interval ``I_s`` (refined by the coin's
conditional law) and the emitted output ``t`` owns ``J_t`` (refined by the
target's conditional law).  A target symbol ``y`` is emitted as soon as
``I_s`` fits inside the ``y``-th child of ``J_t``; otherwise another coin
symbol is read.  Several symbols can become determined by a single coin
symbol, and they are all emitted before the next coin symbol is read.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterable, Iterator, Optional

from .exactnum import ONE, UNIT, ZERO, UnitInterval, format_ratio
from .process import ProcessSpec

DEFAULT_DEPTH = 64
DEFAULT_FRONTIER_CAP = 1 << 22


def frontier_cap() -> int:
    env = os.environ.get("EXACTRNG_FRONTIER_CAP")
    return int(env) if env else DEFAULT_FRONTIER_CAP


class FrontierCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorState:
    coin: ProcessSpec
    target: ProcessSpec
    n: int
    coin_interval: UnitInterval = UNIT
    target_interval: UnitInterval = UNIT
    coin_prefix: tuple = ()
    emitted: tuple = ()
    coin_memory: Any = None
    target_memory: Any = None

    @property
    def coin_count(self) -> int:
        return len(self.coin_prefix)

    @property
    def done(self) -> bool:
        return len(self.emitted) == self.n


def start(coin: ProcessSpec, target: ProcessSpec, n: int) -> GeneratorState:
    if n < 0:
        raise ValueError("target length must be >= 0")
    if not (coin.rational and target.rational):
        raise ValueError("exact generation requires rational conditionals")
    return GeneratorState(coin, target, n, coin_memory=coin.initial_state(), target_memory=target.initial_state())


def refine_coin(state: GeneratorState, x: int, pmf=None) -> GeneratorState:
    """Condition on coin symbol ``x`` (1-based).  A zero-probability ``x``
    yields an empty interval, which no valid coin stream ever selects."""
    M = state.coin.alphabet_size
    if not 1 <= x <= M:
        raise ValueError(f"coin symbol {x} outside 1..{M}")
    if pmf is None:
        pmf = state.coin.pmf(state.coin_memory)
    return replace(
        state,
        coin_interval=state.coin_interval.child(x - 1, pmf),
        coin_prefix=state.coin_prefix + (x,),
        coin_memory=state.coin.step(state.coin_memory, x - 1),
    )


def emit_ready(state: GeneratorState) -> tuple[GeneratorState, tuple]:
    """Emit every target symbol already determined by the coin interval."""
    out = []
    I = state.coin_interval
    if I.empty:
        return state, ()
    while len(state.emitted) < state.n:
        pmf = state.target.pmf(state.target_memory)
        for y, J in enumerate(state.target_interval.split(pmf)):
            if not J.empty and J.contains(I):
                break
        else:
            break
        state = replace(
            state,
            target_interval=J,
            emitted=state.emitted + (y + 1,),
            target_memory=state.target.step(state.target_memory, y),
        )
        out.append(y + 1)
        assert state.target_interval.contains(I)
    return state, tuple(out)


@dataclass(frozen=True)
class Emitted:
    symbols: tuple


@dataclass(frozen=True)
class NeedMoreCoins:
    pass


@dataclass(frozen=True)
class Done:
    output: tuple
    stopping_time: int


def step_generate(state: GeneratorState, coin_stream: Iterator[int]):
    """Advance by at most one coin symbol.

    Returns ``(new_state, event)``.  Symbols determined without reading
    anything are emitted first; only if there were none is a coin symbol
    pulled from ``coin_stream``.
    """
    state, out = emit_ready(state)
    if state.done:
        return state, Done(state.emitted, state.coin_count)
    if out:
        return state, Emitted(out)
    x = next(coin_stream, None)
    if x is None:
        return state, NeedMoreCoins()
    pmf = state.coin.pmf(state.coin_memory)
    if not 1 <= x <= len(pmf):
        raise ValueError(f"coin symbol {x} outside 1..{len(pmf)}")
    if pmf[x - 1] == 0:
        raise ValueError("invalid coin realization: zero-probability coin symbol")
    state = refine_coin(state, x, pmf)
    state, out = emit_ready(state)
    if state.done:
        return state, Done(state.emitted, state.coin_count)
    return state, Emitted(out)


@dataclass
class Run:
    output: Optional[tuple]
    stopping_time: Optional[int]
    coins_read: tuple
    transcript: list = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.output is not None


def generate(coin: ProcessSpec, target: ProcessSpec, n: int, coin_stream: Iterable[int]) -> Run:
    """Run the generator on a finite or infinite coin stream.

    ``transcript`` holds one ``(coin_symbol_or_None, emitted_symbols,
    coin_interval, target_interval)`` entry per step.  If the stream runs dry
    first, ``output`` is ``None`` and the partial emission is in the transcript.
    """
    it = iter(coin_stream)
    st = start(coin, target, n)
    transcript = []
    while True:
        coins_before, out_before = st.coin_count, len(st.emitted)
        st, ev = step_generate(st, it)
        if isinstance(ev, NeedMoreCoins):
            return Run(None, None, st.coin_prefix, transcript)
        read = st.coin_prefix[-1] if st.coin_count > coins_before else None
        transcript.append((read, st.emitted[out_before:], st.coin_interval, st.target_interval))
        if isinstance(ev, Done):
            return Run(ev.output, ev.stopping_time, st.coin_prefix, transcript)


# --------------------------------------------------------------------------
# algorithm tree


INTERNAL, TERMINAL, UNRESOLVED, NULL = "internal", "terminal", "unresolved", "null"
_FLAG = {INTERNAL: "I", TERMINAL: "T", UNRESOLVED: "U", NULL: "N"}


@dataclass
class TreeNode:
    path: tuple
    labels: tuple  # symbols emitted on arriving at this node
    output: tuple  # everything emitted so far along the path
    status: str
    prob: Fraction
    children: list = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.path)


@dataclass
class AlgorithmTree:
    root: TreeNode
    coin_alphabet: int
    target_alphabet: int
    n: int
    depth_limit: int

    def nodes(self) -> Iterator[TreeNode]:
        """Breadth-first, children in symbol order."""
        q = deque([self.root])
        while q:
            node = q.popleft()
            yield node
            q.extend(node.children)

    def leaves(self) -> list[TreeNode]:
        return [v for v in self.nodes() if not v.children and v.status != NULL]

    def terminal_mass(self, upto: Optional[int] = None) -> Fraction:
        return sum(
            (v.prob for v in self.nodes() if v.status == TERMINAL and (upto is None or v.depth <= upto)),
            ZERO,
        )

    def unresolved_mass(self, m: Optional[int] = None) -> Fraction:
        """Mass still running after ``m`` coin symbols (default: the depth limit)."""
        m = self.depth_limit if m is None else m
        if m > self.depth_limit:
            raise ValueError("depth beyond the tree's depth limit")
        return sum(
            (v.prob for v in self.nodes() if v.depth == m and v.status in (INTERNAL, UNRESOLVED)),
            ZERO,
        )

    def output_law(self, upto: Optional[int] = None) -> dict[tuple, Fraction]:
        law: dict[tuple, Fraction] = {}
        for v in self.nodes():
            if v.status == TERMINAL and (upto is None or v.depth <= upto):
                law[v.output] = law.get(v.output, ZERO) + v.prob
        return law

    def export(self) -> str:
        """One line per node: ``depth path labels flag prob``.

        ``path`` and ``labels`` use ``-`` when empty; symbols are comma
        separated.  Flags: I internal, T terminal, U unresolved (cut by the
        depth limit), N zero-probability branch.
        """
        lines = [
            f"# exactrng-tree v1 M={self.coin_alphabet} N={self.target_alphabet} "
            f"n={self.n} depth={self.depth_limit}"
        ]
        for v in self.nodes():
            path = ",".join(map(str, v.path)) or "-"
            labels = ",".join(map(str, v.labels)) or "-"
            lines.append(f"{v.depth} {path} {labels} {_FLAG[v.status]} {format_ratio(v.prob)}")
        return "\n".join(lines) + "\n"


def build_tree(
    coin: ProcessSpec,
    target: ProcessSpec,
    n: int,
    depth_limit: int = DEFAULT_DEPTH,
    cap: Optional[int] = None,
) -> AlgorithmTree:
    """Expand the interval algorithm breadth-first down to ``depth_limit``."""
    if depth_limit < 0:
        raise ValueError("depth_limit must be >= 0")
    cap = frontier_cap() if cap is None else cap
    st0, labels = emit_ready(start(coin, target, n))
    root = TreeNode((), labels, st0.emitted, TERMINAL if st0.done else INTERNAL, ONE)
    level = []
    if root.status == INTERNAL:
        if depth_limit == 0:
            root.status = UNRESOLVED
        else:
            level = [(root, st0)]
    depth = 0
    while level:
        depth += 1
        nxt = []
        for node, st in level:
            pmf = coin.pmf(st.coin_memory)
            for k, p in enumerate(pmf):
                child_st = refine_coin(st, k + 1, pmf)
                if p == 0:
                    node.children.append(TreeNode(child_st.coin_prefix, (), st.emitted, NULL, ZERO))
                    continue
                child_st, lab = emit_ready(child_st)
                child = TreeNode(child_st.coin_prefix, lab, child_st.emitted, INTERNAL, node.prob * p)
                node.children.append(child)
                if child_st.done:
                    child.status = TERMINAL
                elif depth == depth_limit:
                    child.status = UNRESOLVED
                else:
                    nxt.append((child, child_st))
        if len(nxt) > cap:
            raise FrontierCapExceeded(f"frontier cap exceeded ({len(nxt)} > {cap} live nodes)")
        level = nxt
    return AlgorithmTree(root, coin.alphabet_size, target.alphabet_size, n, depth_limit)

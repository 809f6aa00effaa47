"""Markov-chain structure: stationary laws, entropy rates, irreducible classes,
and the spectral sup/inf/average entropies that feed the rate formulas."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .exactnum import ONE, ZERO, Real, check_pmf, rmax, rmin
from .process import IID, FiniteMixture, Markov, NamedBernoulli, ProcessSpec

WORK_BITS = 96


def _reach(adj: list[list[int]], src: int) -> set[int]:
    seen = {src}
    todo = [src]
    while todo:
        a = todo.pop()
        for b in adj[a]:
            if b not in seen:
                seen.add(b)
                todo.append(b)
    return seen


def _positive_graph(transition) -> list[list[int]]:
    return [[b for b, p in enumerate(row) if p > 0] for row in transition]


def communicating_classes(transition) -> list[list[int]]:
    """Strongly connected components of the positive-transition digraph,
    ordered by smallest member."""
    adj = _positive_graph(transition)
    reach = [_reach(adj, a) for a in range(len(adj))]
    classes, assigned = [], set()
    for a in range(len(adj)):
        if a in assigned:
            continue
        cls = sorted(b for b in reach[a] if a in reach[b])
        assigned.update(cls)
        classes.append(cls)
    return classes


def is_irreducible(transition) -> bool:
    return len(communicating_classes(transition)) == 1


def stationary_distribution(transition: Sequence[Sequence[Fraction]]) -> tuple[Fraction, ...]:
    """Exact ``pi`` with ``pi W = pi`` and ``sum(pi) = 1``.

    Gauss-Jordan elimination over the rationals on ``(W^T - I) pi = 0`` with
    the last equation replaced by normalisation.
    """
    W = [check_pmf(r, f"transition[{i}]") for i, r in enumerate(transition)]
    n = len(W)
    if any(len(r) != n for r in W):
        raise ValueError("transition matrix is not square")
    if not is_irreducible(W):
        raise ValueError("not irreducible")
    A = [[W[j][i] - (ONE if i == j else ZERO) for j in range(n)] + [ZERO] for i in range(n)]
    A[-1] = [ONE] * n + [ONE]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return tuple(A[i][n] for i in range(n))


def _h_terms(rows, weights) -> Real:
    """``sum_a weights[a] * sum_b rows[a][b] * log2(1/rows[a][b])`` in bits."""
    nterms = 0
    with mpmath.workprec(WORK_BITS):
        acc = mpmath.mpf(0)
        for w, row in zip(weights, rows):
            if not w:
                continue
            for p in row:
                if p:
                    pm = mpmath.mpf(p.numerator) / p.denominator
                    acc += mpmath.mpf(w.numerator) / w.denominator * pm * -mpmath.log(pm, 2)
                    nterms += 1
        v = float(acc)
    # working-precision error of each product/log is a few ulps at WORK_BITS,
    # then one rounding to double
    err = (8 * nterms + 8) * 2.0 ** (-WORK_BITS + 8) + abs(v) * 2.0**-52
    return Real(v, err)


def entropy_rate_markov(transition, stationary) -> Real:
    """``H^W = sum pi(a) W(b|a) log2 1/W(b|a)`` with an absolute error bound."""
    return _h_terms(transition, stationary)


def entropy(pmf) -> Real:
    return _h_terms([check_pmf(pmf)], [ONE])


@dataclass(frozen=True)
class ClassDecomposition:
    classes: tuple  # tuple of tuples of 0-based states
    weights: tuple  # exact w(xi)
    per_class_entropy: tuple  # Real

    def __post_init__(self):
        if sum(self.weights, ZERO) != 1:
            raise ValueError("class weights must sum to 1")


def decompose_classes(transition, initial) -> ClassDecomposition:
    """Split a chain with no transient states into its closed irreducible blocks."""
    W = [check_pmf(r, f"transition[{i}]") for i, r in enumerate(transition)]
    init = check_pmf(initial, "initial")
    classes = communicating_classes(W)
    for cls in classes:
        members = set(cls)
        for a in cls:
            if any(p > 0 and b not in members for b, p in enumerate(W[a])):
                raise ValueError("transient class unsupported")
    weights, ents = [], []
    for cls in classes:
        weights.append(sum((init[a] for a in cls), ZERO))
        block = [[W[a][b] for b in cls] for a in cls]
        ents.append(entropy_rate_markov(block, stationary_distribution(block)))
    return ClassDecomposition(tuple(tuple(c) for c in classes), tuple(weights), tuple(ents))


@dataclass(frozen=True)
class SpectrumSummary:
    sup_entropy: Real
    inf_entropy: Real
    avg_entropy: Real

    @property
    def one_point(self) -> bool:
        return self.sup_entropy.close_to(self.inf_entropy)


def spectrum_summary(decomp: ClassDecomposition) -> SpectrumSummary:
    live = [(w, h) for w, h in zip(decomp.weights, decomp.per_class_entropy) if w > 0]
    hs = [h for _, h in live]
    avg = Real(0.0)
    for w, h in live:
        avg = avg + h * w
    return SpectrumSummary(rmax(hs), rmin(hs), avg)


def summarize(model: ProcessSpec) -> SpectrumSummary:
    """Spectral sup/inf/average entropy rates for models where they are known
    in closed form: i.i.d., Markov chains without transient states, and finite
    mixtures of those."""
    return spectrum_summary(_as_decomposition(model))


def _as_decomposition(model) -> ClassDecomposition:
    if isinstance(model, IID):
        return ClassDecomposition(((0,),), (ONE,), (entropy(model.probs),))
    if isinstance(model, Markov):
        return decompose_classes(model.transition, model.initial)
    if isinstance(model, FiniteMixture):
        classes, weights, ents = [], [], []
        for w, comp in zip(model.weights, model.components):
            d = _as_decomposition(comp)
            classes.extend(d.classes)
            weights.extend(w * x for x in d.weights)
            ents.extend(d.per_class_entropy)
        return ClassDecomposition(tuple(classes), tuple(weights), tuple(ents))
    if isinstance(model, NamedBernoulli):
        raise ValueError("spectral entropies of the named Bernoulli families are not available in closed form")
    raise TypeError(type(model).__name__)

"""Independent reference computations used to cross-check the library.

Nothing here calls into the generator or the frontier DP.  Sequence
probabilities are computed from the raw model parameters, intervals from
lexicographic cumulative sums, and stopping from the definition: the
algorithm has stopped after ``m`` coin symbols exactly when the coin prefix
interval lies inside a single cell of the depth-``n`` target partition.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from exactrng.process import IID, FiniteMixture, Markov


def prob(model, seq) -> Fraction:
    if isinstance(model, IID):
        return math.prod((model.probs[x - 1] for x in seq), start=Fraction(1))
    if isinstance(model, Markov):
        if not seq:
            return Fraction(1)
        p = model.initial[seq[0] - 1]
        for a, b in zip(seq, seq[1:]):
            p *= model.transition[a - 1][b - 1]
        return p
    if isinstance(model, FiniteMixture):
        return sum((w * prob(c, seq) for w, c in zip(model.weights, model.components)), Fraction(0))
    raise TypeError(type(model).__name__)


def lex_intervals(model, length) -> dict:
    """``{seq: (lo, hi)}`` with sequences in lexicographic order."""
    out = {}
    acc = Fraction(0)
    for seq in itertools.product(range(1, model.alphabet_size + 1), repeat=length):
        p = prob(model, seq)
        out[seq] = (acc, acc + p)
        acc += p
    assert acc == 1
    return out


def brute_overflow(coin, target, n, m) -> Fraction:
    """``Pr(T > m)`` by enumerating every coin prefix of length ``m``."""
    cells = [(lo, hi) for lo, hi in lex_intervals(target, n).values() if hi > lo]
    total = Fraction(0)
    for s, (lo, hi) in lex_intervals(coin, m).items():
        if hi == lo:
            continue
        if not any(a <= lo and hi <= b for a, b in cells):
            total += hi - lo
    return total


def brute_law(coin, target, n, m) -> dict:
    """``Pr(phi(X^m) = y^n)`` by enumeration."""
    tgt = lex_intervals(target, n)
    law = {y: Fraction(0) for y in tgt}
    for lo, hi in lex_intervals(coin, m).values():
        if hi == lo:
            continue
        for y, (a, b) in tgt.items():
            if b > a and a <= lo and hi <= b:
                law[y] += hi - lo
                break
    return law


def stationary_numpy(W) -> np.ndarray:
    A = np.array([[float(x) for x in r] for r in W])
    vals, vecs = np.linalg.eig(A.T)
    v = np.real(vecs[:, np.argmin(np.abs(vals - 1))])
    return v / v.sum()


def h2(p: float) -> float:
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))

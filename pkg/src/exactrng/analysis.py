"""Exact stopping-time analysis of the interval algorithm.

The workhorse is a frontier dynamic program over coin prefixes.  After ``m``
coin symbols the algorithm has stopped on ``x^m`` exactly when ``I_{x^m}`` lies
inside one cell ``J_{y^n}`` of the depth-``n`` target partition, so the live
prefixes are those whose interval strictly straddles an interior boundary of
that partition.  Live intervals are disjoint and each holds a distinct
boundary, hence at most ``N**n - 1`` of them exist at any depth.

Geometric tail certificate
--------------------------
Every conditional coin probability is at most ``p_max``.  For a fixed target
boundary ``b``, the live interval straddling ``b`` at depth ``m`` (if any) has
length at most ``p_max**m``, so ``Pr(T > m) <= (N**n - 1) * p_max**m``.  Summing
the tail of that envelope bounds ``E[T]`` from above.

The frontier intervals are kept as unreduced integer triples
``(lo, hi, den)`` and target boundaries as integers over one common
denominator, so the inner loop is integer multiply-and-bisect.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .exactnum import ONE, ZERO, DyadicExp, Real, dyadic_cmp, log2_ratio, ratio
from .interval_alg import frontier_cap
from .process import NamedBernoulli, ProcessSpec, iter_spectra, min_entropy, sequence_law

TARGET_BUDGET = 1 << 20


@dataclass(frozen=True)
class TargetCells:
    """Depth-``n`` target partition restricted to its nonempty cells."""

    lows: tuple  # integer numerators over ``den``; strictly increasing, lows[0] == 0
    outputs: tuple  # y^n for each cell
    den: int
    law: dict

    @property
    def boundaries(self) -> tuple:
        return self.lows[1:]


def target_cells(target: ProcessSpec, n: int) -> TargetCells:
    if not target.rational:
        raise ValueError("exact analysis requires rational conditionals")
    if target.alphabet_size**n > TARGET_BUDGET:
        raise ValueError("target length exceeds exact-analysis budget")
    law = sequence_law(target, n)
    lows, outs = [], []
    acc = ZERO
    for y in sorted(law):
        p = law[y]
        if p:
            lows.append(acc)
            outs.append(y)
        acc += p
    den = math.lcm(*(q.denominator for q in lows)) if lows else 1
    return TargetCells(tuple(q.numerator * (den // q.denominator) for q in lows), tuple(outs), den, law)


@dataclass(frozen=True)
class ExactRun:
    coin: ProcessSpec
    target: ProcessSpec
    n: int
    m_max: int
    overflow: tuple  # Pr(T > m), m = 0..m_max
    stopped: tuple  # per depth m, {y^n: mass stopping exactly at depth m}
    frontier_sizes: tuple
    cells: TargetCells = field(repr=False)

    def law_at(self, m: int) -> dict[tuple, Fraction]:
        """``Pr(phi(X^m) = y^n)`` for every ``y^n`` (zeros included)."""
        if not 0 <= m <= self.m_max:
            raise ValueError("m outside the analysed range")
        law = {y: ZERO for y in self.cells.law}
        for d in range(m + 1):
            for y, p in self.stopped[d].items():
                law[y] += p
        return law


def _check_coin(coin: ProcessSpec):
    if not coin.rational:
        raise ValueError("exact analysis requires rational conditionals")


@lru_cache(maxsize=64)
def exact_run(coin: ProcessSpec, target: ProcessSpec, n: int, m_max: int) -> ExactRun:
    _check_coin(coin)
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    cells = target_cells(target, n)
    B = cells.boundaries
    lows = cells.lows
    Bt = cells.den
    limit = target.alphabet_size**n - 1
    cap = frontier_cap()

    overflow, stopped, sizes = [], [], []
    if B:
        frontier = [(0, 1, 1, coin.initial_state())]
        overflow.append(ONE)
        stopped.append({})
    else:
        frontier = []
        overflow.append(ZERO)
        stopped.append({cells.outputs[0]: ONE})
    sizes.append(len(frontier))

    for _ in range(m_max):
        nxt = []
        done: dict[tuple, dict[int, int]] = {}
        for lo, hi, den, st in frontier:
            cums, d = coin.int_pmf(st)
            w = hi - lo
            base = lo * d
            cden = den * d
            for k in range(len(cums) - 1):
                c0, c1 = cums[k], cums[k + 1]
                if c0 == c1:
                    continue
                clo = base + w * c0
                chi = base + w * c1
                # integer boundaries b straddled: clo/cden < b/Bt < chi/cden
                x = (clo * Bt) // cden
                i = bisect_right(B, x)
                if i < len(B) and B[i] * cden < chi * Bt:
                    nxt.append((clo, chi, cden, coin.step(st, k)))
                else:
                    y = cells.outputs[bisect_right(lows, x) - 1]
                    by_den = done.setdefault(y, {})
                    by_den[cden] = by_den.get(cden, 0) + (chi - clo)
        if len(nxt) > limit:
            raise AssertionError(f"frontier of {len(nxt)} exceeds N^n - 1 = {limit}")
        if len(nxt) > cap:
            raise RuntimeError("frontier cap exceeded")
        level = {y: sum((Fraction(v, dd) for dd, v in by.items()), ZERO) for y, by in done.items()}
        stopped.append(level)
        overflow.append(overflow[-1] - sum(level.values(), ZERO))
        sizes.append(len(nxt))
        frontier = nxt
    return ExactRun(coin, target, n, m_max, tuple(overflow), tuple(stopped), tuple(sizes), cells)


# --------------------------------------------------------------------------
# stopping profile and expectation


@dataclass(frozen=True)
class StoppingProfile:
    overflow: tuple
    n: int
    target_alphabet: int
    tail_rate: Fraction
    max_frontier: int

    @property
    def m_max(self) -> int:
        return len(self.overflow) - 1

    def tail_bound_at(self, m: int) -> Fraction:
        return (self.target_alphabet**self.n - 1) * self.tail_rate**m


def stopping_profile(coin: ProcessSpec, target: ProcessSpec, n: int, m_max: int) -> StoppingProfile:
    """Exact ``Pr(T > m)`` for ``m = 0..m_max``."""
    run = exact_run(coin, target, n, m_max)
    prof = StoppingProfile(run.overflow, n, target.alphabet_size, coin.max_conditional(), max(run.frontier_sizes))
    for m, v in enumerate(prof.overflow):
        assert 0 <= v <= 1
        assert m == 0 or v <= prof.overflow[m - 1]
        assert v <= prof.tail_bound_at(m), "geometric tail certificate violated"
    return prof


def expected_stopping_time(profile: StoppingProfile) -> tuple[Fraction, Fraction]:
    """Certified ``(lower, upper)`` bracket on ``E[T] = sum_m Pr(T > m)``."""
    lower = sum(profile.overflow, ZERO)
    if profile.overflow[-1] == 0:
        return lower, lower
    p = profile.tail_rate
    if p >= 1:
        raise ValueError("no geometric tail certificate (p_max = 1)")
    tail = (profile.target_alphabet**profile.n - 1) * p ** (profile.m_max + 1) / (1 - p)
    return lower, lower + tail


def output_law_at(coin: ProcessSpec, target: ProcessSpec, n: int, m: int) -> dict[tuple, Fraction]:
    return exact_run(coin, target, n, m).law_at(m)


# --------------------------------------------------------------------------
# validity


@dataclass
class ValidityReport:
    passed: Optional[bool]  # None: nothing certified either way
    eps: Optional[Fraction] = None
    deficit: Optional[Fraction] = None
    m_max: Optional[int] = None
    threshold: Optional[Fraction] = None
    m_star: Optional[int] = None  # first m with H_min(X^m) >= lambda
    witness: Optional[str] = None
    witness_mass: Optional[DyadicExp] = None
    detail: str = ""


def _threshold_bits(t: Fraction):
    """``-log2 t`` exactly when ``t`` is a power of two, else a Real."""
    t = ratio(t)
    if not 0 < t <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    if t.numerator == 1 and t.denominator & (t.denominator - 1) == 0:
        return Fraction(t.denominator.bit_length() - 1)
    v = -log2_ratio(t)
    return Real(v, 4 * math.ulp(v))


def _geq_bits(h: Fraction, lam) -> bool:
    if isinstance(lam, Fraction):
        return h >= lam
    gap = float(h) - lam.value
    if abs(gap) <= lam.err + 1e-12:
        raise ArithmeticError("threshold too close to the min-entropy to decide in floating point")
    return gap > 0


def quadratic_limit_upper() -> Fraction:
    """Rational ``U`` (denominator 1024) with ``sum_{i>=1} 1/i**2 < U``.

    Partial sum to ``K`` plus the integral tail bound ``1/K``, rounded up.
    """
    K = 2000
    s = math.fsum(1.0 / (i * i) for i in range(1, K + 1)) + 1.0 / K
    # fsum of K terms is within K ulps; pad generously before rounding up
    return Fraction(math.ceil((s + 1e-9) * 1024), 1024)


def validity_check(
    coin: ProcessSpec,
    target: ProcessSpec,
    n: int,
    m_max: int,
    eps: Fraction,
    threshold: Optional[Fraction] = None,
    m_search: int = 200_000,
) -> ValidityReport:
    """Check that the output law has (numerically) converged to ``P_{Y^n}``.

    Rational coins: exact deficit ``Pr(T > m_max)`` against ``eps``.  The
    named Bernoulli families cannot be run exactly; for them the report is
    about the diverging-min-entropy condition at the given threshold
    ``t = 2**(-lambda)``: ``S_m^c(lambda)`` is empty once ``H_min(X^m) >= lambda``,
    and for the quadratic family the all-ones prefix keeps
    ``P(S_m^c) >= 2**(-U)`` forever when ``t <= 2**(-U)``.
    """
    eps = ratio(eps)
    if isinstance(coin, NamedBernoulli):
        t = Fraction(1, 4) if threshold is None else ratio(threshold)
        lam = _threshold_bits(t)
        if coin.family == "quadratic":
            U = quadratic_limit_upper()
            w = DyadicExp(U)
            if dyadic_cmp(w, t) >= 0:
                return ValidityReport(
                    False, eps, threshold=t, witness="all-ones prefix",
                    witness_mass=w,
                    detail="all-ones prefix has P >= 2^-U > threshold for every m; "
                    "min-entropy stays below lambda, so no algorithm is valid",
                )
            return ValidityReport(None, eps, threshold=t, detail="no all-ones witness at this threshold")
        h = ZERO
        for m in range(1, m_search + 1):
            h += coin.exponent(m)
            if _geq_bits(h, lam):
                return ValidityReport(
                    True, eps, threshold=t, m_star=m,
                    detail="S_m^c(lambda) is empty from m_star on (min-entropy diverges)",
                )
        return ValidityReport(None, eps, threshold=t, detail=f"min-entropy below lambda up to m={m_search}")

    prof = stopping_profile(coin, target, n, m_max)
    deficit = prof.overflow[-1]
    rep = ValidityReport(deficit <= eps, eps, deficit, m_max)
    if threshold is not None and coin.independent:
        # S_m^c(lambda) is empty once H_min(X^m) = m * H_min(X_1) reaches lambda
        t = ratio(threshold)
        rep.threshold = t
        lam = _threshold_bits(t)
        h1 = min_entropy(coin, 1)
        if isinstance(h1, Fraction) and isinstance(lam, Fraction):
            rep.m_star = math.ceil(lam / h1) if h1 else None
        elif float(h1):
            rep.m_star = math.ceil(float(lam) / float(h1))
    return rep


# --------------------------------------------------------------------------
# spectrum masses


@dataclass(frozen=True)
class SpectrumMass:
    m: int
    threshold: Fraction
    mass_below: Fraction  # P(P(seq) <= threshold)
    mass_at_least: Fraction  # P(P(seq) >= threshold)
    lambda_bits: Real


def spectrum_table(model: ProcessSpec, length: int, budget: int = 1 << 20) -> dict[Fraction, Fraction]:
    """Law of ``P(X^length)``: ``{probability: total mass}``."""
    spec = None
    for spec in iter_spectra(model, length, budget):
        pass
    return spec


def masses_from_table(table: dict, threshold: Fraction) -> tuple[Fraction, Fraction]:
    below = sum((w for p, w in table.items() if p <= threshold), ZERO)
    above = sum((w for p, w in table.items() if p >= threshold), ZERO)
    return below, above


def spectrum_mass(model: ProcessSpec, length: int, threshold: Fraction, budget: int = 1 << 20) -> SpectrumMass:
    t = ratio(threshold)
    if not 0 < t <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    below, above = masses_from_table(spectrum_table(model, length, budget), t)
    lam = _threshold_bits(t)
    return SpectrumMass(length, t, below, above, lam if isinstance(lam, Real) else Real(float(lam)))


# --------------------------------------------------------------------------
# fixed-length truncation


@dataclass(frozen=True)
class FLReport:
    m: int
    fallback: tuple
    approx_law: dict
    delta: Fraction
    overflow_at_m: Fraction


def variational_distance(p: dict, q: dict) -> Fraction:
    keys = set(p) | set(q)
    return sum((abs(p.get(k, ZERO) - q.get(k, ZERO)) for k in keys), ZERO) / 2


def fl_truncate(coin: ProcessSpec, target: ProcessSpec, n: int, m: int, fallback) -> FLReport:
    """Stop after ``m`` coin symbols and emit ``fallback`` if still running."""
    fallback = tuple(fallback)
    if len(fallback) != n or not all(1 <= y <= target.alphabet_size for y in fallback):
        raise ValueError(f"fallback must be a length-{n} sequence over 1..{target.alphabet_size}")
    run = exact_run(coin, target, n, m)
    law = run.law_at(m)
    law[fallback] = law.get(fallback, ZERO) + run.overflow[m]
    delta = variational_distance(law, run.cells.law)
    assert delta <= run.overflow[m]
    return FLReport(m, fallback, law, delta, run.overflow[m])

"""Seeded Monte Carlo harness.

Randomness
----------
Trial ``i`` of a run with seed ``s`` reads bits from numpy's Philox-4x64
counter-based generator keyed with ``s mod 2**128`` and started at counter
``i << 128``.  Each trial therefore owns a disjoint block of ``2**128``
counter values, and its bits do not depend on how trials are scheduled.
64-bit outputs are consumed most-significant bit first.

Coin symbols are drawn exactly: a uniform variate is revealed one bit at a
time until its dyadic interval fits inside one cell of the cumulative pmf.

The generator inside a trial mirrors :mod:`exactrng.interval_alg` with integer
arithmetic.  For the named Bernoulli coins, whose interval endpoints are
irrational, endpoints are carried as integer brackets on a ``2**-prec`` grid
and every containment decision is certified against the bracket; an
undecidable comparison raises :class:`PrecisionError` rather than guess.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .exactnum import DyadicComplement, DyadicExp, dyadic_bracket, log2_ratio, ratio
from .process import NamedBernoulli, ProcessSpec, _walk

MASK128 = (1 << 128) - 1


class PrecisionError(ArithmeticError):
    pass


class BitStream:
    """Uniform random bits for one trial."""

    def __init__(self, seed: int, index: int = 0):
        self._bg = np.random.Philox(key=seed & MASK128, counter=index << 128)
        self._word = 0
        self._left = 0
        self.used = 0

    def bit(self) -> int:
        if not self._left:
            self._word = int(self._bg.random_raw())
            self._left = 64
        self._left -= 1
        self.used += 1
        return (self._word >> self._left) & 1


class ListBits:
    """Replays a fixed bit sequence (for tests and transcripts)."""

    def __init__(self, bits: Iterable[int]):
        self._it = iter(bits)
        self.used = 0

    def bit(self) -> int:
        self.used += 1
        return next(self._it)


def _sample_cum(cums: Sequence[int], d: int, bits) -> int:
    # U in [u / 2**k, (u+1) / 2**k); symbol k' when cums[k'] <= U*d and (U + 2**-k)*d <= cums[k'+1]
    u, k = 0, 0
    last = len(cums) - 1
    while True:
        lo = u * d
        hi = (u + 1) * d
        # first cell whose upper cumulative exceeds lo / 2**k
        for j in range(last):
            if cums[j + 1] << k > lo:
                break
        if hi <= cums[j + 1] << k:
            return j
        u = 2 * u + bits.bit()
        k += 1


def _sample_dyadic(head: DyadicExp, bits) -> int:
    """0 with probability ``2**-r``, else 1, exactly."""
    prec = 64
    cl, cu = dyadic_bracket(head, prec)
    u, k = 0, 0
    while True:
        # compare [u, u+1) / 2**k against [cl, cu] / 2**prec
        if k <= prec:
            a, b, cl2, cu2 = u << (prec - k), (u + 1) << (prec - k), cl, cu
        else:
            a, b, cl2, cu2 = u, u + 1, cl << (k - prec), cu << (k - prec)
        if b <= cl2:
            return 0
        if a >= cu2:
            return 1
        if k >= prec - 8:
            prec *= 2
            cl, cu = dyadic_bracket(head, prec)
            continue
        u = 2 * u + bits.bit()
        k += 1


def sample_index(pmf, bits) -> int:
    """Exact draw from ``pmf`` (0-based result)."""
    if isinstance(pmf[0], DyadicExp):
        return _sample_dyadic(pmf[0], bits)
    from .process import _int_cum

    cums, d = _int_cum([ratio(p) for p in pmf])
    return _sample_cum(cums, d, bits)


def sample_symbol(model: ProcessSpec, prefix: Sequence[int], bits) -> int:
    """Draw the next symbol (1-based) of ``model`` given ``prefix``."""
    st = _walk(model, prefix)
    if model.rational:
        cums, d = model.int_pmf(st)
        return _sample_cum(cums, d, bits) + 1
    return _sample_dyadic(model.pmf(st)[0], bits) + 1


# --------------------------------------------------------------------------
# one trial


def _emit(target, tst, blo, bhi, bden, alo, ahi, aden, emitted, n):
    """Emit while ``[alo, ahi)/aden`` fits in a child of ``[blo, bhi)/bden``."""
    while len(emitted) < n:
        cums, d = target.int_pmf(tst)
        w = bhi - blo
        base = blo * d
        nd = bden * d
        xl = alo * nd
        xh = ahi * nd
        y = -1
        for k in range(len(cums) - 1):
            if cums[k] == cums[k + 1]:
                continue
            lo_k = (base + w * cums[k]) * aden
            if lo_k > xl:
                break
            hi_k = (base + w * cums[k + 1]) * aden
            if xl < hi_k:
                if xh <= hi_k:
                    y = k
                break
        if y < 0:
            break
        emitted.append(y + 1)
        blo, bhi, bden = base + w * cums[y], base + w * cums[y + 1], nd
        tst = target.step(tst, y)
    return tst, blo, bhi, bden


def _trial_rational(coin, target, n, m_cap, bits):
    cst, tst = coin.initial_state(), target.initial_state()
    alo, ahi, aden = 0, 1, 1
    blo, bhi, bden = 0, 1, 1
    emitted: list = []
    T = 0
    while True:
        tst, blo, bhi, bden = _emit(target, tst, blo, bhi, bden, alo, ahi, aden, emitted, n)
        if len(emitted) == n:
            return tuple(emitted), T
        if T >= m_cap:
            return None, T
        cums, d = coin.int_pmf(cst)
        k = _sample_cum(cums, d, bits)
        w = ahi - alo
        alo, ahi, aden = alo * d + w * cums[k], alo * d + w * cums[k + 1], aden * d
        cst = coin.step(cst, k)
        T += 1


def _trial_named(coin: NamedBernoulli, target, n, m_cap, bits, prec=256):
    one = 1 << prec
    # endpoint brackets over 2**prec
    lo = (0, 0)
    hi = (one, one)
    tst = target.initial_state()
    blo, bhi, bden = 0, 1, 1
    emitted: list = []
    T = 0

    def cmp(e, num, den):
        # sign(e - num/den) for bracket e; 0 means undecided
        a, b = e[0] * den, e[1] * den
        v = num << prec
        if a > v:
            return 1
        if b < v:
            return -1
        if a == b == v:
            return 0
        raise PrecisionError("containment undecidable at working precision")

    while True:
        while len(emitted) < n:
            cums, d = target.int_pmf(tst)
            w = bhi - blo
            base = blo * d
            nd = bden * d
            y = -1
            for k in range(len(cums) - 1):
                if cums[k] == cums[k + 1]:
                    continue
                if cmp(lo, base + w * cums[k], nd) < 0:
                    break
                if cmp(lo, base + w * cums[k + 1], nd) < 0:
                    if cmp(hi, base + w * cums[k + 1], nd) <= 0:
                        y = k
                    break
            if y < 0:
                break
            emitted.append(y + 1)
            blo, bhi, bden = base + w * cums[y], base + w * cums[y + 1], nd
            tst = target.step(tst, y)
        if len(emitted) == n:
            return tuple(emitted), T
        if T >= m_cap:
            return None, T
        head = DyadicExp(coin.exponent(T + 1))
        k = _sample_dyadic(head, bits)
        cl, cu = dyadic_bracket(head, prec)
        wl, wu = hi[0] - lo[1], hi[1] - lo[0]
        if wl <= 0:
            raise PrecisionError("coin interval narrower than its bracket")
        split = (lo[0] + (wl * cl >> prec), lo[1] + -((-wu * cu) >> prec))
        if k == 0:
            hi = split
        else:
            lo = split
        T += 1


def run_one(coin, target, n, m_cap, seed, index):
    bits = BitStream(seed, index)
    if coin.rational:
        return _trial_rational(coin, target, n, m_cap, bits)
    return _trial_named(coin, target, n, m_cap, bits)


# --------------------------------------------------------------------------
# many trials


@dataclass(frozen=True)
class SimConfig:
    seed: int
    trials: int
    n: int
    m_cap: Optional[int] = None
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.m_cap is not None and self.m_cap < 1:
            raise ValueError("m_cap must be >= 1")

    @property
    def cap(self) -> int:
        return self.m_cap if self.m_cap is not None else 10**6 * max(self.n, 1)


@dataclass
class SimResult:
    seed: int
    trials: int
    n: int
    m_cap: int
    t_counts: dict  # stopping time -> count, completed trials only
    empirical_law: dict  # "y1,y2,..." -> count
    truncated_trials: int
    overflow_counts: list = field(default_factory=list)  # #{T > m}, m = 0..max T

    @property
    def completed(self) -> int:
        return self.trials - self.truncated_trials

    @property
    def mean_T(self) -> Optional[float]:
        if not self.completed:
            return None
        return sum(t * c for t, c in self.t_counts.items()) / self.completed

    @property
    def truncation_flag(self) -> bool:
        return self.truncated_trials / self.trials > 1e-4

    def overflow_freq(self, m: int) -> float:
        if m < len(self.overflow_counts):
            return self.overflow_counts[m] / self.trials
        return self.truncated_trials / self.trials

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "n": self.n,
            "m_cap": self.m_cap,
            "mean_T": self.mean_T,
            "mean_T_per_symbol": None if self.mean_T is None or not self.n else self.mean_T / self.n,
            "truncated_trials": self.truncated_trials,
            "truncation_flag": self.truncation_flag,
            "t_counts": {str(t): c for t, c in sorted(self.t_counts.items())},
            "overflow_counts": list(self.overflow_counts),
            "empirical_law": dict(sorted(self.empirical_law.items())),
        }


def _chunk(args):
    coin, target, n, cap, seed, a, b = args
    return [run_one(coin, target, n, cap, seed, i) for i in range(a, b)]


def run_trials(coin: ProcessSpec, target: ProcessSpec, cfg: SimConfig) -> SimResult:
    cap = cfg.cap
    if cfg.workers > 1:
        step = -(-cfg.trials // (4 * cfg.workers))
        jobs = [(coin, target, cfg.n, cap, cfg.seed, a, min(a + step, cfg.trials)) for a in range(0, cfg.trials, step)]
        with ProcessPoolExecutor(cfg.workers) as ex:
            records = [r for part in ex.map(_chunk, jobs) for r in part]
    else:
        records = _chunk((coin, target, cfg.n, cap, cfg.seed, 0, cfg.trials))

    t_counts: Counter = Counter()
    law: Counter = Counter()
    truncated = 0
    for out, T in records:
        if out is None:
            truncated += 1
        else:
            t_counts[T] += 1
            law[",".join(map(str, out))] += 1
    top = max(t_counts, default=0)
    overflow = []
    alive = cfg.trials
    for m in range(top + 1):
        alive -= t_counts.get(m, 0)
        overflow.append(alive)
    return SimResult(cfg.seed, cfg.trials, cfg.n, cap, dict(t_counts), dict(law), truncated, overflow)


# --------------------------------------------------------------------------
# empirical spectrum


@dataclass
class EmpiricalSpectrum:
    length: int
    values: np.ndarray  # (1/length) log2 1/P(seq), one per trial, trial order
    edges: np.ndarray
    counts: np.ndarray

    def fraction_below(self, lam: float) -> float:
        return float(np.mean(self.values <= lam))

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "trials": int(self.values.size),
            "mean_bits": float(self.values.mean()),
            "edges": [float(e) for e in self.edges],
            "counts": [int(c) for c in self.counts],
        }


def _sample_sequence_info(model, length, bits) -> float:
    st = model.initial_state()
    if model.rational:
        num, den = 1, 1
        for _ in range(length):
            cums, d = model.int_pmf(st)
            k = _sample_cum(cums, d, bits)
            num *= cums[k + 1] - cums[k]
            den *= d
            st = model.step(st, k)
        return -log2_ratio(Fraction(num, den))
    info = 0.0
    for _ in range(length):
        pmf = model.pmf(st)
        k = _sample_dyadic(pmf[0], bits)
        p = pmf[k]
        info += float(p.exponent) if isinstance(p, DyadicExp) else -math.log2(float(p))
        st = model.step(st, k)
    return info


def empirical_spectrum(model: ProcessSpec, length: int, trials: int, seed: int, bins: int = 50) -> EmpiricalSpectrum:
    """Sample ``trials`` sequences and histogram their normalised self-information."""
    if length < 1:
        raise ValueError("length must be >= 1")
    vals = np.array([_sample_sequence_info(model, length, BitStream(seed, i)) / length for i in range(trials)])
    hi = max(float(vals.max()), 1e-12)
    counts, edges = np.histogram(vals, bins=bins, range=(0.0, hi * (1 + 1e-9)))
    return EmpiricalSpectrum(length, vals, edges, counts)


__all__ = [
    "BitStream",
    "ListBits",
    "PrecisionError",
    "SimConfig",
    "SimResult",
    "EmpiricalSpectrum",
    "sample_index",
    "sample_symbol",
    "run_trials",
    "empirical_spectrum",
    "DyadicComplement",
]
